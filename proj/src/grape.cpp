#include "donorcnot/grape.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <numbers>
#include <stdexcept>
#include <thread>

#include "donorcnot/random.hpp"
#include "donorcnot/spectra.hpp"

namespace donorcnot {

namespace {

using Mat8 = Eigen::Matrix<Complex, 8, 8>;
using Vec8 = Eigen::Matrix<double, 8, 1>;
using Vec8c = Eigen::Matrix<Complex, 8, 1>;

constexpr double kTwoPi = 2.0 * std::numbers::pi;
constexpr double kFiniteDifferenceStep = 1e-6;

// Fourth-order commutator-free Magnus step: two exponentials built from the
// Hamiltonian sampled at the Gauss-Legendre nodes of the micro-step.
const double kNodeA = 0.5 - std::sqrt(3.0) / 6.0;
const double kNodeB = 0.5 + std::sqrt(3.0) / 6.0;
const double kWeightSmall = 0.25 - std::sqrt(3.0) / 6.0;
const double kWeightLarge = 0.25 + std::sqrt(3.0) / 6.0;

// (e^{iy} - 1) / (iy), evaluated without cancellation.
Complex phi1(double y) {
  if (std::abs(y) < 1e-8) return {1.0, 0.5 * y};
  const double s = std::sin(0.5 * y);
  return {std::sin(y) / y, 2.0 * s * s / y};
}

// Cartesian controls: u = a cos(phase), v = a sin(phase).
struct Quadratures {
  Eigen::MatrixXd u;
  Eigen::MatrixXd v;
};

Quadratures to_quadratures(const PulseSequence& p) {
  return {(p.amplitudes.array() * p.phases.array().cos()).matrix(),
          (p.amplitudes.array() * p.phases.array().sin()).matrix()};
}

void from_quadratures(const Quadratures& q, PulseSequence& p) {
  for (Eigen::Index k = 0; k < q.u.rows(); ++k) {
    for (Eigen::Index s = 0; s < q.u.cols(); ++s) {
      const double a = std::hypot(q.u(k, s), q.v(k, s));
      p.amplitudes(k, s) = a;
      // Keep the previous phase when the amplitude collapses to zero.
      if (a > 0.0) p.phases(k, s) = std::atan2(q.v(k, s), q.u(k, s));
    }
  }
}

// Time-ordered product of micro-step exponentials for a fixed drift, time
// grid and carrier set; the controls vary between calls.
class PulseEngine {
 public:
  PulseEngine(const ComplexMatrix& drift, std::span<const double> carriers, int n_segments, double segment_duration,
              int micro_steps)
      : n_carriers_(static_cast<int>(carriers.size())),
        n_segments_(n_segments),
        micro_steps_(micro_steps),
        h_(segment_duration / micro_steps),
        half_drift_(0.5 * drift),
        x_(electron_total(PauliAxis::X).matrix()),
        y_(electron_total(PauliAxis::Y).matrix()) {
    // Carrier phase factors at every Gauss node, indexed [node][carrier].
    const int nodes = 2 * n_segments_ * micro_steps_;
    cos_.resize(n_carriers_, nodes);
    sin_.resize(n_carriers_, nodes);
    for (int s = 0; s < n_segments_; ++s) {
      for (int m = 0; m < micro_steps_; ++m) {
        const double t0 = s * segment_duration + m * h_;
        for (int node = 0; node < 2; ++node) {
          const double t = t0 + (node == 0 ? kNodeA : kNodeB) * h_;
          const int col = node_index(s, m, node);
          for (int k = 0; k < n_carriers_; ++k) {
            const double w = kTwoPi * carriers[k] * t;
            cos_(k, col) = std::cos(w);
            sin_(k, col) = std::sin(w);
          }
        }
      }
    }
  }

  int exponential_count() const { return 2 * n_segments_ * micro_steps_; }

  /// Propagator; when `keep` is set the per-exponential data needed by
  /// backward() is retained.
  Mat8 forward(const Quadratures& q, bool keep) {
    if (keep) steps_.resize(exponential_count());
    Mat8 u = Mat8::Identity();
    Eigen::SelfAdjointEigenSolver<Mat8> solver;
    for (int s = 0; s < n_segments_; ++s) {
      for (int m = 0; m < micro_steps_; ++m) {
        const auto [xa, ya] = field(q, s, node_index(s, m, 0));
        const auto [xb, yb] = field(q, s, node_index(s, m, 1));
        for (int e = 0; e < 2; ++e) {
          // First exponential weights the early node more heavily.
          const double wa = e == 0 ? kWeightLarge : kWeightSmall;
          const double wb = e == 0 ? kWeightSmall : kWeightLarge;
          const Mat8 g = half_drift_ + (wa * xa + wb * xb) * x_ + (wa * ya + wb * yb) * y_;
          solver.compute(g);
          const Vec8& lambda = solver.eigenvalues();
          const Mat8& v = solver.eigenvectors();
          Vec8c phases;
          for (int i = 0; i < 8; ++i) phases(i) = std::polar(1.0, -kTwoPi * h_ * lambda(i));
          const Mat8 step = v * phases.asDiagonal() * v.adjoint();
          if (keep) {
            auto& st = steps_[exp_index(s, m, e)];
            st.before = u;
            st.lambda = lambda;
            st.phases = phases;
            st.v = v;
            st.step = step;
          }
          u = step * u;
        }
      }
    }
    return u;
  }

  /// d Tr(target^dagger U) / d(u, v) for the controls of the last forward().
  void backward(const Mat8& target_adjoint, Eigen::MatrixXcd& du, Eigen::MatrixXcd& dv) const {
    du = Eigen::MatrixXcd::Zero(n_carriers_, n_segments_);
    dv = Eigen::MatrixXcd::Zero(n_carriers_, n_segments_);
    const double theta = kTwoPi * h_;
    Mat8 after = target_adjoint;  // target^dagger times all later exponentials
    for (int s = n_segments_ - 1; s >= 0; --s) {
      for (int m = micro_steps_ - 1; m >= 0; --m) {
        Complex tx[2] = {0.0, 0.0};  // dTr / d field at node A, B
        Complex ty[2] = {0.0, 0.0};
        for (int e = 1; e >= 0; --e) {
          const auto& st = steps_[exp_index(s, m, e)];
          // Tr(after dU before) = Tr(Gamma dG) with Gamma = V (W^T o Phi)^T V^dagger,
          // W = V^dagger before after V (Daleckii-Krein derivative of exp).
          const Mat8 w = st.v.adjoint() * (st.before * after) * st.v;
          Mat8 mt;
          for (int a = 0; a < 8; ++a) {
            for (int b = 0; b < 8; ++b) {
              const Complex phi = st.phases(b) * Complex(0.0, -theta) * phi1(-theta * (st.lambda(a) - st.lambda(b)));
              mt(b, a) = w(b, a) * phi;
            }
          }
          const Mat8 gamma = st.v * mt * st.v.adjoint();
          const Complex gx = (gamma.cwiseProduct(x_.transpose())).sum();
          const Complex gy = (gamma.cwiseProduct(y_.transpose())).sum();
          const double wa = e == 0 ? kWeightLarge : kWeightSmall;
          const double wb = e == 0 ? kWeightSmall : kWeightLarge;
          tx[0] += wa * gx;
          tx[1] += wb * gx;
          ty[0] += wa * gy;
          ty[1] += wb * gy;
          after = after * st.step;
        }
        for (int node = 0; node < 2; ++node) {
          const int col = node_index(s, m, node);
          for (int k = 0; k < n_carriers_; ++k) {
            const double c = cos_(k, col);
            const double sn = sin_(k, col);
            // x-field: u cos - v sin; y-field: u sin + v cos
            du(k, s) += tx[node] * c + ty[node] * sn;
            dv(k, s) += -tx[node] * sn + ty[node] * c;
          }
        }
      }
    }
  }

 private:
  struct Step {
    Mat8 before;
    Mat8 v;
    Mat8 step;
    Vec8 lambda;
    Vec8c phases;
  };

  int node_index(int s, int m, int node) const { return 2 * (s * micro_steps_ + m) + node; }
  int exp_index(int s, int m, int e) const { return 2 * (s * micro_steps_ + m) + e; }

  std::pair<double, double> field(const Quadratures& q, int s, int col) const {
    double fx = 0.0;
    double fy = 0.0;
    for (int k = 0; k < n_carriers_; ++k) {
      const double c = cos_(k, col);
      const double sn = sin_(k, col);
      fx += q.u(k, s) * c - q.v(k, s) * sn;
      fy += q.u(k, s) * sn + q.v(k, s) * c;
    }
    return {fx, fy};
  }

  int n_carriers_;
  int n_segments_;
  int micro_steps_;
  double h_;
  Mat8 half_drift_;
  Mat8 x_;
  Mat8 y_;
  Eigen::MatrixXd cos_;
  Eigen::MatrixXd sin_;
  std::vector<Step> steps_;
};

void check_drift(const HermitianOperator& drift) {
  if (drift.dim() != kElectronDim) throw std::invalid_argument("pulse propagation expects an 8x8 drift");
}

void check_micro_steps(int micro_steps) {
  if (micro_steps < 1) throw std::invalid_argument("micro_steps_per_segment must be positive");
}

double fidelity_of(const Mat8& u, const Mat8& target_adjoint) { return std::abs((target_adjoint * u).trace()) / 8.0; }

// Fidelity and its Cartesian gradient from one forward/backward pass.
struct CartesianGradient {
  double fidelity = 0.0;
  Eigen::MatrixXd du;
  Eigen::MatrixXd dv;
};

CartesianGradient cartesian_gradient(PulseEngine& engine, const Quadratures& q, const Mat8& target_adjoint,
                                     bool forward_done = false, const Mat8* u_done = nullptr) {
  const Mat8 u = forward_done ? *u_done : engine.forward(q, true);
  const Complex g = (target_adjoint * u).trace();
  CartesianGradient out;
  out.fidelity = std::abs(g) / 8.0;
  Eigen::MatrixXcd du;
  Eigen::MatrixXcd dv;
  engine.backward(target_adjoint, du, dv);
  // dF = Re(conj(g) dg) / (8 |g|)
  const double norm = std::abs(g) > 0.0 ? 1.0 / (8.0 * std::abs(g)) : 0.0;
  out.du = ((std::conj(g) * du.array()).real() * norm).matrix();
  out.dv = ((std::conj(g) * dv.array()).real() * norm).matrix();
  return out;
}

CartesianGradient cartesian_fd_gradient(PulseEngine& engine, const Quadratures& q, const Mat8& target_adjoint) {
  CartesianGradient out;
  out.fidelity = fidelity_of(engine.forward(q, false), target_adjoint);
  out.du.resize(q.u.rows(), q.u.cols());
  out.dv.resize(q.u.rows(), q.u.cols());
  Quadratures probe = q;
  for (Eigen::Index k = 0; k < q.u.rows(); ++k) {
    for (Eigen::Index s = 0; s < q.u.cols(); ++s) {
      for (int which = 0; which < 2; ++which) {
        double& x = which == 0 ? probe.u(k, s) : probe.v(k, s);
        const double x0 = x;
        x = x0 + kFiniteDifferenceStep;
        const double fp = fidelity_of(engine.forward(probe, false), target_adjoint);
        x = x0 - kFiniteDifferenceStep;
        const double fm = fidelity_of(engine.forward(probe, false), target_adjoint);
        x = x0;
        (which == 0 ? out.du : out.dv)(k, s) = (fp - fm) / (2.0 * kFiniteDifferenceStep);
      }
    }
  }
  return out;
}

// Projects each (u, v) control onto the disk of radius max_amplitude.
void clip(Quadratures& q, double max_amplitude) {
  for (Eigen::Index k = 0; k < q.u.rows(); ++k) {
    for (Eigen::Index s = 0; s < q.u.cols(); ++s) {
      const double a = std::hypot(q.u(k, s), q.v(k, s));
      if (a > max_amplitude) {
        q.u(k, s) *= max_amplitude / a;
        q.v(k, s) *= max_amplitude / a;
      }
    }
  }
}

}  // namespace

// ---------------------------------------------------------------------------
// PulseSequence

PulseSequence PulseSequence::zeros(std::vector<double> carriers_mhz, int n_segments, double segment_duration_us,
                                   double max_amplitude_mhz) {
  PulseSequence p;
  p.n_segments = n_segments;
  p.segment_duration_us = segment_duration_us;
  p.max_amplitude_mhz = max_amplitude_mhz;
  const auto k = static_cast<Eigen::Index>(carriers_mhz.size());
  p.carriers_mhz = std::move(carriers_mhz);
  p.amplitudes = Eigen::MatrixXd::Zero(k, n_segments);
  p.phases = Eigen::MatrixXd::Zero(k, n_segments);
  p.validate();
  return p;
}

void PulseSequence::validate() const {
  auto fail = [](const std::string& msg) { throw std::invalid_argument("pulse: " + msg); };
  if (n_segments < 1) fail("needs at least one segment");
  if (!(segment_duration_us > 0.0)) fail("segment duration must be positive");
  if (!(max_amplitude_mhz > 0.0)) fail("max amplitude must be positive");
  const auto k = static_cast<Eigen::Index>(carriers_mhz.size());
  if (amplitudes.rows() != k || amplitudes.cols() != n_segments || phases.rows() != k || phases.cols() != n_segments) {
    fail("control arrays must be carriers x segments");
  }
  for (double f : carriers_mhz) {
    if (!std::isfinite(f)) fail("carrier frequencies must be finite");
  }
  if (k > 0) {
    if (!(amplitudes.minCoeff() >= 0.0)) fail("amplitudes must be non-negative");
    if (!(amplitudes.maxCoeff() <= max_amplitude_mhz * (1.0 + 1e-12))) fail("amplitude exceeds the carrier bound");
    if (!phases.allFinite()) fail("phases must be finite");
  }
}

void to_json(nlohmann::json& j, const PulseSequence& p) {
  auto rows = [](const Eigen::MatrixXd& m) {
    std::vector<std::vector<double>> out(m.rows(), std::vector<double>(m.cols()));
    for (Eigen::Index r = 0; r < m.rows(); ++r) {
      for (Eigen::Index c = 0; c < m.cols(); ++c) out[r][c] = m(r, c);
    }
    return out;
  };
  j = nlohmann::json{{"carriers_mhz", p.carriers_mhz},
                     {"n_segments", p.n_segments},
                     {"segment_duration_us", p.segment_duration_us},
                     {"max_amplitude_mhz", p.max_amplitude_mhz},
                     {"amplitudes", rows(p.amplitudes)},
                     {"phases", rows(p.phases)}};
}

void from_json(const nlohmann::json& j, PulseSequence& p) {
  PulseSequence out;
  out.carriers_mhz = j.at("carriers_mhz").get<std::vector<double>>();
  out.segment_duration_us = j.at("segment_duration_us").get<double>();
  out.max_amplitude_mhz = j.value("max_amplitude_mhz", out.max_amplitude_mhz);
  const auto amps = j.at("amplitudes").get<std::vector<std::vector<double>>>();
  const auto phases = j.at("phases").get<std::vector<std::vector<double>>>();
  const auto k = static_cast<Eigen::Index>(out.carriers_mhz.size());
  if (static_cast<Eigen::Index>(amps.size()) != k || static_cast<Eigen::Index>(phases.size()) != k) {
    throw std::invalid_argument("pulse: one amplitude and phase row per carrier required");
  }
  out.n_segments = k > 0 ? static_cast<int>(amps[0].size()) : j.value("n_segments", 0);
  out.amplitudes.resize(k, out.n_segments);
  out.phases.resize(k, out.n_segments);
  for (Eigen::Index r = 0; r < k; ++r) {
    if (static_cast<int>(amps[r].size()) != out.n_segments || static_cast<int>(phases[r].size()) != out.n_segments) {
      throw std::invalid_argument("pulse: ragged control arrays");
    }
    for (int c = 0; c < out.n_segments; ++c) {
      out.amplitudes(r, c) = amps[r][c];
      out.phases(r, c) = phases[r][c];
    }
  }
  out.validate();
  p = std::move(out);
}

// ---------------------------------------------------------------------------
// GrapeConfig / reports

std::string to_string(GradientMode m) { return m == GradientMode::Analytic ? "analytic" : "finite_difference"; }

GradientMode parse_gradient_mode(const std::string& s) {
  if (s == "analytic") return GradientMode::Analytic;
  if (s == "finite_difference") return GradientMode::FiniteDifference;
  throw std::invalid_argument("unknown gradient mode '" + s + "'");
}

void GrapeConfig::validate() const {
  auto fail = [](const std::string& msg) { throw std::invalid_argument("grape config: " + msg); };
  if (n_segments < 1) fail("n_segments must be positive");
  if (!(total_time_us > 0.0)) fail("total_time_us must be positive");
  if (!(max_amplitude_mhz > 0.0)) fail("max_amplitude_mhz must be positive");
  if (!(learning_rate > 0.0)) fail("learning_rate must be positive");
  if (max_iterations < 0) fail("max_iterations must be non-negative");
  if (!(fidelity_target >= 0.0 && fidelity_target <= 1.0)) fail("fidelity_target must lie in [0, 1]");
  if (micro_steps_per_segment < 1) fail("micro_steps_per_segment must be positive");
}

void to_json(nlohmann::json& j, const GrapeConfig& c) {
  j = nlohmann::json{{"n_segments", c.n_segments},
                     {"total_time_us", c.total_time_us},
                     {"max_amplitude_mhz", c.max_amplitude_mhz},
                     {"learning_rate", c.learning_rate},
                     {"max_iterations", c.max_iterations},
                     {"fidelity_target", c.fidelity_target},
                     {"micro_steps_per_segment", c.micro_steps_per_segment},
                     {"gradient_mode", to_string(c.gradient_mode)},
                     {"seed", c.seed}};
}

void from_json(const nlohmann::json& j, GrapeConfig& c) {
  GrapeConfig out;
  out.n_segments = j.value("n_segments", out.n_segments);
  out.total_time_us = j.value("total_time_us", out.total_time_us);
  out.max_amplitude_mhz = j.value("max_amplitude_mhz", out.max_amplitude_mhz);
  out.learning_rate = j.value("learning_rate", out.learning_rate);
  out.max_iterations = j.value("max_iterations", out.max_iterations);
  out.fidelity_target = j.value("fidelity_target", out.fidelity_target);
  out.micro_steps_per_segment = j.value("micro_steps_per_segment", out.micro_steps_per_segment);
  out.gradient_mode = parse_gradient_mode(j.value("gradient_mode", to_string(out.gradient_mode)));
  out.seed = j.value("seed", out.seed);
  out.validate();
  c = out;
}

bool FidelityReport::same_result(const FidelityReport& o) const {
  return final_fidelity == o.final_fidelity && iterations == o.iterations && converged == o.converged &&
         j_tc_mhz == o.j_tc_mhz && j_cc_mhz == o.j_cc_mhz;
}

// ---------------------------------------------------------------------------
// Operations

Unitary target_cnot() {
  ComplexMatrix u = ComplexMatrix::Zero(kElectronDim, kElectronDim);
  const int target_bit = 1 << (site::kElectronCount - 1 - site::kTarget);
  const int control_bit = 1 << (site::kElectronCount - 1 - site::kControl);
  for (int col = 0; col < kElectronDim; ++col) {
    const int row = (col & control_bit) ? (col ^ target_bit) : col;
    u(row, col) = 1.0;
  }
  return Unitary(u);
}

Unitary propagate_pulse(const PulseSequence& pulse, const HermitianOperator& drift, int micro_steps_per_segment) {
  check_drift(drift);
  check_micro_steps(micro_steps_per_segment);
  pulse.validate();
  PulseEngine engine(drift.matrix(), pulse.carriers_mhz, pulse.n_segments, pulse.segment_duration_us,
                     micro_steps_per_segment);
  return Unitary(ComplexMatrix(engine.forward(to_quadratures(pulse), false)));
}

double trace_fidelity(const Unitary& u_g, const Unitary& u_c) {
  if (u_g.dim() != u_c.dim()) throw std::invalid_argument("fidelity needs unitaries of equal dimension");
  const double f = std::abs((u_c.matrix().adjoint() * u_g.matrix()).trace()) / static_cast<double>(u_g.dim());
  return std::min(f, 1.0);
}

PulseGradient gradient(const PulseSequence& pulse, const HermitianOperator& drift, const Unitary& target,
                       GradientMode mode, int micro_steps_per_segment) {
  check_drift(drift);
  check_micro_steps(micro_steps_per_segment);
  pulse.validate();
  if (target.dim() != kElectronDim) throw std::invalid_argument("gradient expects an 8x8 target");
  PulseEngine engine(drift.matrix(), pulse.carriers_mhz, pulse.n_segments, pulse.segment_duration_us,
                     micro_steps_per_segment);
  const Mat8 target_adjoint = target.matrix().adjoint();
  PulseGradient out;
  const auto k = pulse.n_carriers();
  out.amplitude.resize(k, pulse.n_segments);
  out.phase.resize(k, pulse.n_segments);

  if (mode == GradientMode::Analytic) {
    const CartesianGradient g = cartesian_gradient(engine, to_quadratures(pulse), target_adjoint);
    out.fidelity = g.fidelity;
    for (int c = 0; c < k; ++c) {
      for (int s = 0; s < pulse.n_segments; ++s) {
        const double a = pulse.amplitudes(c, s);
        const double cp = std::cos(pulse.phases(c, s));
        const double sp = std::sin(pulse.phases(c, s));
        out.amplitude(c, s) = cp * g.du(c, s) + sp * g.dv(c, s);
        out.phase(c, s) = a * (-sp * g.du(c, s) + cp * g.dv(c, s));
      }
    }
    return out;
  }

  // Central differences directly in (amplitude, phase).
  PulseSequence probe = pulse;
  auto fid = [&](const PulseSequence& p) { return fidelity_of(engine.forward(to_quadratures(p), false), target_adjoint); };
  out.fidelity = fid(pulse);
  for (int c = 0; c < k; ++c) {
    for (int s = 0; s < pulse.n_segments; ++s) {
      for (int which = 0; which < 2; ++which) {
        double& x = which == 0 ? probe.amplitudes(c, s) : probe.phases(c, s);
        const double x0 = x;
        x = x0 + kFiniteDifferenceStep;
        const double fp = fid(probe);
        x = x0 - kFiniteDifferenceStep;
        const double fm = fid(probe);
        x = x0;
        (which == 0 ? out.amplitude : out.phase)(c, s) = (fp - fm) / (2.0 * kFiniteDifferenceStep);
      }
    }
  }
  return out;
}

PulseSequence initial_pulse(const GrapeConfig& config, std::span<const double> carriers_mhz) {
  config.validate();
  PulseSequence p = PulseSequence::zeros(std::vector<double>(carriers_mhz.begin(), carriers_mhz.end()),
                                         config.n_segments, config.segment_duration_us(), config.max_amplitude_mhz);
  Rng rng(config.seed);
  for (Eigen::Index c = 0; c < p.amplitudes.rows(); ++c) {
    for (Eigen::Index s = 0; s < p.amplitudes.cols(); ++s) {
      p.amplitudes(c, s) = rng.uniform(0.0, 0.05 * config.max_amplitude_mhz);
      p.phases(c, s) = rng.uniform(0.0, kTwoPi);
    }
  }
  return p;
}

GrapeResult optimize(const GrapeConfig& config, const HermitianOperator& drift, std::span<const double> carriers_mhz) {
  const auto start = std::chrono::steady_clock::now();
  config.validate();
  check_drift(drift);
  if (carriers_mhz.empty()) {
    throw std::invalid_argument("no allowed carrier frequencies: exchange configuration cannot be driven");
  }
  GrapeResult result;
  result.pulse = initial_pulse(config, carriers_mhz);
  PulseEngine engine(drift.matrix(), carriers_mhz, config.n_segments, config.segment_duration_us(),
                     config.micro_steps_per_segment);
  const Mat8 target_adjoint = target_cnot().matrix().adjoint();

  // The ascent runs on the Cartesian quadratures (a cos phi, a sin phi);
  // clipping the amplitude is then a radial projection.
  Quadratures q = to_quadratures(result.pulse);
  auto evaluate = [&](const Quadratures& at) {
    return config.gradient_mode == GradientMode::Analytic ? cartesian_gradient(engine, at, target_adjoint)
                                                          : cartesian_fd_gradient(engine, at, target_adjoint);
  };
  CartesianGradient current = evaluate(q);
  result.history.push_back(current.fidelity);

  double rate = config.learning_rate;
  int iterations = 0;
  while (current.fidelity < config.fidelity_target && iterations < config.max_iterations) {
    ++iterations;
    Quadratures trial{q.u + rate * current.du, q.v + rate * current.dv};
    clip(trial, config.max_amplitude_mhz);
    const Mat8 u = engine.forward(trial, true);
    const double f = fidelity_of(u, target_adjoint);
    if (f > current.fidelity) {
      q = std::move(trial);
      current = config.gradient_mode == GradientMode::Analytic
                    ? cartesian_gradient(engine, q, target_adjoint, true, &u)
                    : cartesian_fd_gradient(engine, q, target_adjoint);
      rate *= 1.2;
    } else {
      rate *= 0.5;
      if (rate < 1e-12 * config.learning_rate) break;
    }
    result.history.push_back(current.fidelity);
  }

  from_quadratures(q, result.pulse);
  result.report.final_fidelity = current.fidelity;
  result.report.iterations = iterations;
  result.report.converged = current.fidelity >= config.fidelity_target;
  result.report.wall_time_s = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return result;
}

std::vector<ExchangePair> exchange_grid(std::span<const double> j_tc_values, std::span<const double> j_cc_values) {
  std::vector<ExchangePair> grid;
  grid.reserve(j_tc_values.size() * j_cc_values.size());
  for (double jtc : j_tc_values) {
    for (double jcc : j_cc_values) grid.push_back({jtc, jcc});
  }
  return grid;
}

std::vector<double> carriers_for(const DeviceParams& device, const NuclearConfig& nuclei, double element_threshold,
                                 double merge_tolerance_mhz) {
  return allowed_frequencies(transition_table(device, nuclei, element_threshold), merge_tolerance_mhz);
}

std::vector<FidelityReport> sweep(std::span<const ExchangePair> grid, const GrapeConfig& config,
                                  const SweepOptions& options) {
  config.validate();
  std::vector<FidelityReport> reports(grid.size());
  std::vector<std::exception_ptr> errors(grid.size());
  std::atomic<std::size_t> next{0};

  auto worker = [&] {
    for (std::size_t i = next++; i < grid.size(); i = next++) {
      try {
        DeviceParams device = options.device;
        device.j_tc_mhz = grid[i].j_tc_mhz;
        device.j_cc_mhz = grid[i].j_cc_mhz;
        const HermitianOperator drift = electron_drift(device, options.nuclei);
        const auto carriers = allowed_frequencies(
            transition_table(drift, options.element_threshold), options.merge_tolerance_mhz);
        GrapeConfig local = config;
        local.seed = mix_seed(config.seed, i);
        FidelityReport r = optimize(local, drift, carriers).report;
        r.j_tc_mhz = grid[i].j_tc_mhz;
        r.j_cc_mhz = grid[i].j_cc_mhz;
        reports[i] = r;
      } catch (...) {
        errors[i] = std::current_exception();
      }
    }
  };

  const int jobs = std::max(1, std::min<int>(options.jobs, static_cast<int>(grid.size())));
  std::vector<std::thread> pool;
  for (int t = 1; t < jobs; ++t) pool.emplace_back(worker);
  worker();
  for (auto& th : pool) th.join();
  for (auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
  return reports;
}

}  // namespace donorcnot
