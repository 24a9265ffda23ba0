#include "donorcnot/protocol.hpp"

#include <algorithm>
#include <cmath>

namespace donorcnot {

namespace {

constexpr double kTraceThreshold = 1e-6;

Eigen::Index bit_of(int position, int n_sites) { return Eigen::Index{1} << (n_sites - 1 - position); }

int spin_bit(Spin s) { return s == Spin::Down ? 0 : 1; }

SpinSite electron_of(Donor d) {
  switch (d) {
    case Donor::Target: return SpinSite::TargetElectron;
    case Donor::Coupler: return SpinSite::CouplerElectron;
    case Donor::Control: return SpinSite::ControlElectron;
  }
  throw std::invalid_argument("unknown donor");
}

SpinSite nucleus_of(Donor d) {
  switch (d) {
    case Donor::Target: return SpinSite::TargetNucleus;
    case Donor::Coupler: return SpinSite::CouplerNucleus;
    case Donor::Control: return SpinSite::ControlNucleus;
  }
  throw std::invalid_argument("unknown donor");
}

int find_site(const std::vector<SpinSite>& layout, SpinSite s) {
  const auto it = std::find(layout.begin(), layout.end(), s);
  return it == layout.end() ? -1 : static_cast<int>(it - layout.begin());
}

void check_qubit(const PureState& s, const char* name) {
  if (s.dim() != 2) throw std::invalid_argument(std::string(name) + " must be a single-qubit state");
}

const std::vector<SpinSite> kFullLayout{SpinSite::TargetElectron, SpinSite::CouplerElectron,
                                        SpinSite::ControlElectron, SpinSite::TargetNucleus,
                                        SpinSite::CouplerNucleus,  SpinSite::ControlNucleus};

}  // namespace

std::string to_string(SpinSite s) {
  switch (s) {
    case SpinSite::TargetElectron: return "Te";
    case SpinSite::CouplerElectron: return "ce";
    case SpinSite::ControlElectron: return "Ce";
    case SpinSite::TargetNucleus: return "nT";
    case SpinSite::CouplerNucleus: return "nc";
    case SpinSite::ControlNucleus: return "nC";
  }
  return "?";
}

bool ProtocolState::coupler_loaded() const { return find_site(layout, SpinSite::CouplerElectron) >= 0; }

int ProtocolState::position(SpinSite s) const {
  const int p = find_site(layout, s);
  if (p < 0) throw ProtocolError("site " + to_string(s) + " is not in the register");
  return p;
}

ProtocolState init_state(const PureState& nuclear_t, const PureState& nuclear_c) {
  check_qubit(nuclear_t, "target nuclear state");
  check_qubit(nuclear_c, "control nuclear state");
  const ComplexVector down = PureState::basis(2, spin_bit(Spin::Down)).amplitudes();
  const ComplexVector coupler = PureState::basis(2, spin_bit(kCouplerNucleusInit)).amplitudes();
  ComplexVector v = kron(kron(kron(kron(down, down), nuclear_t.amplitudes()), coupler), nuclear_c.amplitudes());
  return {PureState(v),
          {SpinSite::TargetElectron, SpinSite::ControlElectron, SpinSite::TargetNucleus, SpinSite::CouplerNucleus,
           SpinSite::ControlNucleus}};
}

ProtocolState load_coupler(const ProtocolState& state) {
  if (state.coupler_loaded()) throw ProtocolError("coupler is already loaded");
  if (state.layout.empty() || state.layout[0] != SpinSite::TargetElectron) {
    throw ProtocolError("loading expects the target electron at the top of the register");
  }
  // New site goes in at position 1: split the index into (Te, rest).
  const Eigen::Index rest = state.reg.dim() / 2;
  ComplexVector v = ComplexVector::Zero(state.reg.dim() * 2);
  const Eigen::Index down = spin_bit(Spin::Down);
  for (Eigen::Index te = 0; te < 2; ++te) {
    for (Eigen::Index r = 0; r < rest; ++r) v((te * 2 + down) * rest + r) = state.reg[te * rest + r];
  }
  ProtocolState out{PureState(v), state.layout};
  out.layout.insert(out.layout.begin() + 1, SpinSite::CouplerElectron);
  return out;
}

Unitary en_swap(Donor donor, const std::vector<SpinSite>& layout) {
  const int pe = find_site(layout, electron_of(donor));
  const int pn = find_site(layout, nucleus_of(donor));
  if (pe < 0 || pn < 0) throw ProtocolError("donor " + to_string(electron_of(donor)) + " has no active electron");
  const int n = static_cast<int>(layout.size());
  const Eigen::Index dim = Eigen::Index{1} << n;
  const Eigen::Index be = bit_of(pe, n);
  const Eigen::Index bn = bit_of(pn, n);
  ComplexMatrix u = ComplexMatrix::Zero(dim, dim);
  for (Eigen::Index col = 0; col < dim; ++col) {
    const bool e = col & be;
    const bool nu = col & bn;
    Eigen::Index row = col & ~(be | bn);
    if (nu) row |= be;
    if (e) row |= bn;
    u(row, col) = 1.0;
  }
  return Unitary(u);
}

ProtocolState apply(const Unitary& u, const ProtocolState& state) {
  if (u.dim() != state.reg.dim()) throw std::invalid_argument("unitary does not match the register dimension");
  return {PureState::normalized(u.matrix() * state.reg.amplitudes()), state.layout};
}

NuclearConfig nuclear_config(const ProtocolState& state, double tolerance) {
  const int n = static_cast<int>(state.layout.size());
  NuclearConfig cfg;
  const SpinSite nuclei[3] = {SpinSite::TargetNucleus, SpinSite::CouplerNucleus, SpinSite::ControlNucleus};
  for (int k = 0; k < 3; ++k) {
    const Eigen::Index b = bit_of(state.position(nuclei[k]), n);
    double z = 0.0;
    for (Eigen::Index i = 0; i < state.reg.dim(); ++i) z += std::norm(state.reg[i]) * ((i & b) ? -1.0 : 1.0);
    if (std::abs(z) < 1.0 - tolerance) {
      throw ProtocolError("nucleus " + to_string(nuclei[k]) + " is not in a definite state (<Z> = " +
                          std::to_string(z) + ")");
    }
    cfg.spins[k] = z > 0.0 ? Spin::Down : Spin::Up;
  }
  return cfg;
}

ProtocolState apply_electron_cnot(const ProtocolState& state, const Unitary& gate) {
  if (!state.coupler_loaded()) throw ProtocolError("the CNOT needs the coupler electron loaded");
  if (state.layout != kFullLayout) throw ProtocolError("unexpected register layout for the electron gate");
  if (gate.dim() != kElectronDim) throw std::invalid_argument("electron gate must be 8x8");
  const ComplexMatrix nuclei = ComplexMatrix::Identity(8, 8);
  return apply(Unitary(kron(gate.matrix(), nuclei)), state);
}

ProtocolState apply_electron_cnot(const ProtocolState& state, const PulseSequence& pulse, const DeviceParams& device,
                                  int micro_steps_per_segment) {
  if (!state.coupler_loaded()) throw ProtocolError("the CNOT needs the coupler electron loaded");
  const HermitianOperator drift = electron_drift(device, nuclear_config(state));
  return apply_electron_cnot(state, propagate_pulse(pulse, drift, micro_steps_per_segment));
}

UnloadResult unload_coupler(const ProtocolState& state, double tolerance) {
  if (!state.coupler_loaded()) throw ProtocolError("coupler is not loaded");
  const int n = static_cast<int>(state.layout.size());
  const int pc = state.position(SpinSite::CouplerElectron);
  const Eigen::Index bc = bit_of(pc, n);
  const Eigen::Index low = bc - 1;  // bits below the coupler
  const Eigen::Index rest = state.reg.dim() / 2;

  // Row c of m is the rest-of-register vector paired with coupler state c.
  ComplexMatrix m(2, rest);
  for (Eigen::Index c = 0; c < 2; ++c) {
    for (Eigen::Index r = 0; r < rest; ++r) {
      const Eigen::Index i = ((r & ~low) << 1) | (c ? bc : 0) | (r & low);
      m(c, r) = state.reg[i];
    }
  }
  const ComplexMatrix rho = m * m.adjoint();
  const EigenSystem es = hermitian_eigensystem(HermitianOperator(rho));
  const double s_max = std::sqrt(std::clamp(es.values(1), 0.0, 1.0));
  const double residual = 1.0 - s_max;
  if (residual > tolerance) {
    throw ProtocolError("coupler electron is entangled with the register (1 - s_max = " + std::to_string(residual) +
                        ")");
  }
  ComplexVector u = es.vectors.matrix().col(1);
  Eigen::Index dominant = 0;
  u.cwiseAbs().maxCoeff(&dominant);
  u *= std::conj(u(dominant)) / std::abs(u(dominant));
  const ComplexVector remaining = m.transpose() * u.conjugate();

  UnloadResult out;
  out.state.reg = PureState::normalized(remaining);
  out.state.layout = state.layout;
  out.state.layout.erase(out.state.layout.begin() + pc);
  out.residual = residual;
  return out;
}

void to_json(nlohmann::json& j, const StepTrace& t) {
  std::vector<std::string> layout;
  for (SpinSite s : t.layout) layout.push_back(to_string(s));
  nlohmann::json probs = nlohmann::json::array();
  for (const auto& p : t.probabilities) probs.push_back({{"state", p.state}, {"probability", p.probability}});
  j = nlohmann::json{{"step", t.step}, {"layout", layout}, {"probabilities", probs}};
}

StepTrace trace_step(const std::string& step, const ProtocolState& state) {
  StepTrace t{step, state.layout, {}};
  const int n = static_cast<int>(state.layout.size());
  for (Eigen::Index i = 0; i < state.reg.dim(); ++i) {
    const double p = std::norm(state.reg[i]);
    if (p <= kTraceThreshold) continue;
    std::string bits(n, '0');
    for (int k = 0; k < n; ++k) {
      if (i & bit_of(k, n)) bits[k] = '1';
    }
    t.probabilities.push_back({bits, p});
  }
  return t;
}

ProtocolResult run_protocol(const PureState& nuclear_t, const PureState& nuclear_c, const ProtocolOptions& options) {
  ProtocolResult result;
  ProtocolState s = init_state(nuclear_t, nuclear_c);
  result.trace.push_back(trace_step("init", s));

  s = load_coupler(s);
  result.trace.push_back(trace_step("load", s));

  const Unitary swaps = en_swap(Donor::Target, s.layout) * en_swap(Donor::Control, s.layout);
  s = apply(swaps, s);
  result.trace.push_back(trace_step("swap_in", s));

  if (options.pulse) {
    s = apply_electron_cnot(s, options.pulse->pulse, options.pulse->device, options.pulse->micro_steps_per_segment);
  } else {
    s = apply_electron_cnot(s, target_cnot());
  }
  result.trace.push_back(trace_step("cnot", s));

  s = apply(swaps, s);
  result.trace.push_back(trace_step("swap_out", s));

  const UnloadResult unloaded = unload_coupler(s, options.unload_tolerance);
  s = unloaded.state;
  result.unload_residual = unloaded.residual;
  result.trace.push_back(trace_step("unload", s));

  // Layout (Te, Ce, nT, nc, nC): keep the branch with both electrons down
  // and the coupler nucleus in its initial state.
  const int n = static_cast<int>(s.layout.size());
  Eigen::Index base = 0;
  base |= bit_of(s.position(SpinSite::TargetElectron), n) * spin_bit(Spin::Down);
  base |= bit_of(s.position(SpinSite::ControlElectron), n) * spin_bit(Spin::Down);
  base |= bit_of(s.position(SpinSite::CouplerNucleus), n) * spin_bit(kCouplerNucleusInit);
  const Eigen::Index bt = bit_of(s.position(SpinSite::TargetNucleus), n);
  const Eigen::Index bcn = bit_of(s.position(SpinSite::ControlNucleus), n);
  ComplexVector data(4);
  for (int t = 0; t < 2; ++t) {
    for (int c = 0; c < 2; ++c) data(2 * t + c) = s.reg[base | (t ? bt : 0) | (c ? bcn : 0)];
  }
  const double kept = data.squaredNorm();
  if (kept <= 0.0) throw ProtocolError("no amplitude left in the expected ancilla state");
  result.ancilla_leakage = std::max(0.0, 1.0 - kept);
  result.data = PureState::normalized(data);
  result.final_state = std::move(s);
  return result;
}

NuclearConfig post_swap_nuclear_config() {
  ProtocolState s = load_coupler(init_state(PureState::basis(2, 0), PureState::basis(2, 0)));
  s = apply(en_swap(Donor::Target, s.layout) * en_swap(Donor::Control, s.layout), s);
  return nuclear_config(s);
}

PureState ideal_data_output(const PureState& nuclear_t, const PureState& nuclear_c) {
  check_qubit(nuclear_t, "target nuclear state");
  check_qubit(nuclear_c, "control nuclear state");
  ComplexVector out = ComplexVector::Zero(4);
  for (int t = 0; t < 2; ++t) {
    for (int c = 0; c < 2; ++c) out(2 * (t ^ c) + c) += nuclear_t[t] * nuclear_c[c];
  }
  return PureState(out);
}

}  // namespace donorcnot
