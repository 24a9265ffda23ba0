#pragma once

// Gradient ascent pulse engineering for the three-electron CNOT.
//
// A pulse is a set of carriers (frequency offsets in the rotating frame),
// each with a piecewise-constant amplitude and phase per segment. Within a
// segment the carriers still oscillate at their offsets, so each segment is
// integrated with micro-steps of a fourth-order commutator-free Magnus
// scheme (two Gauss-Legendre samples per micro-step).

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "json.hpp"

#include "donorcnot/hamiltonian.hpp"
#include "donorcnot/linalg.hpp"

namespace donorcnot {

struct PulseSequence {
  std::vector<double> carriers_mhz;
  int n_segments = 0;
  double segment_duration_us = 0.0;
  double max_amplitude_mhz = 5.0;
  Eigen::MatrixXd amplitudes;  // carriers x segments, MHz, in [0, max]
  Eigen::MatrixXd phases;      // carriers x segments, rad

  int n_carriers() const { return static_cast<int>(carriers_mhz.size()); }
  double total_time_us() const { return n_segments * segment_duration_us; }

  /// Zero-amplitude pulse of the given shape.
  static PulseSequence zeros(std::vector<double> carriers_mhz, int n_segments, double segment_duration_us,
                             double max_amplitude_mhz);

  /// Throws std::invalid_argument on shape or bound violations.
  void validate() const;
};

void to_json(nlohmann::json& j, const PulseSequence& p);
void from_json(const nlohmann::json& j, PulseSequence& p);

enum class GradientMode { Analytic, FiniteDifference };

std::string to_string(GradientMode m);
GradientMode parse_gradient_mode(const std::string& s);

struct GrapeConfig {
  int n_segments = 100;
  double total_time_us = 2.0;
  double max_amplitude_mhz = 5.0;
  double learning_rate = 20.0;  // initial step, adapted during the ascent
  int max_iterations = 2000;
  double fidelity_target = 0.999;
  int micro_steps_per_segment = 20;
  GradientMode gradient_mode = GradientMode::Analytic;
  std::uint64_t seed = 1;

  double segment_duration_us() const { return total_time_us / n_segments; }
  void validate() const;
};

void to_json(nlohmann::json& j, const GrapeConfig& c);
void from_json(const nlohmann::json& j, GrapeConfig& c);

struct FidelityReport {
  double final_fidelity = 0.0;
  int iterations = 0;
  bool converged = false;
  double j_tc_mhz = 0.0;
  double j_cc_mhz = 0.0;
  double wall_time_s = 0.0;

  /// Equality on everything except the wall time.
  bool same_result(const FidelityReport& other) const;
};

/// CNOT on the electron register (T, c, C): control C, target T, identity
/// on the coupler.
Unitary target_cnot();

/// Time-ordered propagator of the drift plus the pulse's carriers.
/// Throws std::invalid_argument if the drift is not 8x8 or the pulse is
/// malformed.
Unitary propagate_pulse(const PulseSequence& pulse, const HermitianOperator& drift, int micro_steps_per_segment);

/// |Tr(u_c^dagger u_g)| / dim. Normalized and insensitive to global phase.
double trace_fidelity(const Unitary& u_g, const Unitary& u_c);

struct PulseGradient {
  double fidelity = 0.0;
  Eigen::MatrixXd amplitude;  // dF / d amplitude, carriers x segments
  Eigen::MatrixXd phase;      // dF / d phase
};

/// Fidelity gradient with respect to every control. Analytic mode uses exact
/// derivatives of each micro-step exponential; finite-difference mode uses
/// central differences with step 1e-6 (MHz for amplitudes, rad for phases).
PulseGradient gradient(const PulseSequence& pulse, const HermitianOperator& drift, const Unitary& target,
                       GradientMode mode, int micro_steps_per_segment);

struct GrapeResult {
  PulseSequence pulse;
  FidelityReport report;
  std::vector<double> history;  // accepted fidelity per iteration, starting with the initial pulse
};

/// Seeded random initial pulse: amplitudes uniform in [0, 5% of max],
/// phases uniform in [0, 2 pi).
PulseSequence initial_pulse(const GrapeConfig& config, std::span<const double> carriers_mhz);

/// Gradient ascent from initial_pulse(). Stops at the fidelity target or
/// after max_iterations; amplitudes are clipped to the bound after every
/// step and a step that lowers the fidelity is rejected and halves the
/// learning rate. Throws std::invalid_argument for an empty carrier list.
GrapeResult optimize(const GrapeConfig& config, const HermitianOperator& drift, std::span<const double> carriers_mhz);

struct ExchangePair {
  double j_tc_mhz = 0.0;
  double j_cc_mhz = 0.0;
};

/// Cartesian product of target-coupler and coupler-control exchange values,
/// row-major in the target-coupler index.
std::vector<ExchangePair> exchange_grid(std::span<const double> j_tc_values, std::span<const double> j_cc_values);

struct SweepOptions {
  DeviceParams device;   // exchange fields are overwritten per pair
  NuclearConfig nuclei;  // frozen nuclear configuration for the drift
  double element_threshold = 1e-3;
  double merge_tolerance_mhz = 1.0;
  int jobs = 1;
};

/// One GRAPE run per exchange pair. Pair i uses seed mix(config.seed, i), so
/// results do not depend on scheduling; output order follows the grid.
std::vector<FidelityReport> sweep(std::span<const ExchangePair> grid, const GrapeConfig& config,
                                  const SweepOptions& options);

/// Carrier offsets for one exchange pair.
std::vector<double> carriers_for(const DeviceParams& device, const NuclearConfig& nuclei,
                                 double element_threshold = 1e-3, double merge_tolerance_mhz = 1.0);

}  // namespace donorcnot
