#pragma once

// Coupler-mediated CNOT between the nuclear spins of the target and control
// donors:
//   init      data in nT, nC; electrons on T and C spin down; coupler empty
//   load      coupler electron added spin down
//   swap_in   electron <-> nucleus swap on T and on C
//   cnot      electron CNOT (control C, target T) with the coupler on
//   swap_out  the swaps again, returning the data to the nuclei
//   unload    coupler electron removed after checking it is disentangled
//
// The coupler nucleus starts spin up. Once the swaps have parked the
// electrons' spin-down states on nT and nC, the frozen hyperfine field is
// then non-uniform across the three electrons, which the pulse needs in
// order to address them selectively.

#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "json.hpp"

#include "donorcnot/grape.hpp"
#include "donorcnot/hamiltonian.hpp"
#include "donorcnot/linalg.hpp"

namespace donorcnot {

/// A protocol invariant failed, e.g. the coupler is still entangled at
/// unload time or a nucleus is not in a definite state when one is needed.
class ProtocolError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

enum class SpinSite { TargetElectron, CouplerElectron, ControlElectron, TargetNucleus, CouplerNucleus, ControlNucleus };
enum class Donor { Target, Coupler, Control };

std::string to_string(SpinSite s);  // Te, ce, Ce, nT, nc, nC

inline constexpr Spin kCouplerNucleusInit = Spin::Up;

struct ProtocolState {
  PureState reg;
  std::vector<SpinSite> layout;  // most significant first

  bool coupler_loaded() const;
  /// Register position of a site; throws ProtocolError when absent.
  int position(SpinSite s) const;
};

/// |down>_Te (x) |down>_Ce (x) nuclear_t (x) |up>_nc (x) nuclear_c.
/// Throws std::invalid_argument unless both inputs are normalized qubit
/// states.
ProtocolState init_state(const PureState& nuclear_t, const PureState& nuclear_c);

/// Inserts a spin-down coupler electron. Throws ProtocolError if loaded.
ProtocolState load_coupler(const ProtocolState& state);

/// SWAP of a donor's electron and nucleus on a register with the given
/// layout. Throws ProtocolError when the donor's electron is absent.
Unitary en_swap(Donor donor, const std::vector<SpinSite>& layout);

ProtocolState apply(const Unitary& u, const ProtocolState& state);

/// Frozen nuclear configuration read off the state. Throws ProtocolError if
/// a nucleus has |<Z>| below 1 - tolerance.
NuclearConfig nuclear_config(const ProtocolState& state, double tolerance = 1e-9);

/// Applies an 8x8 gate on (Te, ce, Ce), identity on the nuclei. Throws
/// ProtocolError unless the coupler is loaded.
ProtocolState apply_electron_cnot(const ProtocolState& state, const Unitary& gate);

/// Pulse mode: the gate is the pulse propagator under the frozen-nuclear
/// drift of `device` for the nuclear configuration currently in the state.
ProtocolState apply_electron_cnot(const ProtocolState& state, const PulseSequence& pulse, const DeviceParams& device,
                                  int micro_steps_per_segment);

struct UnloadResult {
  ProtocolState state;
  double residual = 0.0;  // 1 - largest Schmidt coefficient of the coupler electron
};

/// Removes the coupler electron after checking 1 - s_max <= tolerance.
/// The remaining state is fixed up to phase by making the coupler's
/// dominant amplitude real positive, so a product |x>_c (x) rest returns
/// rest exactly. Throws ProtocolError above tolerance or if not loaded.
UnloadResult unload_coupler(const ProtocolState& state, double tolerance = 1e-6);

struct BasisProbability {
  std::string state;  // one 0/1 character per layout site
  double probability = 0.0;
};

struct StepTrace {
  std::string step;  // init, load, swap_in, cnot, swap_out, unload
  std::vector<SpinSite> layout;
  std::vector<BasisProbability> probabilities;  // above 1e-6, in basis order
};

void to_json(nlohmann::json& j, const StepTrace& t);

StepTrace trace_step(const std::string& step, const ProtocolState& state);

struct PulseGate {
  PulseSequence pulse;
  DeviceParams device;
  int micro_steps_per_segment = 20;
};

struct ProtocolOptions {
  std::optional<PulseGate> pulse;  // ideal CNOT when empty
  double unload_tolerance = 1e-6;
};

struct ProtocolResult {
  ProtocolState final_state;    // layout (Te, Ce, nT, nc, nC)
  PureState data;               // (nT, nC) after projecting the ancillas onto their expected states
  double ancilla_leakage = 0.0; // 1 - norm^2 lost in that projection
  double unload_residual = 0.0;
  std::vector<StepTrace> trace;
};

ProtocolResult run_protocol(const PureState& nuclear_t, const PureState& nuclear_c,
                            const ProtocolOptions& options = {});

/// Nuclear configuration during the CNOT step, obtained by running the
/// first three steps.
NuclearConfig post_swap_nuclear_config();

/// Ideal output of the protocol on the two-qubit data: CNOT with control
/// nC and target nT, in (nT, nC) order.
PureState ideal_data_output(const PureState& nuclear_t, const PureState& nuclear_c);

}  // namespace donorcnot
