#pragma once

// Spin Hamiltonians of a target / coupler / control donor triple.
//
// Full register order: (T, c, C, nT, nc, nC), i.e. the three donor
// electrons followed by their nuclei. The reduced electron register is
// (T, c, C). Exchange and hyperfine constants use the Pauli sigma.sigma
// convention, so a conventional S.I hyperfine constant is divided by 4.

#include <array>
#include <string>

#include "json.hpp"

#include "donorcnot/linalg.hpp"

namespace donorcnot {

namespace site {
inline constexpr int kTarget = 0;
inline constexpr int kCoupler = 1;
inline constexpr int kControl = 2;
inline constexpr int kNuclearTarget = 3;
inline constexpr int kNuclearCoupler = 4;
inline constexpr int kNuclearControl = 5;
inline constexpr int kElectronCount = 3;
inline constexpr int kFullCount = 6;
}  // namespace site

inline constexpr Eigen::Index kElectronDim = 8;

/// Down is |0> (Z = +1) and Up is |1> (Z = -1), so the spin-down electrons
/// the protocol starts from are the computational |0> states.
enum class Spin { Up, Down };

inline double z_value(Spin s) { return s == Spin::Down ? 1.0 : -1.0; }
std::string to_string(Spin s);

struct DeviceParams {
  double b_field_tesla = 1.0;
  double gamma_e_mhz_per_t = 27970.0;
  double gamma_n_mhz_per_t = 17.23;
  double a_target_mhz = 29.4;
  double a_coupler_mhz = 29.4;
  double a_control_mhz = 29.4;
  double j_tc_mhz = 0.0;
  double j_cc_mhz = 0.0;

  double electron_zeeman_mhz() const { return gamma_e_mhz_per_t * b_field_tesla; }
  double nuclear_zeeman_mhz() const { return gamma_n_mhz_per_t * b_field_tesla; }

  /// Throws std::invalid_argument when any invariant fails, including the
  /// strong-field condition gamma_e B > 100 max(A, J).
  void validate() const;
};

void to_json(nlohmann::json& j, const DeviceParams& p);
void from_json(const nlohmann::json& j, DeviceParams& p);

/// Frozen nuclear orientations in the order (nT, nc, nC).
struct NuclearConfig {
  std::array<Spin, 3> spins{Spin::Down, Spin::Down, Spin::Down};

  Spin target() const { return spins[0]; }
  Spin coupler() const { return spins[1]; }
  Spin control() const { return spins[2]; }
  friend bool operator==(const NuclearConfig&, const NuclearConfig&) = default;
};

std::string to_string(const NuclearConfig& n);

/// One microwave carrier: frequency offset from the rotating-frame
/// reference gamma_e B, and its amplitude bound (both MHz).
struct ControlCarrier {
  double frequency_mhz = 0.0;
  double max_amplitude_mhz = 1.0;
};

/// 64-dimensional electron-nuclear Hamiltonian with Zeeman, hyperfine and
/// electron exchange terms.
HermitianOperator build_full(const DeviceParams& params);

/// 8-dimensional electron Hamiltonian with the nuclei frozen: each
/// sigma_e.sigma_n becomes <Z_n> Z_e (flip-flop terms dropped).
HermitianOperator reduce_to_electron(const DeviceParams& params, const NuclearConfig& nuclei);

/// H_e - zeeman (Z_T + Z_c + Z_C). Exact, since the uniform rotation
/// commutes with every exchange term.
HermitianOperator rotating_frame_drift(const HermitianOperator& h_e, double electron_zeeman_mhz);

/// Convenience: rotating_frame_drift(reduce_to_electron(params, nuclei)).
HermitianOperator electron_drift(const DeviceParams& params, const NuclearConfig& nuclei);

/// Rotating-frame image of a circularly polarized carrier:
///   amplitude [cos(theta) (X_T+X_c+X_C) + sin(theta) (Y_T+Y_c+Y_C)],
///   theta = 2 pi detuning t + phase.
/// Throws std::invalid_argument when |amplitude| exceeds the carrier bound.
HermitianOperator control_generator(const ControlCarrier& carrier, double amplitude, double phase,
                                    double time_us);

/// X_T+X_c+X_C, Y_T+Y_c+Y_C, Z_T+Z_c+Z_C on the electron register.
const HermitianOperator& electron_total(PauliAxis axis);

/// Total Z over all six spins of the full register.
HermitianOperator full_total_z();

}  // namespace donorcnot
