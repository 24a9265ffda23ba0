#pragma once

// Transition spectrum of the rotating-frame electron drift under the
// uniform transverse drive (X_T+X_c+X_C, Y_T+Y_c+Y_C).

#include <span>
#include <vector>

#include "donorcnot/hamiltonian.hpp"
#include "donorcnot/linalg.hpp"

namespace donorcnot {

inline constexpr double kDefaultElementThreshold = 1e-3;  // relative to the largest element
inline constexpr double kDefaultMergeTolerance = 1.0;     // MHz

struct Transition {
  int state_a = 0;  // lower total magnetization (or lower index when |dM| != 1)
  int state_b = 0;
  double frequency_mhz = 0.0;  // |E_b - E_a|
  double offset_mhz = 0.0;     // E_b - E_a: carrier detuning from the rotating-frame reference
  double element = 0.0;        // sqrt(|<a|X|b>|^2 + |<a|Y|b>|^2)
  bool allowed = false;
};

struct TransitionTable {
  std::vector<Transition> transitions;  // sorted by frequency, then offset
  RealVector energies;                  // ascending, MHz
  ComplexMatrix states;                 // eigenvector columns, same order as energies
  std::vector<int> magnetization;       // eigenvalue of Z_T+Z_c+Z_C per eigenstate
  double reference_mhz = 0.0;           // 2 gamma_e B; lab frequency = reference + offset
  double max_element = 0.0;

  double lab_frequency(const Transition& t) const { return reference_mhz + t.offset_mhz; }
  std::size_t allowed_count() const;
};

/// Diagonalizes the drift sector by sector in total electron magnetization
/// and lists all dim (dim - 1) / 2 eigenstate pairs. A pair is allowed when
/// its element is at least `relative_threshold` times the largest element.
/// Throws std::invalid_argument if the drift is not 8x8 or does not conserve
/// the total electron magnetization.
TransitionTable transition_table(const HermitianOperator& drift,
                                 double relative_threshold = kDefaultElementThreshold,
                                 double reference_mhz = 0.0);

/// Table for the frozen-nuclear drift of a device.
TransitionTable transition_table(const DeviceParams& params, const NuclearConfig& nuclei,
                                 double relative_threshold = kDefaultElementThreshold);

/// A merged spectral line.
struct SpectralLine {
  double offset_mhz = 0.0;  // mean of the merged transitions
  double strength = 0.0;    // quadrature sum of the merged elements
  int count = 0;
};

/// Allowed transitions clustered by carrier offset: consecutive offsets
/// closer than `merge_tolerance` join one line. Sorted ascending.
std::vector<SpectralLine> allowed_lines(const TransitionTable& table,
                                        double merge_tolerance = kDefaultMergeTolerance);

/// Offsets of allowed_lines(); these are the GRAPE carrier frequencies.
std::vector<double> allowed_frequencies(const TransitionTable& table,
                                        double merge_tolerance = kDefaultMergeTolerance);

/// True iff some a in freqs_a and b in freqs_b satisfy |a - b| < tolerance.
/// Both inputs must be sorted ascending.
bool band_overlap(std::span<const double> freqs_a, std::span<const double> freqs_b, double tolerance);

}  // namespace donorcnot
