#pragma once

// Donor placement uncertainty and its exchange-strength distribution.
//
// Each donor sits on one of nine sites of an in-plane 3x3 grid (spacing one
// lattice constant) around its nominal position. A pair of donors therefore
// has 81 placement combinations which fold into 15 relative-displacement
// classes under the mirror across the inter-donor axis.
//
// Exchange strengths come from a parameterized model rather than an
// atomistic calculation:
//
//   J(d) = P (|d|/a_B)^{5/2} exp(-2|d|/a_B) V(d)
//
// with a valley interference factor V. Unstrained silicon keeps all six
// conduction valleys, V = |sum_mu exp(i k_mu.d)|^2 / 36; under strain only
// the two valleys along [001] survive, V = cos^2(k d_z), which is exactly 1
// for in-plane displacements.

#include <string>
#include <utility>
#include <vector>
#include <span>

#include <Eigen/Core>

#include "json.hpp"

namespace donorcnot {

/// Silicon lattice constant a0 in nm.
inline constexpr double kLatticeConstantNm = 0.543;
/// Exchange model is not trusted below this separation (nm).
inline constexpr double kMinSeparationNm = 5.0;

struct PlacementOffset {
  int dx = 0;  // units of a0, along the inter-donor axis
  int dy = 0;  // units of a0, in-plane perpendicular to it
  friend bool operator==(const PlacementOffset&, const PlacementOffset&) = default;
};

using OffsetPair = std::pair<PlacementOffset, PlacementOffset>;

struct DisplacementClass {
  int rel_dx = 0;  // -2..2
  int rel_dy = 0;  // 0..2 after folding dy -> -dy
  int multiplicity = 0;
  friend bool operator==(const DisplacementClass&, const DisplacementClass&) = default;
};

enum class StrainMode { Strained, Unstrained };
enum class CrystalAxis { Axis100, Axis110 };

std::string to_string(StrainMode m);
std::string to_string(CrystalAxis a);
StrainMode parse_strain_mode(const std::string& s);
CrystalAxis parse_crystal_axis(const std::string& s);

struct ExchangeModelParams {
  StrainMode mode = StrainMode::Strained;
  double prefactor_mhz = 1.0;
  double bohr_radius_nm = 3.5;
  double valley_k0 = 0.85;  // fraction of 2 pi / a0
  CrystalAxis axis = CrystalAxis::Axis100;

  void validate() const;
};

void to_json(nlohmann::json& j, const ExchangeModelParams& p);
void from_json(const nlohmann::json& j, ExchangeModelParams& p);

struct ExchangeEntry {
  DisplacementClass cls;
  double j_mhz = 0.0;
};

struct ExchangeDistribution {
  double separation_nm = 0.0;
  std::vector<ExchangeEntry> entries;

  /// max(J) / min(J) over the classes.
  double spread() const;
  std::vector<double> values() const;
};

/// All 81 (donor A offset, donor B offset) combinations, lexicographic in
/// (A.dx, A.dy, B.dx, B.dy), each component running -1, 0, 1.
std::vector<OffsetPair> enumerate_pair_offsets();

/// Folds the pairs into relative-displacement classes sorted by
/// (rel_dx, rel_dy). Throws std::invalid_argument for offsets outside the
/// 3x3 grid or an input that is not the 81-element enumeration.
std::vector<DisplacementClass> symmetry_classes(std::span<const OffsetPair> pairs);

/// Unit vectors (along, perpendicular) of the inter-donor axis in crystal
/// coordinates.
std::pair<Eigen::Vector3d, Eigen::Vector3d> axis_frame(CrystalAxis axis);

/// Displacement vector (nm, crystal coordinates) between donors of a pair
/// nominally `separation_nm` apart along `axis`, shifted by the relative
/// grid offset (rel_dx, rel_dy).
Eigen::Vector3d pair_displacement(double separation_nm, int rel_dx, int rel_dy, CrystalAxis axis);

/// Valley interference factor V in [0, 1].
double valley_factor(const Eigen::Vector3d& displacement_nm, StrainMode mode, double valley_k0);

/// P (d/a_B)^{5/2} exp(-2 d / a_B)
double exchange_envelope(double distance_nm, double prefactor_mhz, double bohr_radius_nm);

/// Exchange (Pauli convention, MHz). Throws std::domain_error below
/// kMinSeparationNm.
double exchange_value(const Eigen::Vector3d& displacement_nm, const ExchangeModelParams& model);

/// Exchange for each of the 15 classes at the given nominal separation.
ExchangeDistribution exchange_distribution(double separation_nm, const ExchangeModelParams& model);

/// Strained and unstrained model pair sharing one calibration.
struct CalibratedModels {
  ExchangeModelParams strained;
  ExchangeModelParams unstrained;
};

/// Fixed shape parameters of the two models; calibration solves for the
/// prefactors.
struct ExchangeModelFamily {
  double strained_bohr_radius_nm = 3.5;
  double unstrained_bohr_radius_nm = 2.0;
  double valley_k0 = 0.85;
  CrystalAxis axis = CrystalAxis::Axis100;
};

struct CalibrationConstraints {
  // Strained exchange at match_strained_nm equals the unstrained envelope
  // at match_unstrained_nm.
  double match_strained_nm = 20.0;
  double match_unstrained_nm = 13.0;
  double max_match_ratio = 2.0;
  // Strained exchange at anchor_nm is set to anchor_j_mhz and must be at
  // least min_anchor_j_mhz.
  double anchor_nm = 25.0;
  double anchor_j_mhz = 0.3;
  double min_anchor_j_mhz = 0.25;
  // Strained spread over the 15 classes must stay below this bound at each
  // listed separation.
  double max_strained_spread = 5.0;
  std::vector<double> spread_separations_nm{14.0, 18.0};
};

/// Throws std::invalid_argument when the constraints cannot all be met.
CalibratedModels calibrate(const ExchangeModelFamily& family, const CalibrationConstraints& constraints);

/// Models used by the command-line tools and sweeps.
CalibratedModels default_models();

}  // namespace donorcnot
