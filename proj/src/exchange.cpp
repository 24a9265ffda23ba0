#include "donorcnot/exchange.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numbers>
#include <stdexcept>

namespace donorcnot {

namespace {

constexpr int kGridExtent = 1;  // offsets run -1..1

bool on_grid(const PlacementOffset& o) {
  return std::abs(o.dx) <= kGridExtent && std::abs(o.dy) <= kGridExtent;
}

}  // namespace

std::string to_string(StrainMode m) { return m == StrainMode::Strained ? "strained" : "unstrained"; }

std::string to_string(CrystalAxis a) { return a == CrystalAxis::Axis100 ? "[100]" : "[110]"; }

StrainMode parse_strain_mode(const std::string& s) {
  if (s == "strained") return StrainMode::Strained;
  if (s == "unstrained") return StrainMode::Unstrained;
  throw std::invalid_argument("unknown strain mode '" + s + "'");
}

CrystalAxis parse_crystal_axis(const std::string& s) {
  if (s == "[100]" || s == "100") return CrystalAxis::Axis100;
  if (s == "[110]" || s == "110") return CrystalAxis::Axis110;
  throw std::invalid_argument("unknown crystal axis '" + s + "'");
}

void ExchangeModelParams::validate() const {
  if (!(prefactor_mhz > 0.0)) throw std::invalid_argument("exchange model: prefactor must be positive");
  if (!(bohr_radius_nm > 0.0)) throw std::invalid_argument("exchange model: Bohr radius must be positive");
  if (!(valley_k0 > 0.0 && valley_k0 < 1.0)) throw std::invalid_argument("exchange model: valley_k0 must lie in (0, 1)");
}

void to_json(nlohmann::json& j, const ExchangeModelParams& p) {
  j = nlohmann::json{{"mode", to_string(p.mode)},
                     {"prefactor_mhz", p.prefactor_mhz},
                     {"bohr_radius_nm", p.bohr_radius_nm},
                     {"valley_k0", p.valley_k0},
                     {"axis", to_string(p.axis)}};
}

void from_json(const nlohmann::json& j, ExchangeModelParams& p) {
  ExchangeModelParams out;
  out.mode = parse_strain_mode(j.at("mode").get<std::string>());
  out.prefactor_mhz = j.at("prefactor_mhz").get<double>();
  out.bohr_radius_nm = j.at("bohr_radius_nm").get<double>();
  out.valley_k0 = j.value("valley_k0", out.valley_k0);
  out.axis = parse_crystal_axis(j.value("axis", std::string("[100]")));
  out.validate();
  p = out;
}

double ExchangeDistribution::spread() const {
  if (entries.empty()) return 0.0;
  auto [lo, hi] = std::minmax_element(entries.begin(), entries.end(),
                                      [](const auto& a, const auto& b) { return a.j_mhz < b.j_mhz; });
  return hi->j_mhz / lo->j_mhz;
}

std::vector<double> ExchangeDistribution::values() const {
  std::vector<double> out;
  out.reserve(entries.size());
  for (const auto& e : entries) out.push_back(e.j_mhz);
  return out;
}

std::vector<OffsetPair> enumerate_pair_offsets() {
  std::vector<PlacementOffset> sites;
  for (int dx = -kGridExtent; dx <= kGridExtent; ++dx) {
    for (int dy = -kGridExtent; dy <= kGridExtent; ++dy) sites.push_back({dx, dy});
  }
  std::vector<OffsetPair> pairs;
  pairs.reserve(sites.size() * sites.size());
  for (const auto& a : sites) {
    for (const auto& b : sites) pairs.emplace_back(a, b);
  }
  return pairs;
}

std::vector<DisplacementClass> symmetry_classes(std::span<const OffsetPair> pairs) {
  constexpr std::size_t kSites = (2 * kGridExtent + 1) * (2 * kGridExtent + 1);
  if (pairs.size() != kSites * kSites) {
    throw std::invalid_argument("symmetry_classes expects the 81-element placement enumeration");
  }
  std::map<std::pair<int, int>, int> counts;
  std::vector<bool> seen(kSites * kSites, false);
  auto site_index = [](const PlacementOffset& o) {
    return static_cast<std::size_t>((o.dx + kGridExtent) * (2 * kGridExtent + 1) + (o.dy + kGridExtent));
  };
  for (const auto& [a, b] : pairs) {
    if (!on_grid(a) || !on_grid(b)) throw std::invalid_argument("placement offset outside the 3x3 grid");
    const std::size_t key = site_index(a) * kSites + site_index(b);
    if (seen[key]) throw std::invalid_argument("duplicate placement pair in enumeration");
    seen[key] = true;
    const int rel_dx = b.dx - a.dx;
    const int rel_dy = std::abs(b.dy - a.dy);  // mirror across the inter-donor axis
    ++counts[{rel_dx, rel_dy}];
  }
  std::vector<DisplacementClass> out;
  out.reserve(counts.size());
  for (const auto& [key, mult] : counts) out.push_back({key.first, key.second, mult});
  return out;
}

std::pair<Eigen::Vector3d, Eigen::Vector3d> axis_frame(CrystalAxis axis) {
  if (axis == CrystalAxis::Axis100) return {Eigen::Vector3d::UnitX(), Eigen::Vector3d::UnitY()};
  const double r = 1.0 / std::numbers::sqrt2;
  return {Eigen::Vector3d(r, r, 0.0), Eigen::Vector3d(-r, r, 0.0)};
}

Eigen::Vector3d pair_displacement(double separation_nm, int rel_dx, int rel_dy, CrystalAxis axis) {
  const auto [along, across] = axis_frame(axis);
  return (separation_nm + rel_dx * kLatticeConstantNm) * along + (rel_dy * kLatticeConstantNm) * across;
}

double valley_factor(const Eigen::Vector3d& d, StrainMode mode, double valley_k0) {
  const double k = valley_k0 * 2.0 * std::numbers::pi / kLatticeConstantNm;
  if (mode == StrainMode::Strained) {
    const double c = std::cos(k * d.z());
    return c * c;
  }
  const double s = 2.0 * (std::cos(k * d.x()) + std::cos(k * d.y()) + std::cos(k * d.z()));
  return s * s / 36.0;
}

double exchange_envelope(double distance_nm, double prefactor_mhz, double bohr_radius_nm) {
  const double x = distance_nm / bohr_radius_nm;
  return prefactor_mhz * std::pow(x, 2.5) * std::exp(-2.0 * x);
}

double exchange_value(const Eigen::Vector3d& displacement_nm, const ExchangeModelParams& model) {
  model.validate();
  const double d = displacement_nm.norm();
  if (!(d >= kMinSeparationNm)) {
    throw std::domain_error("donor separation below the exchange model validity floor");
  }
  return exchange_envelope(d, model.prefactor_mhz, model.bohr_radius_nm) *
         valley_factor(displacement_nm, model.mode, model.valley_k0);
}

ExchangeDistribution exchange_distribution(double separation_nm, const ExchangeModelParams& model) {
  if (!(separation_nm >= kMinSeparationNm)) {
    throw std::domain_error("nominal separation below the exchange model validity floor");
  }
  const auto pairs = enumerate_pair_offsets();
  ExchangeDistribution dist;
  dist.separation_nm = separation_nm;
  for (const auto& cls : symmetry_classes(pairs)) {
    const Eigen::Vector3d d = pair_displacement(separation_nm, cls.rel_dx, cls.rel_dy, model.axis);
    dist.entries.push_back({cls, exchange_value(d, model)});
  }
  return dist;
}

CalibratedModels calibrate(const ExchangeModelFamily& family, const CalibrationConstraints& c) {
  auto fail = [](const std::string& msg) { throw std::invalid_argument("exchange calibration infeasible: " + msg); };
  if (!(family.strained_bohr_radius_nm > 0.0 && family.unstrained_bohr_radius_nm > 0.0)) fail("Bohr radii must be positive");
  if (!(c.anchor_j_mhz >= c.min_anchor_j_mhz)) fail("anchor exchange below the required minimum");
  // The envelope peaks at 1.25 a_B; beyond that it decreases monotonically.
  const double min_d = std::min({c.match_strained_nm, c.match_unstrained_nm, c.anchor_nm});
  if (!(min_d > 1.25 * std::max(family.strained_bohr_radius_nm, family.unstrained_bohr_radius_nm))) {
    fail("constraint separations fall inside the rising part of the envelope");
  }

  CalibratedModels out;
  out.strained = {StrainMode::Strained, 1.0, family.strained_bohr_radius_nm, family.valley_k0, family.axis};
  out.unstrained = {StrainMode::Unstrained, 1.0, family.unstrained_bohr_radius_nm, family.valley_k0, family.axis};

  out.strained.prefactor_mhz = c.anchor_j_mhz / exchange_envelope(c.anchor_nm, 1.0, family.strained_bohr_radius_nm);
  const double j_match = exchange_envelope(c.match_strained_nm, out.strained.prefactor_mhz, family.strained_bohr_radius_nm);
  out.unstrained.prefactor_mhz = j_match / exchange_envelope(c.match_unstrained_nm, 1.0, family.unstrained_bohr_radius_nm);
  out.strained.validate();
  out.unstrained.validate();

  const double ratio = j_match / exchange_envelope(c.match_unstrained_nm, out.unstrained.prefactor_mhz,
                                                   out.unstrained.bohr_radius_nm);
  if (!(ratio <= c.max_match_ratio && ratio >= 1.0 / c.max_match_ratio)) fail("strain equivalence not met");
  for (double sep : c.spread_separations_nm) {
    if (!(exchange_distribution(sep, out.strained).spread() <= c.max_strained_spread)) {
      fail("strained spread too large at " + std::to_string(sep) + " nm");
    }
  }
  return out;
}

CalibratedModels default_models() { return calibrate(ExchangeModelFamily{}, CalibrationConstraints{}); }

}  // namespace donorcnot
