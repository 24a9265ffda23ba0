#include "donorcnot/hamiltonian.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>

#include "json.hpp"

namespace donorcnot {

std::string to_string(Spin s) { return s == Spin::Up ? "up" : "down"; }

std::string to_string(const NuclearConfig& n) {
  return "(" + to_string(n.spins[0]) + ", " + to_string(n.spins[1]) + ", " + to_string(n.spins[2]) + ")";
}

void DeviceParams::validate() const {
  auto fail = [](const std::string& msg) { throw std::invalid_argument("device params: " + msg); };
  if (!(b_field_tesla > 0.0)) fail("b_field_tesla must be positive");
  if (!(gamma_e_mhz_per_t > 0.0)) fail("gamma_e_mhz_per_t must be positive");
  if (!std::isfinite(gamma_n_mhz_per_t)) fail("gamma_n_mhz_per_t must be finite");
  if (!(a_target_mhz > 0.0 && a_coupler_mhz > 0.0 && a_control_mhz > 0.0)) {
    fail("hyperfine constants must be positive");
  }
  if (!(j_tc_mhz >= 0.0 && j_cc_mhz >= 0.0)) fail("exchange constants must be non-negative");
  const double largest = std::max({a_target_mhz, a_coupler_mhz, a_control_mhz, j_tc_mhz, j_cc_mhz});
  if (!(electron_zeeman_mhz() > 100.0 * largest)) {
    fail("electron Zeeman splitting must exceed 100x the largest hyperfine/exchange constant");
  }
}

void to_json(nlohmann::json& j, const DeviceParams& p) {
  j = nlohmann::json{{"b_field_tesla", p.b_field_tesla},
                     {"gamma_e_mhz_per_t", p.gamma_e_mhz_per_t},
                     {"gamma_n_mhz_per_t", p.gamma_n_mhz_per_t},
                     {"a_t_mhz", p.a_target_mhz},
                     {"a_c_coupler_mhz", p.a_coupler_mhz},
                     {"a_c_control_mhz", p.a_control_mhz},
                     {"j_tc_mhz", p.j_tc_mhz},
                     {"j_cc_mhz", p.j_cc_mhz}};
}

void from_json(const nlohmann::json& j, DeviceParams& p) {
  // Missing keys keep their defaults so partial override files work.
  DeviceParams out;
  out.b_field_tesla = j.value("b_field_tesla", out.b_field_tesla);
  out.gamma_e_mhz_per_t = j.value("gamma_e_mhz_per_t", out.gamma_e_mhz_per_t);
  out.gamma_n_mhz_per_t = j.value("gamma_n_mhz_per_t", out.gamma_n_mhz_per_t);
  out.a_target_mhz = j.value("a_t_mhz", out.a_target_mhz);
  out.a_coupler_mhz = j.value("a_c_coupler_mhz", out.a_coupler_mhz);
  out.a_control_mhz = j.value("a_c_control_mhz", out.a_control_mhz);
  out.j_tc_mhz = j.value("j_tc_mhz", out.j_tc_mhz);
  out.j_cc_mhz = j.value("j_cc_mhz", out.j_cc_mhz);
  p = out;
}

HermitianOperator build_full(const DeviceParams& params) {
  params.validate();
  constexpr int n = site::kFullCount;
  using namespace site;
  HermitianOperator h = params.electron_zeeman_mhz() * total_pauli(PauliAxis::Z, {kTarget, kCoupler, kControl}, n);
  h += params.nuclear_zeeman_mhz() *
       total_pauli(PauliAxis::Z, {kNuclearTarget, kNuclearCoupler, kNuclearControl}, n);
  h += params.a_target_mhz * exchange_coupling(kTarget, kNuclearTarget, n);
  h += params.a_control_mhz * exchange_coupling(kControl, kNuclearControl, n);
  h += params.a_coupler_mhz * exchange_coupling(kCoupler, kNuclearCoupler, n);
  h += params.j_tc_mhz * exchange_coupling(kTarget, kCoupler, n);
  h += params.j_cc_mhz * exchange_coupling(kCoupler, kControl, n);
  return h;
}

HermitianOperator reduce_to_electron(const DeviceParams& params, const NuclearConfig& nuclei) {
  params.validate();
  constexpr int n = site::kElectronCount;
  const double zeeman = params.electron_zeeman_mhz();
  HermitianOperator h =
      (zeeman + params.a_target_mhz * z_value(nuclei.target())) * embed_pauli(PauliAxis::Z, site::kTarget, n);
  h += (zeeman + params.a_coupler_mhz * z_value(nuclei.coupler())) * embed_pauli(PauliAxis::Z, site::kCoupler, n);
  h += (zeeman + params.a_control_mhz * z_value(nuclei.control())) * embed_pauli(PauliAxis::Z, site::kControl, n);
  h += params.j_tc_mhz * exchange_coupling(site::kTarget, site::kCoupler, n);
  h += params.j_cc_mhz * exchange_coupling(site::kCoupler, site::kControl, n);
  return h;
}

HermitianOperator rotating_frame_drift(const HermitianOperator& h_e, double electron_zeeman_mhz) {
  if (h_e.dim() != kElectronDim) throw std::invalid_argument("rotating frame drift expects an 8x8 operator");
  return h_e - electron_zeeman_mhz * electron_total(PauliAxis::Z);
}

HermitianOperator electron_drift(const DeviceParams& params, const NuclearConfig& nuclei) {
  return rotating_frame_drift(reduce_to_electron(params, nuclei), params.electron_zeeman_mhz());
}

HermitianOperator control_generator(const ControlCarrier& carrier, double amplitude, double phase,
                                    double time_us) {
  if (!(carrier.max_amplitude_mhz > 0.0)) throw std::invalid_argument("carrier max amplitude must be positive");
  if (!(std::abs(amplitude) <= carrier.max_amplitude_mhz)) {
    throw std::invalid_argument("control amplitude exceeds the carrier bound");
  }
  const double theta = 2.0 * std::numbers::pi * carrier.frequency_mhz * time_us + phase;
  return amplitude * std::cos(theta) * electron_total(PauliAxis::X) +
         amplitude * std::sin(theta) * electron_total(PauliAxis::Y);
}

const HermitianOperator& electron_total(PauliAxis axis) {
  using namespace site;
  static const HermitianOperator x = total_pauli(PauliAxis::X, {kTarget, kCoupler, kControl}, kElectronCount);
  static const HermitianOperator y = total_pauli(PauliAxis::Y, {kTarget, kCoupler, kControl}, kElectronCount);
  static const HermitianOperator z = total_pauli(PauliAxis::Z, {kTarget, kCoupler, kControl}, kElectronCount);
  switch (axis) {
    case PauliAxis::X:
      return x;
    case PauliAxis::Y:
      return y;
    case PauliAxis::Z:
      break;
  }
  return z;
}

HermitianOperator full_total_z() {
  using namespace site;
  return total_pauli(PauliAxis::Z,
                     {kTarget, kCoupler, kControl, kNuclearTarget, kNuclearCoupler, kNuclearControl}, kFullCount);
}

}  // namespace donorcnot
