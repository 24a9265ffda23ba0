#include "donorcnot/io.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

namespace donorcnot {

std::string format_number(double x) {
  if (x == 0.0) return "0";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.12g", x);
  return buf;
}

nlohmann::json read_json_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  try {
    return nlohmann::json::parse(ss.str());
  } catch (const nlohmann::json::parse_error& e) {
    throw std::invalid_argument(path.string() + ": " + e.what());
  }
}

void write_text_file(const std::filesystem::path& path, const std::string& text) {
  std::error_code ec;
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path(), ec);
  if (ec) throw IoError("cannot create " + path.parent_path().string() + ": " + ec.message());
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot write " + path.string());
  out << text;
  out.flush();
  if (!out) throw IoError("write failed for " + path.string());
}

namespace {

// Replaces every float by its 12-digit rendering so the dump is stable.
nlohmann::json rounded(const nlohmann::json& j) {
  if (j.is_number_float()) {
    const double x = j.get<double>();
    if (!std::isfinite(x)) return nullptr;
    return std::stod(format_number(x));
  }
  if (j.is_array() || j.is_object()) {
    nlohmann::json out = j;
    for (auto it = out.begin(); it != out.end(); ++it) *it = rounded(*it);
    return out;
  }
  return j;
}

}  // namespace

std::string dump_json(const nlohmann::json& j) { return rounded(j).dump(2) + "\n"; }

std::string exchange_csv(const ExchangeDistribution& dist) {
  std::string out = "class_id,rel_dx,rel_dy,multiplicity,j_mhz\n";
  for (std::size_t i = 0; i < dist.entries.size(); ++i) {
    const auto& e = dist.entries[i];
    out += std::to_string(i) + "," + std::to_string(e.cls.rel_dx) + "," + std::to_string(e.cls.rel_dy) + "," +
           std::to_string(e.cls.multiplicity) + "," + format_number(e.j_mhz) + "\n";
  }
  return out;
}

std::string spectrum_csv(const TransitionTable& table) {
  std::string out = "state_a,state_b,freq_offset_mhz,freq_lab_mhz,element,allowed\n";
  for (const auto& t : table.transitions) {
    out += std::to_string(t.state_a) + "," + std::to_string(t.state_b) + "," + format_number(t.offset_mhz) + "," +
           format_number(table.lab_frequency(t)) + "," + format_number(t.element) + "," +
           (t.allowed ? "true" : "false") + "\n";
  }
  return out;
}

std::string sweep_csv(const std::vector<FidelityReport>& reports) {
  std::string out = "j_tc_mhz,j_cc_mhz,fidelity,iterations,converged\n";
  for (const auto& r : reports) {
    out += format_number(r.j_tc_mhz) + "," + format_number(r.j_cc_mhz) + "," + format_number(r.final_fidelity) + "," +
           std::to_string(r.iterations) + "," + (r.converged ? "true" : "false") + "\n";
  }
  return out;
}

}  // namespace donorcnot
