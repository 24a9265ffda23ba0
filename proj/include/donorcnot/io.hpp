#pragma once

// File output shared by the command-line tool: numbers are written with 12
// significant digits so that reruns can be compared byte for byte.

#include <filesystem>
#include <stdexcept>
#include <string>
#include <vector>

#include "json.hpp"

#include "donorcnot/exchange.hpp"
#include "donorcnot/grape.hpp"
#include "donorcnot/spectra.hpp"

namespace donorcnot {

class IoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// %.12g, with "-0" normalized to "0".
std::string format_number(double x);

/// Parsed JSON file. Throws IoError if unreadable; std::invalid_argument if
/// the text is not JSON.
nlohmann::json read_json_file(const std::filesystem::path& path);

/// Writes text atomically enough for our purposes (truncate + write).
/// Creates missing parent directories. Throws IoError on failure.
void write_text_file(const std::filesystem::path& path, const std::string& text);

/// Pretty-printed JSON with numbers rounded through format_number.
std::string dump_json(const nlohmann::json& j);

/// class_id,rel_dx,rel_dy,multiplicity,j_mhz
std::string exchange_csv(const ExchangeDistribution& dist);

/// state_a,state_b,freq_offset_mhz,freq_lab_mhz,element,allowed
std::string spectrum_csv(const TransitionTable& table);

/// j_tc_mhz,j_cc_mhz,fidelity,iterations,converged
std::string sweep_csv(const std::vector<FidelityReport>& reports);

}  // namespace donorcnot
