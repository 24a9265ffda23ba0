#include <filesystem>
#include <fstream>
#include <sstream>

#include <unistd.h>

#include "doctest.h"
#include "json.hpp"

#include "cli.hpp"

namespace fs = std::filesystem;

namespace {

struct TempDir {
  fs::path path;
  TempDir() {
    static int counter = 0;
    path = fs::temp_directory_path() / ("donorcnot_cli_" + std::to_string(::getpid()) + "_" + std::to_string(counter++));
    fs::remove_all(path);
    fs::create_directories(path);
  }
  ~TempDir() { fs::remove_all(path); }
};

int run(std::vector<std::string> args, std::string* log_out = nullptr) {
  args.insert(args.begin(), "donorcnot");
  std::ostringstream log;
  const int code = donorcnot::cli::run(args, log);
  if (log_out) *log_out = log.str();
  return code;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

std::vector<std::string> lines(const std::string& text) {
  std::vector<std::string> out;
  std::istringstream in(text);
  for (std::string l; std::getline(in, l);) out.push_back(l);
  return out;
}

void write(const fs::path& p, const std::string& text) { std::ofstream(p) << text; }

}  // namespace

TEST_SUITE("cli") {

TEST_CASE("exchange-dist writes the 15 classes") {
  TempDir d;
  REQUIRE(run({"--out", d.path.string(), "exchange-dist", "--separation", "14"}) == 0);
  const auto rows = lines(slurp(d.path / "exchange_dist.csv"));
  REQUIRE(rows.size() == 16);
  CHECK(rows[0] == "class_id,rel_dx,rel_dy,multiplicity,j_mhz");
  REQUIRE(run({"--out", d.path.string(), "exchange-dist", "--separation", "14", "--mode", "unstrained"}) == 0);
  CHECK(lines(slurp(d.path / "exchange_dist.csv")).size() == 16);
}

TEST_CASE("spectrum, single pair and grid") {
  TempDir d;
  REQUIRE(run({"--out", d.path.string(), "spectrum", "--j-tc", "30", "--j-cc", "10"}) == 0);
  const auto rows = lines(slurp(d.path / "spectrum.csv"));
  CHECK(rows.size() == 29);
  CHECK(rows[0] == "state_a,state_b,freq_offset_mhz,freq_lab_mhz,element,allowed");
  REQUIRE(run({"--out", d.path.string(), "spectrum", "--grid"}) == 0);
  const auto grid = lines(slurp(d.path / "spectrum_grid.csv"));
  CHECK(grid.size() == 1 + 225 * 28);
  CHECK(grid[0].rfind("j_tc_mhz,j_cc_mhz,", 0) == 0);
}

TEST_CASE("estimate and schedule") {
  TempDir d;
  REQUIRE(run({"--out", d.path.string(), "--seed", "5", "estimate", "--n", "225", "--p", "0.3", "--trials", "20"}) == 0);
  const auto e = nlohmann::json::parse(slurp(d.path / "estimate.json"));
  CHECK(e.at("trials") == 20);
  CHECK(e.at("mean").get<double>() > 5.0);
  REQUIRE(run({"--out", d.path.string(), "schedule", "--p", "0.2", "--n", "50"}) == 0);
  const auto s = nlohmann::json::parse(slurp(d.path / "schedule.json"));
  CHECK(s.at("n_nodes") == 50);
  std::size_t covered = 0;
  for (const auto& r : s.at("rounds")) covered += r.size();
  CHECK(covered == 50);
  REQUIRE(run({"--out", d.path.string(), "schedule"}) == 0);
  CHECK(nlohmann::json::parse(slurp(d.path / "schedule.json")).at("n_nodes") == 225);
}

TEST_CASE("protocol-verify with the ideal gate") {
  TempDir d;
  REQUIRE(run({"--out", d.path.string(), "protocol-verify"}) == 0);
  const auto doc = nlohmann::json::parse(slurp(d.path / "protocol.json"));
  CHECK(doc.at("all_pass") == true);
  CHECK(doc.at("inputs").size() == 6);
}

TEST_CASE("configuration files, grape, sweep and reproducibility") {
  TempDir d;
  write(d.path / "grape.json",
        R"({"n_segments": 4, "total_time_us": 0.1, "max_iterations": 2, "micro_steps_per_segment": 4})");
  write(d.path / "device.json", R"({"b_field_tesla": 1.0})");
  write(d.path / "run.json",
        R"({"device_file": "device.json", "grape_file": "grape.json", "output_dir": "out", "seed": 11})");
  const std::string cfg = (d.path / "run.json").string();

  REQUIRE(run({"--config", cfg, "grape", "--j-tc", "30", "--j-cc", "10"}) == 0);
  const std::string pulse = slurp(d.path / "out" / "pulse.json");
  const auto pj = nlohmann::json::parse(pulse);
  CHECK(pj.at("n_segments") == 4);
  CHECK(pj.at("report").at("iterations").get<int>() <= 2);
  REQUIRE(run({"--config", cfg, "grape", "--j-tc", "30", "--j-cc", "10"}) == 0);
  CHECK(slurp(d.path / "out" / "pulse.json") == pulse);

  write(d.path / "grape0.json", R"({"n_segments": 2, "total_time_us": 0.05, "max_iterations": 0, "micro_steps_per_segment": 2})");
  write(d.path / "run0.json", R"({"grape_file": "grape0.json", "output_dir": "out0"})");
  const std::string cfg0 = (d.path / "run0.json").string();
  REQUIRE(run({"--config", cfg0, "--jobs", "3", "sweep"}) == 0);
  const std::string sweep = slurp(d.path / "out0" / "sweep.csv");
  CHECK(lines(sweep).size() == 226);
  REQUIRE(run({"--config", cfg0, "--jobs", "1", "sweep"}) == 0);
  CHECK(slurp(d.path / "out0" / "sweep.csv") == sweep);

  // A pulse that is far from the CNOT fails verification with exit code 1.
  CHECK(run({"--out", d.path.string(), "protocol-verify", "--pulse", (d.path / "out" / "pulse.json").string()}) == 1);
}

TEST_CASE("errors map to exit codes") {
  TempDir d;
  std::string log;
  CHECK(run({"no-such-command"}, &log) == 2);
  CHECK(run({"grape", "--j-tc", "1"}) == 2);
  CHECK(run({"--out", d.path.string(), "exchange-dist", "--separation", "1"}) == 2);
  CHECK(run({"--out", d.path.string(), "exchange-dist", "--mode", "bent"}) == 2);
  CHECK(run({"--config", (d.path / "missing.json").string(), "estimate"}) == 3);
  write(d.path / "bad.json", "{not json");
  CHECK(run({"--config", (d.path / "bad.json").string(), "estimate"}) == 2);
  write(d.path / "blocker", "x");
  CHECK(run({"--out", (d.path / "blocker").string(), "estimate", "--trials", "2"}, &log) == 3);
  CHECK(log.find("I/O error") != std::string::npos);
  CHECK(run({"--help"}) == 0);
}

}  // TEST_SUITE
