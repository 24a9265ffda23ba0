#include "cli.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <optional>

#include "CLI11.hpp"

#include "donorcnot/exchange.hpp"
#include "donorcnot/grape.hpp"
#include "donorcnot/io.hpp"
#include "donorcnot/protocol.hpp"
#include "donorcnot/scheduler.hpp"
#include "donorcnot/spectra.hpp"

namespace donorcnot::cli {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

// Exchange grid: target-coupler values from the closer pair, coupler-control
// values from the farther one.
constexpr double kTargetCouplerNm = 14.0;
constexpr double kCouplerControlNm = 18.0;

struct Settings {
  DeviceParams device;
  CalibratedModels models = default_models();
  GrapeConfig grape;
  fs::path out_dir = ".";
  std::uint64_t seed = 1;
};

fs::path resolve(const fs::path& base, const std::string& p) {
  const fs::path path(p);
  return path.is_absolute() ? path : base / path;
}

// Settings from a run-configuration file referencing the device, exchange
// model and GRAPE files; relative paths are taken from the file's directory.
Settings load_settings(const std::string& config_path) {
  Settings s;
  s.seed = s.grape.seed;
  if (config_path.empty()) return s;
  const json cfg = read_json_file(config_path);
  if (!cfg.is_object()) throw std::invalid_argument("run config must be a JSON object");
  const fs::path base = fs::path(config_path).parent_path();
  if (cfg.contains("device_file")) s.device = read_json_file(resolve(base, cfg.at("device_file"))).get<DeviceParams>();
  if (cfg.contains("exchange_model_file")) {
    const json m = read_json_file(resolve(base, cfg.at("exchange_model_file")));
    auto merge = [&](const char* key, ExchangeModelParams& target) {
      if (!m.contains(key)) return;
      json j = target;
      j.update(m.at(key));
      target = j.get<ExchangeModelParams>();
    };
    merge("strained", s.models.strained);
    merge("unstrained", s.models.unstrained);
  }
  if (cfg.contains("grape_file")) s.grape = read_json_file(resolve(base, cfg.at("grape_file"))).get<GrapeConfig>();
  if (cfg.contains("output_dir")) s.out_dir = resolve(base, cfg.at("output_dir"));
  s.seed = cfg.value("seed", s.grape.seed);
  return s;
}

std::vector<double> sorted_values(const ExchangeDistribution& d) {
  std::vector<double> v = d.values();
  std::sort(v.begin(), v.end());
  return v;
}

std::vector<ExchangePair> default_grid(const Settings& s) {
  const auto tc = sorted_values(exchange_distribution(kTargetCouplerNm, s.models.strained));
  const auto cc = sorted_values(exchange_distribution(kCouplerControlNm, s.models.strained));
  return exchange_grid(tc, cc);
}

DeviceParams with_exchange(DeviceParams d, double jtc, double jcc) {
  d.j_tc_mhz = jtc;
  d.j_cc_mhz = jcc;
  d.validate();
  return d;
}

json report_json(const FidelityReport& r) {
  // Wall time is left out so reruns produce identical files.
  return {{"final_fidelity", r.final_fidelity},
          {"iterations", r.iterations},
          {"converged", r.converged},
          {"j_tc_mhz", r.j_tc_mhz},
          {"j_cc_mhz", r.j_cc_mhz}};
}

PureState qubit(double a0, double a1) { return PureState::normalized((ComplexVector(2) << a0, a1).finished()); }

json state_json(const PureState& s) {
  json arr = json::array();
  for (Eigen::Index i = 0; i < s.dim(); ++i) arr.push_back({s[i].real(), s[i].imag()});
  return arr;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& log) {
  CLI::App app{"Triple-donor CNOT simulator: exchange statistics, spectra, pulse synthesis, scheduling"};
  app.require_subcommand(1);
  app.fallthrough();

  std::string config_path;
  std::optional<std::uint64_t> seed;
  int jobs = 1;
  std::optional<std::string> out_dir;
  app.add_option("--config", config_path, "Run configuration JSON");
  app.add_option("--seed", seed, "Seed (overrides the configuration)");
  app.add_option("--jobs", jobs, "Worker threads for sweeps")->check(CLI::PositiveNumber);
  app.add_option("--out", out_dir, "Output directory");

  double separation = 14.0;
  std::string axis = "100";
  std::string mode = "strained";
  auto* exchange_cmd = app.add_subcommand("exchange-dist", "Exchange over the 15 placement classes");
  exchange_cmd->add_option("--separation", separation, "Nominal separation (nm)");
  exchange_cmd->add_option("--axis", axis, "Inter-donor axis: 100 or 110");
  exchange_cmd->add_option("--mode", mode, "strained or unstrained");

  double j_tc = 0.0;
  double j_cc = 0.0;
  bool grid = false;
  double threshold = kDefaultElementThreshold;
  auto* spectrum_cmd = app.add_subcommand("spectrum", "Transition table of the electron drift");
  spectrum_cmd->add_option("--j-tc", j_tc, "Target-coupler exchange (MHz)");
  spectrum_cmd->add_option("--j-cc", j_cc, "Coupler-control exchange (MHz)");
  spectrum_cmd->add_flag("--grid", grid, "All pairs of the exchange grid, one long CSV");
  spectrum_cmd->add_option("--threshold", threshold, "Allowed-element threshold relative to the largest");

  auto* grape_cmd = app.add_subcommand("grape", "Optimize one CNOT pulse");
  grape_cmd->add_option("--j-tc", j_tc, "Target-coupler exchange (MHz)")->required();
  grape_cmd->add_option("--j-cc", j_cc, "Coupler-control exchange (MHz)")->required();

  auto* sweep_cmd = app.add_subcommand("sweep", "Optimize pulses over the exchange grid");

  double tolerance = 1.0;
  double broadband = 0.0;
  std::optional<double> edge_p;
  int n_nodes = 225;
  auto* schedule_cmd = app.add_subcommand("schedule", "Concurrent pulse rounds from frequency collisions");
  schedule_cmd->add_option("--tolerance", tolerance, "Collision tolerance (MHz)");
  schedule_cmd->add_option("--broadband-tolerance", broadband, "Ignore collisions closer than this (MHz)");
  schedule_cmd->add_option("--p", edge_p, "Use a random conflict graph with this edge probability");
  schedule_cmd->add_option("--n", n_nodes, "Node count of the random graph");

  double est_p = 0.3;
  int trials = 1000;
  auto* estimate_cmd = app.add_subcommand("estimate", "Monte Carlo first-round size on random conflict graphs");
  estimate_cmd->add_option("--n", n_nodes, "Node count");
  estimate_cmd->add_option("--p", est_p, "Edge probability");
  estimate_cmd->add_option("--trials", trials, "Number of random graphs");

  std::string pulse_path;
  std::optional<double> verify_jtc;
  std::optional<double> verify_jcc;
  auto* verify_cmd = app.add_subcommand("protocol-verify", "Run the full protocol on the truth-table inputs");
  verify_cmd->add_option("--pulse", pulse_path, "Pulse JSON from the grape command (ideal CNOT if omitted)");
  verify_cmd->add_option("--j-tc", verify_jtc, "Target-coupler exchange for the pulse drift (MHz)");
  verify_cmd->add_option("--j-cc", verify_jcc, "Coupler-control exchange for the pulse drift (MHz)");

  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());

  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::CallForHelp& e) {
    log << app.help();
    return kExitOk;
  } catch (const CLI::CallForAllHelp& e) {
    log << app.help("", CLI::AppFormatMode::All);
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    log << "error: " << e.what() << "\n";
    return kExitConfig;
  }

  try {
    Settings s = load_settings(config_path);
    if (seed) s.seed = *seed;
    if (out_dir) s.out_dir = *out_dir;
    s.grape.seed = s.seed;
    s.device.validate();

    if (exchange_cmd->parsed()) {
      ExchangeModelParams model = parse_strain_mode(mode) == StrainMode::Strained ? s.models.strained
                                                                                   : s.models.unstrained;
      model.axis = parse_crystal_axis(axis);
      const ExchangeDistribution d = exchange_distribution(separation, model);
      write_text_file(s.out_dir / "exchange_dist.csv", exchange_csv(d));
      log << "classes: " << d.entries.size() << ", spread: " << format_number(d.spread()) << "\n";
      return kExitOk;
    }

    if (spectrum_cmd->parsed()) {
      const NuclearConfig nuclei = post_swap_nuclear_config();
      if (!grid) {
        const TransitionTable t = transition_table(with_exchange(s.device, j_tc, j_cc), nuclei, threshold);
        write_text_file(s.out_dir / "spectrum.csv", spectrum_csv(t));
        log << "transitions: " << t.transitions.size() << ", allowed: " << t.allowed_count()
            << ", lines: " << allowed_lines(t).size() << "\n";
        return kExitOk;
      }
      std::string csv = "j_tc_mhz,j_cc_mhz,state_a,state_b,freq_offset_mhz,freq_lab_mhz,element,allowed\n";
      const auto pairs = default_grid(s);
      for (const auto& p : pairs) {
        const TransitionTable t = transition_table(with_exchange(s.device, p.j_tc_mhz, p.j_cc_mhz), nuclei, threshold);
        const std::string body = spectrum_csv(t);
        const std::string prefix = format_number(p.j_tc_mhz) + "," + format_number(p.j_cc_mhz) + ",";
        std::size_t pos = body.find('\n') + 1;
        while (pos < body.size()) {
          const std::size_t end = body.find('\n', pos);
          csv += prefix + body.substr(pos, end - pos + 1);
          pos = end + 1;
        }
      }
      write_text_file(s.out_dir / "spectrum_grid.csv", csv);
      log << "pairs: " << pairs.size() << "\n";
      return kExitOk;
    }

    if (grape_cmd->parsed()) {
      const DeviceParams device = with_exchange(s.device, j_tc, j_cc);
      const NuclearConfig nuclei = post_swap_nuclear_config();
      const HermitianOperator drift = electron_drift(device, nuclei);
      const auto carriers = carriers_for(device, nuclei);
      GrapeResult r = optimize(s.grape, drift, carriers);
      r.report.j_tc_mhz = j_tc;
      r.report.j_cc_mhz = j_cc;
      json pulse = r.pulse;
      pulse["j_tc_mhz"] = j_tc;
      pulse["j_cc_mhz"] = j_cc;
      pulse["micro_steps_per_segment"] = s.grape.micro_steps_per_segment;
      pulse["report"] = report_json(r.report);
      write_text_file(s.out_dir / "pulse.json", dump_json(pulse));
      write_text_file(s.out_dir / "grape_report.csv", sweep_csv({r.report}));
      log << "fidelity " << format_number(r.report.final_fidelity) << " after " << r.report.iterations
          << " iterations (" << (r.report.converged ? "converged" : "not converged") << ", "
          << format_number(r.report.wall_time_s) << " s)\n";
      return kExitOk;
    }

    if (sweep_cmd->parsed()) {
      const auto pairs = default_grid(s);
      SweepOptions opt;
      opt.device = s.device;
      opt.nuclei = post_swap_nuclear_config();
      opt.jobs = jobs;
      const auto reports = sweep(pairs, s.grape, opt);
      write_text_file(s.out_dir / "sweep.csv", sweep_csv(reports));
      const auto below = std::count_if(reports.begin(), reports.end(), [](const auto& r) { return !r.converged; });
      log << "pairs: " << reports.size() << ", below target: " << below << "\n";
      return kExitOk;
    }

    if (schedule_cmd->parsed()) {
      OverlapGraph g;
      json doc;
      if (edge_p) {
        g = random_conflict_graph(n_nodes, *edge_p, s.seed);
        doc["source"] = "random";
        doc["p"] = *edge_p;
      } else {
        const NuclearConfig nuclei = post_swap_nuclear_config();
        std::vector<std::vector<double>> freqs;
        for (const auto& p : default_grid(s)) {
          freqs.push_back(carriers_for(with_exchange(s.device, p.j_tc_mhz, p.j_cc_mhz), nuclei));
        }
        g = build_overlap_graph(freqs, {tolerance, broadband});
        doc["source"] = "exchange_grid";
        doc["tolerance_mhz"] = tolerance;
        doc["broadband_tolerance_mhz"] = broadband;
      }
      const ParallelPlan plan = greedy_parallel_sets(g, s.seed);
      doc["n_nodes"] = g.n_nodes();
      doc["edge_count"] = g.edge_count();
      doc["density"] = g.density();
      doc["first_round_size"] = plan.rounds.empty() ? 0 : plan.rounds.front().size();
      doc["rounds"] = plan.rounds;
      write_text_file(s.out_dir / "schedule.json", dump_json(doc));
      log << "nodes: " << g.n_nodes() << ", edge density: " << format_number(g.density())
          << ", rounds: " << plan.rounds.size() << "\n";
      return kExitOk;
    }

    if (estimate_cmd->parsed()) {
      const ParallelismEstimate e = estimate_parallelism(n_nodes, est_p, trials, s.seed);
      write_text_file(s.out_dir / "estimate.json", dump_json(json(e)));
      log << "mean first-round size " << format_number(e.mean) << " (std " << format_number(e.stddev) << ")\n";
      return kExitOk;
    }

    if (verify_cmd->parsed()) {
      ProtocolOptions pulse_opt;
      double threshold_overlap = 1.0 - 1e-12;
      json doc;
      if (!pulse_path.empty()) {
        const json pj = read_json_file(pulse_path);
        PulseGate gate;
        gate.pulse = pj.get<PulseSequence>();
        gate.device = with_exchange(s.device, verify_jtc.value_or(pj.value("j_tc_mhz", 0.0)),
                                    verify_jcc.value_or(pj.value("j_cc_mhz", 0.0)));
        gate.micro_steps_per_segment = pj.value("micro_steps_per_segment", s.grape.micro_steps_per_segment);
        pulse_opt.pulse = gate;
        pulse_opt.unload_tolerance = 1e-2;
        threshold_overlap = 0.998;
        doc["mode"] = "pulse";
        doc["j_tc_mhz"] = gate.device.j_tc_mhz;
        doc["j_cc_mhz"] = gate.device.j_cc_mhz;
      } else {
        doc["mode"] = "ideal";
      }
      doc["overlap_threshold"] = threshold_overlap;

      struct Input {
        std::string label;
        PureState t;
        PureState c;
      };
      const double r = 1.0 / std::sqrt(2.0);
      const std::vector<Input> inputs{{"|00>", qubit(1, 0), qubit(1, 0)},   {"|01>", qubit(1, 0), qubit(0, 1)},
                                      {"|10>", qubit(0, 1), qubit(1, 0)},   {"|11>", qubit(0, 1), qubit(0, 1)},
                                      {"|0+>", qubit(1, 0), qubit(r, r)},   {"|++>", qubit(r, r), qubit(r, r)}};
      bool all_pass = true;
      json results = json::array();
      for (const auto& in : inputs) {
        const ProtocolResult ideal = run_protocol(in.t, in.c);
        const ProtocolResult actual = pulse_opt.pulse ? run_protocol(in.t, in.c, pulse_opt) : ideal;
        const double data_overlap = overlap_probability(ideal_data_output(in.t, in.c), actual.data);
        const double overlap = overlap_probability(ideal.final_state.reg, actual.final_state.reg);
        const bool pass = overlap >= threshold_overlap && data_overlap >= threshold_overlap;
        all_pass = all_pass && pass;
        json trace = json::array();
        for (const auto& t : actual.trace) trace.push_back(t);
        results.push_back({{"input", in.label},
                           {"expected", state_json(ideal_data_output(in.t, in.c))},
                           {"output", state_json(actual.data)},
                           {"overlap", overlap},
                           {"data_overlap", data_overlap},
                           {"unload_residual", actual.unload_residual},
                           {"pass", pass},
                           {"trace", trace}});
        log << in.label << " overlap " << format_number(overlap) << (pass ? " pass" : " FAIL") << "\n";
      }
      doc["inputs"] = results;
      doc["all_pass"] = all_pass;
      write_text_file(s.out_dir / "protocol.json", dump_json(doc));
      return all_pass ? kExitOk : kExitCheckFailed;
    }
  } catch (const IoError& e) {
    log << "I/O error: " << e.what() << "\n";
    return kExitIo;
  } catch (const ProtocolError& e) {
    log << "protocol error: " << e.what() << "\n";
    return kExitCheckFailed;
  } catch (const nlohmann::json::exception& e) {
    log << "config error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const std::logic_error& e) {
    // invalid_argument, domain_error and out_of_range all signal bad input.
    log << "config error: " << e.what() << "\n";
    return kExitConfig;
  }
  return kExitConfig;
}

}  // namespace donorcnot::cli
