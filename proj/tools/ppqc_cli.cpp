// ppqc: run, batch, audit and validate privacy-preserving quantized averaging.
//
// Exit codes: 0 success, 1 config error, 2 nonconvergence or audit failure,
// 3 I/O error.

#include <CLI11.hpp>

#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <sstream>

#include "ppqc/config.hpp"
#include "ppqc/engine.hpp"
#include "ppqc/errors.hpp"
#include "ppqc/experiments.hpp"
#include "ppqc/privacy.hpp"

namespace fs = std::filesystem;
using namespace ppqc;

namespace {

enum Exit { kOk = 0, kConfig = 1, kFailure = 2, kIo = 3 };

struct Globals {
  std::string config_path;
  std::optional<std::uint64_t> seed;
  std::string out_dir = ".";
  std::size_t jobs = 1;
};

TrialConfig load_config(const Globals& g) {
  TrialConfig cfg = g.config_path.empty() ? TrialConfig{} : load_trial_config(g.config_path);
  if (g.seed) cfg.seed = *g.seed;
  return cfg;
}

void ensure_dir(const std::string& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw IoError("cannot create " + dir + ": " + ec.message());
}

template <typename Body>
void write_file(const fs::path& path, Body&& body) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write " + path.string());
  body(out);
  if (!out) throw IoError("write failed for " + path.string());
}

void print_report(std::ostream& out, const TrialReport& r) {
  auto opt = [](const std::optional<std::int64_t>& v) { return v ? std::to_string(*v) : std::string("none"); };
  out << "n=" << r.n << " m=" << r.m << " dmax=" << r.dmax << " average=" << r.average.num << '/'
      << r.average.den << '\n'
      << "convergence_round=" << opt(r.convergence_round) << " quiescence_round=" << opt(r.quiescence_round)
      << " bound=" << r.bound << '\n'
      << "tx_broadcast_as_one=" << r.tx_broadcast_as_one << " tx_broadcast_as_fanout=" << r.tx_broadcast_as_fanout
      << '\n'
      << "absorbed_mass=(" << r.absorbed_mass.y << ',' << r.absorbed_mass.z << ")"
      << " early_dominance_exceptions=" << r.early_dominance_exceptions << '\n';
}

int cmd_run(const Globals& g, const std::optional<std::string>& graph_override) {
  TrialConfig cfg = load_config(g);
  if (graph_override) cfg.graph_file = *graph_override;
  validate_config(cfg);
  const auto file_graph = load_config_graph(cfg);
  TrialOutcome t = run_trial(cfg, cfg.seed, file_graph);

  ensure_dir(g.out_dir);
  const fs::path dir(g.out_dir);
  write_file(dir / "trace.csv", [&](std::ostream& o) { write_trace_csv(o, t.result.trace); });
  write_file(dir / "messages.csv", [&](std::ostream& o) { write_message_log(o, t.result.trace); });
  write_file(dir / "graph.txt", [&](std::ostream& o) { write_edge_list(o, t.setup.graph); });
  write_file(dir / "replay.cfg", [&](std::ostream& o) {
    write_trial_config(o, replay_config(cfg, t.setup, fs::absolute(dir / "graph.txt").string()));
  });

  std::cout << "seed=" << t.setup.seed << '\n';
  print_report(std::cout, t.result.report);
  if (trial_failed(t.result.report)) {
    std::cerr << "trial failed: " << describe_failure(t.result.report) << '\n';
    return kFailure;
  }
  return kOk;
}

int cmd_batch(const Globals& g, std::optional<std::size_t> trials) {
  TrialConfig cfg = load_config(g);
  if (trials) cfg.trials = *trials;
  BatchSummary summary = run_batch(cfg, g.jobs);
  emit_round_metrics(summary, g.out_dir);

  std::cout << std::fixed << std::setprecision(2) << "trials=" << summary.rows.size()
            << " mean_convergence_round=" << summary.mean_convergence_round
            << " mean_quiescence_round=" << summary.mean_quiescence_round
            << " mean_tx_broadcast_as_one=" << summary.mean_tx_broadcast_as_one
            << " mean_tx_broadcast_as_fanout=" << summary.mean_tx_broadcast_as_fanout << '\n';
  if (summary.failed) {
    std::cerr << "trial " << *summary.failing_trial << " failed (replay with --seed " << *summary.failing_seed
              << "): " << summary.failure_detail << '\n';
    return kFailure;
  }
  return kOk;
}

int cmd_privacy_audit(const Globals& g, const std::optional<std::string>& graph_override,
                      const std::vector<std::string>& role_list, bool attack,
                      const std::vector<std::int64_t>& deltas) {
  TrialConfig cfg = load_config(g);
  if (graph_override) cfg.graph_file = *graph_override;
  if (!role_list.empty()) {
    cfg.roles.clear();
    for (const auto& text : role_list) {
      auto role = parse_role(text);
      if (!role) throw ConfigError("unknown role \"" + text + "\"");
      cfg.roles.push_back(*role);
    }
  }
  if (!cfg.graph_file) throw ConfigError("privacy-audit needs a graph file (--graph or graph_file)");
  if (cfg.roles.empty()) throw ConfigError("privacy-audit needs roles (--roles or roles)");
  validate_config(cfg);
  const auto file_graph = load_config_graph(cfg);
  if (cfg.roles.size() != file_graph->node_count()) {
    throw ConfigError("roles lists " + std::to_string(cfg.roles.size()) + " entries for a " +
                      std::to_string(file_graph->node_count()) + "-node graph");
  }

  const auto verdicts = classify_privacy(*file_graph, cfg.roles);
  std::cout << "node,classification,justification\n";
  for (const auto& v : verdicts)
    std::cout << v.target << ',' << to_string(v.classification) << ',' << v.justification << '\n';
  if (!attack) return kOk;

  TrialOutcome t = run_trial(cfg, cfg.seed, file_graph);
  if (trial_failed(t.result.report)) {
    std::cerr << "trial failed: " << describe_failure(t.result.report) << '\n';
    return kFailure;
  }
  std::vector<NodeId> coalition;
  for (NodeId j = 0; j < t.setup.roles.size(); ++j)
    if (t.setup.roles[j] == NodeRole::Curious) coalition.push_back(j);
  const ObservationLog log = coalition_observations(t.result.trace, coalition);
  const GroundTruth truth{&t.setup.graph, t.setup.schedules, t.setup.roles, simulation_options(cfg)};

  std::cout << "\ncoalition of " << coalition.size() << " curious nodes, log digest " << std::hex
            << std::setw(16) << std::setfill('0') << log.digest() << std::dec << std::setfill(' ') << '\n';
  for (const auto& v : verdicts) {
    std::cout << '\n';
    if (v.classification == PrivacyClass::Breached) {
      try {
        auto y0 = reconstruct_fully_surrounded(log, t.setup.graph, v.target, t.result.trace.dmax);
        std::cout << "reconstruction target=" << v.target << " recovered=" << y0
                  << " ground_truth=" << t.setup.initial_states[v.target] << '\n';
      } catch (const Error& e) {
        std::cout << "reconstruction target=" << v.target << " unavailable: " << e.what() << '\n';
      }
      continue;
    }
    const NodeId helper = v.private_neighbors.front();
    for (std::int64_t delta : deltas) {
      try {
        std::cout << format_witness(ambiguity_witness(t.result.trace, log, truth, v.target, helper, delta));
      } catch (const WitnessUnavailable& e) {
        std::cout << "witness target=" << v.target << " helper=" << helper << " delta=" << delta
                  << " unavailable: " << e.what() << '\n';
      }
    }
  }
  return kOk;
}

// One schedule per line, either "y0 : uy0,..." or "schedule.<j> = y0 : uy0,...".
int cmd_validate_schedule(const std::string& path, std::size_t dmax, const std::string& role_text) {
  auto role = parse_role(role_text);
  if (!role) throw ConfigError("unknown role \"" + role_text + "\"");
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path);

  std::string line;
  std::size_t line_no = 0, checked = 0, bad = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    if (auto eq = line.find('='); eq != std::string::npos) line = line.substr(eq + 1);
    SubstateSchedule s;
    try {
      s = parse_schedule(line);
    } catch (const Error& e) {
      throw ConfigError("line " + std::to_string(line_no) + ": " + e.what());
    }
    ++checked;
    const auto violations = validate_schedule(s, dmax, *role);
    if (violations.empty()) continue;
    ++bad;
    for (const auto& v : violations) {
      std::cout << "line " << line_no << ": " << to_string(v.constraint) << ": " << v.detail << '\n';
    }
  }
  std::cout << checked << " schedules checked, " << bad << " invalid\n";
  return bad ? kConfig : kOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Privacy-preserving quantized average consensus simulator"};
  app.require_subcommand(1);
  app.fallthrough();

  Globals g;
  std::uint64_t seed = 0;
  app.add_option("--config", g.config_path, "Trial configuration file");
  auto* seed_opt = app.add_option("--seed", seed, "Seed (master seed for batch, trial seed otherwise)");
  app.add_option("--out-dir", g.out_dir, "Output directory");
  app.add_option("--jobs", g.jobs, "Concurrent trials")->check(CLI::PositiveNumber);

  std::optional<std::string> graph;
  std::optional<std::size_t> trials;
  std::vector<std::string> roles;
  bool attack = false;
  std::vector<std::int64_t> deltas{1, 2, 3, 4};
  std::string schedule_path, role_text = "private";
  std::size_t dmax = 0;

  auto* run = app.add_subcommand("run", "Run one trial and write its full trace");
  run->add_option("--graph", graph, "Edge-list file");

  auto* batch = app.add_subcommand("batch", "Run a batch of trials and write aggregated CSVs");
  batch->add_option("--trials", trials, "Override the trial count");

  auto* audit = app.add_subcommand("privacy-audit", "Classify private nodes; optionally attack a trace");
  audit->add_option("--graph", graph, "Edge-list file");
  audit->add_option("--roles", roles, "Comma-separated roles (p, c, n)")->delimiter(',');
  audit->add_flag("--attack", attack, "Simulate and run the curious coalition's attacks");
  audit->add_option("--deltas", deltas, "Witness deltas")->delimiter(',');

  auto* validate = app.add_subcommand("validate-schedule", "Check a schedule file");
  validate->add_option("file", schedule_path, "Schedule file")->required();
  validate->add_option("--dmax", dmax, "Maximum out-degree")->required();
  validate->add_option("--role", role_text, "Role the schedules belong to");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e);
    return code == 0 ? kOk : kConfig;
  }
  if (*seed_opt) g.seed = seed;

  try {
    if (*run) return cmd_run(g, graph);
    if (*batch) return cmd_batch(g, trials);
    if (*audit) return cmd_privacy_audit(g, graph, roles, attack, deltas);
    if (*validate) return cmd_validate_schedule(schedule_path, dmax, role_text);
  } catch (const IoError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kIo;
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kConfig;
  } catch (const GraphFormatError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kConfig;
  } catch (const GenerationFailure& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kConfig;
  } catch (const InfeasibleSchedule& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kConfig;
  } catch (const InvalidSchedule& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kConfig;
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kFailure;
  }
  return kOk;
}
