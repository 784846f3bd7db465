#include "ppqc/experiments.hpp"

#include <algorithm>
#include <atomic>
#include <filesystem>
#include <fstream>
#include <mutex>
#include <ostream>
#include <sstream>
#include <thread>

#include "ppqc/errors.hpp"

namespace ppqc {

const std::vector<std::int64_t> kReferenceStates = {3,  25, -7, 14, 30, 9,  18, 0,  22, 11,
                                                    5,  27, 16, -2, 20, 13, 8,  24, 19, 13};

bool trial_failed(const TrialReport& report) {
  return report.aborted || !report.converged || !report.all_audits_pass();
}

std::string describe_failure(const TrialReport& report) {
  if (report.aborted) return "run aborted";
  if (!report.converged) return "no exact convergence before quiescence";
  std::pair<const char*, const AuditVerdict*> audits[] = {
      {"conservation", &report.conservation}, {"monotonicity", &report.monotonicity},
      {"leading_mass", &report.leading_mass}, {"absorption", &report.absorption},
      {"silence", &report.silence},           {"within_bound", &report.within_bound},
  };
  for (const auto& [name, verdict] : audits) {
    if (!verdict->ok) return std::string(name) + " audit: " + verdict->detail;
  }
  return {};
}

std::optional<Digraph> load_config_graph(const TrialConfig& cfg) {
  if (!cfg.graph_file) return std::nullopt;
  return load_edge_list(*cfg.graph_file);
}

SimulationOptions simulation_options(const TrialConfig& cfg) {
  return {cfg.max_rounds, cfg.quiescence_window};
}

TrialOutcome run_trial(const TrialConfig& cfg, std::uint64_t seed, const std::optional<Digraph>& file_graph) {
  TrialOutcome out;
  out.setup = instantiate_trial(cfg, seed, file_graph);
  out.result = run_simulation(out.setup.graph, out.setup.schedules, simulation_options(cfg));
  return out;
}

std::vector<RoundCounts> round_counts(const SimTrace& trace) {
  std::vector<RoundCounts> series;
  series.reserve(trace.rounds.size());
  for (const RoundRecord& r : trace.rounds) {
    series.push_back({r.broadcast_events, r.mass_transfers, r.transmitting_nodes,
                      trace.n ? static_cast<double>(r.converged_nodes) / static_cast<double>(trace.n) : 0.0});
  }
  return series;
}

void aggregate(BatchSummary& summary) {
  summary.series.clear();
  summary.mean_convergence_round = summary.mean_quiescence_round = 0.0;
  summary.mean_tx_broadcast_as_one = summary.mean_tx_broadcast_as_fanout = 0.0;
  if (summary.rows.empty()) return;

  double conv_sum = 0, quiet_sum = 0;
  std::size_t conv_count = 0, quiet_count = 0, longest = 0;
  for (const TrialRow& row : summary.rows) {
    if (row.report.convergence_round) {
      conv_sum += static_cast<double>(*row.report.convergence_round);
      ++conv_count;
    }
    if (row.report.quiescence_round) {
      quiet_sum += static_cast<double>(*row.report.quiescence_round);
      ++quiet_count;
    }
    summary.mean_tx_broadcast_as_one += static_cast<double>(row.report.tx_broadcast_as_one);
    summary.mean_tx_broadcast_as_fanout += static_cast<double>(row.report.tx_broadcast_as_fanout);
    longest = std::max(longest, row.series.size());
  }
  const double trials = static_cast<double>(summary.rows.size());
  if (conv_count) summary.mean_convergence_round = conv_sum / static_cast<double>(conv_count);
  if (quiet_count) summary.mean_quiescence_round = quiet_sum / static_cast<double>(quiet_count);
  summary.mean_tx_broadcast_as_one /= trials;
  summary.mean_tx_broadcast_as_fanout /= trials;

  summary.series.resize(longest);
  for (std::size_t k = 0; k < longest; ++k) {
    AveragedRound& avg = summary.series[k];
    avg.round = static_cast<std::int64_t>(k);
    for (const TrialRow& row : summary.rows) {
      if (k < row.series.size()) {
        const RoundCounts& c = row.series[k];
        avg.avg_broadcasts += static_cast<double>(c.broadcasts);
        avg.avg_mass_transfers += static_cast<double>(c.mass_transfers);
        avg.avg_transmitting_nodes += static_cast<double>(c.transmitting_nodes);
        avg.avg_converged_fraction += c.converged_fraction;
      } else if (!row.series.empty()) {
        // A finished trial stays silent at its last converged fraction.
        avg.avg_converged_fraction += row.series.back().converged_fraction;
      }
    }
    avg.avg_broadcasts /= trials;
    avg.avg_mass_transfers /= trials;
    avg.avg_transmitting_nodes /= trials;
    avg.avg_converged_fraction /= trials;
  }
}

BatchSummary run_batch(const TrialConfig& cfg, std::size_t jobs) {
  validate_config(cfg);
  const std::optional<Digraph> file_graph = load_config_graph(cfg);

  BatchSummary summary;
  summary.rows.resize(cfg.trials);
  std::vector<std::string> errors(cfg.trials);
  std::atomic<std::size_t> next{0};

  auto worker = [&] {
    for (std::size_t i = next++; i < cfg.trials; i = next++) {
      TrialRow& row = summary.rows[i];
      row.trial = i;
      row.seed = trial_seed(cfg.seed, i);
      try {
        TrialOutcome outcome = run_trial(cfg, row.seed, file_graph);
        row.report = std::move(outcome.result.report);
        row.series = round_counts(outcome.result.trace);
      } catch (const ConfigError&) {
        throw;
      } catch (const Error& e) {
        errors[i] = e.what();
        row.report.aborted = true;
      }
    }
  };

  jobs = std::clamp<std::size_t>(jobs, 1, cfg.trials);
  if (jobs == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    std::exception_ptr first_error;
    std::mutex error_lock;
    for (std::size_t t = 0; t < jobs; ++t) {
      pool.emplace_back([&] {
        try {
          worker();
        } catch (...) {
          std::lock_guard lock(error_lock);
          if (!first_error) first_error = std::current_exception();
          next = cfg.trials;
        }
      });
    }
    for (auto& th : pool) th.join();
    if (first_error) std::rethrow_exception(first_error);
  }

  for (const TrialRow& row : summary.rows) {
    if (trial_failed(row.report)) {
      summary.failed = true;
      summary.failing_trial = row.trial;
      summary.failing_seed = row.seed;
      summary.failure_detail = errors[row.trial].empty() ? describe_failure(row.report) : errors[row.trial];
      break;
    }
  }
  aggregate(summary);
  return summary;
}

void write_series_csv(std::ostream& out, const BatchSummary& summary) {
  out << "round,avg_broadcasts,avg_mass_transfers,avg_transmitting_nodes,avg_converged_fraction\n";
  for (const AveragedRound& r : summary.series) {
    out << r.round << ',' << r.avg_broadcasts << ',' << r.avg_mass_transfers << ','
        << r.avg_transmitting_nodes << ',' << r.avg_converged_fraction << '\n';
  }
}

void write_trials_csv(std::ostream& out, const BatchSummary& summary) {
  auto opt = [](const std::optional<std::int64_t>& v) { return v ? std::to_string(*v) : std::string(); };
  out << "trial,seed,n,m,dmax,convergence_round,quiescence_round,tx_broadcast_as_one,"
         "tx_broadcast_as_fanout,bound\n";
  for (const TrialRow& row : summary.rows) {
    const TrialReport& r = row.report;
    out << row.trial << ',' << row.seed << ',' << r.n << ',' << r.m << ',' << r.dmax << ','
        << opt(r.convergence_round) << ',' << opt(r.quiescence_round) << ',' << r.tx_broadcast_as_one << ','
        << r.tx_broadcast_as_fanout << ',' << r.bound << '\n';
  }
}

void emit_round_metrics(const BatchSummary& summary, const std::string& dir) {
  if (summary.rows.empty() || summary.series.empty()) {
    throw ContractViolation("no completed trials to emit");
  }
  namespace fs = std::filesystem;
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw IoError("cannot create output directory " + dir + ": " + ec.message());

  auto write = [&](const std::string& name, auto&& body) {
    const fs::path path = fs::path(dir) / name;
    std::ofstream out(path);
    if (!out) throw IoError("cannot write " + path.string());
    body(out);
    out.flush();
    if (!out) throw IoError("write failed for " + path.string());
  };
  write("series.csv", [&](std::ostream& out) { write_series_csv(out, summary); });
  write("trials.csv", [&](std::ostream& out) { write_trials_csv(out, summary); });
}

}  // namespace ppqc
