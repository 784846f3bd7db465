#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "ppqc/config.hpp"
#include "ppqc/engine.hpp"

namespace ppqc {

// Per-round counts of one trial.
struct RoundCounts {
  std::size_t broadcasts = 0;  // broadcast events
  std::size_t mass_transfers = 0;
  std::size_t transmitting_nodes = 0;
  double converged_fraction = 0.0;
};

struct TrialRow {
  std::size_t trial = 0;
  std::uint64_t seed = 0;
  TrialReport report;
  std::vector<RoundCounts> series;
};

struct AveragedRound {
  std::int64_t round = 0;
  double avg_broadcasts = 0.0;
  double avg_mass_transfers = 0.0;
  double avg_transmitting_nodes = 0.0;
  double avg_converged_fraction = 0.0;
};

struct BatchSummary {
  std::vector<TrialRow> rows;          // in trial order
  std::vector<AveragedRound> series;   // shorter trials padded with their final counts

  // Means over trials that converged (convergence / quiescence) or over all
  // trials (transmissions).
  double mean_convergence_round = 0.0;
  double mean_quiescence_round = 0.0;
  double mean_tx_broadcast_as_one = 0.0;
  double mean_tx_broadcast_as_fanout = 0.0;

  bool failed = false;
  std::optional<std::size_t> failing_trial;  // first in trial order
  std::optional<std::uint64_t> failing_seed;
  std::string failure_detail;
};

// A trial that did not converge, aborted, or failed an audit.
bool trial_failed(const TrialReport& report);
std::string describe_failure(const TrialReport& report);

struct TrialOutcome {
  TrialSetup setup;
  SimulationResult result;
};

// Loads cfg.graph_file if present. Throws IoError / GraphFormatError.
std::optional<Digraph> load_config_graph(const TrialConfig& cfg);

// One trial seeded directly with `seed`; the trace is kept.
TrialOutcome run_trial(const TrialConfig& cfg, std::uint64_t seed,
                       const std::optional<Digraph>& file_graph);

SimulationOptions simulation_options(const TrialConfig& cfg);

std::vector<RoundCounts> round_counts(const SimTrace& trace);

// Runs cfg.trials trials, trial i seeded with trial_seed(cfg.seed, i), on up
// to `jobs` threads. Results do not depend on `jobs`.
BatchSummary run_batch(const TrialConfig& cfg, std::size_t jobs = 1);

// Recomputes the means and averaged series from summary.rows.
void aggregate(BatchSummary& summary);

// Writes <dir>/series.csv and <dir>/trials.csv. Throws ContractViolation on
// an empty summary (nothing is written) and IoError on unwritable paths.
void emit_round_metrics(const BatchSummary& summary, const std::string& dir);

void write_series_csv(std::ostream& out, const BatchSummary& summary);
void write_trials_csv(std::ostream& out, const BatchSummary& summary);

// Documented reproduction vector: 20 states summing to 268 (mean 13.4).
extern const std::vector<std::int64_t> kReferenceStates;

}  // namespace ppqc
