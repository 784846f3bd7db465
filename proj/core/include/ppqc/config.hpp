#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "ppqc/graph.hpp"
#include "ppqc/schedule.hpp"

namespace ppqc {

// Flat "key = value" trial description. Lists are comma-separated.
//
//   graph_file = path            | n = 20 and p = 0.3
//   seed = 42                      master seed
//   trials = 100
//   roles = P,P,C,...            | private_fraction / curious_fraction
//   initial_states = 3,25,...    | state_min / state_max
//   offset_bound = 100
//   max_rounds = ...               default: the theoretical bound
//   quiescence_window = ...        default: 5n
//   shuffle_edge_order = true      file graphs only
//   schedule.<j> = y0 : uy0,...    explicit substates (replay)
struct TrialConfig {
  std::optional<std::string> graph_file;
  std::size_t n = 20;
  double p = 0.3;
  std::uint64_t seed = 1;
  std::size_t trials = 1;

  std::vector<NodeRole> roles;  // explicit, else drawn from the fractions
  double private_fraction = 1.0;
  double curious_fraction = 0.0;

  std::vector<std::int64_t> initial_states;  // explicit, else uniform in [min, max]
  std::int64_t state_min = -100;
  std::int64_t state_max = 100;

  std::int64_t offset_bound = kDefaultOffsetBound;
  std::optional<std::int64_t> max_rounds;
  std::optional<std::size_t> quiescence_window;
  bool shuffle_edge_order = true;
  std::map<std::size_t, SubstateSchedule> schedules;
};

// Throws ConfigError with the offending line number.
TrialConfig parse_trial_config(std::istream& in);
TrialConfig load_trial_config(const std::string& path);
void write_trial_config(std::ostream& out, const TrialConfig& cfg);

// Throws ConfigError if list lengths or ranges are inconsistent.
void validate_config(const TrialConfig& cfg);

// Seed of trial `index`, derived from the master seed only.
std::uint64_t trial_seed(std::uint64_t master_seed, std::size_t index);

// Everything one trial runs on, drawn deterministically from its seed.
struct TrialSetup {
  std::uint64_t seed = 0;
  Digraph graph;
  std::vector<NodeRole> roles;
  std::vector<std::int64_t> initial_states;
  std::vector<SubstateSchedule> schedules;
};

// `file_graph` is the loaded graph_file, if the config names one.
TrialSetup instantiate_trial(const TrialConfig& cfg, std::uint64_t seed,
                             const std::optional<Digraph>& file_graph);

// A config that replays `setup` exactly: explicit graph file, roles, states
// and schedules, one trial.
TrialConfig replay_config(const TrialConfig& base, const TrialSetup& setup,
                          const std::string& graph_path);

}  // namespace ppqc
