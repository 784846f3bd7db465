#include "ppqc/config.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>

#include "ppqc/errors.hpp"

namespace ppqc {

namespace {

std::string trim(std::string_view s) {
  auto first = s.find_first_not_of(" \t\r");
  if (first == std::string_view::npos) return {};
  auto last = s.find_last_not_of(" \t\r");
  return std::string(s.substr(first, last - first + 1));
}

std::vector<std::string> split_list(const std::string& value) {
  std::vector<std::string> items;
  std::string item;
  std::istringstream in(value);
  while (std::getline(in, item, ',')) items.push_back(trim(item));
  if (!value.empty() && value.back() == ',') items.emplace_back();
  return items;
}

template <typename T>
T parse_number(const std::string& text, std::size_t line, const std::string& key) {
  T value{};
  auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
  if (ec != std::errc{} || ptr != text.data() + text.size()) {
    throw ConfigError("config line " + std::to_string(line) + ": " + key + " expects a number, got \"" +
                      text + "\"");
  }
  return value;
}

double parse_double(const std::string& text, std::size_t line, const std::string& key) {
  try {
    std::size_t used = 0;
    double value = std::stod(text, &used);
    if (used == text.size()) return value;
  } catch (const std::exception&) {
  }
  throw ConfigError("config line " + std::to_string(line) + ": " + key + " expects a real number, got \"" +
                    text + "\"");
}

bool parse_bool(const std::string& text, std::size_t line, const std::string& key) {
  std::string lower = text;
  std::transform(lower.begin(), lower.end(), lower.begin(), [](unsigned char c) { return std::tolower(c); });
  if (lower == "true" || lower == "1" || lower == "yes") return true;
  if (lower == "false" || lower == "0" || lower == "no") return false;
  throw ConfigError("config line " + std::to_string(line) + ": " + key + " expects true or false");
}

}  // namespace

TrialConfig parse_trial_config(std::istream& in) {
  TrialConfig cfg;
  std::string raw;
  std::size_t line_no = 0;
  while (std::getline(in, raw)) {
    ++line_no;
    if (auto hash = raw.find('#'); hash != std::string::npos) raw.erase(hash);
    std::string line = trim(raw);
    if (line.empty()) continue;
    auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw ConfigError("config line " + std::to_string(line_no) + ": expected \"key = value\"");
    }
    std::string key = trim(std::string_view(line).substr(0, eq));
    std::string value = trim(std::string_view(line).substr(eq + 1));

    if (key == "graph_file") {
      cfg.graph_file = value;
    } else if (key == "n") {
      cfg.n = parse_number<std::size_t>(value, line_no, key);
    } else if (key == "p") {
      cfg.p = parse_double(value, line_no, key);
    } else if (key == "seed") {
      cfg.seed = parse_number<std::uint64_t>(value, line_no, key);
    } else if (key == "trials") {
      cfg.trials = parse_number<std::size_t>(value, line_no, key);
    } else if (key == "roles") {
      cfg.roles.clear();
      for (const auto& item : split_list(value)) {
        auto role = parse_role(item);
        if (!role) {
          throw ConfigError("config line " + std::to_string(line_no) + ": unknown role \"" + item + "\"");
        }
        cfg.roles.push_back(*role);
      }
    } else if (key == "private_fraction") {
      cfg.private_fraction = parse_double(value, line_no, key);
    } else if (key == "curious_fraction") {
      cfg.curious_fraction = parse_double(value, line_no, key);
    } else if (key == "initial_states") {
      cfg.initial_states.clear();
      for (const auto& item : split_list(value))
        cfg.initial_states.push_back(parse_number<std::int64_t>(item, line_no, key));
    } else if (key == "state_min") {
      cfg.state_min = parse_number<std::int64_t>(value, line_no, key);
    } else if (key == "state_max") {
      cfg.state_max = parse_number<std::int64_t>(value, line_no, key);
    } else if (key == "offset_bound") {
      cfg.offset_bound = parse_number<std::int64_t>(value, line_no, key);
    } else if (key == "max_rounds") {
      cfg.max_rounds = parse_number<std::int64_t>(value, line_no, key);
    } else if (key == "quiescence_window") {
      cfg.quiescence_window = parse_number<std::size_t>(value, line_no, key);
    } else if (key == "shuffle_edge_order") {
      cfg.shuffle_edge_order = parse_bool(value, line_no, key);
    } else if (key.rfind("schedule.", 0) == 0) {
      auto node = parse_number<std::size_t>(key.substr(9), line_no, key);
      try {
        cfg.schedules[node] = parse_schedule(value);
      } catch (const Error& e) {
        throw ConfigError("config line " + std::to_string(line_no) + ": " + e.what());
      }
    } else {
      throw ConfigError("config line " + std::to_string(line_no) + ": unknown key \"" + key + "\"");
    }
  }
  return cfg;
}

TrialConfig load_trial_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open config " + path);
  return parse_trial_config(in);
}

void write_trial_config(std::ostream& out, const TrialConfig& cfg) {
  auto join = [&](const auto& items, auto fmt) {
    std::string text;
    for (std::size_t i = 0; i < items.size(); ++i) {
      if (i) text += ',';
      text += fmt(items[i]);
    }
    return text;
  };
  if (cfg.graph_file) {
    out << "graph_file = " << *cfg.graph_file << '\n';
  } else {
    out << "n = " << cfg.n << '\n';
    std::ostringstream p;
    p.precision(17);
    p << cfg.p;
    out << "p = " << p.str() << '\n';
  }
  out << "seed = " << cfg.seed << '\n';
  out << "trials = " << cfg.trials << '\n';
  if (!cfg.roles.empty()) {
    out << "roles = " << join(cfg.roles, [](NodeRole r) { return std::string(to_string(r)); }) << '\n';
  } else {
    out << "private_fraction = " << cfg.private_fraction << '\n';
    out << "curious_fraction = " << cfg.curious_fraction << '\n';
  }
  if (!cfg.initial_states.empty()) {
    out << "initial_states = "
        << join(cfg.initial_states, [](std::int64_t v) { return std::to_string(v); }) << '\n';
  } else {
    out << "state_min = " << cfg.state_min << '\n';
    out << "state_max = " << cfg.state_max << '\n';
  }
  out << "offset_bound = " << cfg.offset_bound << '\n';
  if (cfg.max_rounds) out << "max_rounds = " << *cfg.max_rounds << '\n';
  if (cfg.quiescence_window) out << "quiescence_window = " << *cfg.quiescence_window << '\n';
  out << "shuffle_edge_order = " << (cfg.shuffle_edge_order ? "true" : "false") << '\n';
  for (const auto& [node, schedule] : cfg.schedules)
    out << "schedule." << node << " = " << format_schedule(schedule) << '\n';
}

void validate_config(const TrialConfig& cfg) {
  if (cfg.trials < 1) throw ConfigError("trials must be at least 1");
  if (!cfg.graph_file) {
    if (cfg.n < 2) throw ConfigError("n must be at least 2");
    if (!(cfg.p > 0.0 && cfg.p <= 1.0)) throw ConfigError("p must lie in (0, 1]");
  }
  if (cfg.private_fraction < 0 || cfg.curious_fraction < 0 ||
      cfg.private_fraction + cfg.curious_fraction > 1.0 + 1e-12) {
    throw ConfigError("role fractions must be non-negative and sum to at most 1");
  }
  if (cfg.state_min > cfg.state_max) throw ConfigError("state_min exceeds state_max");
  if (cfg.offset_bound < 1) throw ConfigError("offset_bound must be positive");
  if (cfg.max_rounds && *cfg.max_rounds < 0) throw ConfigError("max_rounds must be non-negative");
  if (cfg.quiescence_window && *cfg.quiescence_window < 1) {
    throw ConfigError("quiescence_window must be positive");
  }
  // Node count is only known here for random graphs; file graphs are checked
  // again once loaded.
  if (!cfg.graph_file) {
    if (!cfg.roles.empty() && cfg.roles.size() != cfg.n)
      throw ConfigError("roles lists " + std::to_string(cfg.roles.size()) + " entries for n = " +
                        std::to_string(cfg.n));
    if (!cfg.initial_states.empty() && cfg.initial_states.size() != cfg.n)
      throw ConfigError("initial_states lists " + std::to_string(cfg.initial_states.size()) +
                        " entries for n = " + std::to_string(cfg.n));
  }
}

std::uint64_t trial_seed(std::uint64_t master_seed, std::size_t index) {
  std::seed_seq seq{static_cast<std::uint32_t>(master_seed), static_cast<std::uint32_t>(master_seed >> 32),
                    static_cast<std::uint32_t>(index), static_cast<std::uint32_t>(index >> 32)};
  std::uint32_t words[2];
  seq.generate(words, words + 2);
  return (static_cast<std::uint64_t>(words[1]) << 32) | words[0];
}

TrialSetup instantiate_trial(const TrialConfig& cfg, std::uint64_t seed,
                             const std::optional<Digraph>& file_graph) {
  TrialSetup setup;
  setup.seed = seed;
  Rng rng(seed);

  if (file_graph) {
    setup.graph = cfg.shuffle_edge_order ? assign_edge_order(*file_graph, rng) : *file_graph;
  } else {
    setup.graph = generate_random_strongly_connected(cfg.n, cfg.p, rng);
  }
  const std::size_t n = setup.graph.node_count();

  if (!cfg.roles.empty()) {
    if (cfg.roles.size() != n) {
      throw ConfigError("roles lists " + std::to_string(cfg.roles.size()) + " entries for a " +
                        std::to_string(n) + "-node graph");
    }
    setup.roles = cfg.roles;
  } else {
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    for (std::size_t j = 0; j < n; ++j) {
      double u = unit(rng);
      setup.roles.push_back(u < cfg.private_fraction                        ? NodeRole::Private
                            : u < cfg.private_fraction + cfg.curious_fraction ? NodeRole::Curious
                                                                              : NodeRole::Neutral);
    }
  }

  if (!cfg.initial_states.empty()) {
    if (cfg.initial_states.size() != n) {
      throw ConfigError("initial_states lists " + std::to_string(cfg.initial_states.size()) +
                        " entries for a " + std::to_string(n) + "-node graph");
    }
    setup.initial_states = cfg.initial_states;
  } else {
    std::uniform_int_distribution<std::int64_t> draw(cfg.state_min, cfg.state_max);
    for (std::size_t j = 0; j < n; ++j) setup.initial_states.push_back(draw(rng));
  }

  const std::size_t dmax = max_out_degree(setup.graph);
  for (std::size_t j = 0; j < n; ++j) {
    if (auto it = cfg.schedules.find(j); it != cfg.schedules.end()) {
      setup.schedules.push_back(it->second);
    } else {
      setup.schedules.push_back(
          decompose_initial_state(setup.initial_states[j], dmax, setup.roles[j], cfg.offset_bound, rng));
    }
  }
  for (const auto& [node, schedule] : cfg.schedules) {
    if (node >= n) throw ConfigError("schedule." + std::to_string(node) + " names a missing node");
    if (schedule.y0 != setup.initial_states[node]) {
      throw ConfigError("schedule." + std::to_string(node) + " has y0 " + std::to_string(schedule.y0) +
                        " but the initial state is " + std::to_string(setup.initial_states[node]));
    }
  }
  return setup;
}

TrialConfig replay_config(const TrialConfig& base, const TrialSetup& setup, const std::string& graph_path) {
  TrialConfig cfg = base;
  cfg.graph_file = graph_path;
  cfg.shuffle_edge_order = false;
  cfg.seed = setup.seed;
  cfg.trials = 1;
  cfg.roles = setup.roles;
  cfg.initial_states = setup.initial_states;
  cfg.schedules.clear();
  for (std::size_t j = 0; j < setup.schedules.size(); ++j) cfg.schedules[j] = setup.schedules[j];
  return cfg;
}

}  // namespace ppqc
