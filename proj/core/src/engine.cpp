#include "ppqc/engine.hpp"

#include <algorithm>
#include <numeric>
#include <ostream>
#include <sstream>

#include "ppqc/errors.hpp"

namespace ppqc {

Fraction Fraction::reduced(std::int64_t num, std::int64_t den) {
  if (den == 0) throw ContractViolation("fraction with zero denominator");
  if (den < 0) {
    num = checked_sub(0, num);
    den = checked_sub(0, den);
  }
  const std::int64_t g = std::gcd(num, den);
  return {num / g, den / g};
}

bool Fraction::matches(const YZ& ratio) const {
  if (ratio.z == 0) return false;
  return static_cast<Wide>(ratio.y) * den == static_cast<Wide>(ratio.z) * num;
}

bool TrialReport::all_audits_pass() const {
  return !aborted && converged && conservation.ok && monotonicity.ok && leading_mass.ok &&
         absorption.ok && silence.ok && within_bound.ok;
}

std::uint64_t theoretical_bound(std::uint64_t n, std::uint64_t m, std::uint64_t dmax) {
  auto mul = [](std::uint64_t a, std::uint64_t b) {
    std::uint64_t out = 0;
    if (__builtin_mul_overflow(a, b, &out)) throw OverflowError("bound overflows uint64");
    return out;
  };
  auto add = [](std::uint64_t a, std::uint64_t b) {
    std::uint64_t out = 0;
    if (__builtin_add_overflow(a, b, &out)) throw OverflowError("bound overflows uint64");
    return out;
  };
  const std::uint64_t nm1 = n == 0 ? 0 : n - 1;
  return add(add(add(1, dmax), mul(n, n)), mul(nm1, mul(m, m)));
}

YZ uninjected_pool(const SubstateSchedule& schedule, std::size_t s) {
  YZ pool;
  for (std::size_t i = s; i < schedule.length(); ++i) {
    pool = checked_sum(pool, {schedule.substate_y(i), schedule.substate_z(i)});
  }
  return pool;
}

namespace {

void check_schedules(std::span<const SubstateSchedule> schedules, std::size_t n, std::size_t dmax) {
  if (schedules.size() != n) {
    throw InvalidSchedule("expected " + std::to_string(n) + " schedules, got " +
                          std::to_string(schedules.size()));
  }
  for (std::size_t j = 0; j < n; ++j) {
    // Role-specific constraints are the caller's business; the engine needs
    // only the structural ones for exactness.
    for (const auto& v : validate_schedule(schedules[j], dmax, NodeRole::Private)) {
      if (v.constraint == ScheduleConstraint::Distinct ||
          v.constraint == ScheduleConstraint::DiffersFromY0) {
        continue;
      }
      throw InvalidSchedule("schedule of node " + std::to_string(j) + " violates " +
                            std::string(to_string(v.constraint)) + ": " + v.detail);
    }
  }
}

bool schedules_exhausted(std::span<const NodeState> nodes, std::size_t dmax) {
  return std::all_of(nodes.begin(), nodes.end(), [&](const NodeState& v) {
    return v.s > dmax + 1 && !v.s_br && !v.m_tr;
  });
}

}  // namespace

SimulationResult run_simulation(const Digraph& g, std::span<const SubstateSchedule> schedules,
                                const SimulationOptions& options) {
  const std::size_t n = g.node_count();
  if (!is_strongly_connected(g)) throw ContractViolation("digraph is not strongly connected");
  const std::size_t dmax = max_out_degree(g);
  check_schedules(schedules, n, dmax);

  const std::size_t window = options.quiescence_window.value_or(5 * n);
  if (window < 1) throw ContractViolation("quiescence window must be at least 1");
  const std::uint64_t bound = theoretical_bound(n, g.edge_count(), dmax);
  const std::int64_t max_rounds =
      options.max_rounds.value_or(static_cast<std::int64_t>(std::min<std::uint64_t>(bound, INT64_MAX)));

  std::int64_t total_y = 0;
  for (const auto& sch : schedules) total_y = checked_add(total_y, sch.y0);

  SimulationResult result;
  SimTrace& trace = result.trace;
  trace.n = n;
  trace.m = g.edge_count();
  trace.dmax = dmax;
  trace.average = Fraction::reduced(total_y, static_cast<std::int64_t>(n));

  std::vector<NodeContext> contexts(n);
  for (NodeId j = 0; j < n; ++j) contexts[j] = {j, g.out_neighbors(j), &schedules[j]};

  std::vector<NodeState> nodes(n);
  for (NodeId j = 0; j < n; ++j) {
    auto init = init_node(contexts[j]);
    nodes[j] = init.node;
    trace.init_broadcasts.insert(trace.init_broadcasts.end(), init.broadcast.begin(),
                                 init.broadcast.end());
  }
  trace.initial = nodes;

  std::vector<std::vector<Message>> inboxes(n);
  for (const Message& msg : trace.init_broadcasts) inboxes[msg.dst].push_back(msg);

  std::optional<std::int64_t> quiet_since;
  try {
    for (std::int64_t round = 0;; ++round) {
      if (!quiet_since && round >= max_rounds) break;

      RoundRecord record;
      record.round = round;
      record.triggers.assign(n, kTriggerNone);
      std::vector<std::vector<Message>> next(n);
      for (NodeId j = 0; j < n; ++j) {
        StepResult step = step_node(contexts[j], nodes[j], inboxes[j], round);
        nodes[j] = step.node;
        record.triggers[j] = step.triggers;
        bool broadcast = false;
        for (const Message& msg : step.outbox) {
          if (msg.kind == MessageKind::MassTransfer) {
            ++record.mass_transfers;
          } else {
            ++record.broadcast_copies;
            broadcast = true;
          }
          next[msg.dst].push_back(msg);
        }
        record.broadcast_events += broadcast ? 1 : 0;
        record.transmitting_nodes += step.outbox.empty() ? 0 : 1;
        record.emitted.insert(record.emitted.end(), step.outbox.begin(), step.outbox.end());
      }
      for (const NodeState& v : nodes) {
        record.converged_nodes += trace.average.matches(v.state) ? 1 : 0;
      }
      record.nodes = nodes;
      inboxes = std::move(next);

      const bool silent = record.emitted.empty() && schedules_exhausted(nodes, dmax);
      trace.rounds.push_back(std::move(record));

      if (!silent) {
        quiet_since.reset();
        continue;
      }
      if (!quiet_since) quiet_since = round;
      if (round - *quiet_since + 1 >= static_cast<std::int64_t>(window)) {
        trace.quiescence_round = quiet_since;
        break;
      }
    }
  } catch (const OverflowError& e) {
    trace.abort_reason = e.what();
  }

  TrialReport& report = result.report;
  report.n = n;
  report.m = g.edge_count();
  report.dmax = dmax;
  report.average = trace.average;
  report.bound = bound;
  report.quiescence_round = trace.quiescence_round;
  report.rounds_simulated = static_cast<std::int64_t>(trace.rounds.size());
  report.aborted = !trace.abort_reason.empty();
  for (const RoundRecord& r : trace.rounds) {
    report.tx_broadcast_as_one += r.broadcast_events + r.mass_transfers;
    report.tx_broadcast_as_fanout += r.broadcast_copies + r.mass_transfers;
  }
  const std::vector<NodeState>& last = trace.rounds.empty() ? trace.initial : trace.rounds.back().nodes;
  for (const NodeState& v : last) {
    report.final_states.push_back(v.state);
    if (!report.aborted) report.absorbed_mass = checked_sum(report.absorbed_mass, v.mass);
  }

  report.convergence_round = detect_convergence_round(trace, trace.average);
  report.converged = !report.aborted && trace.quiescence_round.has_value() &&
                     report.convergence_round.has_value();

  report.conservation = audit_mass_conservation(trace, schedules);
  report.monotonicity = audit_state_monotonicity(trace);
  report.leading_mass = audit_leading_mass(trace, &report.early_dominance_exceptions);
  report.absorption = audit_absorption(trace);

  if (trace.quiescence_round) {
    for (const RoundRecord& r : trace.rounds) {
      if (r.round >= *trace.quiescence_round && !r.emitted.empty()) {
        report.silence = {false, r.round, "emission after quiescence"};
        break;
      }
    }
  } else {
    report.silence = {false, std::nullopt, "never reached quiescence"};
  }

  if (!report.convergence_round) {
    report.within_bound = {false, std::nullopt, "did not converge"};
  } else if (static_cast<std::uint64_t>(*report.convergence_round) > bound) {
    report.within_bound = {false, report.convergence_round,
                           "convergence round exceeds " + std::to_string(bound)};
  } else if (trace.quiescence_round && *report.convergence_round > *trace.quiescence_round) {
    report.within_bound = {false, report.convergence_round, "converged after quiescence"};
  }
  return result;
}

AuditVerdict audit_mass_conservation(const SimTrace& trace,
                                     std::span<const SubstateSchedule> schedules) {
  if (schedules.size() != trace.n) {
    return {false, std::nullopt, "schedule count does not match the trace"};
  }
  const Wide length = static_cast<Wide>(trace.dmax) + 2;
  Wide expected_y = 0;
  for (const auto& s : schedules) expected_y += s.y0;
  expected_y *= length;
  const Wide expected_z = length * static_cast<Wide>(trace.n);

  auto check = [&](std::int64_t round, std::span<const NodeState> nodes,
                   std::span<const Message> in_flight) -> std::optional<std::string> {
    Wide y = 0, z = 0;
    for (const NodeState& v : nodes) {
      y += v.mass.y;
      z += v.mass.z;
      for (std::size_t i = v.s; i < schedules[v.id].length(); ++i) {
        y += schedules[v.id].substate_y(i);
        z += schedules[v.id].substate_z(i);
      }
    }
    for (const Message& msg : in_flight) {
      if (msg.kind != MessageKind::MassTransfer) continue;
      y += msg.payload.y;
      z += msg.payload.z;
    }
    if (y == expected_y && z == expected_z) return std::nullopt;
    std::ostringstream why;
    why << "round " << round << ": total (y, z) = (" << static_cast<long long>(y) << ", "
        << static_cast<long long>(z) << "), expected (" << static_cast<long long>(expected_y)
        << ", " << static_cast<long long>(expected_z) << ")";
    return why.str();
  };

  if (auto bad = check(-1, trace.initial, {})) return {false, -1, *bad};
  for (const RoundRecord& r : trace.rounds) {
    if (auto bad = check(r.round, r.nodes, r.emitted)) return {false, r.round, *bad};
  }
  return {};
}

std::optional<std::int64_t> detect_convergence_round(const SimTrace& trace, const Fraction& q) {
  if (trace.rounds.empty()) return std::nullopt;
  auto all_match = [&](const RoundRecord& r) {
    return std::all_of(r.nodes.begin(), r.nodes.end(),
                       [&](const NodeState& v) { return q.matches(v.state); });
  };
  std::int64_t first = -1;
  for (auto it = trace.rounds.rbegin(); it != trace.rounds.rend(); ++it) {
    if (!all_match(*it)) break;
    first = it->round;
  }
  if (first < 0) return std::nullopt;
  return first;
}

AuditVerdict audit_state_monotonicity(const SimTrace& trace) {
  const std::vector<NodeState>* prev = &trace.initial;
  for (const RoundRecord& r : trace.rounds) {
    for (std::size_t j = 0; j < r.nodes.size(); ++j) {
      if (r.nodes[j].state < (*prev)[j].state) {
        return {false, r.round, "state of node " + std::to_string(j) + " decreased"};
      }
    }
    prev = &r.nodes;
  }
  return {};
}

namespace {

// Lex-largest nonzero mass among held and in-flight masses, if any.
std::optional<YZ> leading_mass(const RoundRecord& r) {
  std::optional<YZ> best;
  auto consider = [&](const YZ& m) {
    if (m.z > 0 && (!best || m > *best)) best = m;
  };
  for (const NodeState& v : r.nodes) consider(v.mass);
  for (const Message& msg : r.emitted)
    if (msg.kind == MessageKind::MassTransfer) consider(msg.payload);
  return best;
}

bool only_leading_masses(const RoundRecord& r) {
  std::optional<YZ> common;
  auto same = [&](const YZ& m) {
    if (m.z == 0) return true;
    if (!common) common = m;
    return m == *common;
  };
  for (const NodeState& v : r.nodes)
    if (!same(v.mass)) return false;
  for (const Message& msg : r.emitted)
    if (msg.kind == MessageKind::MassTransfer && !same(msg.payload)) return false;
  return true;
}

}  // namespace

AuditVerdict audit_leading_mass(const SimTrace& trace, std::size_t* early_exceptions) {
  std::size_t early = 0;
  AuditVerdict verdict;
  for (const RoundRecord& r : trace.rounds) {
    const auto lead = leading_mass(r);
    if (!lead) continue;
    for (const NodeState& v : r.nodes) {
      if (v.state <= *lead) continue;
      if (r.round < static_cast<std::int64_t>(trace.dmax) + 1) {
        ++early;
      } else if (verdict.ok) {
        verdict = {false, r.round,
                   "node " + std::to_string(v.id) + " state exceeds the leading mass"};
      }
    }
  }
  if (early_exceptions != nullptr) *early_exceptions = early;
  return verdict;
}

AuditVerdict audit_absorption(const SimTrace& trace) {
  const std::int64_t start = static_cast<std::int64_t>(trace.dmax) + 1;
  std::optional<std::int64_t> absorbed;
  for (const RoundRecord& r : trace.rounds) {
    if (r.round < start) continue;
    if (!absorbed) {
      if (only_leading_masses(r)) absorbed = r.round;
      continue;
    }
    for (std::size_t j = 0; j < r.triggers.size(); ++j) {
      if (r.triggers[j] & kTriggerPromoteMass) {
        return {false, r.round,
                "mass promotion at node " + std::to_string(j) + " after absorption at round " +
                    std::to_string(*absorbed)};
      }
    }
    if (!r.emitted.empty() && r.round > *absorbed + static_cast<std::int64_t>(trace.n) - 1) {
      return {false, r.round,
              "transmissions more than n - 1 rounds after absorption at round " +
                  std::to_string(*absorbed)};
    }
  }
  if (!absorbed && trace.quiescence_round) {
    return {false, std::nullopt, "quiescent without ever absorbing into leading masses"};
  }
  return {};
}

void write_trace_csv(std::ostream& out, const SimTrace& trace) {
  out << "round,state_broadcasts,mass_transfers,transmitting_nodes,converged_nodes\n";
  for (const RoundRecord& r : trace.rounds) {
    out << r.round << ',' << r.broadcast_events << ',' << r.mass_transfers << ','
        << r.transmitting_nodes << ',' << r.converged_nodes << '\n';
  }
}

namespace {

void write_message(std::ostream& out, const Message& msg) {
  out << msg.round << ','
      << (msg.kind == MessageKind::MassTransfer ? "mass" : "state") << ',' << msg.src << ','
      << msg.dst << ',' << msg.payload.y << ',' << msg.payload.z << '\n';
}

}  // namespace

void write_message_log(std::ostream& out, const SimTrace& trace) {
  out << "round,kind,src,dst,y,z\n";
  for (const Message& msg : trace.init_broadcasts) write_message(out, msg);
  for (const RoundRecord& r : trace.rounds)
    for (const Message& msg : r.emitted) write_message(out, msg);
}

}  // namespace ppqc
