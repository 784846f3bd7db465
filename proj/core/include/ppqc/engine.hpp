#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "ppqc/graph.hpp"
#include "ppqc/protocol.hpp"
#include "ppqc/schedule.hpp"

namespace ppqc {

// Reduced fraction with a positive denominator.
struct Fraction {
  std::int64_t num = 0;
  std::int64_t den = 1;

  static Fraction reduced(std::int64_t num, std::int64_t den);
  // Exact y / z == num / den by integer cross-multiplication.
  bool matches(const YZ& ratio) const;

  friend bool operator==(const Fraction&, const Fraction&) = default;
};

struct RoundRecord {
  std::int64_t round = 0;
  std::vector<Message> emitted;       // sent this round, delivered next round
  std::vector<NodeState> nodes;       // snapshot after the round
  std::vector<std::uint8_t> triggers; // TriggerBits per node
  std::size_t broadcast_events = 0;   // nodes that broadcast
  std::size_t broadcast_copies = 0;   // per-out-neighbor broadcast messages
  std::size_t mass_transfers = 0;
  std::size_t transmitting_nodes = 0;
  std::size_t converged_nodes = 0;
};

struct SimTrace {
  std::size_t n = 0;
  std::size_t m = 0;
  std::size_t dmax = 0;
  Fraction average;
  std::vector<NodeState> initial;         // after initialization
  std::vector<Message> init_broadcasts;   // round -1
  std::vector<RoundRecord> rounds;        // rounds[k].round == k
  std::optional<std::int64_t> quiescence_round;
  std::string abort_reason;               // non-empty if the run aborted
};

struct AuditVerdict {
  bool ok = true;
  std::optional<std::int64_t> first_violation_round;  // -1 means initialization
  std::string detail;
};

struct TrialReport {
  std::size_t n = 0;
  std::size_t m = 0;
  std::size_t dmax = 0;
  Fraction average;
  std::optional<std::int64_t> convergence_round;
  std::optional<std::int64_t> quiescence_round;
  std::int64_t rounds_simulated = 0;
  std::uint64_t tx_broadcast_as_one = 0;
  std::uint64_t tx_broadcast_as_fanout = 0;
  std::uint64_t bound = 0;
  std::vector<YZ> final_states;
  YZ absorbed_mass;  // sum of all held masses at the end

  bool aborted = false;
  bool converged = false;  // reached quiescence and every ratio equals the average
  AuditVerdict conservation;
  AuditVerdict monotonicity;
  AuditVerdict leading_mass;   // dominance from round dmax + 1 on
  AuditVerdict absorption;
  AuditVerdict silence;        // no emission after the quiescence round
  AuditVerdict within_bound;
  std::size_t early_dominance_exceptions = 0;  // logged, not asserted

  bool all_audits_pass() const;
};

struct SimulationOptions {
  std::optional<std::int64_t> max_rounds;         // default: theoretical_bound
  std::optional<std::size_t> quiescence_window;   // default: 5n
};

struct SimulationResult {
  SimTrace trace;
  TrialReport report;
};

// 1 + dmax + n^2 + (n - 1) m^2.
std::uint64_t theoretical_bound(std::uint64_t n, std::uint64_t m, std::uint64_t dmax);

// Runs initialization, then rounds 0, 1, ... until the network has been silent
// with exhausted schedules for `quiescence_window` rounds, or until
// max_rounds passes without a silent round. Overflow aborts the run with the
// partial trace kept.
SimulationResult run_simulation(const Digraph& g, std::span<const SubstateSchedule> schedules,
                                const SimulationOptions& options = {});

// (y, z) still to be injected by a node whose counter is `s`.
YZ uninjected_pool(const SubstateSchedule& schedule, std::size_t s);

AuditVerdict audit_mass_conservation(const SimTrace& trace,
                                     std::span<const SubstateSchedule> schedules);

std::optional<std::int64_t> detect_convergence_round(const SimTrace& trace, const Fraction& q);

AuditVerdict audit_state_monotonicity(const SimTrace& trace);
// Returns the verdict for rounds >= dmax + 1 and counts earlier exceptions.
AuditVerdict audit_leading_mass(const SimTrace& trace, std::size_t* early_exceptions = nullptr);
AuditVerdict audit_absorption(const SimTrace& trace);

// "round,state_broadcasts,mass_transfers,transmitting_nodes,converged_nodes"
void write_trace_csv(std::ostream& out, const SimTrace& trace);
// "round,kind,src,dst,y,z", initialization broadcasts first with round -1.
void write_message_log(std::ostream& out, const SimTrace& trace);

}  // namespace ppqc
