#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "ppqc/engine.hpp"
#include "ppqc/graph.hpp"
#include "ppqc/schedule.hpp"

namespace ppqc {

enum class PrivacyClass { Preserved, Breached };

std::string_view to_string(PrivacyClass c);

struct PrivacyVerdict {
  NodeId target = 0;
  PrivacyClass classification = PrivacyClass::Breached;
  std::string justification;
  std::vector<NodeId> private_neighbors;  // in- or out-neighbors with role Private
};

// One verdict per Private node: Preserved iff some in- or out-neighbor is
// Private. A Neutral neighbor does not help (its input is inferable from its
// output).
std::vector<PrivacyVerdict> classify_privacy(const Digraph& g, std::span<const NodeRole> roles);

// Everything a set of colluding nodes sees: their own state histories and
// every message with a coalition endpoint, in trace order.
struct ObservationLog {
  std::vector<NodeId> coalition;                // ascending
  std::vector<Message> messages;                // includes round -1 broadcasts
  std::vector<std::vector<NodeState>> histories;  // per member: initial, round 0, 1, ...

  bool contains(NodeId v) const;
  // Canonical text form; two logs are indistinguishable iff these match.
  std::string serialize() const;
  // 64-bit FNV-1a of serialize().
  std::uint64_t digest() const;
};

ObservationLog coalition_observations(const SimTrace& trace, std::span<const NodeId> coalition);

// Recovers y0 of `target` when every in- and out-neighbor is in the coalition:
// substate 0 comes from the initialization broadcast, and each substate
// injected in rounds 0..dmax is the outgoing transfer minus the masses the
// target held or received that round. Throws NotFullySurrounded or
// ReconstructionFailure.
std::int64_t reconstruct_fully_surrounded(const ObservationLog& log, const Digraph& g,
                                          NodeId target, std::size_t dmax);

// Ground truth the simulation ran with, needed to build alternatives.
struct GroundTruth {
  const Digraph* graph = nullptr;
  std::span<const SubstateSchedule> schedules;
  std::span<const NodeRole> roles;
  SimulationOptions options;
};

struct AmbiguityWitness {
  NodeId target = 0;
  NodeId helper = 0;
  std::int64_t delta = 0;
  std::int64_t shift = 0;  // delta * (dmax + 2), added to one target substate
  std::size_t target_index = 0;
  std::size_t helper_index = 0;
  std::optional<std::int64_t> exchange_round;  // hidden transfer the shift rides on
  SubstateSchedule original_target;
  SubstateSchedule original_helper;
  SubstateSchedule alternative_target;
  SubstateSchedule alternative_helper;
  std::uint64_t log_digest = 0;
  Fraction alternative_average;
  std::size_t candidates_tried = 0;
};

// Builds alternative schedules under which target's y0 moves by +delta and
// helper's by -delta, and confirms by re-simulation that the coalition log is
// byte-identical and the alternative run still converges exactly with all
// audits passing. Candidates riding on target<->helper transfers the coalition
// never sees are tried first, then every other substate pair. Throws
// WitnessUnavailable when no candidate survives, ContractViolation on bad
// arguments (delta == 0, helper not a private neighbor, ...).
AmbiguityWitness ambiguity_witness(const SimTrace& trace, const ObservationLog& log,
                                   const GroundTruth& truth, NodeId target, NodeId helper,
                                   std::int64_t delta);

// Structured text record listing both ground truths and the matched digest.
std::string format_witness(const AmbiguityWitness& w);

}  // namespace ppqc
