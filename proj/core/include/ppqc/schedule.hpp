#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "ppqc/graph.hpp"

namespace ppqc {

enum class NodeRole { Private, Curious, Neutral };

std::string_view to_string(NodeRole role);
// Accepts "private"/"p", "curious"/"c", "neutral"/"n" (any case).
std::optional<NodeRole> parse_role(std::string_view text);

// The privacy variables of one node: uy[s], uz[s] for s in [0, dmax + 1].
// Entries past the end are implicitly zero.
struct SubstateSchedule {
  std::int64_t y0 = 0;
  std::vector<std::int64_t> uy;
  std::vector<std::int64_t> uz;

  std::size_t length() const { return uy.size(); }
  std::int64_t substate_y(std::size_t s) const { return s < uy.size() ? uy[s] : 0; }
  std::int64_t substate_z(std::size_t s) const { return s < uz.size() ? uz[s] : 0; }

  friend bool operator==(const SubstateSchedule&, const SubstateSchedule&) = default;
};

enum class ScheduleConstraint {
  Length,          // arrays must hold dmax + 2 entries
  Distinct,        // private substates pairwise distinct
  DiffersFromY0,   // private substates never equal y0
  TailZero,        // uy / uz vanish past dmax + 1
  UnitZ,           // uz[s] == 1 inside the window
  SumEqualsY0,     // sum(uy) == (dmax + 2) * y0
  EqualsY0,        // non-private substates all equal y0
};

std::string_view to_string(ScheduleConstraint c);

struct ScheduleViolation {
  ScheduleConstraint constraint;
  std::vector<std::size_t> indices;
  std::string detail;
};

inline constexpr std::int64_t kDefaultOffsetBound = 100;
inline constexpr int kScheduleRetryBudget = 10'000;

// Splits y0 into dmax + 2 integer substates averaging to y0. Private nodes get
// pairwise-distinct substates, none equal to y0, all inside
// [y0 - offset_bound, y0 + offset_bound]; other roles repeat y0.
// Throws InfeasibleSchedule when no private draw succeeds.
SubstateSchedule decompose_initial_state(std::int64_t y0, std::size_t dmax, NodeRole role,
                                         std::int64_t offset_bound, Rng& rng);

// Empty iff every constraint applying to `role` holds.
std::vector<ScheduleViolation> validate_schedule(const SubstateSchedule& s, std::size_t dmax,
                                                 NodeRole role);

// Text form "y0 : uy0,uy1,...". uz is implied (all ones).
std::string format_schedule(const SubstateSchedule& s);
SubstateSchedule parse_schedule(std::string_view text);

}  // namespace ppqc
