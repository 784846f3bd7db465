#include "ppqc/schedule.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <sstream>
#include <unordered_set>

#include "ppqc/errors.hpp"

namespace ppqc {

std::string_view to_string(NodeRole role) {
  switch (role) {
    case NodeRole::Private: return "private";
    case NodeRole::Curious: return "curious";
    case NodeRole::Neutral: return "neutral";
  }
  return "unknown";
}

std::optional<NodeRole> parse_role(std::string_view text) {
  std::string lower;
  for (char c : text) {
    if (!std::isspace(static_cast<unsigned char>(c)))
      lower.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(c))));
  }
  if (lower == "private" || lower == "p") return NodeRole::Private;
  if (lower == "curious" || lower == "c") return NodeRole::Curious;
  if (lower == "neutral" || lower == "n") return NodeRole::Neutral;
  return std::nullopt;
}

std::string_view to_string(ScheduleConstraint c) {
  switch (c) {
    case ScheduleConstraint::Length: return "length";
    case ScheduleConstraint::Distinct: return "distinct";
    case ScheduleConstraint::DiffersFromY0: return "differs-from-y0";
    case ScheduleConstraint::TailZero: return "tail-zero";
    case ScheduleConstraint::UnitZ: return "unit-z";
    case ScheduleConstraint::SumEqualsY0: return "sum-equals-y0";
    case ScheduleConstraint::EqualsY0: return "equals-y0";
  }
  return "unknown";
}

namespace {

SubstateSchedule repeated(std::int64_t y0, std::size_t length) {
  return SubstateSchedule{y0, std::vector<std::int64_t>(length, y0),
                          std::vector<std::int64_t>(length, 1)};
}

}  // namespace

SubstateSchedule decompose_initial_state(std::int64_t y0, std::size_t dmax, NodeRole role,
                                         std::int64_t offset_bound, Rng& rng) {
  if (dmax < 1) throw InfeasibleSchedule("dmax must be at least 1");
  const std::size_t length = dmax + 2;
  if (role != NodeRole::Private) return repeated(y0, length);

  // Offsets relative to y0: nonzero, pairwise distinct, summing to zero.
  if (offset_bound < 1 || offset_bound > (std::int64_t{1} << 40) ||
      2 * offset_bound < static_cast<std::int64_t>(length)) {
    throw InfeasibleSchedule("offset bound " + std::to_string(offset_bound) +
                             " cannot host " + std::to_string(length) +
                             " distinct substates");
  }
  // Window endpoints must be representable.
  checked_add(y0, offset_bound);
  checked_sub(y0, offset_bound);

  std::uniform_int_distribution<std::int64_t> draw(-offset_bound, offset_bound);
  std::vector<std::int64_t> offsets;
  std::unordered_set<std::int64_t> used;
  for (int attempt = 0; attempt < kScheduleRetryBudget; ++attempt) {
    offsets.clear();
    used.clear();
    std::int64_t sum = 0;
    while (offsets.size() + 1 < length) {
      std::int64_t d = draw(rng);
      if (d == 0 || !used.insert(d).second) continue;
      offsets.push_back(d);
      sum += d;
    }
    const std::int64_t last = -sum;
    if (last == 0 || last < -offset_bound || last > offset_bound || used.count(last)) continue;
    offsets.push_back(last);

    SubstateSchedule s = repeated(y0, length);
    for (std::size_t i = 0; i < length; ++i) s.uy[i] = y0 + offsets[i];
    return s;
  }
  throw InfeasibleSchedule("no private decomposition of " + std::to_string(y0) + " within " +
                           std::to_string(kScheduleRetryBudget) + " draws (offset bound " +
                           std::to_string(offset_bound) + ")");
}

std::vector<ScheduleViolation> validate_schedule(const SubstateSchedule& s, std::size_t dmax,
                                                 NodeRole role) {
  std::vector<ScheduleViolation> out;
  const std::size_t length = dmax + 2;

  if (s.uy.size() < length || s.uz.size() < length) {
    out.push_back({ScheduleConstraint::Length, {},
                   "expected " + std::to_string(length) + " substates, got uy=" +
                       std::to_string(s.uy.size()) + " uz=" + std::to_string(s.uz.size())});
  }

  std::vector<std::size_t> tail;
  for (std::size_t i = length; i < s.uy.size(); ++i)
    if (s.uy[i] != 0) tail.push_back(i);
  for (std::size_t i = length; i < s.uz.size(); ++i)
    if (s.uz[i] != 0 && std::find(tail.begin(), tail.end(), i) == tail.end()) tail.push_back(i);
  if (!tail.empty()) {
    out.push_back({ScheduleConstraint::TailZero, tail, "nonzero substate past dmax + 1"});
  }

  std::vector<std::size_t> non_unit;
  for (std::size_t i = 0; i < std::min(length, s.uz.size()); ++i)
    if (s.uz[i] != 1) non_unit.push_back(i);
  if (!non_unit.empty()) {
    out.push_back({ScheduleConstraint::UnitZ, non_unit, "uz must be 1 inside the window"});
  }

  const std::size_t window = std::min(length, s.uy.size());
  Wide sum = 0;
  for (std::size_t i = 0; i < window; ++i) sum += s.uy[i];
  const Wide expected = static_cast<Wide>(length) * s.y0;
  if (sum != expected) {
    out.push_back({ScheduleConstraint::SumEqualsY0, {},
                   "sum(uy) = " + std::to_string(static_cast<long long>(sum)) + ", expected " +
                       std::to_string(static_cast<long long>(expected))});
  }

  if (role == NodeRole::Private) {
    std::vector<std::size_t> clashes;
    for (std::size_t a = 0; a < window; ++a)
      for (std::size_t b = a + 1; b < window; ++b)
        if (s.uy[a] == s.uy[b]) {
          clashes.push_back(a);
          clashes.push_back(b);
        }
    if (!clashes.empty()) {
      out.push_back({ScheduleConstraint::Distinct, clashes, "repeated substate values"});
    }
    std::vector<std::size_t> equal;
    for (std::size_t i = 0; i < window; ++i)
      if (s.uy[i] == s.y0) equal.push_back(i);
    if (!equal.empty()) {
      out.push_back({ScheduleConstraint::DiffersFromY0, equal, "substate equals y0"});
    }
  } else {
    std::vector<std::size_t> differ;
    for (std::size_t i = 0; i < window; ++i)
      if (s.uy[i] != s.y0) differ.push_back(i);
    if (!differ.empty()) {
      out.push_back({ScheduleConstraint::EqualsY0, differ, "non-private substate differs from y0"});
    }
  }
  return out;
}

std::string format_schedule(const SubstateSchedule& s) {
  std::ostringstream out;
  out << s.y0 << " :";
  for (std::size_t i = 0; i < s.uy.size(); ++i) out << (i ? "," : " ") << s.uy[i];
  return out.str();
}

namespace {

std::int64_t parse_int(std::string_view text) {
  while (!text.empty() && std::isspace(static_cast<unsigned char>(text.front()))) text.remove_prefix(1);
  while (!text.empty() && std::isspace(static_cast<unsigned char>(text.back()))) text.remove_suffix(1);
  std::int64_t value = 0;
  auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
  if (ec != std::errc() || ptr != text.data() + text.size() || text.empty()) {
    throw InvalidSchedule("not an integer: \"" + std::string(text) + "\"");
  }
  return value;
}

}  // namespace

SubstateSchedule parse_schedule(std::string_view text) {
  auto colon = text.find(':');
  if (colon == std::string_view::npos) throw InvalidSchedule("expected \"y0 : uy0,uy1,...\"");
  SubstateSchedule s;
  s.y0 = parse_int(text.substr(0, colon));
  std::string_view rest = text.substr(colon + 1);
  while (true) {
    auto comma = rest.find(',');
    s.uy.push_back(parse_int(rest.substr(0, comma)));
    if (comma == std::string_view::npos) break;
    rest.remove_prefix(comma + 1);
  }
  s.uz.assign(s.uy.size(), 1);
  return s;
}

}  // namespace ppqc
