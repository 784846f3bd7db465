#include "ppqc/privacy.hpp"

#include <algorithm>
#include <iomanip>
#include <set>
#include <sstream>

#include "ppqc/errors.hpp"

namespace ppqc {

std::string_view to_string(PrivacyClass c) {
  return c == PrivacyClass::Preserved ? "preserved" : "breached";
}

std::vector<PrivacyVerdict> classify_privacy(const Digraph& g, std::span<const NodeRole> roles) {
  if (roles.size() != g.node_count()) {
    throw ContractViolation("role list length does not match the node count");
  }
  std::vector<PrivacyVerdict> out;
  for (NodeId j = 0; j < g.node_count(); ++j) {
    if (roles[j] != NodeRole::Private) continue;
    std::set<NodeId> neighbors;
    for (NodeId v : g.in_neighbors(j)) neighbors.insert(v);
    for (NodeId v : g.out_neighbors(j)) neighbors.insert(v);

    PrivacyVerdict verdict;
    verdict.target = j;
    std::vector<NodeId> neutral;
    for (NodeId v : neighbors) {
      if (roles[v] == NodeRole::Private) verdict.private_neighbors.push_back(v);
      if (roles[v] == NodeRole::Neutral) neutral.push_back(v);
    }
    std::ostringstream why;
    if (!verdict.private_neighbors.empty()) {
      verdict.classification = PrivacyClass::Preserved;
      why << "private neighbor " << verdict.private_neighbors.front()
          << " hides at least one substate exchange";
    } else if (!neutral.empty()) {
      why << "no private neighbor; neutral neighbor " << neutral.front()
          << " passes its input through to curious nodes";
    } else {
      why << "every in- and out-neighbor is curious";
    }
    verdict.justification = why.str();
    out.push_back(std::move(verdict));
  }
  return out;
}

bool ObservationLog::contains(NodeId v) const {
  return std::binary_search(coalition.begin(), coalition.end(), v);
}

std::string ObservationLog::serialize() const {
  std::ostringstream out;
  out << "coalition";
  for (NodeId v : coalition) out << ' ' << v;
  out << '\n';
  for (const Message& m : messages) {
    out << "msg " << m.round << ' ' << (m.kind == MessageKind::MassTransfer ? "mass" : "state")
        << ' ' << m.src << ' ' << m.dst << ' ' << m.payload.y << ' ' << m.payload.z << '\n';
  }
  for (std::size_t i = 0; i < histories.size(); ++i) {
    std::int64_t round = -1;
    for (const NodeState& v : histories[i]) {
      out << "node " << coalition[i] << ' ' << round++ << ' ' << v.mass.y << ' ' << v.mass.z
          << ' ' << v.state.y << ' ' << v.state.z << ' ' << v.s << ' ' << v.s_br << v.m_tr
          << ' ' << v.rr_cursor << '\n';
    }
  }
  return out.str();
}

std::uint64_t ObservationLog::digest() const {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : serialize()) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

ObservationLog coalition_observations(const SimTrace& trace, std::span<const NodeId> coalition) {
  ObservationLog log;
  log.coalition.assign(coalition.begin(), coalition.end());
  std::sort(log.coalition.begin(), log.coalition.end());
  log.coalition.erase(std::unique(log.coalition.begin(), log.coalition.end()), log.coalition.end());
  for (NodeId v : log.coalition) {
    if (v >= trace.n) throw ContractViolation("coalition member " + std::to_string(v) + " out of range");
  }

  auto visible = [&](const Message& m) { return log.contains(m.src) || log.contains(m.dst); };
  for (const Message& m : trace.init_broadcasts)
    if (visible(m)) log.messages.push_back(m);
  for (const RoundRecord& r : trace.rounds)
    for (const Message& m : r.emitted)
      if (visible(m)) log.messages.push_back(m);

  for (NodeId v : log.coalition) {
    std::vector<NodeState> history;
    history.reserve(trace.rounds.size() + 1);
    history.push_back(trace.initial.at(v));
    for (const RoundRecord& r : trace.rounds) history.push_back(r.nodes.at(v));
    log.histories.push_back(std::move(history));
  }
  return log;
}

std::int64_t reconstruct_fully_surrounded(const ObservationLog& log, const Digraph& g,
                                          NodeId target, std::size_t dmax) {
  if (target >= g.node_count()) throw ContractViolation("target out of range");
  if (log.contains(target)) {
    throw NotFullySurrounded("target " + std::to_string(target) + " is itself in the coalition");
  }
  for (auto neighbors : {g.in_neighbors(target), g.out_neighbors(target)}) {
    for (NodeId v : neighbors) {
      if (!log.contains(v)) {
        throw NotFullySurrounded("neighbor " + std::to_string(v) + " of target " +
                                 std::to_string(target) + " is outside the coalition");
      }
    }
  }

  auto fail = [&](const std::string& why) {
    return ReconstructionFailure("target " + std::to_string(target) + ": " + why);
  };

  std::optional<YZ> first;
  std::vector<std::optional<YZ>> sent(dmax + 1);
  std::vector<YZ> received(dmax + 1);
  for (const Message& m : log.messages) {
    if (m.src == target && m.round == -1 && m.kind == MessageKind::StateBroadcast) {
      if (first && *first != m.payload) throw fail("inconsistent initialization broadcasts");
      first = m.payload;
    }
    if (m.kind != MessageKind::MassTransfer) continue;
    if (m.src == target && m.round >= 0 && m.round <= static_cast<std::int64_t>(dmax)) {
      auto& slot = sent[static_cast<std::size_t>(m.round)];
      if (slot) throw fail("two transfers in round " + std::to_string(m.round));
      slot = m.payload;
    }
    // Sent in round r, merged by the target in round r + 1.
    const std::int64_t merged = m.round + 1;
    if (m.dst == target && merged >= 0 && merged <= static_cast<std::int64_t>(dmax)) {
      auto& acc = received[static_cast<std::size_t>(merged)];
      acc = checked_sum(acc, m.payload);
    }
  }
  if (!first) throw fail("initialization broadcast not observed");
  if (first->z != 1) throw fail("initialization broadcast has z != 1");

  std::int64_t total = first->y;
  YZ held = *first;
  for (std::size_t k = 0; k <= dmax; ++k) {
    if (!sent[k]) throw fail("no transfer observed in injection round " + std::to_string(k));
    const YZ before = checked_sum(held, received[k]);
    const YZ injected{checked_sub(sent[k]->y, before.y), checked_sub(sent[k]->z, before.z)};
    if (injected.z != 1) throw fail("transfer in round " + std::to_string(k) + " is not one substate");
    total = checked_add(total, injected.y);
    held = {};  // every injection round ends with the whole mass sent away
  }
  const auto length = static_cast<std::int64_t>(dmax + 2);
  if (total % length != 0) throw fail("substate sum is not a multiple of dmax + 2");
  return total / length;
}

namespace {

struct Candidate {
  std::size_t target_index;
  std::size_t helper_index;
  std::optional<std::int64_t> exchange_round;
};

}  // namespace

AmbiguityWitness ambiguity_witness(const SimTrace& trace, const ObservationLog& log,
                                   const GroundTruth& truth, NodeId target, NodeId helper,
                                   std::int64_t delta) {
  if (delta == 0) throw ContractViolation("delta must be nonzero");
  if (truth.graph == nullptr) throw ContractViolation("ground truth has no graph");
  const Digraph& g = *truth.graph;
  const std::size_t n = g.node_count();
  if (truth.schedules.size() != n || truth.roles.size() != n) {
    throw ContractViolation("ground truth does not cover every node");
  }
  if (target >= n || helper >= n || target == helper) {
    throw ContractViolation("target and helper must be distinct nodes");
  }
  if (truth.roles[target] != NodeRole::Private || truth.roles[helper] != NodeRole::Private) {
    throw ContractViolation("target and helper must both be private");
  }
  if (!g.has_edge(target, helper) && !g.has_edge(helper, target)) {
    throw ContractViolation("helper is not a neighbor of the target");
  }
  if (log.contains(target) || log.contains(helper)) {
    throw ContractViolation("target and helper must be outside the coalition");
  }

  const std::size_t dmax = trace.dmax;
  const std::size_t length = dmax + 2;
  const std::int64_t shift = checked_mul(delta, static_cast<std::int64_t>(length));

  // Transfers between target and helper missing from the log.
  std::vector<Candidate> candidates;
  std::set<std::pair<std::size_t, std::size_t>> seen;
  bool hidden_exchange = false;
  for (const RoundRecord& r : trace.rounds) {
    for (const Message& m : r.emitted) {
      if (m.kind != MessageKind::MassTransfer) continue;
      const bool between = (m.src == target && m.dst == helper) || (m.src == helper && m.dst == target);
      if (!between) continue;
      hidden_exchange = true;
      // The sender injected substate r + 1 into this transfer; the receiver
      // can cancel the shift with the substate it injects next round.
      const auto sender_index = static_cast<std::size_t>(r.round) + 1;
      const std::size_t receiver_index = sender_index + 1;
      if (receiver_index >= length) continue;
      Candidate c = m.src == target ? Candidate{sender_index, receiver_index, r.round}
                                    : Candidate{receiver_index, sender_index, r.round};
      if (seen.insert({c.target_index, c.helper_index}).second) candidates.push_back(c);
    }
  }
  if (!hidden_exchange) {
    throw WitnessUnavailable("no transfer between target " + std::to_string(target) +
                             " and helper " + std::to_string(helper) + " in the trace");
  }
  for (std::size_t a = 0; a < length; ++a)
    for (std::size_t b = 0; b < length; ++b)
      if (seen.insert({a, b}).second) candidates.push_back({a, b, std::nullopt});

  const std::string original = log.serialize();
  AmbiguityWitness w;
  w.target = target;
  w.helper = helper;
  w.delta = delta;
  w.shift = shift;
  w.original_target = truth.schedules[target];
  w.original_helper = truth.schedules[helper];

  std::size_t blocked = 0;
  for (const Candidate& c : candidates) {
    ++w.candidates_tried;
    SubstateSchedule alt_target = truth.schedules[target];
    SubstateSchedule alt_helper = truth.schedules[helper];
    alt_target.y0 = checked_add(alt_target.y0, delta);
    alt_helper.y0 = checked_sub(alt_helper.y0, delta);
    alt_target.uy.at(c.target_index) = checked_add(alt_target.uy.at(c.target_index), shift);
    alt_helper.uy.at(c.helper_index) = checked_sub(alt_helper.uy.at(c.helper_index), shift);
    if (!validate_schedule(alt_target, dmax, NodeRole::Private).empty() ||
        !validate_schedule(alt_helper, dmax, NodeRole::Private).empty()) {
      ++blocked;
      continue;
    }

    std::vector<SubstateSchedule> alt(truth.schedules.begin(), truth.schedules.end());
    alt[target] = alt_target;
    alt[helper] = alt_helper;
    SimulationResult rerun = run_simulation(g, alt, truth.options);
    if (!rerun.report.all_audits_pass()) continue;
    if (coalition_observations(rerun.trace, log.coalition).serialize() != original) continue;

    w.target_index = c.target_index;
    w.helper_index = c.helper_index;
    w.exchange_round = c.exchange_round;
    w.alternative_target = std::move(alt_target);
    w.alternative_helper = std::move(alt_helper);
    w.log_digest = log.digest();
    w.alternative_average = rerun.report.average;
    return w;
  }
  throw WitnessUnavailable("no alternative for target " + std::to_string(target) + " / helper " +
                           std::to_string(helper) + " with delta " + std::to_string(delta) +
                           " reproduces the coalition log (" + std::to_string(w.candidates_tried) +
                           " candidates, " + std::to_string(blocked) +
                           " blocked by substate constraints)");
}

std::string format_witness(const AmbiguityWitness& w) {
  std::ostringstream out;
  out << "witness target=" << w.target << " helper=" << w.helper << " delta=" << w.delta
      << " shift=" << w.shift << '\n';
  out << "  shifted target substate " << w.target_index << ", helper substate " << w.helper_index;
  if (w.exchange_round) out << " (hidden transfer in round " << *w.exchange_round << ")";
  out << '\n';
  out << "  original    target " << format_schedule(w.original_target) << '\n';
  out << "  original    helper " << format_schedule(w.original_helper) << '\n';
  out << "  alternative target " << format_schedule(w.alternative_target) << '\n';
  out << "  alternative helper " << format_schedule(w.alternative_helper) << '\n';
  out << "  alternative average " << w.alternative_average.num << '/' << w.alternative_average.den
      << '\n';
  out << "  coalition log digest " << std::hex << std::setw(16) << std::setfill('0')
      << w.log_digest << std::dec << '\n';
  return out.str();
}

}  // namespace ppqc
