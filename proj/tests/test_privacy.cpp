#include <gtest/gtest.h>

#include <set>

#include "ppqc/errors.hpp"
#include "ppqc/privacy.hpp"

using namespace ppqc;

namespace {

using R = NodeRole;

struct Scenario {
  Digraph g;
  std::vector<NodeRole> roles;
  std::vector<SubstateSchedule> schedules;
  SimulationResult run;
  std::vector<NodeId> coalition;
  ObservationLog log;

  GroundTruth truth() const { return {&g, schedules, roles, {}}; }
};

Scenario simulate(Digraph g, std::vector<NodeRole> roles, const std::vector<std::int64_t>& ys, Rng& rng) {
  Scenario s{std::move(g), std::move(roles), {}, {}, {}, {}};
  const std::size_t dmax = max_out_degree(s.g);
  for (std::size_t j = 0; j < ys.size(); ++j)
    s.schedules.push_back(decompose_initial_state(ys[j], dmax, s.roles[j], kDefaultOffsetBound, rng));
  s.run = run_simulation(s.g, s.schedules);
  for (NodeId j = 0; j < s.roles.size(); ++j)
    if (s.roles[j] == R::Curious) s.coalition.push_back(j);
  s.log = coalition_observations(s.run.trace, s.coalition);
  return s;
}

// Six nodes, target 0 and its first out-neighbor private, the rest curious.
Scenario random_preserved(std::uint64_t seed) {
  Rng rng(seed);
  Digraph g = generate_random_strongly_connected(6, 0.5, rng);
  std::vector<NodeRole> roles(6, R::Curious);
  roles[0] = roles[g.out_neighbors(0)[0]] = R::Private;
  std::vector<std::int64_t> ys;
  for (std::int64_t j = 0; j < 6; ++j) ys.push_back(j * 11 - 20);
  return simulate(std::move(g), std::move(roles), ys, rng);
}

std::size_t message_count(const SimTrace& t) {
  std::size_t count = t.init_broadcasts.size();
  for (const RoundRecord& r : t.rounds) count += r.emitted.size();
  return count;
}

}  // namespace

TEST(Classify, ThreeCycleExamples) {
  auto g = directed_cycle(3);
  std::vector<NodeRole> ppc{R::Private, R::Private, R::Curious};
  auto v = classify_privacy(g, ppc);
  ASSERT_EQ(v.size(), 2u);
  EXPECT_EQ(v[0].classification, PrivacyClass::Preserved);
  EXPECT_EQ(v[1].classification, PrivacyClass::Preserved);

  std::vector<NodeRole> pcc{R::Private, R::Curious, R::Curious};
  v = classify_privacy(g, pcc);
  ASSERT_EQ(v.size(), 1u);
  EXPECT_EQ(v[0].classification, PrivacyClass::Breached);
  EXPECT_EQ(v[0].justification, "every in- and out-neighbor is curious");

  std::vector<NodeRole> pnc{R::Private, R::Neutral, R::Curious};
  v = classify_privacy(g, pnc);
  ASSERT_EQ(v.size(), 1u);
  EXPECT_EQ(v[0].classification, PrivacyClass::Breached);
  EXPECT_NE(v[0].justification.find("neutral"), std::string::npos);
}

TEST(Classify, InNeighborCountsToo) {
  // 0 -> 1 -> 2 -> 0: node 2 is an in-neighbor of 0 only.
  auto g = directed_cycle(3);
  std::vector<NodeRole> roles{R::Private, R::Curious, R::Private};
  auto v = classify_privacy(g, roles);
  EXPECT_EQ(v[0].classification, PrivacyClass::Preserved);
  EXPECT_EQ(v[0].private_neighbors, std::vector<NodeId>{2});
}

TEST(Observations, EmptyAndFullCoalitions) {
  Rng rng(1);
  Scenario s = simulate(directed_cycle(3), {R::Private, R::Private, R::Curious}, {5, 9, -2}, rng);
  auto none = coalition_observations(s.run.trace, {});
  EXPECT_TRUE(none.messages.empty());
  EXPECT_TRUE(none.histories.empty());

  std::vector<NodeId> all{0, 1, 2};
  auto full = coalition_observations(s.run.trace, all);
  EXPECT_EQ(full.messages.size(), message_count(s.run.trace));
  EXPECT_EQ(full.histories.size(), 3u);
  EXPECT_EQ(full.histories[0].size(), s.run.trace.rounds.size() + 1);
}

TEST(Observations, SingleCuriousNodeSeesOnlyIncidentTraffic) {
  Rng rng(1);
  Scenario s = simulate(directed_cycle(3), {R::Private, R::Private, R::Curious}, {5, 9, -2}, rng);
  ASSERT_FALSE(s.log.messages.empty());
  std::size_t expected = 0;
  auto incident = [](const Message& m) { return m.src == 2 || m.dst == 2; };
  for (const Message& m : s.run.trace.init_broadcasts) expected += incident(m);
  for (const RoundRecord& r : s.run.trace.rounds)
    for (const Message& m : r.emitted) expected += incident(m);
  EXPECT_EQ(s.log.messages.size(), expected);
  for (const Message& m : s.log.messages) EXPECT_TRUE(incident(m));
}

TEST(Observations, SerializationIsStable) {
  Rng a(4), b(4);
  Scenario s1 = simulate(directed_cycle(3), {R::Private, R::Private, R::Curious}, {5, 9, -2}, a);
  Scenario s2 = simulate(directed_cycle(3), {R::Private, R::Private, R::Curious}, {5, 9, -2}, b);
  EXPECT_EQ(s1.log.serialize(), s2.log.serialize());
  EXPECT_EQ(s1.log.digest(), s2.log.digest());
}

TEST(Reconstruct, TwoNodePrivateTarget) {
  Rng rng(3);
  Scenario s = simulate(complete_bidirectional(2), {R::Private, R::Curious}, {4, 10}, rng);
  EXPECT_EQ(reconstruct_fully_surrounded(s.log, s.g, 0, s.run.trace.dmax), 4);
}

TEST(Reconstruct, StarCenterOverSeeds) {
  for (std::uint64_t seed = 0; seed < 30; ++seed) {
    Rng rng(seed);
    const std::size_t leaves = 2 + seed % 6;
    Digraph g = assign_edge_order(bidirectional_star(leaves), rng);
    std::vector<NodeRole> roles(leaves + 1, R::Curious);
    roles[0] = R::Private;
    std::uniform_int_distribution<std::int64_t> ys(-100, 100);
    std::vector<std::int64_t> states;
    for (std::size_t j = 0; j <= leaves; ++j) states.push_back(ys(rng));
    Scenario s = simulate(std::move(g), std::move(roles), states, rng);
    EXPECT_EQ(reconstruct_fully_surrounded(s.log, s.g, 0, s.run.trace.dmax), states[0]) << "seed " << seed;
  }
}

TEST(Reconstruct, RefusesWhenANeighborIsOutsideTheCoalition) {
  Rng rng(1);
  Scenario s = simulate(directed_cycle(3), {R::Private, R::Private, R::Curious}, {5, 9, -2}, rng);
  EXPECT_THROW(reconstruct_fully_surrounded(s.log, s.g, 0, s.run.trace.dmax), NotFullySurrounded);
}

TEST(Reconstruct, TamperedLogIsDetected) {
  Rng rng(3);
  Scenario s = simulate(complete_bidirectional(2), {R::Private, R::Curious}, {4, 10}, rng);
  for (Message& m : s.log.messages)
    if (m.kind == MessageKind::MassTransfer && m.src == 0) m.payload.z += 1;
  EXPECT_THROW(reconstruct_fully_surrounded(s.log, s.g, 0, s.run.trace.dmax), ReconstructionFailure);
}

TEST(Witness, RejectsBadArguments) {
  Scenario s = random_preserved(3);
  const NodeId helper = s.g.out_neighbors(0)[0];
  EXPECT_THROW(ambiguity_witness(s.run.trace, s.log, s.truth(), 0, helper, 0), ContractViolation);
  EXPECT_THROW(ambiguity_witness(s.run.trace, s.log, s.truth(), 0, s.coalition.front(), 1), ContractViolation);
}

TEST(Witness, AlternativesAreIndistinguishableOnRandomTopology) {
  Scenario s = random_preserved(3);
  const NodeId helper = s.g.out_neighbors(0)[0];
  std::set<std::int64_t> consistent{s.schedules[0].y0};
  for (std::int64_t delta : {-3, -2, -1, 1, 2, 3}) {
    AmbiguityWitness w = ambiguity_witness(s.run.trace, s.log, s.truth(), 0, helper, delta);
    EXPECT_EQ(w.alternative_target.y0, s.schedules[0].y0 + delta);
    EXPECT_EQ(w.alternative_helper.y0, s.schedules[helper].y0 - delta);
    EXPECT_TRUE(validate_schedule(w.alternative_target, s.run.trace.dmax, R::Private).empty());
    EXPECT_TRUE(validate_schedule(w.alternative_helper, s.run.trace.dmax, R::Private).empty());
    EXPECT_EQ(w.alternative_average, s.run.trace.average);

    // Re-check independently of the witness search.
    auto alt = s.schedules;
    alt[0] = w.alternative_target;
    alt[helper] = w.alternative_helper;
    auto rerun = run_simulation(s.g, alt);
    EXPECT_TRUE(rerun.report.all_audits_pass());
    EXPECT_EQ(coalition_observations(rerun.trace, s.coalition).serialize(), s.log.serialize());
    consistent.insert(w.alternative_target.y0);
  }
  EXPECT_GE(consistent.size(), 7u);
}

TEST(Witness, FormatNamesBothGroundTruths) {
  Scenario s = random_preserved(3);
  auto w = ambiguity_witness(s.run.trace, s.log, s.truth(), 0, s.g.out_neighbors(0)[0], 2);
  std::string text = format_witness(w);
  EXPECT_NE(text.find("original    target " + format_schedule(s.schedules[0])), std::string::npos);
  EXPECT_NE(text.find("alternative target " + format_schedule(w.alternative_target)), std::string::npos);
  EXPECT_NE(text.find("digest"), std::string::npos);
}

// On the 3-cycle (P, P, C) the helper promotes the target's first lump
// (z = 2) and then its second (z = 3) to state, broadcasting both to the
// curious node. Together with the curious node's own transfer into the target
// they pin y_T, so no alternative ground truth can reproduce the log.
TEST(Witness, ThreeCycleLeaksTheTargetThroughHelperBroadcasts) {
  for (std::uint64_t seed = 1; seed <= 20; ++seed) {
    Rng rng(seed);
    Scenario s = simulate(directed_cycle(3), {R::Private, R::Private, R::Curious}, {5, 9, -2}, rng);
    ASSERT_EQ(classify_privacy(s.g, s.roles)[0].classification, PrivacyClass::Preserved);

    std::optional<std::int64_t> first_lump, second_lump, own_transfer;
    for (const Message& m : s.log.messages) {
      if (m.kind == MessageKind::StateBroadcast && m.src == 1 && m.round == 1 && m.payload.z == 2)
        first_lump = m.payload.y;
      if (m.kind == MessageKind::StateBroadcast && m.src == 1 && m.round == 2 && m.payload.z == 3)
        second_lump = m.payload.y;
      if (m.kind == MessageKind::MassTransfer && m.src == 2 && m.round == 0) own_transfer = m.payload.y;
    }
    ASSERT_TRUE(first_lump && second_lump && own_transfer) << "seed " << seed;
    const std::int64_t recovered3 = *first_lump + *second_lump - *own_transfer;
    EXPECT_EQ(recovered3, 3 * s.schedules[0].y0) << "seed " << seed;

    for (std::int64_t delta : {-3, -2, -1, 1, 2, 3}) {
      EXPECT_THROW(ambiguity_witness(s.run.trace, s.log, s.truth(), 0, 1, delta), WitnessUnavailable)
          << "seed " << seed << " delta " << delta;
    }
  }
}
