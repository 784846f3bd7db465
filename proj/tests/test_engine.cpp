#include <gtest/gtest.h>

#include <fstream>
#include <numeric>
#include <sstream>

#include "ppqc/engine.hpp"
#include "ppqc/errors.hpp"

using namespace ppqc;

namespace {

SubstateSchedule repeat(std::int64_t y0, std::size_t length) {
  return {y0, std::vector<std::int64_t>(length, y0), std::vector<std::int64_t>(length, 1)};
}

std::vector<SubstateSchedule> neutral(const std::vector<std::int64_t>& ys, std::size_t dmax) {
  std::vector<SubstateSchedule> out;
  for (auto y : ys) out.push_back(repeat(y, dmax + 2));
  return out;
}

SimulationResult two_node() {
  static const Digraph g = complete_bidirectional(2);
  static const auto schedules = neutral({4, 6}, 1);
  return run_simulation(g, schedules, {std::nullopt, 10});
}

std::string slurp(const std::string& path) {
  std::ifstream in(path);
  std::stringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

struct RandomTrial {
  Digraph g;
  std::vector<SubstateSchedule> schedules;
  std::int64_t sum = 0;
};

RandomTrial random_trial(std::uint64_t seed) {
  Rng rng(seed);
  RandomTrial t;
  const std::size_t n = 3 + seed % 12;
  t.g = generate_random_strongly_connected(n, 0.25 + 0.05 * static_cast<double>(seed % 10), rng);
  const std::size_t dmax = max_out_degree(t.g);
  std::uniform_int_distribution<std::int64_t> ys(-100, 100);
  for (std::size_t j = 0; j < n; ++j) {
    const std::int64_t y = ys(rng);
    t.sum += y;
    t.schedules.push_back(decompose_initial_state(y, dmax, NodeRole::Private, kDefaultOffsetBound, rng));
  }
  return t;
}

}  // namespace

TEST(Bound, FormulaValues) {
  EXPECT_EQ(theoretical_bound(2, 2, 1), 10u);
  EXPECT_EQ(theoretical_bound(3, 3, 1), 29u);
  EXPECT_EQ(theoretical_bound(20, 100, 8), 190409u);
}

TEST(HandTrace, ConvergesToFiveAtRoundFive) {
  auto r = two_node();
  EXPECT_EQ(r.report.average, (Fraction{5, 1}));
  EXPECT_EQ(r.report.convergence_round, 5);
  EXPECT_EQ(r.report.quiescence_round, 6);
  EXPECT_EQ(r.report.absorbed_mass, (YZ{30, 6}));
  EXPECT_TRUE(r.report.converged);
  EXPECT_TRUE(r.report.all_audits_pass());
  EXPECT_EQ(r.trace.rounds.size(), 16u);
  for (const YZ& s : r.report.final_states) EXPECT_TRUE(r.report.average.matches(s));
}

TEST(HandTrace, MessageLogMatchesDocumentedFixture) {
  auto r = two_node();
  std::ostringstream log;
  write_message_log(log, r.trace);
  EXPECT_EQ(log.str(), slurp(PPQC_DOCS_DIR "/fixtures/two_node_messages.csv"));
}

TEST(HandTrace, TraceCsvHeaderAndCounts) {
  auto r = two_node();
  std::ostringstream csv;
  write_trace_csv(csv, r.trace);
  std::istringstream in(csv.str());
  std::string line;
  std::getline(in, line);
  EXPECT_EQ(line, "round,state_broadcasts,mass_transfers,transmitting_nodes,converged_nodes");
  std::getline(in, line);
  EXPECT_EQ(line, "0,1,2,2,0");
  EXPECT_EQ(r.report.tx_broadcast_as_one, 13u);
}

TEST(HandTrace, ConservationHoldsAtEveryRound) {
  auto r = two_node();
  EXPECT_TRUE(audit_mass_conservation(r.trace, neutral({4, 6}, 1)).ok);
}

TEST(Conservation, CorruptedTransferIsCaughtAtItsRound) {
  auto r = two_node();
  auto schedules = neutral({4, 6}, 1);
  for (Message& m : r.trace.rounds[1].emitted) {
    if (m.kind == MessageKind::MassTransfer) {
      m.payload.y += 1;
      break;
    }
  }
  AuditVerdict v = audit_mass_conservation(r.trace, schedules);
  EXPECT_FALSE(v.ok);
  EXPECT_EQ(v.first_violation_round, 1);
}

TEST(Conservation, UninjectedPoolAfterInitOnThreeCycle) {
  // dmax = 1: three substates each, one loaded at init, two still pending.
  auto s = repeat(5, 3);
  EXPECT_EQ(uninjected_pool(s, 1), (YZ{10, 2}));
  auto g = directed_cycle(3);
  auto schedules = neutral({5, -1, 2}, 1);
  auto r = run_simulation(g, schedules);
  for (const NodeState& v : r.trace.initial) {
    EXPECT_EQ(uninjected_pool(schedules[v.id], v.s).z, 2);
  }
  EXPECT_TRUE(r.report.conservation.ok);
}

TEST(Convergence, EqualStatesConvergeAtZero) {
  Rng rng(2);
  auto g = generate_random_strongly_connected(8, 0.4, rng);
  auto r = run_simulation(g, neutral(std::vector<std::int64_t>(8, 7), max_out_degree(g)));
  EXPECT_EQ(r.report.convergence_round, 0);
  EXPECT_EQ(r.report.average, (Fraction{7, 1}));
  EXPECT_TRUE(r.report.all_audits_pass());
}

TEST(Convergence, CorruptedTraceHasNoConvergenceRound) {
  auto r = two_node();
  r.trace.rounds.back().nodes[0].state = {31, 6};
  EXPECT_FALSE(detect_convergence_round(r.trace, r.trace.average).has_value());
}

TEST(Audits, MonotonicityCatchesRegression) {
  auto r = two_node();
  ASSERT_TRUE(audit_state_monotonicity(r.trace).ok);
  r.trace.rounds[3].nodes[1].state = {1, 1};
  EXPECT_FALSE(audit_state_monotonicity(r.trace).ok);
}

TEST(Engine, RejectsDisconnectedGraphAndBadSchedules) {
  EXPECT_THROW(run_simulation(directed_path(3), neutral({1, 2, 3}, 1)), ContractViolation);
  auto g = directed_cycle(3);
  EXPECT_THROW(run_simulation(g, neutral({1, 2}, 1)), InvalidSchedule);
  auto wrong_length = neutral({1, 2, 3}, 2);
  EXPECT_THROW(run_simulation(g, wrong_length), InvalidSchedule);
}

TEST(Engine, MaxRoundsExhaustionIsFlagged) {
  Rng rng(6);
  auto g = generate_random_strongly_connected(10, 0.3, rng);
  std::vector<SubstateSchedule> s;
  for (std::int64_t j = 0; j < 10; ++j)
    s.push_back(decompose_initial_state(j * 7 - 30, max_out_degree(g), NodeRole::Private, 100, rng));
  auto r = run_simulation(g, s, {3, std::nullopt});
  EXPECT_FALSE(r.report.converged);
  EXPECT_FALSE(r.report.quiescence_round.has_value());
  EXPECT_FALSE(r.report.silence.ok);
  EXPECT_EQ(r.trace.rounds.size(), 3u);
}

TEST(Engine, OverflowAbortsWithPartialTrace) {
  auto g = complete_bidirectional(2);
  const std::int64_t big = INT64_MAX / 2;
  std::vector<SubstateSchedule> s = {{big, {big - 1, big + 1, big}, {1, 1, 1}}, repeat(big, 3)};
  auto r = run_simulation(g, s);
  EXPECT_TRUE(r.report.aborted);
  EXPECT_FALSE(r.trace.abort_reason.empty());
}

TEST(Properties, RandomPrivateTrials) {
  for (std::uint64_t seed = 0; seed < 60; ++seed) {
    RandomTrial t = random_trial(seed);
    const std::size_t n = t.g.node_count();
    const std::size_t dmax = max_out_degree(t.g);
    auto r = run_simulation(t.g, t.schedules);
    const TrialReport& rep = r.report;
    ASSERT_TRUE(rep.converged) << "seed " << seed;
    ASSERT_TRUE(rep.all_audits_pass()) << "seed " << seed;

    // Exact average, independently computed.
    for (const YZ& s : rep.final_states) {
      ASSERT_EQ(static_cast<Wide>(s.y) * static_cast<Wide>(n), static_cast<Wide>(t.sum) * s.z) << "seed " << seed;
    }
    ASSERT_LE(static_cast<std::uint64_t>(*rep.convergence_round), rep.bound);
    ASSERT_EQ(rep.absorbed_mass.y, static_cast<std::int64_t>(dmax + 2) * t.sum);
    ASSERT_EQ(rep.absorbed_mass.z, static_cast<std::int64_t>((dmax + 2) * n));

    for (const RoundRecord& rec : r.trace.rounds) {
      ASSERT_LE(rec.transmitting_nodes, n);
      std::vector<int> transfers(n, 0);
      for (const Message& m : rec.emitted)
        if (m.kind == MessageKind::MassTransfer) ++transfers[m.src];
      for (std::size_t j = 0; j < n; ++j) {
        ASSERT_LE(transfers[j], 1);
        // Injection phase: every node transfers exactly once per round.
        if (rec.round <= static_cast<std::int64_t>(dmax)) {
          ASSERT_EQ(transfers[j], 1) << "seed " << seed;
        }
      }
      for (const NodeState& v : rec.nodes) ASSERT_GE(v.mass.z, 0);
    }
    // Silent for the whole window after quiescence.
    std::int64_t silent = 0;
    for (const RoundRecord& rec : r.trace.rounds)
      if (rec.round >= *rep.quiescence_round) silent += rec.emitted.empty() ? 1 : 0;
    ASSERT_EQ(silent, static_cast<std::int64_t>(5 * n));
  }
}

TEST(Properties, DeterministicTraces) {
  RandomTrial t = random_trial(17);
  auto a = run_simulation(t.g, t.schedules);
  auto b = run_simulation(t.g, t.schedules);
  std::ostringstream ca, cb, ma, mb;
  write_trace_csv(ca, a.trace);
  write_trace_csv(cb, b.trace);
  write_message_log(ma, a.trace);
  write_message_log(mb, b.trace);
  EXPECT_EQ(ca.str(), cb.str());
  EXPECT_EQ(ma.str(), mb.str());
}

TEST(Fraction, ReducesAndMatches) {
  EXPECT_EQ(Fraction::reduced(268, 20), (Fraction{67, 5}));
  EXPECT_EQ(Fraction::reduced(6, -4), (Fraction{-3, 2}));
  EXPECT_TRUE((Fraction{67, 5}).matches({134, 10}));
  EXPECT_FALSE((Fraction{67, 5}).matches({134, 11}));
}
