// Copyright 2026 The hstk Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.


#include "hstk/tw.hpp"

#include <gtest/gtest.h>

#include <random>

#include "hstk/engine.hpp"
#include "hstk/errors.hpp"
#include "hstk/oracle.hpp"
#include "testutil.hpp"

namespace hstk {
namespace {

using hstk::testing::run_audited;
using hstk::testing::star_text;
using hstk::testing::two_level_tree_text;

TEST(LogCost, IntegerPowers) {
  EXPECT_EQ(logcost_of(30, 20), 2);  // 400 <= 1200 < 8000
  EXPECT_EQ(logcost_of(0, 20), 0);
  EXPECT_EQ(logcost_of(0.01, 20), 0);
  EXPECT_EQ(logcost_of(0.5, 20), 1);   // 2 lambda cost = 20 exactly
  EXPECT_EQ(logcost_of(10, 20), 2);    // 400 exactly
  EXPECT_EQ(logcost_of(9.99, 20), 1);
}

TEST(CostEstimate, SingleDonor) {
  const Hst hst = add_dummy_leaves(parse_hst(star_text(3, 20)), 1);
  MovementLedger ledger(hst);
  const double dp = 0.3, delta = 0.02, gamma = 0.005, floor = delta - gamma;
  for (NodeId l : hst.leaves()) ledger.set_mass(l, floor);
  const NodeId l0 = hst.find("l0"), l1 = hst.find("l1");
  ledger.set_mass(l0, 0.2);
  ledger.set_mass(l1, 1.0 + floor);
  const double d = 1.0 - dp - 0.2;
  const CostEstimate ce = cost_estimate(hst, ledger, l0, dp, delta, gamma);
  EXPECT_NEAR(ce.cost, 2.0 * d, 1e-12);
  EXPECT_EQ(ce.logcost, logcost_of(2.0 * d, 20));
}

TEST(CostEstimate, SaturatedLeafIsFree) {
  const Hst hst = add_dummy_leaves(parse_hst(star_text(3, 20)), 1);
  MovementLedger ledger(hst);
  ledger.set_mass(hst.find("l0"), 0.8);
  const CostEstimate ce = cost_estimate(hst, ledger, hst.find("l0"), 0.3, 0.02, 0.005);
  EXPECT_EQ(ce.cost, 0.0);
  EXPECT_EQ(ce.logcost, 0);
}

TEST(CostEstimate, InfeasibleThrows) {
  const Hst hst = add_dummy_leaves(parse_hst(star_text(3, 20)), 1);
  MovementLedger ledger(hst);
  for (NodeId l : hst.leaves()) ledger.set_mass(l, 0.016);
  EXPECT_THROW(cost_estimate(hst, ledger, hst.find("l0"), 0.3, 0.02, 0.005), InfeasibleGather);
}

// The greedy estimate against a transport min-cost flow on random masses.
TEST(CostEstimate, MatchesFlowOracle) {
  std::mt19937_64 rng(23);
  for (const std::string& text : {two_level_tree_text(), star_text(7, 10)}) {
    const Hst hst = add_dummy_leaves(parse_hst(text), 2);
    for (int trial = 0; trial < 40; ++trial) {
      MovementLedger ledger(hst);
      std::vector<double> mass(hst.size(), 0.0);
      std::uniform_real_distribution<double> u(0.0, 0.6);
      for (NodeId l : hst.leaves()) {
        mass[l] = 0.01 + u(rng);
        ledger.set_mass(l, mass[l]);
      }
      const auto& leaves = hst.leaves();
      const NodeId target = leaves[rng() % leaves.size()];
      const double greedy = cost_estimate(hst, ledger, target, 0.3, 0.02, 0.005).cost;
      const double flow = gather_cost_flow(hst, mass, target, 0.3, 0.02, 0.005);
      EXPECT_NEAR(greedy, flow, 1e-9 * std::max(1.0, flow));
    }
  }
}

TEST(FindLeaves, TenEarliestDeadlinesSpawn) {
  const Hst hst = parse_hst(star_text(12, 10));
  LeafDeadlines dl;
  for (int i = 0; i < 12; ++i) dl[hst.find("l" + std::to_string(i))] = 100 - i;
  const FoundLeaves f = find_leaves(hst, hst.root(), dl);
  ASSERT_EQ(f.s.size(), 10u);
  for (NodeId u : f.s) EXPECT_GE(dl.at(u), 100 - 11) << hst.node(u).name;
  // l0 and l1 carry the two latest deadlines and are never reached.
  EXPECT_EQ(std::count(f.s.begin(), f.s.end(), hst.find("l0")), 0);
  EXPECT_EQ(std::count(f.s.begin(), f.s.end(), hst.find("l1")), 0);
  EXPECT_EQ(f.g.size(), 11u);
}

TEST(FindLeaves, TooFewLeavesNoSpawn) {
  const Hst hst = parse_hst(star_text(12, 10));
  LeafDeadlines dl;
  for (int i = 0; i < 9; ++i) dl[hst.find("l" + std::to_string(i))] = 10 + i;
  const FoundLeaves f = find_leaves(hst, hst.root(), dl);
  EXPECT_TRUE(f.s.empty());
  EXPECT_EQ(f.g.size(), 10u);
}

TEST(FindLeaves, LowestFullLevelWins) {
  // Two-level tree, lambda 20: c_root = 400, so no level fills from four
  // leaves; at w = x (cost 20) two leaves cost 2 < 20 as well.
  const Hst hst = parse_hst(two_level_tree_text());
  LeafDeadlines dl{{hst.find("a"), 5}, {hst.find("b"), 6}, {hst.find("c"), 7}};
  EXPECT_TRUE(find_leaves(hst, hst.root(), dl).s.empty());
  EXPECT_TRUE(find_leaves(hst, hst.find("x"), dl).s.empty());
}

class ForestTest : public ::testing::Test {
 protected:
  Hst hst = parse_hst(star_text(12, 10));
  ChargingForest forest;
  NodeId l(int i) const { return hst.find("l" + std::to_string(i)); }
  Elr elr(int id, int i, int64_t b, int64_t e) const { return {id, l(i), b, e}; }
};

TEST_F(ForestTest, WitnessEdgesFromPreviousSpawn) {
  const NodeId w = hst.root();
  EXPECT_TRUE(forest.build_witness(w, 4, elr(0, 0, 1, 6)).empty());
  forest.record_spawn(w, 4, {l(5), l(6)});
  forest.build_witness(l(5), 4, elr(1, 5, 2, 9));
  forest.build_witness(l(6), 4, elr(2, 6, 3, 8));
  const auto kids = forest.build_witness(w, 11, elr(3, 7, 2, 13));
  ASSERT_EQ(kids.size(), 2u);
  EXPECT_EQ(kids[0], (std::pair<NodeId, int64_t>{l(5), 4}));
  EXPECT_EQ(forest.size(), 4);
  EXPECT_EQ(forest.latest_before(w, 11), 4);
  EXPECT_EQ(forest.tree_leaves(w, 11).size(), 2u);
}

TEST_F(ForestTest, PreviousOccurrenceOutsideWindowGivesNoEdges) {
  const NodeId w = hst.root();
  forest.build_witness(w, 4, elr(0, 0, 1, 6));
  forest.record_spawn(w, 4, {l(5), l(6)});
  EXPECT_TRUE(forest.build_witness(w, 11, elr(3, 7, 5, 13)).empty());
  EXPECT_TRUE(forest.build_witness(w, 15, Elr{}).empty());
  EXPECT_EQ(forest.tree_leaves(w, 11).size(), 1u);
}

TEST_F(ForestTest, ChargingTermsOnStar) {
  const NodeId r = hst.root();
  forest.build_witness(r, 4, elr(0, 0, 1, 6));
  std::vector<NodeId> all;
  for (int i = 0; i < 12; ++i) all.push_back(l(i));
  forest.record_spawn(r, 4, all);
  for (int i = 0; i < 12; ++i) forest.build_witness(l(i), 4, elr(i + 1, i, 2 + i, 40 + i));
  forest.build_witness(r, 11, elr(20, 3, 3, 30));
  const Timestep tau{11, 3};
  const ChargingTerms ct = charging_terms(hst, forest, r, 11, tau);
  EXPECT_EQ(ct.level, 0);
  EXPECT_EQ(ct.leaves, 12);
  EXPECT_DOUBLE_EQ(ct.level_cost, 12.0);
  ASSERT_EQ(ct.terms.size(), 12u);
  for (const Term& t : ct.terms) {
    const int i = std::stoi(hst.node(t.u).name.substr(1));
    EXPECT_EQ(t.lo, (Timestep{2 + i, 0}));
    EXPECT_EQ(t.hi, tau);
  }
}

TEST_F(ForestTest, SingletonHasNoTerms) {
  forest.build_witness(hst.root(), 4, elr(0, 0, 1, 6));
  EXPECT_TRUE(charging_terms(hst, forest, hst.root(), 4, {4, 1}).terms.empty());
  EXPECT_THROW(charging_terms(hst, forest, hst.root(), 5, {5, 1}), InvariantBreach);
}

TEST(FTreeCost, ExcludesRoot) {
  const Hst hst = parse_hst(two_level_tree_text());
  EXPECT_DOUBLE_EQ(ftree_cost(hst, hst.root(),
                              {hst.root(), hst.find("x"), hst.find("a"), hst.find("b")}),
                   22.0);
}

Instance tw_instance(const std::string& tree, int k, int reqs, const char* law, uint64_t seed) {
  Instance inst = generate_random(parse_hst(tree), k, reqs, WindowLaw::parse(law), seed);
  inst.overrides = scaled_overrides(inst, Mode::kTimeWindows);
  return parse_instance(render_instance(inst));
}

TEST(TimeWindows, GeneratedRunsAreClean) {
  for (uint64_t seed = 1; seed <= 5; ++seed) {
    const Instance inst = tw_instance(star_text(4, 20), 1 + seed % 2, 10, "uniform:2:12", seed);
    const auto run = run_audited(inst, Mode::kTimeWindows);
    EXPECT_TRUE(run.audit.passed()) << seed << "\n" << render_audit_table(run.audit);
    EXPECT_GE(run.result.root_dual, 0.0);
    for (const auto& r : run.result.requests) EXPECT_TRUE(r.served) << r.id;
  }
}

// Wide windows on a 20-leaf star make level 0 fill up, so spawns, witness
// edges and forest-charged simple updates all occur.
TEST(TimeWindows, WideCorpusExercisesCharging) {
  const Instance inst = tw_instance(star_text(20, 10), 1, 40, "uniform:40:70", 1);
  const auto run = run_audited(inst, Mode::kTimeWindows);
  EXPECT_TRUE(run.audit.passed()) << render_audit_table(run.audit);
  EXPECT_GT(run.audit.find("witness_rule")->evaluated, 0);
  EXPECT_GT(run.audit.find("forest_window")->evaluated, 0);
  EXPECT_GT(run.audit.find("charging_terms")->evaluated, 0);
  EXPECT_GT(run.audit.find("piggyback_rule")->evaluated, 0);
}

TEST(TimeWindows, UnitWindowsAlsoRun) {
  const Instance inst = tw_instance(star_text(3, 20), 1, 6, "const:1", 4);
  const auto run = run_audited(inst, Mode::kTimeWindows);
  EXPECT_TRUE(run.audit.passed()) << render_audit_table(run.audit);
}

}  // namespace
}  // namespace hstk
