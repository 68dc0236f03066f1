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


#include "hstk/ledger.hpp"

#include <gtest/gtest.h>

#include <random>

#include "hstk/errors.hpp"
#include "testutil.hpp"

namespace hstk {
namespace {

class LedgerTest : public ::testing::Test {
 protected:
  void SetUp() override {
    hst = parse_hst(hstk::testing::two_level_tree_text());
    ledger = MovementLedger(hst);
    for (NodeId l : hst.leaves()) ledger.set_mass(l, 0.25);
  }
  NodeId n(const char* name) const { return hst.find(name); }

  Hst hst;
  MovementLedger ledger;
};

TEST_F(LedgerTest, MoveAcrossRootChargesUpwardPathOnly) {
  const double cost = ledger.move(n("a"), n("c"), 0.05, {1, 1}, Attribution::kLocal);
  EXPECT_NEAR(cost, 0.05 * 21.0, 1e-15);
  EXPECT_NEAR(ledger.mass(n("a")), 0.2, 1e-15);
  EXPECT_NEAR(ledger.mass(n("c")), 0.3, 1e-15);
  const Timestep lo{0, 0}, hi{1, 1};
  EXPECT_NEAR(ledger.g(n("a"), lo, hi), 0.05, 1e-15);
  EXPECT_NEAR(ledger.g(n("x"), lo, hi), 0.05, 1e-15);
  EXPECT_EQ(ledger.r(n("x"), lo, hi), 0.0);
  EXPECT_NEAR(ledger.r(n("y"), lo, hi), 0.05, 1e-15);
  EXPECT_NEAR(ledger.r(n("c"), lo, hi), 0.05, 1e-15);
  EXPECT_EQ(ledger.g(n("r"), lo, hi), 0.0);
  EXPECT_EQ(ledger.g(n("b"), lo, hi), 0.0);
  EXPECT_NEAR(ledger.D(n("x"), lo, hi), 0.05, 1e-15);
  EXPECT_NEAR(ledger.D(n("y"), lo, hi), -0.05, 1e-15);
}

TEST_F(LedgerTest, IntervalsAreHalfOpen) {
  ledger.move(n("a"), n("b"), 0.1, {2, 1}, Attribution::kLocal);
  EXPECT_NEAR(ledger.g(n("a"), {2, 0}, {2, 1}), 0.1, 1e-15);
  EXPECT_EQ(ledger.g(n("a"), {2, 1}, {3, 0}), 0.0);
  EXPECT_EQ(ledger.g(n("a"), {1, 0}, {2, 0}), 0.0);
  EXPECT_EQ(ledger.g(n("a"), {2, 1}, {2, 1}), 0.0);
  EXPECT_EQ(ledger.g(n("a"), {3, 0}, {2, 0}), 0.0);
}

TEST_F(LedgerTest, AttributionSplitsGive) {
  ledger.move(n("a"), n("b"), 0.1, {1, 1}, Attribution::kLocal);
  ledger.move(n("a"), n("c"), 0.02, {1, 1}, Attribution::kInherited);
  ledger.move(n("a"), n("d"), 0.01, {1, 2}, Attribution::kTopup);
  const Timestep lo{0, 0}, hi{2, 0};
  EXPECT_NEAR(ledger.g_part(n("a"), Attribution::kLocal, lo, hi), 0.1, 1e-15);
  EXPECT_NEAR(ledger.g_part(n("a"), Attribution::kInherited, lo, hi), 0.02, 1e-15);
  EXPECT_NEAR(ledger.g_part(n("a"), Attribution::kTopup, lo, hi), 0.01, 1e-15);
  EXPECT_NEAR(ledger.g(n("a"), lo, hi), 0.13, 1e-15);
  EXPECT_NEAR(ledger.g_part(n("x"), Attribution::kInherited, lo, hi), 0.02, 1e-15);
}

TEST_F(LedgerTest, OutOfOrderEntryRejected) {
  ledger.move(n("a"), n("b"), 0.1, {2, 1}, Attribution::kLocal);
  EXPECT_THROW(ledger.move(n("a"), n("b"), 0.1, {2, 0}, Attribution::kLocal), InvariantBreach);
}

TEST_F(LedgerTest, TransferZeroIsNoop) {
  const NodeId src[] = {n("a")};
  EXPECT_TRUE(apply_transfer(ledger, src, n("c"), 0.0, {1, 1}, Attribution::kLocal, 0.0).empty());
  EXPECT_EQ(ledger.mass(n("a")), 0.25);
  EXPECT_EQ(ledger.g(n("a"), {0, 0}, {9, 0}), 0.0);
}

TEST_F(LedgerTest, TransferFromSiblingSubtree) {
  ledger.set_mass(n("c"), 0.3);
  const NodeId src[] = {n("c")};
  auto pieces = apply_transfer(ledger, src, n("a"), 0.05, {1, 1}, Attribution::kLocal, 0.01);
  ASSERT_EQ(pieces.size(), 1u);
  EXPECT_NEAR(ledger.mass(n("c")), 0.25, 1e-15);
  EXPECT_NEAR(ledger.mass(n("a")), 0.30, 1e-15);
  EXPECT_NEAR(ledger.g(n("c"), {0, 0}, {1, 1}), 0.05, 1e-15);
  EXPECT_NEAR(ledger.g(n("y"), {0, 0}, {1, 1}), 0.05, 1e-15);
}

TEST_F(LedgerTest, TransferDrainsInOrderAndRespectsFloor) {
  const NodeId src[] = {n("c"), n("d")};
  auto pieces = apply_transfer(ledger, src, n("a"), 0.3, {1, 1}, Attribution::kLocal, 0.05);
  ASSERT_EQ(pieces.size(), 2u);
  EXPECT_NEAR(pieces[0].amount, 0.2, 1e-15);
  EXPECT_NEAR(pieces[1].amount, 0.1, 1e-15);
  EXPECT_NEAR(ledger.mass(n("c")), 0.05, 1e-15);
  EXPECT_NEAR(ledger.mass(n("d")), 0.15, 1e-15);
}

TEST_F(LedgerTest, TransferBeyondAvailableThrows) {
  const NodeId src[] = {n("c"), n("d")};
  EXPECT_THROW(apply_transfer(ledger, src, n("a"), 0.41, {1, 1}, Attribution::kLocal, 0.05),
               InsufficientMass);
}

// Random moves against a plain list of every move: interval sums, attribution
// and conservation must agree.
TEST_F(LedgerTest, MatchesBruteForceReplay) {
  struct Rec {
    NodeId src, dst;
    double amount;
    Timestep t;
    Attribution a;
  };
  std::vector<Rec> recs;
  std::mt19937_64 rng(17);
  const auto& leaves = hst.leaves();
  std::uniform_real_distribution<double> amt(0.0, 0.01);
  Timestep t{1, 0};
  double cost = 0.0, expect_cost = 0.0;
  for (int i = 0; i < 300; ++i) {
    if (rng() % 3 == 0) t = rng() % 2 ? Timestep{t.q + 1, 0} : t.next();
    Rec r{leaves[rng() % leaves.size()], leaves[rng() % leaves.size()], amt(rng), t,
          static_cast<Attribution>(rng() % 3)};
    cost += ledger.move(r.src, r.dst, r.amount, r.t, r.a);
    if (r.src != r.dst) expect_cost += r.amount * hst.up_cost(r.src, hst.lca(r.src, r.dst));
    recs.push_back(r);
  }
  EXPECT_NEAR(cost, expect_cost, 1e-12);
  EXPECT_NEAR(ledger.total_mass(), 0.25 * leaves.size(), 1e-12);
  for (int trial = 0; trial < 200; ++trial) {
    Timestep lo{int64_t(rng() % (t.q + 2)), int64_t(rng() % 3)};
    Timestep hi{int64_t(rng() % (t.q + 2)), int64_t(rng() % 3)};
    const NodeId v = static_cast<NodeId>(rng() % hst.size());
    double g = 0, r = 0, loc = 0;
    for (const Rec& m : recs) {
      if (!(lo < m.t && m.t <= hi) || m.src == m.dst) continue;
      const NodeId top = hst.lca(m.src, m.dst);
      const bool up = hst.in_subtree(m.src, v) && !hst.in_subtree(top, v);
      const bool down = hst.in_subtree(m.dst, v) && !hst.in_subtree(top, v);
      if (up) g += m.amount;
      if (up && m.a == Attribution::kLocal) loc += m.amount;
      if (down) r += m.amount;
    }
    EXPECT_NEAR(ledger.g(v, lo, hi), g, 1e-12);
    EXPECT_NEAR(ledger.r(v, lo, hi), r, 1e-12);
    EXPECT_NEAR(ledger.g_part(v, Attribution::kLocal, lo, hi), loc, 1e-12);
  }
}

}  // namespace
}  // namespace hstk
