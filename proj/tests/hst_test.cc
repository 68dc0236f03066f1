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


#include "hstk/hst.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "hstk/errors.hpp"
#include "testutil.hpp"

namespace hstk {
namespace {

using testing::star_text;
using testing::two_level_tree_text;

TEST(Hst, EdgeCostsFollowLevels) {
  const Hst t = parse_hst(star_text(3, 20));
  EXPECT_EQ(t.height(), 1);
  for (NodeId l : t.leaves()) {
    EXPECT_DOUBLE_EQ(t.node(l).edge_cost, 1.0);
    EXPECT_EQ(t.subtree_leaves(l), 1);
  }
  EXPECT_EQ(t.subtree_leaves(t.root()), 3);
  EXPECT_DOUBLE_EQ(t.cost(t.root()), 20.0);
}

TEST(Hst, DistanceAcrossLevelOneNodes) {
  const Hst t = parse_hst(two_level_tree_text());
  EXPECT_DOUBLE_EQ(t.distance(t.find("a"), t.find("c")), 42.0);
  EXPECT_DOUBLE_EQ(t.distance(t.find("a"), t.find("b")), 2.0);
  EXPECT_DOUBLE_EQ(t.distance(t.find("a"), t.find("a")), 0.0);
  EXPECT_DOUBLE_EQ(t.distance(t.find("a"), t.find("x")), 1.0);
}

TEST(Hst, LcaAncestorBackbone) {
  const Hst t = parse_hst(two_level_tree_text());
  const NodeId a = t.find("a"), b = t.find("b"), c = t.find("c");
  EXPECT_EQ(t.lca(a, b), t.find("x"));
  EXPECT_EQ(t.lca(a, c), t.root());
  EXPECT_EQ(t.ancestor_at(a, 1), t.find("x"));
  EXPECT_EQ(t.ancestor_at(a, 2), t.root());
  const std::vector<NodeId> bb{a, t.find("x"), t.root()};
  EXPECT_EQ(t.backbone(a), bb);
  EXPECT_TRUE(t.in_subtree(a, t.find("x")));
  EXPECT_FALSE(t.in_subtree(c, t.find("x")));
}

TEST(Hst, RejectsSmallLambda) {
  const std::string t = "hst 15\nnode r - 2\nnode x r 1\nnode a x 0\n";
  EXPECT_THROW(parse_hst(t), LambdaTooSmall);
  EXPECT_NO_THROW(parse_hst("hst 20\nnode r - 2\nnode x r 1\nnode a x 0\n"));
}

TEST(Hst, RejectsMalformedTrees) {
  EXPECT_THROW(parse_hst("hst 20\nnode r - 1\nnode r r 0\n"), MalformedTree);
  EXPECT_THROW(parse_hst("hst 20\nnode r - 1\nnode a q 0\n"), MalformedTree);
  EXPECT_THROW(parse_hst("hst 20\nnode r - 1\nnode s - 1\nnode a r 0\n"), MalformedTree);
  EXPECT_THROW(parse_hst("hst 20\nnode r - 2\nnode a r 0\n"), MalformedTree);
  EXPECT_THROW(parse_hst("node r - 1\n"), ParseError);
}

TEST(Hst, DummyLeavesHangOffTheRoot) {
  const Hst t = parse_hst("hst 20\nnode r - 2\nnode x r 1\nnode a x 0\nnode b x 0\nnode c x 0\n");
  const Hst d1 = add_dummy_leaves(t, 1);
  EXPECT_EQ(d1.leaf_count(), 5);
  EXPECT_EQ(d1.dummy_count(), 2);
  const Hst d2 = add_dummy_leaves(t, 2);
  EXPECT_EQ(d2.dummy_count(), 4);
  for (NodeId l : d2.leaves()) {
    EXPECT_EQ(d2.level(l), 0);
    if (d2.node(l).is_dummy) {
      EXPECT_EQ(d2.ancestor_at(l, 2), d2.root());
    }
  }
  // Real node ids survive, so ids from the plain tree stay valid.
  for (NodeId v = 0; v < t.size(); ++v) EXPECT_EQ(d2.node(v).name, t.node(v).name);
}

TEST(Hst, RenderRoundTrip) {
  const Hst t = parse_hst(two_level_tree_text());
  EXPECT_EQ(render_hst(parse_hst(render_hst(t))), render_hst(t));
}

TEST(Hst, BalancedShape) {
  const Hst t = balanced_hst(8, 3, 30);
  EXPECT_EQ(t.height(), 3);
  EXPECT_EQ(t.leaf_count(), 8);
  for (NodeId v = 0; v < t.size(); ++v)
    if (!t.is_leaf(v)) {
      EXPECT_EQ(t.children(v).size(), 2u);
    }
  const Hst odd = balanced_hst(5, 2, 20);
  EXPECT_EQ(odd.leaf_count(), 5);
  EXPECT_EQ(odd.children(odd.root()).size(), 2u);
}

std::vector<std::vector<double>> random_metric(int n, uint64_t seed) {
  // Shortest paths over random weights give a proper metric.
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> w(1.0, 50.0);
  std::vector<std::vector<double>> d(n, std::vector<double>(n));
  for (int i = 0; i < n; ++i)
    for (int j = i + 1; j < n; ++j) d[i][j] = d[j][i] = std::round(w(rng));
  for (int k = 0; k < n; ++k)
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) d[i][j] = std::min(d[i][j], d[i][k] + d[k][j]);
  return d;
}

TEST(Frt, TwoPointsDominated) {
  const std::vector<std::vector<double>> d{{0, 4}, {4, 0}};
  const FrtEmbedding e = frt_embed(d, 10, 1);
  const double td = e.hst.distance(e.hst.find("p0"), e.hst.find("p1"));
  EXPECT_GE(td, 4.0 * e.scale);
}

TEST(Frt, SinglePointIsOneLeafUnderARoot) {
  const FrtEmbedding e = frt_embed({{0}}, 10, 3);
  EXPECT_EQ(e.hst.leaf_count(), 1);
  EXPECT_EQ(e.hst.height(), 1);
}

TEST(Frt, DominatesOnRandomMetrics) {
  for (uint64_t seed = 1; seed <= 20; ++seed) {
    const auto d = random_metric(6, seed);
    const FrtEmbedding e = frt_embed(d, 10, seed);
    double lo = 1e300, hi = 0.0;
    for (int i = 0; i < 6; ++i)
      for (int j = i + 1; j < 6; ++j) lo = std::min(lo, d[i][j]), hi = std::max(hi, d[i][j]);
    // The root sits at the first level whose radius scale covers the scaled
    // diameter.
    const double top = hi * (lo < 1.0 ? 1.0 / lo : 1.0);
    EXPECT_LE(e.hst.height(), std::max(1.0, std::ceil(std::log10(top) + 1e-12) + 1)) << "seed " << seed;
    for (int i = 0; i < 6; ++i)
      for (int j = 0; j < 6; ++j) {
        const double td = e.hst.distance(e.hst.find("p" + std::to_string(i)),
                                         e.hst.find("p" + std::to_string(j)));
        EXPECT_GE(td + 1e-9, d[i][j] * e.scale) << "seed " << seed;
      }
  }
}

TEST(Frt, SameSeedSameTree) {
  const auto d = random_metric(4, 9);
  EXPECT_EQ(render_hst(frt_embed(d, 10, 5).hst), render_hst(frt_embed(d, 10, 5).hst));
}

TEST(Frt, RejectsBadMetrics) {
  EXPECT_THROW(frt_embed({}, 10, 1), DegenerateMetric);
  EXPECT_THROW(frt_embed({{0, 1}, {2, 0}}, 10, 1), DegenerateMetric);
  EXPECT_THROW(frt_embed({{0, 0}, {0, 0}}, 10, 1), DegenerateMetric);
}

}  // namespace
}  // namespace hstk
