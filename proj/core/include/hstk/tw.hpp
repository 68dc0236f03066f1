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

#ifndef HSTK_TW_HPP_
#define HSTK_TW_HPP_

#include <cstdint>
#include <map>
#include <optional>
#include <utility>
#include <vector>

#include "hstk/hst.hpp"
#include "hstk/instance.hpp"
#include "hstk/ledger.hpp"
#include "hstk/lp.hpp"

namespace hstk {

struct CostEstimate {
  double cost = 0.0;
  int logcost = 0;  // floor(log_lambda(2 lambda cost)), clamped to >= 0
};

// Cheapest way to lift the leaf to 1 - delta' while every other leaf keeps
// delta - gamma: greedy by tree distance (ties by id), which is optimal on a
// tree metric. Throws InfeasibleGather.
CostEstimate cost_estimate(const Hst& hst, const MovementLedger& ledger,
                           NodeId leaf, double delta_prime, double delta,
                           double gamma);
int logcost_of(double cost, double lambda);

// Earliest outstanding deadline per leaf.
using LeafDeadlines = std::map<NodeId, int64_t>;

struct FoundLeaves {
  std::vector<NodeId> g;  // vertices of the subtree, sorted by id
  std::vector<NodeId> s;  // spawned set, empty if no level filled up
};

// Adds leaf-to-w paths in deadline order until some level strictly below w
// holds vertices of total cost >= c_w; the lowest such level is spawned.
FoundLeaves find_leaves(const Hst& hst, NodeId w, const LeafDeadlines& dl);

// Frozen request annotation of a charging-forest node.
struct Elr {
  int id = -1;
  NodeId leaf = kNoNode;
  int64_t b = 0, e = 0;
  bool defined() const { return id >= 0; }
};

struct WitnessNode {
  NodeId w = kNoNode;
  int64_t q = 0;
  Elr elr;
  std::vector<std::pair<NodeId, int64_t>> children;
};

// The charging forest of one tree vertex.
class ChargingForest {
 public:
  const WitnessNode* find(NodeId w, int64_t q) const;
  std::optional<int64_t> latest_before(NodeId w, int64_t q) const;
  void record_spawn(NodeId w, int64_t q, std::vector<NodeId> s);
  const std::vector<NodeId>* spawned(NodeId w, int64_t q) const;

  // Adds (w, q); when the previous occurrence q' of w lies inside the
  // annotation's window, every node w spawned at q' becomes a child. Returns
  // the new children.
  std::vector<std::pair<NodeId, int64_t>> build_witness(NodeId w, int64_t q,
                                                        const Elr& elr);

  // Leaves of the tree hanging below (w, q), in BFS order; the root alone if
  // it has no children.
  std::vector<const WitnessNode*> tree_leaves(NodeId w, int64_t q) const;
  int size() const { return count_; }

 private:
  std::map<NodeId, std::map<int64_t, WitnessNode>> nodes_;
  std::map<std::pair<NodeId, int64_t>, std::vector<NodeId>> spawn_;
  int count_ = 0;
};

// Left-hand side for a simple update charged to the tree rooted at
// (vstar, q): the lowest level whose tree leaves cost at least c_vstar / H,
// one term per distinct vertex there (earliest occurrence wins), each
// starting at the arrival of its frozen annotation. Empty for a singleton.
struct ChargingTerms {
  int level = -1;
  int leaves = 0;  // tree leaves at that level, repeats included
  double level_cost = 0.0;
  std::vector<Term> terms;
};
ChargingTerms charging_terms(const Hst& hst, const ChargingForest& forest,
                             NodeId vstar, int64_t q, Timestep tau);

// Sum of c_u over the vertices of an F tree other than its root.
double ftree_cost(const Hst& hst, NodeId root, const std::vector<NodeId>& nodes);

}  // namespace hstk

#endif  // HSTK_TW_HPP_
