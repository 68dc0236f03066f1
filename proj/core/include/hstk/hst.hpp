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

#ifndef HSTK_HST_HPP_
#define HSTK_HST_HPP_

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace hstk {

using NodeId = int32_t;
inline constexpr NodeId kNoNode = -1;

struct HstNode {
  NodeId id = kNoNode;
  std::string name;
  NodeId parent = kNoNode;
  int level = 0;
  // lambda^level for non-root nodes, 0 for the root.
  double edge_cost = 0.0;
  int leaf_count = 0;
  bool is_dummy = false;
  std::vector<NodeId> children;
};

struct NodeSpec {
  std::string id;
  std::optional<std::string> parent;
  int level = 0;
};

// A rooted lambda-HST. Leaves sit at level 0 and the root at level H; the
// edge from v to its parent costs lambda^level(v). Node ids are dense and
// follow declaration order, so "leaf-id order" is declaration order.
class Hst {
 public:
  Hst() = default;

  const HstNode& node(NodeId v) const { return nodes_[v]; }
  const std::vector<HstNode>& nodes() const { return nodes_; }
  int size() const { return static_cast<int>(nodes_.size()); }
  NodeId root() const { return root_; }
  int height() const { return height_; }
  double lambda() const { return lambda_; }
  // Number of leaves, dummies included.
  int leaf_count() const { return static_cast<int>(leaf_order_.size()); }
  int real_leaf_count() const;
  int dummy_count() const { return leaf_count() - real_leaf_count(); }

  bool is_leaf(NodeId v) const { return nodes_[v].children.empty(); }
  int level(NodeId v) const { return nodes_[v].level; }
  NodeId parent(NodeId v) const { return nodes_[v].parent; }
  const std::vector<NodeId>& children(NodeId v) const {
    return nodes_[v].children;
  }
  int subtree_leaves(NodeId v) const { return nodes_[v].leaf_count; }

  // lambda^level(v); defined for the root as well (lambda^H).
  double cost(NodeId v) const { return pow_[nodes_[v].level]; }
  double lambda_pow(int i) const { return pow_[i]; }

  // Leaves in depth-first order; the leaves of T_v form a contiguous range.
  const std::vector<NodeId>& leaves() const { return leaf_order_; }
  std::span<const NodeId> leaves_below(NodeId v) const;
  std::vector<NodeId> real_leaves() const;

  // True iff u lies in the subtree rooted at v (u == v included).
  bool in_subtree(NodeId u, NodeId v) const {
    return tin_[v] <= tin_[u] && tout_[u] <= tout_[v];
  }
  NodeId lca(NodeId a, NodeId b) const;
  // Ancestor of v at the given level (v itself when level == level(v)).
  NodeId ancestor_at(NodeId v, int level) const;
  // leaf = v_0, v_1, ..., v_H = root.
  std::vector<NodeId> backbone(NodeId leaf) const;
  // Sum of edge costs on the u-v path.
  double distance(NodeId u, NodeId v) const;
  // Sum of edge costs from u up to (excluding) its ancestor a.
  double up_cost(NodeId u, NodeId a) const;

  NodeId find(std::string_view name) const;  // throws UnknownNode
  std::optional<NodeId> try_find(std::string_view name) const;

 private:
  friend Hst build_hst(const std::vector<NodeSpec>&, double, bool);
  friend Hst add_dummy_leaves(const Hst&, int);
  void finalize();

  std::vector<HstNode> nodes_;
  NodeId root_ = kNoNode;
  int height_ = 0;
  double lambda_ = 0.0;
  std::vector<double> pow_;
  std::vector<NodeId> leaf_order_;
  std::vector<int> leaf_begin_, leaf_end_;
  std::vector<int> tin_, tout_;
  std::unordered_map<std::string, NodeId> by_name_;
};

// Validates structure (single root, no cycles or orphans, consistent levels,
// leaves at level 0) and lambda >= 10H unless require_separation is false.
Hst build_hst(const std::vector<NodeSpec>& records, double lambda,
              bool require_separation = true);

// Attaches 2k dummy leaves below the root, each through a chain of
// single-child nodes so that every dummy leaf sits at level 0.
Hst add_dummy_leaves(const Hst& hst, int k);

// Complete tree of the given height whose branching factor is the smallest b
// with b^height >= leaves; leaves "l0".., internal nodes "v<level>_<i>", root
// "r". Leaves are dealt out left to right, so the last subtrees may be thinner.
Hst balanced_hst(int leaves, int height, double lambda);

// Text format: "hst <lambda>" followed by "node <id> <parent|-> <level>".
// '#' starts a comment; blank lines are ignored.
Hst parse_hst(std::string_view text);
std::string render_hst(const Hst& hst);
// Node records only (no "hst" line); dummies are skipped.
std::vector<NodeSpec> hst_specs(const Hst& hst);

struct FrtEmbedding {
  Hst hst;
  // The metric is multiplied by this factor before embedding so that the
  // smallest positive distance is at least 1; dominance holds for the
  // scaled metric. Leaf "p<i>" hosts point i.
  double scale = 1.0;
};

// Random hierarchical decomposition with cluster radii beta*lambda^(i-1),
// beta uniform in [1/2, 1), and a random center order. The returned tree is
// not checked against lambda >= 10H; callers that run algorithms on it go
// through build_hst validation again.
FrtEmbedding frt_embed(const std::vector<std::vector<double>>& dist,
                       double lambda, uint64_t seed);

}  // namespace hstk

#endif  // HSTK_HST_HPP_
