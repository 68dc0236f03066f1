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

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <sstream>

#include "hstk/errors.hpp"
#include "hstk/textio.hpp"

namespace hstk {

int Hst::real_leaf_count() const {
  int c = 0;
  for (NodeId l : leaf_order_) c += nodes_[l].is_dummy ? 0 : 1;
  return c;
}

std::span<const NodeId> Hst::leaves_below(NodeId v) const {
  return std::span<const NodeId>(leaf_order_).subspan(
      leaf_begin_[v], leaf_end_[v] - leaf_begin_[v]);
}

std::vector<NodeId> Hst::real_leaves() const {
  std::vector<NodeId> out;
  for (NodeId l : leaf_order_)
    if (!nodes_[l].is_dummy) out.push_back(l);
  std::sort(out.begin(), out.end());
  return out;
}

NodeId Hst::lca(NodeId a, NodeId b) const {
  while (nodes_[a].level < nodes_[b].level) a = nodes_[a].parent;
  while (nodes_[b].level < nodes_[a].level) b = nodes_[b].parent;
  while (a != b) {
    a = nodes_[a].parent;
    b = nodes_[b].parent;
  }
  return a;
}

NodeId Hst::ancestor_at(NodeId v, int level) const {
  while (nodes_[v].level < level) v = nodes_[v].parent;
  return v;
}

std::vector<NodeId> Hst::backbone(NodeId leaf) const {
  std::vector<NodeId> path;
  for (NodeId v = leaf; v != kNoNode; v = nodes_[v].parent) path.push_back(v);
  return path;
}

double Hst::up_cost(NodeId u, NodeId a) const {
  double c = 0.0;
  for (; u != a; u = nodes_[u].parent) c += nodes_[u].edge_cost;
  return c;
}

double Hst::distance(NodeId u, NodeId v) const {
  if (u < 0 || u >= size() || v < 0 || v >= size())
    throw UnknownNode("node index out of range");
  NodeId a = lca(u, v);
  return up_cost(u, a) + up_cost(v, a);
}

NodeId Hst::find(std::string_view name) const {
  auto it = by_name_.find(std::string(name));
  if (it == by_name_.end())
    throw UnknownNode("unknown node '" + std::string(name) + "'");
  return it->second;
}

std::optional<NodeId> Hst::try_find(std::string_view name) const {
  auto it = by_name_.find(std::string(name));
  if (it == by_name_.end()) return std::nullopt;
  return it->second;
}

void Hst::finalize() {
  const int n = size();
  height_ = nodes_[root_].level;
  pow_.assign(height_ + 2, 1.0);
  for (int i = 1; i < static_cast<int>(pow_.size()); ++i)
    pow_[i] = pow_[i - 1] * lambda_;
  by_name_.clear();
  for (auto& nd : nodes_) {
    nd.edge_cost = nd.parent == kNoNode ? 0.0 : pow_[nd.level];
    by_name_[nd.name] = nd.id;
  }
  tin_.assign(n, 0);
  tout_.assign(n, 0);
  leaf_begin_.assign(n, 0);
  leaf_end_.assign(n, 0);
  leaf_order_.clear();
  // Iterative DFS; children are visited in id order.
  int clock = 0;
  std::vector<std::pair<NodeId, size_t>> stack{{root_, 0}};
  tin_[root_] = clock++;
  leaf_begin_[root_] = 0;
  while (!stack.empty()) {
    auto& [v, idx] = stack.back();
    const auto& ch = nodes_[v].children;
    if (idx < ch.size()) {
      NodeId c = ch[idx++];
      tin_[c] = clock++;
      leaf_begin_[c] = static_cast<int>(leaf_order_.size());
      stack.push_back({c, 0});
      continue;
    }
    if (ch.empty()) leaf_order_.push_back(v);
    leaf_end_[v] = static_cast<int>(leaf_order_.size());
    nodes_[v].leaf_count = leaf_end_[v] - leaf_begin_[v];
    tout_[v] = clock++;
    stack.pop_back();
  }
}

Hst build_hst(const std::vector<NodeSpec>& records, double lambda,
              bool require_separation) {
  if (!(lambda > 1.0)) throw MalformedTree("lambda must exceed 1");
  if (records.empty()) throw MalformedTree("empty tree");
  Hst t;
  t.lambda_ = lambda;
  std::unordered_map<std::string, NodeId> ids;
  for (const auto& s : records) {
    if (ids.count(s.id)) throw MalformedTree("duplicate node '" + s.id + "'");
    if (s.level < 0) throw MalformedTree("negative level at '" + s.id + "'");
    NodeId id = static_cast<NodeId>(t.nodes_.size());
    ids[s.id] = id;
    HstNode nd;
    nd.id = id;
    nd.name = s.id;
    nd.level = s.level;
    t.nodes_.push_back(std::move(nd));
  }
  for (size_t i = 0; i < records.size(); ++i) {
    const auto& s = records[i];
    if (!s.parent) {
      if (t.root_ != kNoNode) throw MalformedTree("more than one root");
      t.root_ = static_cast<NodeId>(i);
      continue;
    }
    auto it = ids.find(*s.parent);
    if (it == ids.end())
      throw MalformedTree("orphan '" + s.id + "': parent '" + *s.parent +
                          "' is not declared");
    if (it->second == static_cast<NodeId>(i))
      throw MalformedTree("node '" + s.id + "' is its own parent");
    t.nodes_[i].parent = it->second;
    t.nodes_[it->second].children.push_back(static_cast<NodeId>(i));
  }
  if (t.root_ == kNoNode) throw MalformedTree("no root");
  // Reachability from the root rules out cycles among non-root nodes.
  std::vector<char> seen(t.nodes_.size(), 0);
  std::vector<NodeId> work{t.root_};
  seen[t.root_] = 1;
  size_t reached = 1;
  while (!work.empty()) {
    NodeId v = work.back();
    work.pop_back();
    for (NodeId c : t.nodes_[v].children) {
      if (seen[c]) throw MalformedTree("cycle through '" + t.nodes_[c].name + "'");
      seen[c] = 1;
      ++reached;
      work.push_back(c);
    }
  }
  if (reached != t.nodes_.size()) throw MalformedTree("cycle: some nodes are unreachable from the root");
  for (const auto& nd : t.nodes_) {
    if (nd.parent != kNoNode && t.nodes_[nd.parent].level != nd.level + 1)
      throw MalformedTree("level mismatch on edge '" + nd.name + "' -> '" +
                          t.nodes_[nd.parent].name + "'");
    if (nd.children.empty() && nd.level != 0)
      throw MalformedTree("leaf '" + nd.name + "' is not at level 0");
  }
  if (t.nodes_[t.root_].level < 1)
    throw MalformedTree("root must sit at level >= 1");
  t.finalize();
  if (require_separation && lambda < 10.0 * t.height_) {
    std::ostringstream os;
    os << "lambda " << lambda << " < 10H = " << 10 * t.height_;
    throw LambdaTooSmall(os.str());
  }
  return t;
}

Hst add_dummy_leaves(const Hst& hst, int k) {
  if (k < 1) throw MalformedTree("k must be >= 1");
  Hst t = hst;
  const int h = t.height_;
  for (int j = 0; j < 2 * k; ++j) {
    NodeId above = t.root_;
    for (int lvl = h - 1; lvl >= 0; --lvl) {
      HstNode nd;
      nd.id = static_cast<NodeId>(t.nodes_.size());
      nd.name = "~dummy" + std::to_string(j);
      if (lvl > 0) nd.name += "@" + std::to_string(lvl);
      nd.parent = above;
      nd.level = lvl;
      nd.is_dummy = true;
      t.nodes_[above].children.push_back(nd.id);
      above = nd.id;
      t.nodes_.push_back(std::move(nd));
    }
  }
  t.finalize();
  return t;
}

Hst parse_hst(std::string_view text) {
  LineReader in(text);
  std::optional<double> lambda;
  std::vector<NodeSpec> records;
  while (auto line = in.next()) {
    auto& tok = line->tokens;
    if (tok[0] == "hst") {
      if (lambda) throw ParseError(line->number, "duplicate 'hst' header");
      if (tok.size() != 2) throw ParseError(line->number, "expected 'hst <lambda>'");
      lambda = parse_double(tok[1], line->number);
    } else if (tok[0] == "node") {
      if (!lambda) throw ParseError(line->number, "'node' before 'hst' header");
      records.push_back(parse_node_record(*line));
    } else {
      throw ParseError(line->number, "unexpected record '" + tok[0] + "'");
    }
  }
  if (!lambda) throw ParseError(in.last_line(), "missing 'hst' header");
  return build_hst(records, *lambda);
}

std::vector<NodeSpec> hst_specs(const Hst& hst) {
  std::vector<NodeSpec> out;
  for (const auto& nd : hst.nodes()) {
    if (nd.is_dummy) continue;
    std::optional<std::string> parent;
    if (nd.parent != kNoNode) parent = hst.node(nd.parent).name;
    out.push_back({nd.name, std::move(parent), nd.level});
  }
  return out;
}

std::string render_hst(const Hst& hst) {
  std::string out = "hst " + format_double(hst.lambda()) + "\n";
  for (const auto& s : hst_specs(hst))
    out += "node " + s.id + " " + (s.parent ? *s.parent : "-") + " " +
           std::to_string(s.level) + "\n";
  return out;
}

FrtEmbedding frt_embed(const std::vector<std::vector<double>>& dist,
                       double lambda, uint64_t seed) {
  const size_t n = dist.size();
  if (n == 0) throw DegenerateMetric("empty point set");
  if (!(lambda > 1.0)) throw DegenerateMetric("lambda must exceed 1");
  double dmin = INFINITY, dmax = 0.0;
  for (size_t i = 0; i < n; ++i) {
    if (dist[i].size() != n) throw DegenerateMetric("distance matrix is not square");
    for (size_t j = 0; j < n; ++j) {
      if (i == j) continue;
      double d = dist[i][j];
      if (!(d > 0.0)) throw DegenerateMetric("zero or negative distance between distinct points");
      if (d != dist[j][i]) throw DegenerateMetric("distance matrix is not symmetric");
      dmin = std::min(dmin, d);
      dmax = std::max(dmax, d);
    }
  }
  FrtEmbedding out;
  std::vector<NodeSpec> records;
  if (n == 1) {
    records.push_back({"r", std::nullopt, 1});
    records.push_back({"p0", std::string("r"), 0});
    out.hst = build_hst(records, lambda, false);
    return out;
  }
  out.scale = dmin < 1.0 ? 1.0 / dmin : 1.0;
  const double top = dmax * out.scale;
  // At the top level every pair separates at a level whose tree distance is at
  // least 2*lambda^(H-1) >= 2*top.
  int h = 1;
  while (std::pow(lambda, h - 1) < top) ++h;

  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> ub(0.5, 1.0);
  const double beta = ub(rng);
  std::vector<size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::shuffle(order.begin(), order.end(), rng);

  // cluster[i] = cluster label of point i at the current level.
  std::vector<int> cluster(n, 0);
  std::vector<std::string> names{"r"};
  records.push_back({"r", std::nullopt, h});
  for (int lvl = h - 1; lvl >= 0; --lvl) {
    const double radius = beta * std::pow(lambda, lvl - 1);
    std::vector<int> next(n, -1);
    std::vector<std::string> next_names;
    // Label = (parent cluster, center); assigned in center order.
    std::vector<std::pair<int, size_t>> keys;
    for (size_t i = 0; i < n; ++i) {
      for (size_t c : order) {
        if (cluster[c] == cluster[i] && dist[i][c] * out.scale <= radius) {
          std::pair<int, size_t> key{cluster[i], c};
          auto it = std::find(keys.begin(), keys.end(), key);
          int label;
          if (it == keys.end()) {
            label = static_cast<int>(keys.size());
            keys.push_back(key);
            std::string name = lvl == 0 ? "p" + std::to_string(i)
                                        : "c" + std::to_string(lvl) + "_" +
                                              std::to_string(label);
            next_names.push_back(name);
            records.push_back({name, names[cluster[i]], lvl});
          } else {
            label = static_cast<int>(it - keys.begin());
          }
          next[i] = label;
          break;
        }
      }
    }
    cluster = std::move(next);
    names = std::move(next_names);
  }
  out.hst = build_hst(records, lambda, false);
  return out;
}

Hst balanced_hst(int leaves, int height, double lambda) {
  if (leaves < 1 || height < 1) throw MalformedTree("balanced tree needs leaves >= 1 and height >= 1");
  int64_t b = 1;
  auto span = [&](int64_t base) {
    int64_t p = 1;
    for (int i = 0; i < height && p < leaves; ++i) p *= base;
    return p;
  };
  while (span(b) < leaves) ++b;
  std::vector<NodeSpec> records;
  records.push_back({"r", std::nullopt, height});
  // Node at level L covering leaf i has index i / b^L.
  std::vector<int64_t> width(height + 1, 1);
  for (int l = 1; l <= height; ++l) width[l] = width[l - 1] * b;
  auto name = [&](int level, int64_t idx) {
    if (level == height) return std::string("r");
    if (level == 0) return "l" + std::to_string(idx);
    return "v" + std::to_string(level) + "_" + std::to_string(idx);
  };
  for (int level = height - 1; level >= 0; --level) {
    int64_t last = -1;
    for (int64_t i = 0; i < leaves; ++i) {
      const int64_t idx = i / width[level];
      if (idx == last) continue;
      last = idx;
      records.push_back({name(level, idx), name(level + 1, i / width[level + 1]), level});
    }
  }
  return build_hst(records, lambda);
}

}  // namespace hstk
