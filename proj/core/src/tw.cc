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

#include <algorithm>
#include <cmath>
#include <deque>
#include <map>
#include <set>

#include "hstk/errors.hpp"
#include "hstk/textio.hpp"

namespace hstk {

int logcost_of(double cost, double lambda) {
  const double x = 2.0 * lambda * cost;
  if (!(x >= 1.0)) return 0;
  // Integer search avoids log() rounding at exact powers.
  int l = 0;
  double p = lambda;
  while (p <= x) {
    ++l;
    p *= lambda;
  }
  return l;
}

CostEstimate cost_estimate(const Hst& hst, const MovementLedger& ledger,
                           NodeId leaf, double delta_prime, double delta,
                           double gamma) {
  CostEstimate out;
  double deficit = 1.0 - delta_prime - ledger.mass(leaf);
  if (deficit <= 0.0) return out;
  std::vector<std::pair<double, NodeId>> donors;
  for (NodeId l : hst.leaves())
    if (l != leaf) donors.push_back({hst.distance(l, leaf), l});
  std::sort(donors.begin(), donors.end());
  for (const auto& [d, l] : donors) {
    double avail = ledger.mass(l) - (delta - gamma);
    if (avail <= 0.0) continue;
    double take = std::min(avail, deficit);
    out.cost += take * d;
    deficit -= take;
    if (deficit <= 0.0) break;
  }
  if (deficit > 1e-12)
    throw InfeasibleGather("cannot gather " + format_double(deficit) + " more mass");
  out.logcost = logcost_of(out.cost, hst.lambda());
  return out;
}

FoundLeaves find_leaves(const Hst& hst, NodeId w, const LeafDeadlines& dl) {
  std::vector<std::pair<int64_t, NodeId>> order;
  for (NodeId l : hst.leaves_below(w)) {
    auto it = dl.find(l);
    if (it != dl.end()) order.push_back({it->second, l});
  }
  std::sort(order.begin(), order.end());
  const int top = hst.level(w);
  std::set<NodeId> g;
  std::vector<double> level_cost(top + 1, 0.0);
  FoundLeaves out;
  for (const auto& [deadline, l] : order) {
    for (NodeId u = l;; u = hst.parent(u)) {
      if (g.insert(u).second && hst.level(u) < top) level_cost[hst.level(u)] += hst.cost(u);
      if (u == w) break;
    }
    for (int lvl = 0; lvl < top; ++lvl) {
      if (level_cost[lvl] >= hst.cost(w)) {
        for (NodeId u : g)
          if (hst.level(u) == lvl) out.s.push_back(u);
        out.g.assign(g.begin(), g.end());
        return out;
      }
    }
  }
  out.g.assign(g.begin(), g.end());
  return out;
}

const WitnessNode* ChargingForest::find(NodeId w, int64_t q) const {
  auto it = nodes_.find(w);
  if (it == nodes_.end()) return nullptr;
  auto jt = it->second.find(q);
  return jt == it->second.end() ? nullptr : &jt->second;
}

std::optional<int64_t> ChargingForest::latest_before(NodeId w, int64_t q) const {
  auto it = nodes_.find(w);
  if (it == nodes_.end()) return std::nullopt;
  auto jt = it->second.lower_bound(q);
  if (jt == it->second.begin()) return std::nullopt;
  return std::prev(jt)->first;
}

void ChargingForest::record_spawn(NodeId w, int64_t q, std::vector<NodeId> s) {
  spawn_[{w, q}] = std::move(s);
}

const std::vector<NodeId>* ChargingForest::spawned(NodeId w, int64_t q) const {
  auto it = spawn_.find({w, q});
  return it == spawn_.end() ? nullptr : &it->second;
}

std::vector<std::pair<NodeId, int64_t>> ChargingForest::build_witness(
    NodeId w, int64_t q, const Elr& elr) {
  auto prev = latest_before(w, q);
  WitnessNode& node = nodes_[w][q];
  if (node.w == kNoNode) ++count_;
  node.w = w;
  node.q = q;
  node.elr = elr;
  if (prev && elr.defined() && elr.b <= *prev && *prev <= elr.e) {
    if (const auto* s = spawned(w, *prev))
      for (NodeId c : *s) node.children.push_back({c, *prev});
  }
  return node.children;
}

std::vector<const WitnessNode*> ChargingForest::tree_leaves(NodeId w, int64_t q) const {
  std::vector<const WitnessNode*> out;
  const WitnessNode* root = find(w, q);
  if (!root) return out;
  std::deque<const WitnessNode*> queue{root};
  while (!queue.empty()) {
    const WitnessNode* a = queue.front();
    queue.pop_front();
    if (a->children.empty()) {
      out.push_back(a);
      continue;
    }
    for (const auto& [cw, cq] : a->children) {
      const WitnessNode* c = find(cw, cq);
      if (!c) throw InvariantBreach("charging forest edge to a missing node");
      queue.push_back(c);
    }
  }
  return out;
}

ChargingTerms charging_terms(const Hst& hst, const ChargingForest& forest,
                             NodeId vstar, int64_t q, Timestep tau) {
  ChargingTerms out;
  const WitnessNode* root = forest.find(vstar, q);
  if (!root) throw InvariantBreach("charging tree root missing");
  if (root->children.empty()) return out;
  const auto leaves = forest.tree_leaves(vstar, q);
  std::map<int, double> level_cost;
  for (const auto* a : leaves) level_cost[hst.level(a->w)] += hst.cost(a->w);
  for (const auto& [lvl, c] : level_cost)
    if (c >= hst.cost(vstar) / hst.height()) {
      out.level = lvl;
      out.level_cost = c;
      break;
    }
  if (out.level < 0) throw InvariantBreach("no charging-tree level reaches c_v/H");
  std::map<NodeId, const WitnessNode*> pick;
  for (const auto* a : leaves) {
    if (hst.level(a->w) != out.level) continue;
    ++out.leaves;
    auto [it, fresh] = pick.emplace(a->w, a);
    if (!fresh && a->q < it->second->q) it->second = a;
  }
  for (const auto& [u, a] : pick) {
    if (!a->elr.defined()) throw InvariantBreach("charging-tree leaf without a request");
    out.terms.push_back({u, Timestep{a->elr.b, 0}, tau});
  }
  return out;
}

double ftree_cost(const Hst& hst, NodeId root, const std::vector<NodeId>& nodes) {
  double c = 0.0;
  for (NodeId u : nodes)
    if (u != root) c += hst.cost(u);
  return c;
}

}  // namespace hstk
