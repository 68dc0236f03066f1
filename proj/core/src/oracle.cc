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


#include "hstk/oracle.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <queue>
#include <set>

#include "hstk/errors.hpp"
#include "hstk/textio.hpp"

namespace hstk {

namespace {

// Successive shortest paths with Dijkstra on reduced costs. All arc costs
// are nonnegative, so zero potentials are valid at the start.
template <class Cost, class Cap>
class MinCostFlow {
 public:
  struct Arc {
    int to;
    Cap cap;
    Cost cost;
  };

  explicit MinCostFlow(int n) : adj_(n), pot_(n, Cost{}) {}

  int add_arc(int u, int v, Cap cap, Cost cost) {
    adj_[u].push_back(static_cast<int>(arcs_.size()));
    arcs_.push_back({v, cap, cost});
    adj_[v].push_back(static_cast<int>(arcs_.size()));
    arcs_.push_back({u, Cap{}, -cost});
    return static_cast<int>(arcs_.size()) - 2;
  }

  // Pushes up to `want` units from s to t; returns (flow, cost).
  std::pair<Cap, Cost> solve(int s, int t, Cap want, Cap eps = Cap{}) {
    const int n = static_cast<int>(adj_.size());
    Cap flow{};
    Cost cost{};
    std::vector<Cost> dist(n);
    std::vector<int> via(n);
    std::vector<char> done(n);
    while (want - flow > eps) {
      std::fill(via.begin(), via.end(), -1);
      std::fill(done.begin(), done.end(), 0);
      using Item = std::pair<Cost, int>;
      std::priority_queue<Item, std::vector<Item>, std::greater<Item>> pq;
      dist[s] = Cost{};
      via[s] = -2;
      pq.push({Cost{}, s});
      while (!pq.empty()) {
        auto [d, u] = pq.top();
        pq.pop();
        if (done[u]) continue;
        done[u] = 1;
        for (int id : adj_[u]) {
          const Arc& a = arcs_[id];
          if (a.cap <= eps || done[a.to]) continue;
          Cost nd = d + a.cost + pot_[u] - pot_[a.to];
          if constexpr (std::is_floating_point_v<Cost>) nd = std::max(nd, d);
          if (via[a.to] == -1 || nd < dist[a.to]) {
            dist[a.to] = nd;
            via[a.to] = id;
            pq.push({nd, a.to});
          }
        }
      }
      if (!done[t]) break;
      for (int v = 0; v < n; ++v)
        if (done[v]) pot_[v] += dist[v];
      Cap push = want - flow;
      for (int v = t; v != s; v = arcs_[via[v] ^ 1].to) push = std::min(push, arcs_[via[v]].cap);
      for (int v = t; v != s; v = arcs_[via[v] ^ 1].to) {
        arcs_[via[v]].cap -= push;
        arcs_[via[v] ^ 1].cap += push;
        cost += push * arcs_[via[v]].cost;
      }
      flow += push;
    }
    return {flow, cost};
  }

  // Flow on a forward arc returned by add_arc.
  Cap flow_on(int id) const { return arcs_[id ^ 1].cap; }

 private:
  std::vector<std::vector<int>> adj_;
  std::vector<Arc> arcs_;
  std::vector<Cost> pot_;
};

struct Layer {
  Timestep at;
  std::set<NodeId> leaves;
};

bool integral_lambda(const Hst& hst) {
  const double top = hst.lambda_pow(hst.height());
  return hst.lambda() == std::floor(hst.lambda()) && top < 1e15;
}

template <class Cost>
OptResult solve_layers_as(const Hst& hst, int k, const std::vector<Layer>& layers,
                          const OracleLimits& lim) {
  const int nv = hst.size();
  const int nl = static_cast<int>(layers.size()) + 1;  // plus a closing layer
  const int64_t total = static_cast<int64_t>(nv) * nl + 4;
  if (total > lim.max_graph_nodes)
    throw GraphTooLarge("flow graph needs " + std::to_string(total) + " nodes, cap " +
                        std::to_string(lim.max_graph_nodes));
  OptResult out;
  out.graph_nodes = total;
  int64_t demand = 0;
  for (const Layer& l : layers) {
    if (static_cast<int>(l.leaves.size()) > k) {
      out.cost = std::numeric_limits<double>::infinity();
      return out;
    }
    demand += static_cast<int64_t>(l.leaves.size());
  }
  auto id = [nv](int layer, NodeId v) { return layer * nv + v; };
  const int s = nv * nl, t = s + 1, ss = s + 2, tt = s + 3;
  const int64_t big = k + demand;
  MinCostFlow<Cost, int64_t> g(static_cast<int>(total));
  std::vector<std::pair<int, std::pair<NodeId, int>>> up;  // arc, (node, layer)
  for (int i = 0; i < nl; ++i) {
    for (NodeId u = 0; u < nv; ++u) {
      const NodeId p = hst.parent(u);
      if (p == kNoNode) continue;
      const Cost c = static_cast<Cost>(hst.cost(u));
      up.push_back({g.add_arc(id(i, u), id(i, p), big, c), {u, i}});
      g.add_arc(id(i, p), id(i, u), big, Cost{});
    }
    for (NodeId l : hst.leaves()) {
      if (i + 1 < nl) g.add_arc(id(i, l), id(i + 1, l), big, Cost{});
      if (i == 0) g.add_arc(s, id(0, l), big, Cost{});
      if (i + 1 == nl) g.add_arc(id(i, l), t, big, Cost{});
    }
  }
  // Lower bound 1 on the wait arc of each visited leaf, as a demand at the
  // visit and a supply in the next layer.
  g.add_arc(ss, s, k, Cost{});
  g.add_arc(t, tt, k, Cost{});
  for (int i = 0; i + 1 < nl; ++i)
    for (NodeId l : layers[i].leaves) {
      g.add_arc(id(i, l), tt, 1, Cost{});
      g.add_arc(ss, id(i + 1, l), 1, Cost{});
    }
  const auto [flow, cost] = g.solve(ss, tt, k + demand);
  if (flow < k + demand) {
    out.cost = std::numeric_limits<double>::infinity();
    return out;
  }
  out.cost = static_cast<double>(cost);
  for (const auto& [arc, where] : up) {
    const int64_t f = g.flow_on(arc);
    if (f > 0 && where.second + 1 < nl)
      out.moves.push_back({where.first, layers[where.second].at, f});
  }
  std::sort(out.moves.begin(), out.moves.end(), [](const Move& a, const Move& b) {
    return a.at != b.at ? a.at < b.at : a.u < b.u;
  });
  return out;
}

OptResult solve_layers(const Hst& hst, int k, const std::vector<Layer>& layers,
                       const OracleLimits& lim) {
  return integral_lambda(hst) ? solve_layers_as<int64_t>(hst, k, layers, lim)
                              : solve_layers_as<double>(hst, k, layers, lim);
}

std::vector<Layer> prefix_layers(const Hst& hst, OptPrefix prefix) {
  std::vector<Layer> out;
  if (prefix == OptPrefix::kNone) return out;
  int64_t tick = 0;
  for (NodeId l : hst.leaves())
    if (hst.node(l).is_dummy) out.push_back({Timestep{0, ++tick}, {l}});
  return out;
}

// Service times per request mapped to layers with visits deduped per leaf.
std::vector<Layer> layers_for(const Hst& hst, const std::vector<Request>& reqs,
                              const std::vector<int64_t>& when, OptPrefix prefix) {
  std::vector<Layer> out = prefix_layers(hst, prefix);
  std::map<int64_t, std::set<NodeId>> by_time;
  for (size_t j = 0; j < reqs.size(); ++j) by_time[when[j]].insert(reqs[j].leaf);
  for (auto& [q, leaves] : by_time) out.push_back({Timestep{q, 0}, std::move(leaves)});
  return out;
}

}  // namespace

OptResult opt_kserver(const Instance& inst, OptPrefix prefix, const OracleLimits& lim) {
  if (!inst.unit_windows()) throw ParamViolation("opt_kserver needs unit windows (e = b + 1)");
  const Hst hst = add_dummy_leaves(inst.hst, inst.k);
  std::vector<int64_t> when;
  for (const Request& r : inst.requests) when.push_back(r.b);
  return solve_layers(hst, inst.k, layers_for(hst, inst.requests, when, prefix), lim);
}

OptResult opt_tw_bruteforce(const Instance& inst, OptPrefix prefix, const OracleLimits& lim) {
  const Hst hst = add_dummy_leaves(inst.hst, inst.k);
  std::set<int64_t> events;
  for (const Request& r : inst.requests) events.insert({r.b, r.e});
  std::vector<std::vector<int64_t>> cand;
  double combos = 1.0;
  for (const Request& r : inst.requests) {
    cand.emplace_back(events.lower_bound(r.b), events.upper_bound(r.e));
    combos *= static_cast<double>(cand.back().size());
  }
  if (combos > static_cast<double>(lim.max_combinations))
    throw TooManyCombinations(format_double(combos) + " service-time assignments, cap " +
                              std::to_string(lim.max_combinations));
  OptResult best;
  best.cost = std::numeric_limits<double>::infinity();
  std::vector<size_t> pick(cand.size(), 0);
  std::vector<int64_t> when(cand.size());
  int64_t tried = 0;
  for (;;) {
    for (size_t j = 0; j < cand.size(); ++j) when[j] = cand[j][pick[j]];
    OptResult r = solve_layers(hst, inst.k, layers_for(hst, inst.requests, when, prefix), lim);
    ++tried;
    if (r.cost < best.cost) best = std::move(r);
    size_t j = 0;
    while (j < pick.size() && ++pick[j] == cand[j].size()) pick[j++] = 0;
    if (j == pick.size()) break;
  }
  best.combinations = tried;
  return best;
}

RootCheck verify_root_constraints(const Hst& hst, const ConstraintStore& store,
                                  const std::vector<Move>& moves) {
  // Prefix sums of moves per node over time.
  std::vector<std::vector<std::pair<Timestep, int64_t>>> cum(hst.size());
  std::vector<Move> sorted = moves;
  std::sort(sorted.begin(), sorted.end(),
            [](const Move& a, const Move& b) { return a.at < b.at; });
  for (const Move& m : sorted) {
    auto& c = cum[m.u];
    const int64_t base = c.empty() ? 0 : c.back().second;
    if (!c.empty() && c.back().first == m.at) c.back().second += m.amount;
    else c.push_back({m.at, base + m.amount});
  }
  auto upto = [&](NodeId u, Timestep t) -> int64_t {
    const auto& c = cum[u];
    auto it = std::upper_bound(c.begin(), c.end(), t,
                               [](const Timestep& x, const auto& e) { return x < e.first; });
    return it == c.begin() ? 0 : std::prev(it)->second;
  };
  RootCheck out;
  bool first = true;
  for (const Constraint& c : store.all()) {
    if (c.owner != hst.root()) continue;
    double lhs = 0.0;
    for (const Term& t : store.flatten(c.id))
      lhs += static_cast<double>(upto(t.u, t.hi) - upto(t.u, t.lo));
    const double slack = lhs - c.rhs;
    ++out.checked;
    if (slack < -1e-9 * std::max(1.0, c.rhs)) ++out.violations;
    if (first || slack < out.min_slack) {
      out.min_slack = slack;
      out.worst = c.id;
      first = false;
    }
  }
  return out;
}

double gather_cost_flow(const Hst& hst, const std::vector<double>& mass, NodeId leaf,
                        double delta_prime, double delta, double gamma) {
  const double deficit = 1.0 - delta_prime - mass[leaf];
  if (deficit <= 0.0) return 0.0;
  const int nv = hst.size();
  const int s = nv, t = nv + 1;
  MinCostFlow<double, double> g(nv + 2);
  for (NodeId u = 0; u < nv; ++u) {
    const NodeId p = hst.parent(u);
    if (p == kNoNode) continue;
    g.add_arc(u, p, 1e18, hst.cost(u));
    g.add_arc(p, u, 1e18, hst.cost(u));
  }
  for (NodeId l : hst.leaves()) {
    const double avail = mass[l] - (delta - gamma);
    if (l != leaf && avail > 0.0) g.add_arc(s, l, avail, 0.0);
  }
  g.add_arc(leaf, t, deficit, 0.0);
  const auto [flow, cost] = g.solve(s, t, deficit, 1e-15);
  if (flow < deficit * (1.0 - 1e-12))
    throw InfeasibleGather("cannot gather " + format_double(deficit - flow) + " more mass");
  return cost;
}

std::string render_opt_json(const Hst& hst, const OptResult& r) {
  std::string o = "{\"cost\":" + format_double(r.cost) +
                  ",\"combinations\":" + std::to_string(r.combinations) + ",\"moves\":[";
  for (size_t i = 0; i < r.moves.size(); ++i) {
    const Move& m = r.moves[i];
    if (i) o += ",";
    o += "{\"node\":\"" + hst.node(m.u).name + "\",\"q\":" + std::to_string(m.at.q) +
         ",\"tick\":" + std::to_string(m.at.tick) + ",\"amount\":" + std::to_string(m.amount) + "}";
  }
  return o + "]}";
}

}  // namespace hstk
