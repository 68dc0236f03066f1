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


#include "hstk/audit.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <istream>
#include <set>
#include <sstream>

#include "hstk/errors.hpp"
#include "hstk/textio.hpp"

namespace hstk {

namespace {

bool near(double a, double b) {
  return std::fabs(a - b) <=
         std::max(kAbsTol, kRelTol * std::max(std::fabs(a), std::fabs(b)));
}
bool at_most(double a, double b) {
  return a <= b + std::max(kAbsTol, kRelTol * std::max(std::fabs(a), std::fabs(b)));
}

enum Check {
  kMassBounds,
  kDualPerStep,
  kSlackDominance,
  kInflowBound,
  kRhsPositive,
  kRhsRecompute,
  kDepletion,
  kAwakeRemoval,
  kPrincipalAwake,
  kPickRule,
  kActivesibRule,
  kYUpdate,
  kYBound,
  kStepCountBound,
  kTransferRule,
  kTransferSources,
  kTopupRule,
  kCallMovement,
  kIterationAccounting,
  kMovementTotal,
  kMovementVsDual,
  kConservation,
  kService,
  kSaturationEvents,
  kCriticalRule,
  kGammaRange,
  kGammaChildFull,
  kXiRule,
  kLogcostRule,
  kZqRule,
  kWitnessRule,
  kForestDeadlineMonotone,
  kForestWindow,
  kLowCongestionSolitary,
  kLowCongestionForest,
  kIterationCap,
  kXiBudget,
  kFtreeCostBound,
  kChargingTerms,
  kLeafSetSize,
  kPiggybackRule,
  kDualTiming,
  kEventConsistency,
  kNumChecks
};

const char* const kCheckNames[kNumChecks] = {
    "mass_bounds",
    "dual_per_step",
    "slack_dominance",
    "inflow_bound",
    "rhs_positive",
    "rhs_recompute",
    "depletion",
    "awake_removal",
    "principal_awake",
    "pick_rule",
    "activesib_rule",
    "y_update",
    "y_bound",
    "step_count_bound",
    "transfer_rule",
    "transfer_sources",
    "topup_rule",
    "call_movement",
    "iteration_accounting",
    "movement_total",
    "movement_vs_dual",
    "conservation",
    "service",
    "saturation_events",
    "critical_rule",
    "gamma_range",
    "gamma_child_full",
    "xi_rule",
    "logcost_rule",
    "zq_rule",
    "witness_rule",
    "forest_deadline_monotone",
    "forest_window",
    "low_congestion_solitary",
    "low_congestion_forest",
    "iteration_cap",
    "xi_budget",
    "ftree_cost_bound",
    "charging_terms",
    "leaf_set_size",
    "piggyback_rule",
    "dual_timing",
    "event_consistency",
};

std::string ts(Timestep t) {
  return "(" + std::to_string(t.q) + "," + std::to_string(t.tick) + ")";
}

struct ACons {
  NodeId owner = kNoNode;
  Timestep tau;
  Source source = Source::kInitial;
  bool bot = false;
  bool depleted = false;
  int64_t req_b = 0;
  double rhs = 0.0, z = 0.0, load = 0.0;
  std::vector<int> children;
  std::vector<Term> terms;
};

struct AStep {
  bool solitary = false;
  bool awake = true;
  double gamma = 0.0;
  std::vector<int> cons;
};

// Cumulative D = g - r per node, appended in nondecreasing time.
struct CumD {
  std::vector<Timestep> t;
  std::vector<double> v;
  void add(Timestep at, double d) {
    if (!t.empty() && t.back() == at) {
      v.back() += d;
      return;
    }
    double base = v.empty() ? 0.0 : v.back();
    t.push_back(at);
    v.push_back(base + d);
  }
  double upto(Timestep at) const {
    auto it = std::upper_bound(t.begin(), t.end(), at);
    return it == t.begin() ? 0.0 : v[it - t.begin() - 1];
  }
};

struct FNode {
  int elr = -1;
  int64_t b = 0, e = 0;
  std::vector<std::pair<NodeId, int64_t>> children;
};

struct AReq {
  Request r;
  bool arrived = false;
  bool mass_served = false;  // leaf held >= 1 - delta' inside the window
  bool reached2 = false;     // leaf held >= 1 - 2 delta' before the deadline
  bool piggybacked = false;
  bool saturated_event = false;
  bool critical = false;
};

}  // namespace

struct Auditor::State {
  CheckResult checks[kNumChecks];
  int64_t index = 0;  // current event number, 1-based

  bool begun = false, complete = false;
  Mode mode = Mode::kServer;
  Hst hst;
  int H = 0, n = 0, k = 0;
  double lambda = 0, dp = 0, delta = 0, gamma = 0, m = 0;
  std::vector<int> nv;
  std::vector<double> mass;
  double total0 = 0.0;
  std::vector<CumD> cum;
  std::vector<ACons> cons;
  std::vector<std::map<Timestep, AStep>> steps;
  // Non-solitary steps per node in arrival order, and y values aligned with
  // them; y at any other timestep lives in the map.
  std::vector<std::vector<Timestep>> nsteps;
  struct YVals {
    std::vector<double> at;
    std::map<Timestep, double> other;
  };
  std::map<std::pair<NodeId, NodeId>, YVals> y;
  std::vector<AReq> reqs;
  std::vector<std::vector<int>> reqs_at;  // request ids per leaf
  double movement = 0.0, piggyback = 0.0, root_dual = 0.0;
  double y_max = 0.0;
  int64_t s_max = 0;

  // Current request loop.
  int cur = -1;
  bool crit_loop = false;
  int64_t cur_q = 0;
  double cur_cost = 0.0;
  int cur_logcost = 0;
  std::vector<NodeId> bb;
  int64_t loop_iters = 0;
  std::map<std::pair<int, int>, double> xi_sums;

  // Current iteration.
  bool in_iter = false;
  Timestep tau;
  int i0 = 0;
  double iter_move0 = 0.0, iter_dual0 = 0.0;

  // Current update call.
  bool in_call = false, call_full = false;
  NodeId call_v = kNoNode;
  int call_i = 0;
  std::vector<NodeId> U;
  std::set<NodeId> pool;
  double call_move0 = 0.0, call_transferred = 0.0, call_topup = 0.0;
  double call_inflow = 0.0, call_xi = 0.0;
  double pre_topup = -1.0;

  // Current segment of a full update.
  bool seg_open = false;
  int seg_cid = -1;
  double seg_ds = 0.0;
  std::vector<double> seg_dy, seg_loc, seg_inh;
  std::vector<int> pending_depletion;

  // Charging forests rebuilt from witness events.
  std::vector<std::map<NodeId, std::map<int64_t, FNode>>> forest;
  std::vector<std::map<std::pair<NodeId, int64_t>, std::vector<NodeId>>> spawned;
  std::vector<std::pair<NodeId, int64_t>> expect_edges;
  size_t edges_seen = 0;
  NodeId edge_v = kNoNode, edge_w = kNoNode;
  int64_t edge_q = 0;
  bool edges_pending = false;
  double ftree_total = 0.0;
  std::set<NodeId> visited;
  std::vector<NodeId> zq;

  // Solitary steps per node: q -> b of the request behind it.
  std::vector<std::map<int64_t, int64_t>> solitary_q;

  template <class F>
  void expect(Check c, bool ok, F&& msg) {
    CheckResult& r = checks[c];
    ++r.evaluated;
    if (!ok && r.violations++ == 0) r.first = "event " + std::to_string(index) + ": " + msg();
  }

  // ---- helpers over the replayed state ----

  double subtree_mass(NodeId v) const {
    double s = 0.0;
    for (NodeId l : hst.leaves_below(v)) s += mass[l];
    return s;
  }
  bool active(NodeId v) const {
    for (NodeId l : hst.leaves_below(v))
      if (mass[l] >= delta) return true;
    return false;
  }
  std::vector<NodeId> siblings_active(NodeId u) const {
    std::vector<NodeId> out;
    NodeId p = hst.parent(u);
    if (p == kNoNode) return out;
    for (NodeId s : hst.children(p))
      if (s != u && active(s)) out.push_back(s);
    return out;
  }
  double D(NodeId u, Timestep lo, Timestep hi) const {
    return cum[u].upto(hi) - cum[u].upto(lo);
  }
  bool slack(const ACons& c) const {
    return c.bot || (!c.depleted && (1.0 + 1.0 / H) * c.z - c.load > 0.0);
  }
  const Timestep* prev_awake(NodeId u, Timestep t) const {
    const auto& st = steps[u];
    auto it = st.upper_bound(t);
    while (it != st.begin()) {
      --it;
      if (it->second.awake) return &it->first;
    }
    return nullptr;
  }
  double step_dual(NodeId v, Timestep t) const {
    double s = 0.0;
    auto it = steps[v].find(t);
    if (it == steps[v].end()) return 0.0;
    for (int id : it->second.cons) s += cons[id].rhs * cons[id].z;
    return s;
  }
  bool outstanding(int j, int64_t q) const {
    const AReq& a = reqs[j];
    return a.arrived && a.r.b <= q && q < a.r.e && !a.mass_served && !a.piggybacked;
  }
  // Leaf mass changed (or a request arrived) at timestep t.
  void observe_leaf(NodeId leaf, Timestep t) {
    if (leaf >= static_cast<NodeId>(reqs_at.size())) return;
    for (int j : reqs_at[leaf]) {
      AReq& a = reqs[j];
      if (!a.arrived) continue;
      const bool in_window = mode == Mode::kServer ? t.q == a.r.b : (a.r.b <= t.q && t.q <= a.r.e);
      if (in_window && mass[leaf] >= 1.0 - dp) a.mass_served = true;
      if (a.r.b <= t.q && t.q < a.r.e && mass[leaf] >= 1.0 - 2.0 * dp) a.reached2 = true;
    }
  }
  void check_mass_bounds(const char* where) {
    for (NodeId l : hst.leaves()) {
      const double x = mass[l];
      expect(kMassBounds, x >= delta / 2.0 - kAbsTol && x <= 1.0 - dp / 2.0 + kAbsTol, [&] {
        return std::string(where) + ": leaf " + hst.node(l).name + " mass " + format_double(x);
      });
    }
    double tot = 0.0;
    for (NodeId l : hst.leaves()) tot += mass[l];
    expect(kConservation, std::fabs(tot - total0) <= 1e-9,
           [&] { return "total mass " + format_double(tot) + " vs " + format_double(total0); });
  }

  // ---- event handlers ----

  void flush_edges() {
    if (!edges_pending) return;
    edges_pending = false;
    expect(kWitnessRule, edges_seen == expect_edges.size(), [&] {
      return "witness node " + hst.node(edge_w).name + "@" + std::to_string(edge_q) + " got " +
             std::to_string(edges_seen) + " edges, expected " + std::to_string(expect_edges.size());
    });
  }

  void on(const EvRunBegin& e) {
    Instance inst = parse_instance(e.instance);
    mode = e.mode;
    k = inst.k;
    hst = add_dummy_leaves(inst.hst, inst.k);
    H = hst.height();
    lambda = hst.lambda();
    dp = e.delta_prime, delta = e.delta, gamma = e.gamma, m = e.m, n = e.n;
    nv.assign(hst.size(), 0);
    for (NodeId v = 0; v < hst.size(); ++v)
      for (NodeId l : hst.leaves_below(v))
        if (e.count_dummies || !hst.node(l).is_dummy) ++nv[v];
    mass.assign(hst.size(), 0.0);
    for (NodeId l : hst.leaves()) mass[l] = hst.node(l).is_dummy ? 0.5 : delta / 2.0;
    total0 = 0.0;
    for (NodeId l : hst.leaves()) total0 += mass[l];
    cum.assign(hst.size(), {});
    steps.assign(hst.size(), {});
    nsteps.assign(hst.size(), {});
    forest.assign(hst.size(), {});
    spawned.assign(hst.size(), {});
    solitary_q.assign(hst.size(), {});
    reqs_at.assign(hst.size(), {});
    for (size_t j = 0; j < inst.requests.size(); ++j) {
      AReq a;
      a.r = inst.requests[j];
      reqs.push_back(a);
      reqs_at[a.r.leaf].push_back(static_cast<int>(j));
    }
    const int nn = e.count_dummies ? hst.leaf_count() : hst.real_leaf_count();
    expect(kEventConsistency, nn == n, [&] { return "n mismatch"; });
    begun = true;
  }

  void close_iteration() {
    if (!in_iter) return;
    in_iter = false;
    const double moved = movement - iter_move0;
    const double gained = root_dual - iter_dual0;
    if (mode == Mode::kServer)
      expect(kIterationAccounting, at_most(moved, 2.0 * gamma * (H - i0)), [&] {
        return "iteration at " + ts(tau) + " moved " + format_double(moved);
      });
    expect(kIterationAccounting, near(gained, gamma), [&] {
      return "iteration at " + ts(tau) + " raised the root dual by " + format_double(gained);
    });
  }

  void on(const EvStep& e) {
    close_iteration();
    check_mass_bounds("timestep boundary");
    expect(kEventConsistency, cur >= 0, [] { return "timestep outside a request loop"; });
    if (cur < 0) return;
    // i0 from the replayed masses.
    int want = -1;
    for (size_t i = 0; i + 1 < bb.size(); ++i)
      if (!siblings_active(bb[i]).empty()) {
        want = static_cast<int>(i);
        break;
      }
    expect(kActivesibRule, want == e.i0, [&] {
      return "i0 " + std::to_string(e.i0) + " at " + ts(e.tau) + ", replay gives " + std::to_string(want);
    });
    tau = e.tau;
    i0 = e.i0;
    in_iter = true;
    iter_move0 = movement;
    iter_dual0 = root_dual;
    ++loop_iters;
  }

  void on(const EvRequest& e) {
    AReq& a = reqs.at(e.id);
    expect(kEventConsistency, a.r.leaf == e.leaf && a.r.b == e.b && a.r.e == e.e &&
                                  near(mass[e.leaf], e.mass),
           [&] { return "request " + std::to_string(e.id) + " payload differs from replay"; });
    a.arrived = true;
    observe_leaf(a.r.leaf, Timestep{a.r.b, 0});
    if (mode == Mode::kServer) start_loop(e.id, a.r.b, false);
  }

  void start_loop(int id, int64_t q, bool critical) {
    cur = id;
    crit_loop = critical;
    cur_q = q;
    bb = hst.backbone(reqs[id].r.leaf);
    loop_iters = 0;
    xi_sums.clear();
  }

  void on(const EvStepAdded& e) {
    expect(kEventConsistency, !steps[e.v].count(e.tau),
           [&] { return "timestep " + ts(e.tau) + " added twice at " + hst.node(e.v).name; });
    AStep st;
    st.solitary = e.solitary;
    st.gamma = e.gamma;
    steps[e.v][e.tau] = st;
    if (!e.solitary) {
      expect(kEventConsistency, nsteps[e.v].empty() || nsteps[e.v].back() < e.tau,
             [&] { return "timestep " + ts(e.tau) + " out of order at " + hst.node(e.v).name; });
      nsteps[e.v].push_back(e.tau);
    }
    if (!e.solitary) {
      if (mode == Mode::kTimeWindows)
        expect(kGammaRange,
               at_most(gamma / std::pow(lambda, H), e.gamma) && at_most(e.gamma, gamma), [&] {
                 return "gamma " + format_double(e.gamma) + " at " + hst.node(e.v).name + ts(e.tau);
               });
      const double want = in_call && !call_full ? call_xi : gamma;
      expect(kGammaRange, near(e.gamma, want), [&] {
        return "step target " + format_double(e.gamma) + " vs " + format_double(want);
      });
    } else if (e.tau.q > 0 && cur >= 0) {
      solitary_q[e.v].emplace(e.tau.q, reqs[cur].r.b);
    }
  }

  void on(const EvCallBegin& e) {
    in_call = true;
    call_full = e.full;
    call_v = e.v;
    call_i = hst.level(e.v);
    call_move0 = movement;
    call_transferred = call_topup = call_inflow = 0.0;
    call_xi = e.xi;
    pre_topup = -1.0;
    U.clear();
    pool.clear();
    expect(kActivesibRule, in_iter && e.tau == tau && call_i < static_cast<int>(bb.size()) &&
                               bb[call_i] == e.v && (e.full ? call_i > i0 : call_i <= i0),
           [&] { return "call at " + hst.node(e.v).name + ts(e.tau) + " does not fit the backbone"; });
    if (!e.full) {
      const double want = mode == Mode::kServer ? 0.0 : gamma * std::pow(lambda, call_i - i0);
      expect(kXiRule, near(e.xi, want), [&] {
        return "xi " + format_double(e.xi) + " vs " + format_double(want);
      });
      if (mode == Mode::kTimeWindows)
        xi_sums[{call_i, std::min(call_i, cur_logcost)}] += e.xi;
      return;
    }
    if (call_i < 1 || call_i >= static_cast<int>(bb.size())) return;
    const NodeId u0 = bb[call_i - 1];
    U.push_back(u0);
    for (NodeId s : siblings_active(u0)) U.push_back(s);
    expect(kActivesibRule, U == e.picks, [&] {
      return "child set at " + hst.node(e.v).name + ts(e.tau) + " differs from replay";
    });
    for (size_t j = 1; j < U.size(); ++j)
      for (NodeId l : hst.leaves_below(U[j]))
        if (mass[l] >= delta) pool.insert(l);
  }

  void close_segment() {
    for (int id : pending_depletion)
      expect(kSlackDominance, cons[id].depleted, [&] {
        return "constraint " + std::to_string(id) + " reached equality without depletion";
      });
    pending_depletion.clear();
    if (!seg_open) return;
    seg_open = false;
    const double lh = hst.lambda_pow(call_i - 1);
    const ACons& c = cons[seg_cid];
    for (size_t j = 1; j < U.size() && j < c.children.size(); ++j) {
      const double inh = cons[c.children[j]].rhs * seg_ds / lh;
      expect(kTransferRule, near(seg_loc[j], seg_dy[j]) && near(seg_inh[j], inh), [&] {
        return "child " + hst.node(U[j]).name + " moved " + format_double(seg_loc[j]) + "+" +
               format_double(seg_inh[j]) + ", rule gives " + format_double(seg_dy[j]) + "+" +
               format_double(inh);
      });
    }
    expect(kTransferRule, seg_loc.empty() || (seg_loc[0] == 0.0 && seg_inh[0] == 0.0),
           [] { return "transfer out of the principal child"; });
  }

  void on(const EvConstraint& e) {
    const Constraint& c = e.c;
    expect(kEventConsistency, c.id == static_cast<int>(cons.size()),
           [&] { return "constraint id " + std::to_string(c.id) + " out of sequence"; });
    expect(kRhsPositive, c.rhs > 0.0, [&] {
      return "constraint " + std::to_string(c.id) + " rhs " + format_double(c.rhs);
    });
    auto sit = steps[c.owner].find(c.tau);
    expect(kEventConsistency, sit != steps[c.owner].end() && sit->second.solitary == c.bot,
           [&] { return "constraint " + std::to_string(c.id) + " without a matching step"; });
    const double kv = subtree_mass(c.owner);
    if (c.bot) {
      const double want = 1.0 - kv - 2.0 * delta * (n - nv[c.owner]);
      expect(kRhsRecompute, near(c.rhs, want), [&] {
        return "bot rhs " + format_double(c.rhs) + " vs " + format_double(want);
      });
      if (mode == Mode::kTimeWindows && c.source == Source::kSimple) check_charging(c, true);
    } else if (c.source == Source::kSimple) {
      const double want = static_cast<double>(c.terms.size()) - kv - 2.0 * delta * (n - nv[c.owner]);
      expect(kRhsRecompute, near(c.rhs, want), [&] {
        return "charging rhs " + format_double(c.rhs) + " vs " + format_double(want);
      });
      check_charging(c, false);
    } else {
      check_composition(c);
    }
    ACons a;
    a.owner = c.owner;
    a.tau = c.tau;
    a.source = c.source;
    a.bot = c.bot;
    a.req_b = c.req_b;
    a.rhs = c.rhs;
    a.z = c.z;
    a.children = c.children;
    a.terms = c.terms;
    expect(kDualTiming, c.z >= 0.0 && (c.z == 0.0 || c.source == Source::kSimple),
           [&] { return "initial dual " + format_double(c.z); });
    if (c.owner == hst.root()) root_dual += c.rhs * c.z;
    cons.push_back(std::move(a));
    if (sit != steps[c.owner].end()) sit->second.cons.push_back(c.id);
  }

  void check_composition(const Constraint& c) {
    expect(kPickRule, in_call && call_full && c.owner == call_v && c.tau == tau &&
                          c.children.size() == U.size(),
           [&] { return "composed constraint " + std::to_string(c.id) + " outside its call"; });
    if (c.children.size() != U.size()) return;
    std::vector<Term> want_terms;
    double rhs = 0.0;
    int nsum = 0;
    for (size_t j = 0; j < U.size(); ++j) {
      const int cid = c.children[j];
      const bool known = cid >= 0 && cid < static_cast<int>(cons.size());
      expect(kPickRule, known, [&] { return "unknown child constraint"; });
      if (!known) return;
      const ACons& ch = cons[cid];
      const Timestep* tu = prev_awake(U[j], tau);
      bool ok = tu && ch.owner == U[j] && ch.tau == *tu && slack(ch);
      if (ok) {
        for (int id : steps[U[j]].at(*tu).cons)
          if (slack(cons[id])) {
            ok = id == cid;
            break;
          }
      }
      expect(kPickRule, ok, [&] {
        return "child pick " + std::to_string(cid) + " for " + hst.node(U[j]).name +
               " is not the first slack constraint of the latest awake step";
      });
      if (!ok) return;
      if (mode == Mode::kTimeWindows) {
        const auto& st = steps[U[j]].at(*tu);
        if (!st.solitary)
          expect(kGammaChildFull, near(st.gamma, gamma), [&] {
            return "child step " + hst.node(U[j]).name + ts(*tu) + " has target " +
                   format_double(st.gamma);
          });
      }
      if (*tu < tau) want_terms.push_back({U[j], *tu, tau});
      if (mode == Mode::kTimeWindows && ch.bot) {
        // The bot constraint remembers the arrival of its request.
        const Timestep from{ch.req_b, 0};
        if (from < *tu) want_terms.push_back({U[j], from, *tu});
      }
      rhs += D(U[j], *tu, tau) + ch.rhs;
      nsum += nv[U[j]];
    }
    rhs += (nv[c.owner] - nsum) * delta;
    expect(kPickRule, want_terms == c.terms,
           [&] { return "composed constraint " + std::to_string(c.id) + " has unexpected terms"; });
    expect(kRhsRecompute, near(rhs, c.rhs), [&] {
      return "composed rhs " + format_double(c.rhs) + " vs " + format_double(rhs);
    });
  }

  // Leaves of the rebuilt charging tree at (w, q) in forest(v), BFS order.
  std::vector<std::pair<NodeId, int64_t>> tree_leaves(NodeId v, NodeId w, int64_t q) const {
    std::vector<std::pair<NodeId, int64_t>> out;
    std::deque<std::pair<NodeId, int64_t>> queue{{w, q}};
    while (!queue.empty()) {
      auto [a, aq] = queue.front();
      queue.pop_front();
      const FNode& fn = forest[v].at(a).at(aq);
      if (fn.children.empty()) out.push_back({a, aq});
      for (const auto& ch : fn.children) queue.push_back(ch);
    }
    return out;
  }

  void check_charging(const Constraint& c, bool bot) {
    const int i = hst.level(c.owner);
    const int istar = std::min(i, cur_logcost);
    if (!crit_loop || istar >= static_cast<int>(bb.size())) {
      expect(kChargingTerms, false, [] { return "simple update outside a critical loop"; });
      return;
    }
    const NodeId vstar = bb[istar];
    auto wit = forest[vstar].find(vstar);
    const bool has = wit != forest[vstar].end() && wit->second.count(cur_q);
    expect(kChargingTerms, has, [] { return "charging tree root missing"; });
    if (!has) return;
    const FNode& root = wit->second.at(cur_q);
    expect(kChargingTerms, bot == root.children.empty(), [&] {
      return std::string("charging tree is ") + (root.children.empty() ? "" : "not ") +
             "a singleton but the constraint disagrees";
    });
    if (bot) return;
    const auto leaves = tree_leaves(vstar, vstar, cur_q);
    std::map<int, double> lc;
    for (const auto& [w, q] : leaves) lc[hst.level(w)] += hst.cost(w);
    int s = -1;
    for (const auto& [lvl, cost] : lc)
      if (cost >= hst.cost(vstar) / H) {
        s = lvl;
        break;
      }
    std::map<NodeId, int64_t> first_q;
    int count = 0;
    for (const auto& [w, q] : leaves) {
      if (hst.level(w) != s) continue;
      ++count;
      auto [it, fresh] = first_q.emplace(w, q);
      if (!fresh) it->second = std::min(it->second, q);
    }
    std::vector<Term> want;
    for (const auto& [w, q] : first_q)
      want.push_back({w, Timestep{forest[vstar].at(w).at(q).b, 0}, c.tau});
    expect(kChargingTerms, s >= 0 && want == c.terms,
           [&] { return "charging constraint " + std::to_string(c.id) + " terms differ from replay"; });
    expect(kLeafSetSize, count >= 10, [&] {
      return "only " + std::to_string(count) + " tree leaves at the chosen level";
    });
  }

  void on(const EvDual& e) {
    close_segment();
    const bool known = e.cid >= 0 && e.cid < static_cast<int>(cons.size());
    expect(kEventConsistency, known, [] { return "dual raise on unknown constraint"; });
    if (!known) return;
    ACons& c = cons[e.cid];
    expect(kDualTiming, e.dz >= 0.0 && in_call && call_full && c.tau == tau && c.owner == call_v,
           [&] { return "dual of " + std::to_string(e.cid) + " raised outside its timestep"; });
    c.z += e.dz;
    if (c.owner == hst.root()) root_dual += c.rhs * e.dz;
    for (int ch : c.children) {
      ACons& k = cons[ch];
      k.load += e.dz;
      if (k.bot) continue;
      const double cap = (1.0 + 1.0 / H) * k.z;
      expect(kSlackDominance, at_most(k.load, cap), [&] {
        return "constraint " + std::to_string(ch) + " load " + format_double(k.load) + " exceeds " +
               format_double(cap);
      });
      if (k.load >= cap * (1.0 - 1e-12)) pending_depletion.push_back(ch);
    }
    seg_open = true;
    seg_cid = e.cid;
    seg_ds = e.dz;
    seg_dy.assign(U.size(), 0.0);
    seg_loc.assign(U.size(), 0.0);
    seg_inh.assign(U.size(), 0.0);
  }

  void on(const EvY& e) {
    int j = -1;
    for (size_t i = 0; i < U.size(); ++i)
      if (U[i] == e.u) j = static_cast<int>(i);
    expect(kYUpdate, seg_open && j >= 0 && e.v == call_v && e.tau == tau && e.ds == seg_ds,
           [&] { return "y update outside its segment"; });
    if (!seg_open || j < 0) return;
    const double lh = hst.lambda_pow(call_i - 1);
    const double growth = std::expm1(e.ds / lh);
    const double a = gamma / (m * n);
    YVals& yu = y[{e.v, e.u}];
    const auto& st = nsteps[e.u];
    if (yu.at.size() < st.size()) yu.at.resize(st.size(), 0.0);
    double dy = 0.0;
    int count = 0;
    const double bound = 4.0 * gamma * m + k;
    auto raise = [&](double& val) {
      const double inc = (val + a) * growth;
      val += inc;
      dy += inc;
      ++count;
      y_max = std::max(y_max, val);
      expect(kYBound, val <= bound, [&] { return "y " + format_double(val) + " above " + format_double(bound); });
    };
    const Timestep first = e.tau_u.next();
    // Non-solitary steps of u inside (tau_u, tau].
    const size_t lo = std::upper_bound(st.begin(), st.end(), e.tau_u) - st.begin();
    const size_t hi = std::upper_bound(st.begin(), st.end(), e.tau) - st.begin();
    const int64_t ns = static_cast<int64_t>(hi > lo ? hi - lo : 0);
    const bool first_is_step = lo < st.size() && st[lo] == first;
    raise(first_is_step ? yu.at[lo] : yu.other[first]);
    for (size_t x = lo + (first_is_step ? 1 : 0); x < hi; ++x) raise(yu.at[x]);
    s_max = std::max<int64_t>(s_max, ns);
    expect(kStepCountBound, static_cast<double>(ns) <= m,
           [&] { return std::to_string(ns) + " non-solitary steps in one interval"; });
    expect(kYUpdate, near(dy, e.dy) && count == e.count, [&] {
      return "y increase " + format_double(e.dy) + " x" + std::to_string(e.count) + ", replay " +
             format_double(dy) + " x" + std::to_string(count);
    });
    seg_dy[j] = dy;
  }

  void on(const EvTransfer& e) {
    const bool ok_src = in_call && call_full && pool.count(e.src) && !bb.empty() && e.dst == bb[0] &&
                        e.amount > 0.0 && e.tau == tau;
    expect(kTransferSources, ok_src, [&] {
      return "transfer from " + hst.node(e.src).name + " to " + hst.node(e.dst).name + " not allowed";
    });
    mass[e.src] -= e.amount;
    mass[e.dst] += e.amount;
    expect(kTransferSources, mass[e.src] >= delta / 2.0 - kAbsTol,
           [&] { return "source drained to " + format_double(mass[e.src]); });
    const NodeId a = hst.lca(e.src, e.dst);
    for (NodeId u = e.src; u != a; u = hst.parent(u)) {
      cum[u].add(e.tau, e.amount);
      movement += e.amount * hst.cost(u);
    }
    for (NodeId u = e.dst; u != a; u = hst.parent(u)) cum[u].add(e.tau, -e.amount);
    call_transferred += e.amount;
    if (U.size() && hst.in_subtree(e.dst, U[0]) && !hst.in_subtree(e.src, U[0]))
      call_inflow += e.amount;
    if (e.attr == Attribution::kTopup) {
      expect(kTopupRule, mode == Mode::kTimeWindows, [] { return "top-up in a k-server run"; });
      if (pre_topup < 0) pre_topup = call_transferred - e.amount;
      call_topup += e.amount;
    } else if (seg_open) {
      int j = -1;
      for (size_t i = 1; i < U.size(); ++i)
        if (hst.in_subtree(e.src, U[i])) j = static_cast<int>(i);
      if (j > 0) (e.attr == Attribution::kLocal ? seg_loc : seg_inh)[j] += e.amount;
    } else {
      expect(kTransferRule, false, [] { return "transfer outside a segment"; });
    }
    observe_leaf(e.dst, e.tau);
  }

  void on(const EvDepleted& e) {
    ACons& c = cons.at(e.cid);
    const double cap = (1.0 + 1.0 / H) * c.z;
    expect(kDepletion, !c.depleted && !c.bot && c.load >= cap * (1.0 - 1e-9),
           [&] { return "constraint " + std::to_string(e.cid) + " depleted with margin left or twice"; });
    c.depleted = true;
  }

  void on(const EvAwakeRemoved& e) {
    auto it = steps[e.v].find(e.tau);
    bool ok = it != steps[e.v].end() && it->second.awake && !it->second.solitary;
    if (ok)
      for (int id : it->second.cons) ok = ok && cons[id].depleted;
    expect(kAwakeRemoval, ok, [&] {
      return "removed " + hst.node(e.v).name + ts(e.tau) + " with a slack constraint left";
    });
    if (it != steps[e.v].end()) it->second.awake = false;
    if (in_call && call_full && !U.empty())
      expect(kPrincipalAwake, !(e.v == U[0] && e.tau == tau),
             [&] { return "principal child step removed during its parent's update"; });
  }

  void on(const EvCallEnd& e) {
    close_segment();
    const double dual = step_dual(e.v, e.tau);
    auto it = steps[e.v].find(e.tau);
    if (it != steps[e.v].end() && !it->second.solitary)
      expect(kDualPerStep, near(dual, it->second.gamma), [&] {
        return "dual at " + hst.node(e.v).name + ts(e.tau) + " is " + format_double(dual) +
               ", target " + format_double(it->second.gamma);
      });
    expect(kEventConsistency, near(dual, e.dual) && near(call_transferred, e.transferred) &&
                                  near(call_topup, e.topup),
           [&] { return "call summary at " + hst.node(e.v).name + ts(e.tau) + " differs from replay"; });
    if (e.full && !U.empty()) {
      const int h = call_i - 1;
      const double lh = hst.lambda_pow(h);
      const NodeId u0 = U[0];
      double loss = 0.0;
      auto ut = steps[u0].find(e.tau);
      if (ut != steps[u0].end() && !ut->second.solitary && it != steps[e.v].end())
        for (int pid : it->second.cons)
          for (int ch : cons[pid].children)
            if (cons[ch].owner == u0 && cons[ch].tau == e.tau) loss += cons[ch].rhs * cons[pid].z;
      double cap = (gamma - loss) / lh;
      if (mode == Mode::kTimeWindows) cap += gamma / (4.0 * H * lh);
      expect(kInflowBound, at_most(call_inflow, cap), [&] {
        return "inflow " + format_double(call_inflow) + " into " + hst.node(u0).name + " above " +
               format_double(cap);
      });
      expect(kPrincipalAwake, ut != steps[u0].end() && ut->second.awake,
             [&] { return "principal child step asleep after the update"; });
      if (mode == Mode::kServer) {
        const double moved = movement - call_move0;
        expect(kCallMovement, at_most(moved, 2.0 * gamma),
               [&] { return "full update moved " + format_double(moved); });
      } else if (U.size() > 1) {
        const double target = gamma / (4.0 * H * lh);
        const double before = pre_topup < 0 ? call_transferred : pre_topup;
        const bool ok = before >= target ? call_topup == 0.0 : near(call_transferred, target);
        expect(kTopupRule, ok, [&] {
          return "transferred " + format_double(call_transferred) + " against top-up target " +
                 format_double(target);
        });
      } else {
        expect(kTopupRule, call_transferred == 0.0, [] { return "transfer with no active sibling"; });
      }
    }
    in_call = false;
    U.clear();
  }

  void on(const EvSaturated& e) {
    AReq& a = reqs.at(e.id);
    const bool in_window = mode == Mode::kServer ? e.tau.q == a.r.b
                                                 : (a.r.b <= e.tau.q && e.tau.q <= a.r.e);
    expect(kSaturationEvents,
           !a.saturated_event && in_window && mass[a.r.leaf] >= 1.0 - dp && near(e.mass, mass[a.r.leaf]),
           [&] { return "saturation of request " + std::to_string(e.id) + " not backed by the replay"; });
    a.saturated_event = true;
  }

  void on(const EvCritical& e) {
    AReq& a = reqs.at(e.id);
    expect(kCriticalRule, e.q == a.r.e && !a.piggybacked && !a.reached2 && !a.critical,
           [&] { return "request " + std::to_string(e.id) + " flagged critical wrongly"; });
    a.critical = true;
    int want = 0;
    if (2.0 * lambda * e.cost >= lambda) {
      double p = lambda;
      while (p * lambda <= 2.0 * lambda * e.cost) {
        p *= lambda;
        ++want;
      }
      ++want;
    }
    expect(kLogcostRule, want == e.logcost && e.cost >= 0.0, [&] {
      return "logcost " + std::to_string(e.logcost) + " for cost " + format_double(e.cost);
    });
    start_loop(e.id, e.q, true);
    cur_cost = e.cost;
    cur_logcost = e.logcost;
    ftree_total = 0.0;
    visited.clear();
  }

  void on(const EvBuildTree& e) {
    const int zmax = std::min(cur_logcost, H);
    std::vector<NodeId> want(bb.begin(), bb.begin() + std::min<size_t>(zmax + 1, bb.size()));
    expect(kZqRule, e.z == want && e.q == cur_q, [] { return "tree prefix differs from replay"; });
    zq = e.z;
    for (int i = 0; i + 1 < static_cast<int>(bb.size()); ++i)
      if (!active(bb[i]))
        expect(kZqRule, i + 1 <= zmax, [&] {
          return "subtree of " + hst.node(bb[i]).name + " inactive but its parent is not in the prefix";
        });
  }

  void on(const EvSpawn& e) {
    bool ok = true;
    for (NodeId s : e.s) ok = ok && hst.in_subtree(s, e.w) && hst.level(s) < hst.level(e.w);
    expect(kWitnessRule, ok, [] { return "spawned node outside the spawning subtree"; });
    spawned[e.v][{e.w, e.q}] = e.s;
  }

  void on(const EvWitnessNode& e) {
    int want = -1;
    if (e.w == e.v) {
      want = cur;
    } else {
      for (size_t j = 0; j < reqs.size(); ++j)
        if (outstanding(static_cast<int>(j), e.q) && hst.in_subtree(reqs[j].r.leaf, e.w) &&
            (want < 0 || reqs[j].r.e < reqs[want].r.e))
          want = static_cast<int>(j);
    }
    expect(kWitnessRule, want == e.elr, [&] {
      return "annotation of " + hst.node(e.w).name + "@" + std::to_string(e.q) + " is " +
             std::to_string(e.elr) + ", replay gives " + std::to_string(want);
    });
    auto& occ = forest[e.v][e.w];
    expect(kWitnessRule, !occ.count(e.q), [] { return "witness node added twice"; });
    FNode fn;
    fn.elr = e.elr;
    fn.b = e.elr_b;
    fn.e = e.elr_e;
    expect_edges.clear();
    auto prev = occ.lower_bound(e.q);
    if (prev != occ.begin() && e.elr >= 0) {
      const int64_t qp = std::prev(prev)->first;
      if (e.elr_b <= qp && qp <= e.elr_e) {
        auto sp = spawned[e.v].find({e.w, qp});
        if (sp != spawned[e.v].end())
          for (NodeId c : sp->second) expect_edges.push_back({c, qp});
      }
    }
    fn.children = expect_edges;
    occ[e.q] = fn;
    edges_pending = true;
    edges_seen = 0;
    edge_v = e.v, edge_w = e.w, edge_q = e.q;
    for (const auto& [cw, cq] : fn.children) {
      const FNode& ch = forest[e.v].at(cw).at(cq);
      expect(kForestDeadlineMonotone, ch.elr >= 0 && fn.elr >= 0 && ch.e <= fn.e, [&] {
        return "edge " + hst.node(e.w).name + "@" + std::to_string(e.q) + " -> " + hst.node(cw).name +
               "@" + std::to_string(cq) + " breaks deadline order";
      });
    }
  }

  void on(const EvWitnessEdge& e) {
    const bool ok = edges_pending && e.v == edge_v && e.w == edge_w && e.q == edge_q &&
                    edges_seen < expect_edges.size() &&
                    expect_edges[edges_seen] == std::pair<NodeId, int64_t>{e.child, e.child_q};
    expect(kWitnessRule, ok, [] { return "unexpected witness edge"; });
    ++edges_seen;
  }

  void on(const EvFTree& e) {
    double c = 0.0;
    for (NodeId u : e.nodes)
      if (u != e.v) c += hst.cost(u);
    expect(kFtreeCostBound, near(c, e.cost) && at_most(c, static_cast<double>(H) * H * hst.cost(e.v)),
           [&] { return "F tree at " + hst.node(e.v).name + " costs " + format_double(c); });
    ftree_total += c;
    for (NodeId u : e.nodes)
      if (hst.is_leaf(u)) visited.insert(u);
    // Every non-root node of the finished tree (v, q).
    auto wit = forest[e.v].find(e.v);
    if (wit == forest[e.v].end() || !wit->second.count(e.q)) return;
    std::deque<std::pair<NodeId, int64_t>> queue{{e.v, e.q}};
    while (!queue.empty()) {
      auto [w, q] = queue.front();
      queue.pop_front();
      const FNode& fn = forest[e.v].at(w).at(q);
      if (!(w == e.v && q == e.q))
        expect(kForestWindow, fn.elr >= 0 && q < fn.e && fn.e <= e.q, [&] {
          return "node " + hst.node(w).name + "@" + std::to_string(q) + " window end " +
                 std::to_string(fn.e) + " outside (" + std::to_string(q) + "," + std::to_string(e.q) + "]";
        });
      for (const auto& ch : fn.children) queue.push_back(ch);
    }
  }

  void on(const EvPiggyback& e) {
    std::vector<int> want;
    for (size_t j = 0; j < reqs.size(); ++j)
      if (outstanding(static_cast<int>(j), e.q) && visited.count(reqs[j].r.leaf))
        want.push_back(static_cast<int>(j));
    const double charge = 2.0 * (1.0 - dp) * ftree_total;
    expect(kPiggybackRule, want == e.ids && near(charge, e.charge),
           [] { return "piggyback set or charge differs from replay"; });
    for (int j : e.ids) reqs.at(j).piggybacked = true;
    piggyback += e.charge;
  }

  void on(const EvLoopEnd& e) {
    close_iteration();
    check_mass_bounds("loop end");
    expect(kEventConsistency, e.id == cur && e.iterations == loop_iters,
           [] { return "loop summary differs from replay"; });
    if (crit_loop) {
      const double cap = 8.0 * H * cur_cost / gamma;
      expect(kIterationCap, static_cast<double>(loop_iters) <= cap, [&] {
        return std::to_string(loop_iters) + " iterations against cap " + format_double(cap);
      });
      for (const auto& [key, sum] : xi_sums) {
        const double cap2 = 12.0 * H * hst.lambda_pow(key.second);
        expect(kXiBudget, at_most(sum, cap2), [&] {
          return "xi sum " + format_double(sum) + " at level " + std::to_string(key.first) + "/" +
                 std::to_string(key.second);
        });
      }
    }
    expect(kEventConsistency, mass[reqs[cur].r.leaf] > 1.0 - dp,
           [] { return "loop ended below the saturation threshold"; });
    cur = -1;
  }

  void on(const EvRunEnd& e) {
    close_iteration();
    check_mass_bounds("run end");
    complete = true;
    expect(kMovementTotal, near(movement, e.movement) && near(piggyback, e.piggyback) &&
                               near(root_dual, e.root_dual),
           [&] {
             return "movement " + format_double(e.movement) + " dual " + format_double(e.root_dual) +
                    ", replay " + format_double(movement) + " / " + format_double(root_dual);
           });
    if (mode == Mode::kServer)
      expect(kMovementVsDual, at_most(movement, 2.0 * H * root_dual), [&] {
        return "movement " + format_double(movement) + " above 2H x dual " + format_double(root_dual);
      });
    for (size_t j = 0; j < reqs.size(); ++j) {
      const AReq& a = reqs[j];
      const bool by_mass = a.mass_served || (mode == Mode::kTimeWindows && a.reached2);
      expect(kSaturationEvents,
             !a.mass_served || a.saturated_event || (mode == Mode::kTimeWindows && a.piggybacked),
             [&] { return "request " + std::to_string(j) + " saturated without an event"; });
      expect(kService, a.arrived && (by_mass || a.piggybacked),
             [&] { return "request " + std::to_string(j) + " never served"; });
      if (mode == Mode::kTimeWindows)
        expect(kCriticalRule, a.critical == (!a.reached2 && !a.piggybacked),
               [&] { return "request " + std::to_string(j) + " criticality mismatch"; });
    }
  }

  void dispatch(const Event& ev) {
    ++index;
    if (!std::holds_alternative<EvWitnessEdge>(ev)) flush_edges();
    if (!begun && !std::holds_alternative<EvRunBegin>(ev)) {
      expect(kEventConsistency, false, [] { return "trace does not start with run_begin"; });
      return;
    }
    std::visit([this](const auto& e) { on(e); }, ev);
  }

  // ---- post-hoc checks ----

  static int congestion_closed(std::vector<std::pair<int64_t, int64_t>> iv) {
    std::vector<std::pair<int64_t, int>> ev;
    for (auto [a, b] : iv) {
      ev.push_back({a, +1});
      ev.push_back({b + 1, -1});
    }
    std::sort(ev.begin(), ev.end());
    int cur_c = 0, best = 0;
    for (size_t i = 0; i < ev.size();) {
      size_t j = i;
      while (j < ev.size() && ev[j].first == ev[i].first) cur_c += ev[j++].second;
      best = std::max(best, cur_c);
      i = j;
    }
    return best;
  }
  // Integer points of (a, b] are a+1 .. b.
  static int congestion_half_open(const std::vector<std::pair<int64_t, int64_t>>& iv) {
    std::vector<std::pair<int64_t, int64_t>> c;
    for (auto [a, b] : iv)
      if (b > a) c.push_back({a + 1, b});
    return congestion_closed(c);
  }

  void post_congestion(AuditReport& rep) {
    for (NodeId v = 0; v < hst.size(); ++v) {
      if (solitary_q[v].empty()) continue;
      std::vector<std::pair<int64_t, int64_t>> iv;
      for (auto [q, b] : solitary_q[v]) iv.push_back({b, q});
      const int c = congestion_closed(iv);
      ++rep.congestion_solitary[c];
      expect(kLowCongestionSolitary, c <= H, [&] {
        return "solitary windows at " + hst.node(v).name + " overlap " + std::to_string(c) + " times";
      });
    }
    for (NodeId v = 0; v < hst.size(); ++v) {
      auto roots = forest[v].find(v);
      if (roots == forest[v].end()) continue;
      // u -> one leaf occurrence per tree: (q', q, b).
      std::map<NodeId, std::vector<std::array<int64_t, 3>>> occ;
      for (const auto& [q, root] : roots->second) {
        std::map<NodeId, std::pair<int64_t, int64_t>> first;
        for (const auto& [w, qp] : tree_leaves(v, v, q)) {
          const FNode& fn = forest[v].at(w).at(qp);
          auto [it, fresh] = first.emplace(w, std::pair{qp, fn.b});
          if (!fresh && qp < it->second.first) it->second = {qp, fn.b};
        }
        for (const auto& [w, p] : first) occ[w].push_back({p.first, q, p.second});
      }
      for (const auto& [u, list] : occ) {
        std::vector<std::pair<int64_t, int64_t>> a, b, c;
        for (const auto& o : list) {
          a.push_back({o[0], o[1]});
          b.push_back({o[2], o[0]});
          c.push_back({o[2], o[1]});
        }
        const int ca = congestion_half_open(a), cb = congestion_half_open(b),
                  cc = congestion_half_open(c);
        ++rep.congestion_forest[cc];
        expect(kLowCongestionForest, ca <= H && cb <= 1 && cc <= H + 1, [&] {
          return "forest of " + hst.node(v).name + ", vertex " + hst.node(u).name + ": overlaps " +
                 std::to_string(ca) + "/" + std::to_string(cb) + "/" + std::to_string(cc);
        });
      }
    }
  }

  // Pushes every dual down to the constraints it was composed from, then
  // sweeps each local-LP variable's intervals.
  void post_beta(AuditReport& rep) {
    const int L = H + 1;
    std::vector<double> w(cons.size() * L, 0.0);
    for (int id = static_cast<int>(cons.size()) - 1; id >= 0; --id) {
      const ACons& c = cons[id];
      const int lo = hst.level(c.owner);
      w[id * L + lo] += c.z;
      for (int ch : c.children)
        for (int l = lo; l < L; ++l) w[ch * L + l] += w[id * L + l];
    }
    auto sweep = [&](std::map<std::pair<NodeId, NodeId>, std::vector<std::pair<Timestep, double>>>& b) {
      double best = 0.0;
      for (auto& [key, evs] : b) {
        std::sort(evs.begin(), evs.end(),
                  [](const auto& x, const auto& y) { return x.first < y.first; });
        double run = 0.0;
        for (size_t i = 0; i < evs.size();) {
          size_t j = i;
          while (j < evs.size() && evs[j].first == evs[i].first) run += evs[j++].second;
          best = std::max(best, run / hst.cost(key.second));
          i = j;
        }
      }
      return best;
    };
    for (int l = 0; l < L; ++l) {
      std::map<std::pair<NodeId, NodeId>, std::vector<std::pair<Timestep, double>>> buckets;
      for (size_t id = 0; id < cons.size(); ++id) {
        const double wt = w[id * L + l];
        if (wt <= 0.0 || cons[id].terms.empty() || hst.level(cons[id].owner) > l) continue;
        const NodeId v = hst.ancestor_at(cons[id].owner, l);
        for (const Term& t : cons[id].terms) {
          auto& evs = buckets[{v, t.u}];
          evs.push_back({t.lo, wt});
          evs.push_back({t.hi, -wt});
        }
      }
      rep.beta_measured = std::max(rep.beta_measured, sweep(buckets));
    }
    std::map<std::pair<NodeId, NodeId>, std::vector<std::pair<Timestep, double>>> simple;
    for (const ACons& c : cons) {
      if (c.source != Source::kSimple || c.bot || c.z <= 0.0) continue;
      for (const Term& t : c.terms) {
        auto& evs = simple[{c.owner, t.u}];
        evs.push_back({t.lo, c.z});
        evs.push_back({t.hi, -c.z});
      }
    }
    rep.beta_simple = sweep(simple);
  }
};

Auditor::Auditor() : s_(std::make_unique<State>()) {
  for (int c = 0; c < kNumChecks; ++c) s_->checks[c].name = kCheckNames[c];
}
Auditor::~Auditor() = default;

void Auditor::emit(const Event& ev) { s_->dispatch(ev); }

AuditReport Auditor::finish() {
  State& s = *s_;
  s.flush_edges();
  AuditReport rep;
  if (s.complete) {
    s.post_congestion(rep);
    s.post_beta(rep);
  }
  rep.complete = s.complete;
  rep.events = s.index;
  rep.y_max = s.y_max;
  rep.y_bound = 4.0 * s.gamma * s.m + s.k;
  rep.s_max = s.s_max;
  rep.m = s.m;
  rep.movement = s.movement;
  rep.piggyback = s.piggyback;
  rep.root_dual = s.root_dual;
  for (const CheckResult& c : s.checks) rep.checks.push_back(c);
  return rep;
}

bool AuditReport::passed() const {
  if (!complete) return false;
  for (const auto& c : checks)
    if (!c.passed()) return false;
  return true;
}

const CheckResult* AuditReport::find(const std::string& name) const {
  for (const auto& c : checks)
    if (c.name == name) return &c;
  return nullptr;
}

AuditReport audit_stream(std::istream& in) {
  Auditor a;
  std::string line;
  int no = 0;
  while (std::getline(in, line)) {
    ++no;
    if (line.empty()) continue;
    a.emit(parse_event(line, no));
  }
  return a.finish();
}

namespace {
std::string json_str(const std::string& s) {
  std::string out = "\"";
  for (char c : s) {
    if (c == '"' || c == '\\') out += '\\';
    if (static_cast<unsigned char>(c) < 0x20) {
      out += ' ';
      continue;
    }
    out += c;
  }
  return out + "\"";
}
std::string hist_json(const std::map<int, int64_t>& h) {
  std::string out = "{";
  bool first = true;
  for (const auto& [k, v] : h) {
    if (!first) out += ",";
    first = false;
    out += "\"" + std::to_string(k) + "\":" + std::to_string(v);
  }
  return out + "}";
}
}  // namespace

std::string render_audit_json(const AuditReport& r) {
  std::string o = "{\"complete\":";
  o += r.complete ? "true" : "false";
  o += ",\"passed\":";
  o += r.passed() ? "true" : "false";
  o += ",\"events\":" + std::to_string(r.events);
  o += ",\"beta_measured\":" + format_double(r.beta_measured);
  o += ",\"beta_simple\":" + format_double(r.beta_simple);
  o += ",\"y_max\":" + format_double(r.y_max) + ",\"y_bound\":" + format_double(r.y_bound);
  o += ",\"s_max\":" + std::to_string(r.s_max) + ",\"m\":" + format_double(r.m);
  o += ",\"congestion_solitary\":" + hist_json(r.congestion_solitary);
  o += ",\"congestion_forest\":" + hist_json(r.congestion_forest);
  o += ",\"checks\":[";
  for (size_t i = 0; i < r.checks.size(); ++i) {
    const auto& c = r.checks[i];
    if (i) o += ",";
    o += "{\"name\":" + json_str(c.name) + ",\"evaluated\":" + std::to_string(c.evaluated) +
         ",\"violations\":" + std::to_string(c.violations) + ",\"first\":" + json_str(c.first) + "}";
  }
  return o + "]}";
}

std::string render_audit_table(const AuditReport& r) {
  std::ostringstream o;
  o << "check                      evaluated  violations\n";
  for (const auto& c : r.checks) {
    std::string name = c.name;
    name.resize(26, ' ');
    std::string ev = std::to_string(c.evaluated);
    o << name << ' ' << std::string(ev.size() < 9 ? 9 - ev.size() : 0, ' ') << ev << "  "
      << c.violations;
    if (!c.passed()) o << "  " << c.first;
    o << '\n';
  }
  o << "beta_measured " << format_double(r.beta_measured) << ", y_max " << format_double(r.y_max)
    << " (bound " << format_double(r.y_bound) << "), s_max " << r.s_max << " (M "
    << format_double(r.m) << ")\n";
  o << (r.passed() ? "AUDIT PASS" : "AUDIT FAIL") << '\n';
  return o.str();
}

}  // namespace hstk
