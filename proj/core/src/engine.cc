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

#include "hstk/engine.hpp"

#include <algorithm>
#include <cmath>
#include <deque>

#include "hstk/errors.hpp"
#include "hstk/textio.hpp"

namespace hstk {

bool subtree_active(const Hst& hst, const MovementLedger& ledger, NodeId v,
                    double delta) {
  for (NodeId l : hst.leaves_below(v))
    if (ledger.mass(l) >= delta) return true;
  return false;
}

std::vector<NodeId> activesib(const Hst& hst, const MovementLedger& ledger,
                              NodeId v, double delta) {
  std::vector<NodeId> out;
  NodeId p = hst.parent(v);
  if (p == kNoNode) return out;
  for (NodeId s : hst.children(p))
    if (s != v && subtree_active(hst, ledger, s, delta)) out.push_back(s);
  return out;
}

int pick_i0(const Hst& hst, const MovementLedger& ledger,
            const std::vector<NodeId>& backbone, double delta) {
  for (size_t i = 0; i + 1 < backbone.size(); ++i)
    if (!activesib(hst, ledger, backbone[i], delta).empty()) return static_cast<int>(i);
  throw NoActiveLeaves("no active leaf outside the requested leaf");
}

namespace {

// Request-level context shared by the update procedures of one loop.
struct LoopCtx {
  int id = 0;
  NodeId v0 = kNoNode;
  int64_t b = 0;
  int64_t q = 0;
  int logcost = 0;
};

class Engine {
 public:
  Engine(const Instance& inst, Mode mode, const RunOptions& opts)
      : inst_(inst),
        mode_(mode),
        opts_(opts),
        hst_(std::make_shared<Hst>(add_dummy_leaves(inst.hst, inst.k))),
        p_(resolve_params(inst, mode)),
        ledger_(*hst_),
        store_(std::make_shared<ConstraintStore>()),
        lps_(hst_->size()),
        forests_(hst_->size()) {
    nv_.resize(hst_->size());
    for (NodeId v = 0; v < hst_->size(); ++v) {
      int c = 0;
      for (NodeId l : hst_->leaves_below(v))
        if (p_.count_dummies || !hst_->node(l).is_dummy) ++c;
      nv_[v] = c;
    }
  }

  RunResult run() {
    if (mode_ == Mode::kServer && !inst_.unit_windows())
      throw ParamViolation("k-server runs need unit windows (e = b + 1)");
    EvRunBegin rb;
    rb.mode = mode_;
    rb.instance = render_instance(inst_);
    rb.delta_prime = p_.delta_prime, rb.delta = p_.delta, rb.gamma = p_.gamma;
    rb.m = p_.m, rb.aspect = p_.aspect, rb.n = p_.n, rb.count_dummies = p_.count_dummies;
    emit(rb);
    start_config();
    outcomes_.resize(inst_.requests.size());
    for (size_t j = 0; j < inst_.requests.size(); ++j) {
      const Request& r = inst_.requests[j];
      RequestOutcome& o = outcomes_[j];
      o.id = static_cast<int>(j), o.leaf = r.leaf, o.b = r.b, o.e = r.e;
    }
    if (mode_ == Mode::kServer) {
      for (size_t j = 0; j < inst_.requests.size(); ++j) serve_unit(static_cast<int>(j));
    } else {
      serve_windows();
    }
    for (size_t j = 0; j < outcomes_.size(); ++j) {
      RequestOutcome& o = outcomes_[j];
      o.served = o.saturated || o.piggybacked || (mode_ == Mode::kTimeWindows && crit_served_[j]);
    }
    RunResult res;
    res.mode = mode_;
    res.params = p_;
    res.hst = hst_;
    res.movement = movement_;
    res.piggyback = piggyback_;
    res.root_dual = root_dual();
    res.iterations = iterations_;
    res.requests = outcomes_;
    emit(EvRunEnd{res.movement, res.piggyback, res.root_dual});
    res.store = store_;
    return res;
  }

 private:
  void emit(Event ev) {
    if (opts_.sink) opts_.sink->emit(ev);
  }

  double root_dual() const {
    double s = 0.0;
    for (const auto& [t, st] : lps_[hst_->root()].steps)
      for (int id : st.cons) s += (*store_)[id].rhs * (*store_)[id].z;
    return s;
  }

  void start_config() {
    for (NodeId l : hst_->leaves())
      ledger_.set_mass(l, hst_->node(l).is_dummy ? 0.5 : p_.delta / 2.0);
    // Every node of a dummy chain starts with a bot constraint at time 0.
    for (const auto& nd : hst_->nodes()) {
      if (!nd.is_dummy) continue;
      NodeId leaf = hst_->leaves_below(nd.id)[0];
      add_bot(nd.id, Timestep{0, 0}, leaf, 0, Source::kInitial, 0.0);
    }
  }

  void add_step(NodeId v, Timestep tau, bool solitary, double gamma) {
    LocalLp& lp = lps_[v];
    if (lp.has(tau)) throw InvariantBreach("timestep added twice to a local LP");
    if (!lp.steps.empty() && tau < lp.steps.rbegin()->first)
      throw InvariantBreach("local LP timestep out of order");
    lp.steps[tau] = StepInfo{solitary, gamma, {}};
    if (!solitary) lp.nonsolitary.push_back(tau);
    lp.awake.insert(tau);
    emit(EvStepAdded{v, tau, solitary, gamma});
  }

  Constraint& add_constraint(Constraint c) {
    if (!(c.rhs > 0.0))
      throw NonPositiveRhs("constraint at node " + hst_->node(c.owner).name + " has rhs " +
                           format_double(c.rhs));
    Constraint& stored = store_->add(std::move(c));
    lps_[stored.owner].steps.at(stored.tau).cons.push_back(stored.id);
    emit(EvConstraint{stored});
    return (*store_)[stored.id];
  }

  void add_bot(NodeId v, Timestep tau, NodeId leaf, int64_t b, Source src, double gamma) {
    add_step(v, tau, true, gamma);
    Constraint c;
    c.owner = v;
    c.tau = tau;
    c.source = src;
    c.bot = true;
    c.rhs = bot_rhs(ledger_.subtree_mass(v), p_.n, nv_[v], p_.delta);
    c.req_leaf = leaf;
    c.req_b = b;
    add_constraint(std::move(c));
  }

  // One while-loop iteration at timestep tau; returns the i0 used.
  void iterate(const LoopCtx& ctx, const std::vector<NodeId>& bb, Timestep tau) {
    const int i0 = pick_i0(*hst_, ledger_, bb, p_.delta);
    emit(EvStep{tau, i0});
    for (int i = 0; i <= i0; ++i) {
      if (mode_ == Mode::kServer) simple_update(ctx, bb[i], tau);
      else simple_update_tw(ctx, i, bb[i], tau, p_.gamma * std::pow(hst_->lambda(), i - i0));
    }
    for (int i = i0 + 1; i < static_cast<int>(bb.size()); ++i) full_update(ctx, bb, i, tau);
  }

  // Main loop body shared by both modes: lift v0 above 1 - delta'.
  void saturate(const LoopCtx& ctx) {
    RequestOutcome& out = outcomes_[ctx.id];
    const auto bb = hst_->backbone(ctx.v0);
    Timestep tau{ctx.q, 1};
    const double dual0 = root_dual_running_;
    const double move0 = movement_;
    int64_t iters = 0;
    while (ledger_.mass(ctx.v0) <= 1.0 - p_.delta_prime) {
      if (++iters > opts_.max_iterations_per_request)
        throw InvariantBreach("iteration guard exceeded for request " + std::to_string(ctx.id));
      iterate(ctx, bb, tau);
      tau = tau.next();
    }
    iterations_ += iters;
    out.iterations = iters;
    out.movement += movement_ - move0;
    out.dual += root_dual_running_ - dual0;
    last_tau_ = iters ? Timestep{tau.q, tau.tick - 1} : Timestep{ctx.q, 0};
    mark_saturated(ctx.id, last_tau_);
    emit(EvLoopEnd{ctx.id, iters});
  }

  void mark_saturated(int id, Timestep at) {
    RequestOutcome& out = outcomes_[id];
    if (out.saturated) return;
    out.saturated = true;
    out.saturated_at = at;
    emit(EvSaturated{id, at, ledger_.mass(out.leaf)});
  }

  void serve_unit(int id) {
    const Request& r = inst_.requests[id];
    emit(EvRequest{id, r.leaf, r.b, r.e, ledger_.mass(r.leaf)});
    LoopCtx ctx{id, r.leaf, r.b, r.b, 0};
    saturate(ctx);
  }

  void simple_update(const LoopCtx& ctx, NodeId v, Timestep tau) {
    emit(EvCallBegin{false, v, tau, {}, 0.0});
    add_bot(v, tau, ctx.v0, ctx.b, Source::kSimple, 0.0);
    emit(EvCallEnd{false, v, tau, 0.0, 0.0, 0.0});
  }

  void full_update(const LoopCtx& ctx, const std::vector<NodeId>& bb, int i, Timestep tau) {
    const NodeId v = bb[i];
    const NodeId u0 = bb[i - 1];
    const int h = hst_->level(v) - 1;
    const double lh = hst_->lambda_pow(h);
    const int H = hst_->height();
    const double gamma = p_.gamma;

    std::vector<NodeId> U{u0};
    for (NodeId s : activesib(*hst_, ledger_, u0, p_.delta)) U.push_back(s);
    // Active leaves per off-path child, in leaf-id order.
    std::vector<std::vector<NodeId>> pool(U.size());
    std::vector<NodeId> all_pool;
    for (size_t j = 1; j < U.size(); ++j) {
      for (NodeId l : hst_->leaves_below(U[j]))
        if (ledger_.mass(l) >= p_.delta) pool[j].push_back(l);
      std::sort(pool[j].begin(), pool[j].end());
      all_pool.insert(all_pool.end(), pool[j].begin(), pool[j].end());
    }
    std::sort(all_pool.begin(), all_pool.end());

    add_step(v, tau, false, gamma);
    emit(EvCallBegin{true, v, tau, U, 0.0});
    LocalLp& lp = lps_[v];
    double obj = 0.0;
    double transferred = 0.0;
    const double a = gamma / (p_.m * p_.n);
    std::vector<Timestep> tu(U.size());
    std::vector<int> cu(U.size());
    for (;;) {
      for (size_t j = 0; j < U.size(); ++j) {
        tu[j] = prev_awake(lps_[U[j]], tau, U[j]);
        cu[j] = -1;
        for (int id : lps_[U[j]].steps.at(tu[j]).cons)
          if (is_slack((*store_)[id], H)) {
            cu[j] = id;
            break;
          }
        if (cu[j] < 0) throw NotSlack("awake timestep without a slack constraint");
      }
      Constraint c;
      c.owner = v;
      c.tau = tau;
      c.source = Source::kFull;
      std::vector<ChildPick> picks;
      for (size_t j = 0; j < U.size(); ++j) {
        const Constraint& cj = (*store_)[cu[j]];
        if (tu[j] < tau) c.terms.push_back({U[j], tu[j], tau});
        if (mode_ == Mode::kTimeWindows && cj.bot) {
          Timestep from{cj.req_b, 0};
          if (from < tu[j]) c.terms.push_back({U[j], from, tu[j]});
        }
        picks.push_back({nv_[U[j]], ledger_.D(U[j], tu[j], tau), cj.rhs});
        c.children.push_back(cu[j]);
      }
      c.rhs = compose_rhs(picks, nv_[v], p_.delta);
      const int cid = add_constraint(std::move(c)).id;
      const double rhs = (*store_)[cid].rhs;

      // One segment: nothing changes slack status before the first of these
      // limits is hit.
      const double dual_limit = (gamma - obj) / rhs;
      double ds = dual_limit;
      for (size_t j = 0; j < U.size(); ++j) {
        const Constraint& cj = (*store_)[cu[j]];
        if (!cj.bot) ds = std::min(ds, slack_margin(cj, H));
      }
      (*store_)[cid].z += ds;
      emit(EvDual{cid, ds});
      for (size_t j = 0; j < U.size(); ++j) (*store_)[cu[j]].load += ds;
      obj = ds == dual_limit ? gamma : obj + rhs * ds;
      if (v == hst_->root()) root_dual_running_ += rhs * ds;

      const double growth = std::expm1(ds / lh);
      for (size_t j = 0; j < U.size(); ++j) {
        const NodeId u = U[j];
        double dy = 0.0;
        int count = 0;
        if (tu[j] < tau) {
          const auto& ns = lps_[u].nonsolitary;
          YRow& row = lp.y[u];
          if (row.at_step.size() < ns.size()) row.at_step.resize(ns.size(), 0.0);
          auto raise = [&](double& y) {
            const double inc = (y + a) * growth;
            y += inc;
            dy += inc;
            ++count;
          };
          const Timestep first = tu[j].next();
          const auto lo = std::lower_bound(ns.begin(), ns.end(), first);
          if (lo != ns.end() && *lo == first) {
            raise(row.at_step[lo - ns.begin()]);
          } else {
            raise(row.other[first]);
          }
          const size_t from = std::upper_bound(lo, ns.end(), first) - ns.begin();
          const size_t to = std::upper_bound(lo, ns.end(), tau) - ns.begin();
          for (size_t x = from; x < to; ++x) raise(row.at_step[x]);
          emit(EvY{v, u, tu[j], tau, ds, dy, count});
        }
        if (j == 0) continue;
        const double inh = (*store_)[cu[j]].rhs * ds / lh;
        transferred += drain(pool[j], ctx.v0, dy, tau, Attribution::kLocal);
        transferred += drain(pool[j], ctx.v0, inh, tau, Attribution::kInherited);
      }

      for (size_t j = 0; j < U.size(); ++j) {
        Constraint& cj = (*store_)[cu[j]];
        if (cj.bot || cj.depleted) continue;
        // The limiting constraint lands on zero up to rounding.
        if (slack_margin(cj, H) <= 1e-12 * (1.0 + 1.0 / H) * cj.z) {
          cj.depleted = true;
          emit(EvDepleted{cj.id});
          bool all = true;
          for (int id : lps_[U[j]].steps.at(tu[j]).cons)
            if (is_slack((*store_)[id], H)) all = false;
          if (all && lps_[U[j]].awake.erase(tu[j])) emit(EvAwakeRemoved{U[j], tu[j]});
        }
      }
      if (obj >= gamma) break;
    }

    double topup = 0.0;
    if (mode_ == Mode::kTimeWindows && U.size() > 1) {
      const double target = gamma / (4.0 * H * lh);
      if (transferred < target) {
        topup = target - transferred;
        transferred += drain(all_pool, ctx.v0, topup, tau, Attribution::kTopup);
      }
    }
    emit(EvCallEnd{true, v, tau, obj, transferred, topup});
  }

  double drain(const std::vector<NodeId>& sources, NodeId dst, double amount, Timestep tau,
               Attribution attr) {
    if (amount <= 0.0) return 0.0;
    auto pieces = apply_transfer(ledger_, sources, dst, amount, tau, attr, p_.delta / 2.0);
    double moved = 0.0;
    for (const auto& pc : pieces) {
      movement_ += pc.amount * hst_->up_cost(pc.src, hst_->lca(pc.src, dst));
      moved += pc.amount;
      emit(EvTransfer{pc.src, dst, pc.amount, attr, tau});
    }
    return moved;
  }

  // ---- time windows ----

  bool outstanding(int j, int64_t q) const {
    const Request& r = inst_.requests[j];
    const RequestOutcome& o = outcomes_[j];
    return arrived_[j] && r.b <= q && q < r.e && !o.saturated && !o.piggybacked;
  }

  void serve_windows() {
    const size_t nr = inst_.requests.size();
    arrived_.assign(nr, false);
    crit_served_.assign(nr, false);
    // Every arrival and deadline is a distinct integer time.
    std::map<int64_t, std::pair<bool, int>> events;
    for (size_t j = 0; j < nr; ++j) {
      events[inst_.requests[j].b] = {true, static_cast<int>(j)};
      events[inst_.requests[j].e] = {false, static_cast<int>(j)};
    }
    for (const auto& [q, ev] : events) {
      const auto [arrival, j] = ev;
      const Request& r = inst_.requests[j];
      if (arrival) {
        arrived_[j] = true;
        const double m = ledger_.mass(r.leaf);
        emit(EvRequest{j, r.leaf, r.b, r.e, m});
        if (m >= 1.0 - 2.0 * p_.delta_prime) crit_served_[j] = true;
        if (m >= 1.0 - p_.delta_prime) mark_saturated(j, Timestep{q, 0});
        continue;
      }
      if (crit_served_[j] || outcomes_[j].piggybacked) continue;
      critical(j, q);
    }
  }

  LeafDeadlines deadlines(int64_t q) const {
    LeafDeadlines dl;
    for (size_t j = 0; j < inst_.requests.size(); ++j) {
      if (!outstanding(static_cast<int>(j), q)) continue;
      const Request& r = inst_.requests[j];
      auto [it, fresh] = dl.emplace(r.leaf, r.e);
      if (!fresh) it->second = std::min(it->second, r.e);
    }
    return dl;
  }

  Elr earliest_below(NodeId w, int64_t q) const {
    Elr best;
    for (size_t j = 0; j < inst_.requests.size(); ++j) {
      const Request& r = inst_.requests[j];
      if (!outstanding(static_cast<int>(j), q) || !hst_->in_subtree(r.leaf, w)) continue;
      if (!best.defined() || r.e < best.e) best = {static_cast<int>(j), r.leaf, r.b, r.e};
    }
    return best;
  }

  void critical(int j, int64_t q) {
    const Request& r = inst_.requests[j];
    RequestOutcome& out = outcomes_[j];
    out.critical = true;
    const CostEstimate ce = cost_estimate(*hst_, ledger_, r.leaf, p_.delta_prime, p_.delta, p_.gamma);
    emit(EvCritical{j, q, ce.cost, ce.logcost});
    const auto bb = hst_->backbone(r.leaf);
    const int zmax = std::min(ce.logcost, hst_->height());

    // BuildTree.
    std::vector<NodeId> z(bb.begin(), bb.begin() + zmax + 1);
    emit(EvBuildTree{q, z});
    const LeafDeadlines dl = deadlines(q);
    std::set<NodeId> visited;
    double ftree_total = 0.0;
    for (NodeId v : z) {
      std::set<NodeId> f;
      std::deque<NodeId> queue{v};
      while (!queue.empty()) {
        NodeId w = queue.front();
        queue.pop_front();
        FoundLeaves fl = find_leaves(*hst_, w, dl);
        f.insert(fl.g.begin(), fl.g.end());
        for (NodeId s : fl.s) queue.push_back(s);
        if (!fl.s.empty()) emit(EvSpawn{v, w, q, fl.s});
        forests_[v].record_spawn(w, q, fl.s);
        Elr elr = w == v ? Elr{j, r.leaf, r.b, r.e} : earliest_below(w, q);
        auto kids = forests_[v].build_witness(w, q, elr);
        emit(EvWitnessNode{v, w, q, elr.id, elr.leaf, elr.b, elr.e});
        for (const auto& [cw, cq] : kids) emit(EvWitnessEdge{v, w, q, cw, cq});
      }
      std::vector<NodeId> nodes(f.begin(), f.end());
      const double cost = ftree_cost(*hst_, v, nodes);
      ftree_total += cost;
      for (NodeId u : nodes)
        if (hst_->is_leaf(u)) visited.insert(u);
      emit(EvFTree{v, q, nodes, cost});
    }

    LoopCtx ctx{j, r.leaf, r.b, q, ce.logcost};
    saturate(ctx);
    crit_served_[j] = true;
    // Everything still waiting at v0 is now covered by its mass.
    for (size_t i = 0; i < inst_.requests.size(); ++i)
      if (outstanding(static_cast<int>(i), q) && inst_.requests[i].leaf == r.leaf) {
        crit_served_[i] = true;
        mark_saturated(static_cast<int>(i), last_tau_);
      }

    EvPiggyback pb{q, {}, 0.0};
    for (size_t i = 0; i < inst_.requests.size(); ++i) {
      if (!outstanding(static_cast<int>(i), q) || !visited.count(inst_.requests[i].leaf)) continue;
      outcomes_[i].piggybacked = true;
      crit_served_[i] = true;
      pb.ids.push_back(static_cast<int>(i));
    }
    pb.charge = 2.0 * (1.0 - p_.delta_prime) * ftree_total;
    piggyback_ += pb.charge;
    emit(pb);
  }

  void simple_update_tw(const LoopCtx& ctx, int i, NodeId v, Timestep tau, double xi) {
    emit(EvCallBegin{false, v, tau, {}, xi});
    const int istar = std::min(i, ctx.logcost);
    const NodeId vstar = hst_->backbone(ctx.v0)[istar];
    const ChargingTerms ct = charging_terms(*hst_, forests_[vstar], vstar, ctx.q, tau);
    double dual = 0.0;
    if (ct.terms.empty()) {
      add_bot(v, tau, ctx.v0, ctx.b, Source::kSimple, xi);
    } else {
      add_step(v, tau, false, xi);
      Constraint c;
      c.owner = v;
      c.tau = tau;
      c.source = Source::kSimple;
      c.terms = ct.terms;
      c.rhs = static_cast<double>(ct.terms.size()) - ledger_.subtree_mass(v) -
              2.0 * p_.delta * (p_.n - nv_[v]);
      c.z = c.rhs > 0.0 ? xi / c.rhs : 0.0;
      c.req_leaf = ctx.v0;
      c.req_b = ctx.b;
      add_constraint(std::move(c));
      dual = xi;
    }
    emit(EvCallEnd{false, v, tau, dual, 0.0, 0.0});
  }

  const Instance& inst_;
  Mode mode_;
  RunOptions opts_;
  std::shared_ptr<Hst> hst_;
  ParamSet p_;
  MovementLedger ledger_;
  std::shared_ptr<ConstraintStore> store_;
  std::vector<LocalLp> lps_;
  std::vector<ChargingForest> forests_;
  std::vector<int> nv_;
  std::vector<RequestOutcome> outcomes_;
  std::vector<bool> arrived_, crit_served_;
  double movement_ = 0.0, piggyback_ = 0.0, root_dual_running_ = 0.0;
  int64_t iterations_ = 0;
  Timestep last_tau_;
};

}  // namespace

RunResult run_algorithm(const Instance& inst, Mode mode, const RunOptions& opts) {
  Engine e(inst, mode, opts);
  return e.run();
}

}  // namespace hstk
