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


// Acceptance gate: one PASS/FAIL line per criterion 1-8 over a fixed,
// seeded desk-scale corpus. Exit status is nonzero iff some line fails.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "hstk/audit.hpp"
#include "hstk/engine.hpp"
#include "hstk/errors.hpp"
#include "hstk/hst.hpp"
#include "hstk/instance.hpp"
#include "hstk/oracle.hpp"
#include "hstk/report.hpp"
#include "hstk/trace.hpp"
#include "testutil.hpp"

namespace hstk {
namespace {

// Pinned tolerances and limits.
constexpr double kRelTolerance = 1e-9;
constexpr double kRuntimeLimitSec = 60.0;
constexpr int kKServerInstances = 50;
constexpr int kTwInstances = 50;
constexpr int kSnapshots = 20;
// The brute-force optimum solves one flow per service-time assignment.
constexpr int64_t kBruteForceCap = 4096;

bool close(double a, double b) {
  return std::abs(a - b) <= kRelTolerance * std::max({1.0, std::abs(a), std::abs(b)});
}
bool leq(double a, double b) { return a <= b + kRelTolerance * std::max(1.0, std::abs(b)); }

std::string fmt(double x) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.6g", x);
  return buf;
}

struct Case {
  std::string label;
  int leaves = 0, height = 0, k = 0, requests = 0;
  double lambda = 0;
  std::string law;
  uint64_t seed = 0;

  Instance make() const {
    Instance inst = generate_random(balanced_hst(leaves, height, lambda), k, requests,
                                    WindowLaw::parse(law), seed);
    inst.overrides = scaled_overrides(inst, inst.natural_mode());
    return inst;
  }
  std::string name() const {
    return label + "(n=" + std::to_string(leaves) + ",H=" + std::to_string(height) +
           ",k=" + std::to_string(k) + ",lambda=" + fmt(lambda) + ",q=" +
           std::to_string(requests) + "," + law + ",seed=" + std::to_string(seed) + ")";
  }
};

// Gather-cost snapshot taken when a request turns critical.
struct Snapshot {
  std::shared_ptr<const Hst> hst;
  std::vector<double> mass;
  NodeId leaf = kNoNode;
  double delta_prime = 0, delta = 0, gamma = 0;
  double engine_cost = 0;
};

// Replays leaf masses from transfers alone, independent of the engine's
// ledger, and records one snapshot per critical event.
class MassReplay : public EventSink {
 public:
  std::vector<Snapshot> snapshots;
  int64_t arrival_mismatches = 0;

  void emit(const Event& ev) override {
    if (const auto* e = std::get_if<EvRunBegin>(&ev)) {
      const Instance inst = parse_instance(e->instance);
      hst_ = std::make_shared<const Hst>(add_dummy_leaves(inst.hst, inst.k));
      mass_.assign(hst_->size(), 0.0);
      for (NodeId l : hst_->leaves())
        mass_[l] = hst_->node(l).is_dummy ? 0.5 : e->delta / 2;
      dp_ = e->delta_prime;
      d_ = e->delta;
      g_ = e->gamma;
    } else if (const auto* e = std::get_if<EvRequest>(&ev)) {
      leaf_of_[e->id] = e->leaf;
      if (!close(mass_[e->leaf], e->mass)) ++arrival_mismatches;
    } else if (const auto* e = std::get_if<EvTransfer>(&ev)) {
      mass_[e->src] -= e->amount;
      mass_[e->dst] += e->amount;
    } else if (const auto* e = std::get_if<EvCritical>(&ev)) {
      snapshots.push_back({hst_, mass_, leaf_of_.at(e->id), dp_, d_, g_, e->cost});
    }
  }

 private:
  std::shared_ptr<const Hst> hst_;
  std::vector<double> mass_;
  std::map<int, NodeId> leaf_of_;
  double dp_ = 0, d_ = 0, g_ = 0;
};

struct Outcome {
  Case c;
  Mode mode = Mode::kServer;
  RunResult result;
  RunReport report;
  std::string oracle_skip;  // reason when the oracle was not solved
  double seconds = 0;
  std::vector<Snapshot> snapshots;
  int64_t arrival_mismatches = 0;
  std::string json, csv, trace;
};

Outcome run_case(const Case& c, bool keep_trace = false) {
  Outcome o;
  o.c = c;
  const Instance inst = c.make();
  o.mode = inst.natural_mode();
  std::ostringstream trace;
  TraceWriter writer(keep_trace ? &trace : nullptr);
  ReportBuilder builder;
  Auditor auditor;
  MassReplay replay;
  TeeSink tee;
  tee.add(&writer);
  tee.add(&builder);
  tee.add(&auditor);
  tee.add(&replay);
  RunOptions opts;
  opts.sink = &tee;
  const auto t0 = std::chrono::steady_clock::now();
  o.result = run_algorithm(inst, o.mode, opts);
  AuditReport audit = auditor.finish();
  o.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  o.report = builder.report();
  o.report.audit = audit;
  const OracleKind kind = o.mode == Mode::kServer ? OracleKind::kFlow : OracleKind::kBrute;
  try {
    OracleLimits lim;
    lim.max_combinations = kBruteForceCap;
    o.report.oracle = run_oracle(builder.instance(), kind, builder.store(), lim);
  } catch (const TooManyCombinations& e) {
    o.oracle_skip = e.what();
  } catch (const GraphTooLarge& e) {
    o.oracle_skip = e.what();
  }
  o.snapshots = std::move(replay.snapshots);
  o.arrival_mismatches = replay.arrival_mismatches;
  o.json = render_report_json(o.report);
  o.csv = render_report_csv(o.report);
  if (keep_trace) o.trace = trace.str();
  return o;
}

std::vector<Case> kserver_corpus() {
  std::vector<Case> out;
  for (int i = 0; i < 20; ++i)
    out.push_back({"star", 3 + i % 6, 1, 1 + i % 3, 10 + 5 * (i % 5), i % 2 ? 30.0 : 20.0,
                   "const:1", 1000 + static_cast<uint64_t>(i)});
  for (int i = 0; i < 25; ++i)
    out.push_back({"h2", 4 + i % 5, 2, 1 + i % 3, 4 + i % 5, i % 2 ? 30.0 : 20.0, "const:1",
                   2000 + static_cast<uint64_t>(i)});
  for (int i = 0; i < 5; ++i)
    out.push_back({"h3", 4, 3, i < 3 ? 1 : 2, i < 3 ? 1 + i % 2 : 1, 30.0, "const:1",
                   3000 + static_cast<uint64_t>(i)});
  return out;
}

std::vector<Case> tw_corpus() {
  std::vector<Case> out;
  for (int i = 0; i < 30; ++i)
    out.push_back({"star", 4 + i % 5, 1, 1 + i % 2, 6 + 2 * (i % 8), i % 2 ? 30.0 : 20.0,
                   i % 3 ? "uniform:2:6" : "uniform:1:12", 4000 + static_cast<uint64_t>(i)});
  for (int i = 0; i < 20; ++i)
    out.push_back({"h2", 4 + i % 3, 2, 1 + i % 2, 4 + i % 3, i % 2 ? 30.0 : 20.0,
                   "uniform:2:5", 5000 + static_cast<uint64_t>(i)});
  return out;
}

// Beyond desk scale on purpose: wide windows on a 20-leaf star are what make
// FindLeaves spawn, so the forest lemmas are exercised non-vacuously.
std::vector<Case> wide_corpus() {
  return {{"wide", 20, 1, 1, 40, 10.0, "uniform:40:70", 1}};
}

bool report_line(int id, const std::string& title, bool pass, const std::string& detail) {
  std::printf("[%s] %d %s: %s\n", pass ? "PASS" : "FAIL", id, title.c_str(), detail.c_str());
  std::fflush(stdout);
  return pass;
}

struct CheckTotals {
  int64_t evaluated = 0, violations = 0;
  std::string first;
};

std::map<std::string, CheckTotals> sum_checks(const std::vector<const Outcome*>& runs,
                                              const std::vector<std::string>& names) {
  std::map<std::string, CheckTotals> out;
  for (const auto& n : names) out[n];
  for (const Outcome* o : runs) {
    for (const auto& n : names) {
      const CheckResult* c = o->report.audit->find(n);
      auto& t = out[n];
      if (c == nullptr) {
        ++t.violations;
        if (t.first.empty()) t.first = "check missing";
        continue;
      }
      t.evaluated += c->evaluated;
      t.violations += c->violations;
      if (t.first.empty() && !c->first.empty()) t.first = o->c.name() + ": " + c->first;
    }
  }
  return out;
}

bool check_suite_line(int id, const std::string& title, const std::vector<const Outcome*>& runs,
                      const std::vector<std::string>& names, std::string extra = "") {
  const auto totals = sum_checks(runs, names);
  bool pass = true;
  std::string detail;
  std::string first;
  for (const auto& n : names) {
    const auto& t = totals.at(n);
    pass = pass && t.violations == 0;
    detail += (detail.empty() ? "" : "; ") + n + " " + std::to_string(t.violations) + "/" +
              std::to_string(t.evaluated);
    if (first.empty()) first = t.first;
  }
  detail = "violations/evaluated over " + std::to_string(runs.size()) + " runs: " + detail;
  if (!extra.empty()) detail += "; " + extra;
  if (!first.empty()) detail += "; first: " + first;
  return report_line(id, title, pass, detail);
}

struct Fixture {
  std::string name;
  Instance inst;
  double expected;
};

std::vector<Fixture> opt_fixtures() {
  using testing::star_text;
  using testing::two_level_tree_text;
  using testing::with_requests;
  const std::string t2 = two_level_tree_text();
  return {
      // One server crosses from x's subtree into y's: 1 + lambda.
      {"two-level a,c k=1", with_requests(t2, 1, {{"a", 1, 2}, {"c", 3, 4}}, Mode::kServer), 21},
      // A second server starts at c.
      {"two-level a,c k=2", with_requests(t2, 2, {{"a", 1, 2}, {"c", 3, 4}}, Mode::kServer), 0},
      // Siblings under x: two unit-cost crossings.
      {"two-level a,b,a k=1",
       with_requests(t2, 1, {{"a", 1, 2}, {"b", 3, 4}, {"a", 5, 6}}, Mode::kServer), 2},
      // Back and forth across the root, each way 1 + lambda.
      {"two-level a,c,a k=1",
       with_requests(t2, 1, {{"a", 1, 2}, {"c", 3, 4}, {"a", 5, 6}}, Mode::kServer), 42},
      // Star with lambda 30: three leaf changes, each costing lambda^0 upward.
      {"star3 l0,l1,l2,l0 k=1",
       with_requests(star_text(3, 30), 1,
                     {{"l0", 1, 2}, {"l1", 3, 4}, {"l2", 5, 6}, {"l0", 7, 8}}, Mode::kServer),
       3},
  };
}

int run() {
  const auto t_start = std::chrono::steady_clock::now();
  std::vector<Outcome> ks, tw, wide;
  // Progress goes to stderr so stdout keeps one line per criterion.
  auto add = [](std::vector<Outcome>& into, const Case& c) {
    const auto t0 = std::chrono::steady_clock::now();
    into.push_back(run_case(c));
    const double all_s =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    std::fprintf(stderr, "  %s run+audit %.2f s, with oracle %.2f s\n", c.name().c_str(),
                 into.back().seconds, all_s);
  };
  for (const Case& c : kserver_corpus()) add(ks, c);
  for (const Case& c : tw_corpus()) add(tw, c);
  for (const Case& c : wide_corpus()) add(wide, c);
  bool all = true;

  // 1. Every k-server request saturates at its own request time.
  {
    int64_t reqs = 0, bad = 0;
    double slowest = 0;
    std::string first, slow_name;
    bool modes_ok = static_cast<int>(ks.size()) == kKServerInstances;
    for (const auto& o : ks) {
      modes_ok = modes_ok && o.mode == Mode::kServer;
      if (o.seconds > slowest) {
        slowest = o.seconds;
        slow_name = o.c.name();
      }
      const CheckResult* svc = o.report.audit->find("service");
      const bool audit_ok = svc != nullptr && svc->passed();
      for (const auto& r : o.result.requests) {
        ++reqs;
        if (r.saturated && r.saturated_at.q == r.b && audit_ok) continue;
        ++bad;
        if (first.empty()) first = o.c.name() + " request " + std::to_string(r.id);
      }
    }
    const bool pass = modes_ok && bad == 0 && slowest < kRuntimeLimitSec;
    all &= report_line(1, "k-server saturation within [q,q+1)", pass,
                       std::to_string(ks.size()) + " instances, " + std::to_string(reqs) +
                           " requests, unsaturated " + std::to_string(bad) +
                           "; slowest run+audit " + fmt(slowest) + " s (limit " +
                           fmt(kRuntimeLimitSec) + " s) " + slow_name +
                           (first.empty() ? "" : "; first failure " + first));
  }

  // 2. Every time-window request is served inside its window.
  {
    int64_t reqs = 0, strict = 0, near = 0, pig = 0, bad = 0;
    std::string first;
    bool modes_ok = static_cast<int>(tw.size()) == kTwInstances;
    for (const auto& o : tw) {
      modes_ok = modes_ok && o.mode == Mode::kTimeWindows;
      const CheckResult* svc = o.report.audit->find("service");
      const bool audit_ok = svc != nullptr && svc->passed();
      for (const auto& r : o.result.requests) {
        ++reqs;
        if (r.saturated) ++strict;
        else if (r.piggybacked) ++pig;
        else if (r.served) ++near;
        if (r.served && audit_ok && (r.saturated || r.piggybacked || !r.critical)) continue;
        ++bad;
        if (first.empty()) first = o.c.name() + " request " + std::to_string(r.id);
      }
    }
    all &= report_line(
        2, "time-window service", modes_ok && bad == 0,
        std::to_string(tw.size()) + " instances, " + std::to_string(reqs) + " requests: " +
            std::to_string(strict) + " reached 1-delta', " + std::to_string(near) +
            " held >= 1-2delta' in window (non-critical), " + std::to_string(pig) +
            " piggybacked, unserved " + std::to_string(bad) +
            (first.empty() ? "" : "; first failure " + first));
  }

  std::vector<const Outcome*> desk, everything;
  for (const auto& o : ks) desk.push_back(&o);
  for (const auto& o : tw) desk.push_back(&o);
  everything = desk;
  for (const auto& o : wide) everything.push_back(&o);

  // 3. Invariant suite, plus every remaining audit check on the same runs.
  {
    int64_t clean = 0;
    for (const Outcome* o : everything) clean += o->report.audit->passed() ? 1 : 0;
    const std::string extra = "full audits passed " + std::to_string(clean) + "/" +
                              std::to_string(everything.size());
    const bool ok = check_suite_line(
        3, "per-event invariants", everything,
        {"mass_bounds", "dual_per_step", "slack_dominance", "inflow_bound", "rhs_positive"},
        extra);
    all &= ok && clean == static_cast<int64_t>(everything.size());
    if (ok && clean != static_cast<int64_t>(everything.size()))
      report_line(3, "per-event invariants (other audit checks)", false, extra);
  }

  // 4. movement <= 2H * root dual, recomputed from the run result.
  {
    int64_t bad = 0;
    double worst = 0;
    std::string first;
    for (const auto& o : ks) {
      const double rhs = 2.0 * o.result.hst->height() * o.result.root_dual;
      if (rhs > 0) worst = std::max(worst, o.result.movement / rhs);
      const bool ok = leq(o.result.movement, rhs) && o.report.movement_chain().value_or(false);
      if (!ok) {
        ++bad;
        if (first.empty()) first = o.c.name();
      }
    }
    all &= report_line(4, "movement <= 2H x root dual", bad == 0,
                       std::to_string(ks.size()) + " k-server runs, violations " +
                           std::to_string(bad) + ", max movement/(2H dual) " + fmt(worst) +
                           (first.empty() ? "" : "; first " + first));
  }

  // 5. Offline optimum satisfies every root constraint; weak duality.
  {
    int64_t solved = 0, skipped = 0, checked = 0, viol = 0, chain_bad = 0, infinite = 0;
    double rmin = INFINITY, rmax = 0, slack = INFINITY;
    std::string first;
    for (const Outcome* o : everything) {
      if (!o->report.oracle) {
        ++skipped;
        continue;
      }
      ++solved;
      const auto& orc = *o->report.oracle;
      checked += orc.root_checked;
      viol += orc.root_violations;
      if (orc.root_checked > 0) slack = std::min(slack, orc.min_slack);
      if (!o->report.dual_chain().value_or(false)) {
        ++chain_bad;
        if (first.empty()) first = o->c.name();
      }
      if (auto q = o->report.certified_ratio()) {
        if (!std::isfinite(*q)) ++infinite;
        rmin = std::min(rmin, *q);
        rmax = std::max(rmax, *q);
      } else if (!leq(o->report.root_dual, 0.0)) {
        ++infinite;
      }
    }
    // Every k-server run must have its flow optimum; only brute force may skip.
    int64_t ks_skipped = 0;
    for (const auto& o : ks) ks_skipped += o.report.oracle ? 0 : 1;
    const bool pass = viol == 0 && chain_bad == 0 && infinite == 0 && ks_skipped == 0 &&
                      solved > static_cast<int64_t>(ks.size());
    all &= report_line(
        5, "root LP validity and weak duality", pass,
        std::to_string(solved) + " runs with OPT (" + std::to_string(skipped) +
            " TW runs over the brute-force cap of " + std::to_string(kBruteForceCap) + "), root constraints " + std::to_string(checked) +
            ", violations " + std::to_string(viol) + ", min slack " + fmt(slack) +
            ", dual/beta > OPT on " + std::to_string(chain_bad) + ", certified ratio range [" +
            fmt(rmin) + ", " + fmt(rmax) + "]" + (first.empty() ? "" : "; first " + first));
  }

  // 6. Oracle fixtures and cost(q) against a restricted transport flow.
  {
    int fixtures_ok = 0;
    std::string first;
    const auto fx = opt_fixtures();
    for (const auto& f : fx) {
      const double got = opt_kserver(f.inst).cost;
      if (close(got, f.expected)) {
        ++fixtures_ok;
      } else if (first.empty()) {
        first = f.name + " got " + fmt(got) + " want " + fmt(f.expected);
      }
    }
    std::vector<const Snapshot*> snaps;
    int64_t mismatches = 0;
    for (const Outcome* o : everything) {
      mismatches += o->arrival_mismatches;
      for (const auto& s : o->snapshots) snaps.push_back(&s);
    }
    // Spread the picks over the whole pool so every corpus contributes.
    std::vector<const Snapshot*> picked;
    if (!snaps.empty()) {
      const size_t take = std::min<size_t>(kSnapshots, snaps.size());
      for (size_t i = 0; i < take; ++i) picked.push_back(snaps[i * snaps.size() / take]);
    }
    int snaps_ok = 0;
    double worst = 0;
    for (const Snapshot* s : picked) {
      const double flow =
          gather_cost_flow(*s->hst, s->mass, s->leaf, s->delta_prime, s->delta, s->gamma);
      worst = std::max(worst, std::abs(flow - s->engine_cost));
      if (close(flow, s->engine_cost)) {
        ++snaps_ok;
      } else if (first.empty()) {
        first = "snapshot cost " + fmt(s->engine_cost) + " vs flow " + fmt(flow);
      }
    }
    const bool pass = fixtures_ok == static_cast<int>(fx.size()) && fx.size() == 5 &&
                      static_cast<int>(picked.size()) == kSnapshots &&
                      snaps_ok == kSnapshots && mismatches == 0;
    all &= report_line(6, "offline oracle cross-checks", pass,
                       "opt fixtures " + std::to_string(fixtures_ok) + "/" +
                           std::to_string(fx.size()) + ", cost(q) snapshots " +
                           std::to_string(snaps_ok) + "/" + std::to_string(picked.size()) +
                           " of " + std::to_string(snaps.size()) + " (max abs diff " +
                           fmt(worst) + "), replayed arrival masses off " +
                           std::to_string(mismatches) +
                           (first.empty() ? "" : "; first " + first));
  }

  // 7. Structural lemmas, including the wide instance.
  {
    int solitary_max = 0, forest_max = 0;
    for (const Outcome* o : everything) {
      const auto& a = *o->report.audit;
      if (!a.congestion_solitary.empty())
        solitary_max = std::max(solitary_max, a.congestion_solitary.rbegin()->first);
      if (!a.congestion_forest.empty())
        forest_max = std::max(forest_max, a.congestion_forest.rbegin()->first);
    }
    all &= check_suite_line(
        7, "structural lemmas", everything,
        {"low_congestion_solitary", "low_congestion_forest", "forest_deadline_monotone",
         "forest_window", "gamma_range", "y_bound", "step_count_bound", "iteration_cap",
         "xi_budget", "ftree_cost_bound"},
        "max overlap solitary " + std::to_string(solitary_max) + ", forest " +
            std::to_string(forest_max));
  }

  // 8. Two fresh runs of the same configs give the same bytes.
  {
    const std::vector<Case> picks = {kserver_corpus()[3], kserver_corpus()[27],
                                     tw_corpus()[5], tw_corpus()[33]};
    int same = 0;
    std::string first;
    for (size_t i = 0; i < picks.size(); ++i) {
      const Outcome a = run_case(picks[i], true);
      const Outcome b = run_case(picks[i], true);
      // The corpus pass above is a third run of the same config.
      const Outcome* base = nullptr;
      for (const Outcome* o : desk)
        if (o->c.name() == picks[i].name()) base = o;
      const bool ok = !a.trace.empty() && a.trace == b.trace && a.json == b.json &&
                      a.csv == b.csv && base != nullptr && base->json == a.json &&
                      base->csv == a.csv;
      if (ok) {
        ++same;
      } else if (first.empty()) {
        first = picks[i].name();
      }
    }
    all &= report_line(8, "determinism", same == static_cast<int>(picks.size()),
                       std::to_string(same) + "/" + std::to_string(picks.size()) +
                           " configs byte-identical across runs (trace, report JSON, CSV)" +
                           (first.empty() ? "" : "; first mismatch " + first));
  }

  const double total =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t_start).count();
  std::printf("total %.1f s, overall %s\n", total, all ? "PASS" : "FAIL");
  return all ? 0 : 1;
}

}  // namespace
}  // namespace hstk

int main() {
  try {
    return hstk::run();
  } catch (const std::exception& e) {
    std::printf("[FAIL] acceptance aborted: %s\n", e.what());
    return 1;
  }
}
