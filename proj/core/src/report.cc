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


#include "hstk/report.hpp"

#include <sstream>
#include <utility>
#include <vector>

#include "hstk/errors.hpp"
#include "hstk/textio.hpp"

namespace hstk {

namespace {

constexpr double kChainTol = 1e-9;

struct Row {
  std::string key, value;
  bool text = false;  // quoted in JSON
};

std::string b2s(bool b) { return b ? "true" : "false"; }

// Flat rows shared by all three renderings, in a fixed order.
std::vector<Row> rows(const RunReport& r) {
  std::vector<Row> out;
  out.push_back({"algorithm", r.mode == Mode::kServer ? "kserver" : "kserver-tw", true});
  out.push_back({"instance_digest", r.instance_digest, true});
  out.push_back({"trace_digest", r.trace_digest, true});
  out.push_back({"k", std::to_string(r.k)});
  out.push_back({"height", std::to_string(r.height)});
  out.push_back({"n", std::to_string(r.params.n)});
  out.push_back({"delta_prime", format_double(r.params.delta_prime)});
  out.push_back({"delta", format_double(r.params.delta)});
  out.push_back({"gamma", format_double(r.params.gamma)});
  out.push_back({"M", format_double(r.params.m)});
  out.push_back({"events", std::to_string(r.events)});
  out.push_back({"requests", std::to_string(r.requests)});
  out.push_back({"critical", std::to_string(r.critical)});
  out.push_back({"piggybacked", std::to_string(r.piggybacked)});
  out.push_back({"iterations", std::to_string(r.iterations)});
  out.push_back({"constraints", std::to_string(r.constraints)});
  out.push_back({"movement", format_double(r.movement)});
  out.push_back({"piggyback_cost", format_double(r.piggyback)});
  out.push_back({"total_cost", format_double(r.total_cost())});
  out.push_back({"root_dual", format_double(r.root_dual)});
  if (auto c = r.movement_chain()) out.push_back({"movement_le_2H_dual", b2s(*c)});
  if (r.audit) {
    out.push_back({"beta_measured", format_double(r.audit->beta_measured)});
    out.push_back({"audit_passed", b2s(r.audit->passed())});
  }
  if (r.oracle) {
    out.push_back({"oracle", r.oracle->kind == OracleKind::kFlow ? "flow" : "brute", true});
    out.push_back({"opt_cost", format_double(r.oracle->opt)});
    out.push_back({"opt_cost_plain", format_double(r.oracle->opt_plain)});
    out.push_back({"oracle_assignments", std::to_string(r.oracle->combinations)});
    out.push_back({"root_constraints_checked", std::to_string(r.oracle->root_checked)});
    out.push_back({"root_constraint_violations", std::to_string(r.oracle->root_violations)});
    out.push_back({"root_min_slack", format_double(r.oracle->min_slack)});
    if (auto c = r.dual_chain()) out.push_back({"dual_over_beta_le_opt", b2s(*c)});
    if (auto q = r.certified_ratio()) out.push_back({"certified_ratio", format_double(*q)});
    else out.push_back({"certified_ratio", "opt is zero; dual must be <= 0 up to tolerance", true});
  }
  if (r.wall_ms) out.push_back({"wall_ms", format_double(*r.wall_ms)});
  return out;
}

}  // namespace

std::optional<bool> RunReport::movement_chain() const {
  if (mode != Mode::kServer) return std::nullopt;
  const double rhs = 2.0 * height * root_dual;
  return movement <= rhs + kChainTol * std::max(1.0, rhs);
}

std::optional<bool> RunReport::dual_chain() const {
  if (!oracle || !audit) return std::nullopt;
  if (oracle->root_violations > 0) return false;
  const double beta = audit->beta_measured;
  const double lhs = beta > 0.0 ? root_dual / beta : root_dual;
  return lhs <= oracle->opt + kChainTol * std::max(1.0, oracle->opt);
}

std::optional<double> RunReport::certified_ratio() const {
  if (!oracle || oracle->opt <= 0.0) return std::nullopt;
  return total_cost() / oracle->opt;
}

bool RunReport::ok() const {
  if (audit && !audit->passed()) return false;
  if (auto c = movement_chain(); c && !*c) return false;
  if (auto c = dual_chain(); c && !*c) return false;
  return !oracle || oracle->root_violations == 0;
}

OracleKind parse_oracle_kind(const std::string& s) {
  if (s == "none") return OracleKind::kNone;
  if (s == "flow") return OracleKind::kFlow;
  if (s == "brute") return OracleKind::kBrute;
  throw Error("unknown oracle '" + s + "' (expected flow, brute or none)");
}

void ReportBuilder::emit(const Event& ev) {
  digest_.emit(ev);
  ++r_.events;
  if (const auto* e = std::get_if<EvRunBegin>(&ev)) {
    instance_ = parse_instance(e->instance);
    r_.instance_digest = instance_digest(instance_);
    r_.mode = e->mode;
    r_.params.delta_prime = e->delta_prime;
    r_.params.delta = e->delta;
    r_.params.gamma = e->gamma;
    r_.params.m = e->m;
    r_.params.n = e->n;
    r_.params.aspect = e->aspect;
    r_.params.count_dummies = e->count_dummies;
    r_.k = instance_.k;
    r_.height = instance_.hst.height();
  } else if (std::holds_alternative<EvRequest>(ev)) {
    ++r_.requests;
  } else if (std::holds_alternative<EvStep>(ev)) {
    ++r_.iterations;
  } else if (const auto* e = std::get_if<EvConstraint>(&ev)) {
    store_.add(e->c);
  } else if (const auto* e = std::get_if<EvDual>(&ev)) {
    store_[e->cid].z += e->dz;
  } else if (std::holds_alternative<EvCritical>(ev)) {
    ++r_.critical;
  } else if (const auto* e = std::get_if<EvPiggyback>(&ev)) {
    r_.piggybacked += static_cast<int64_t>(e->ids.size());
  } else if (const auto* e = std::get_if<EvRunEnd>(&ev)) {
    r_.movement = e->movement;
    r_.piggyback = e->piggyback;
    r_.root_dual = e->root_dual;
    complete_ = true;
  }
}

RunReport ReportBuilder::report() const {
  RunReport r = r_;
  r.constraints = store_.size();
  r.trace_digest = hex64(digest_.digest());
  return r;
}

OracleSummary run_oracle(const Instance& inst, OracleKind kind, const ConstraintStore& store,
                         const OracleLimits& lim) {
  OracleSummary s;
  s.kind = kind;
  if (kind == OracleKind::kNone) return s;
  auto solve = [&](OptPrefix p) {
    return kind == OracleKind::kFlow ? opt_kserver(inst, p, lim) : opt_tw_bruteforce(inst, p, lim);
  };
  const OptResult tour = solve(OptPrefix::kDummyTour);
  s.opt = tour.cost;
  s.opt_plain = solve(OptPrefix::kNone).cost;
  s.combinations = tour.combinations;
  const RootCheck rc = verify_root_constraints(add_dummy_leaves(inst.hst, inst.k), store, tour.moves);
  s.root_checked = rc.checked;
  s.root_violations = rc.violations;
  s.min_slack = rc.min_slack;
  return s;
}

std::string render_report_json(const RunReport& r) {
  std::string o = "{";
  bool first = true;
  for (const Row& row : rows(r)) {
    if (!first) o += ",";
    first = false;
    o += "\"" + row.key + "\":";
    o += row.text ? "\"" + row.value + "\"" : row.value;
  }
  if (r.audit) o += ",\"audit\":" + render_audit_json(*r.audit);
  return o + "}\n";
}

std::string render_report_csv(const RunReport& r) {
  std::string o = "# hst-kserver-report v1\nkey,value\n";
  for (const Row& row : rows(r)) o += row.key + "," + row.value + "\n";
  if (r.audit)
    for (const auto& c : r.audit->checks)
      o += "check." + c.name + "," + std::to_string(c.violations) + "\n";
  return o;
}

std::string render_report_table(const RunReport& r) {
  std::ostringstream o;
  for (const Row& row : rows(r)) {
    std::string key = row.key;
    key.resize(28, ' ');
    o << key << row.value << '\n';
  }
  return o.str();
}

}  // namespace hstk
