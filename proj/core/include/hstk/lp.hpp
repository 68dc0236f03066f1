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

#ifndef HSTK_LP_HPP_
#define HSTK_LP_HPP_

#include <cstdint>
#include <map>
#include <set>
#include <span>
#include <vector>

#include "hstk/hst.hpp"
#include "hstk/instance.hpp"

namespace hstk {

// y^owner(u, (lo, hi]): the sum of y^owner(u, t) over lo < t <= hi.
struct Term {
  NodeId u = kNoNode;
  Timestep lo, hi;
  bool operator==(const Term&) const = default;
};

enum class Source : uint8_t { kInitial, kSimple, kFull };
const char* source_name(Source s);

struct Constraint {
  int id = -1;
  NodeId owner = kNoNode;
  Timestep tau;
  Source source = Source::kInitial;
  bool bot = false;
  double rhs = 0.0;
  double z = 0.0;
  // Sum of z over parent constraints that picked this one; only grows.
  double load = 0.0;
  bool depleted = false;
  // The request behind a bot constraint (leaf and arrival time); dummies use
  // arrival 0.
  NodeId req_leaf = kNoNode;
  int64_t req_b = 0;
  // Terms introduced at this level; the picked child constraints contribute
  // their own (flattened) left-hand sides.
  std::vector<Term> terms;
  std::vector<int> children;
};

class ConstraintStore {
 public:
  Constraint& add(Constraint c);
  Constraint& operator[](int id) { return all_[id]; }
  const Constraint& operator[](int id) const { return all_[id]; }
  int size() const { return static_cast<int>(all_.size()); }
  const std::vector<Constraint>& all() const { return all_; }

  // Full left-hand side over the owner's variables: own terms plus every
  // descendant constraint's own terms.
  std::vector<Term> flatten(int id) const;

 private:
  std::vector<Constraint> all_;
};

struct StepInfo {
  bool solitary = false;
  // Target dual objective for non-solitary steps (gamma, or xi from a TW
  // simple update).
  double gamma = 0.0;
  std::vector<int> cons;
};

// y^v(u, .) for one descendant u. Almost every raised timestep is a
// non-solitary step of u, so those values sit in an array aligned with u's
// step list; the few others (the tick right after an interval start) go to
// the map.
struct YRow {
  std::vector<double> at_step;
  std::map<Timestep, double> other;
};

struct LocalLp {
  std::map<Timestep, StepInfo> steps;
  // Non-solitary steps in increasing order; steps are only ever appended.
  std::vector<Timestep> nonsolitary;
  std::set<Timestep> awake;
  std::map<NodeId, YRow> y;  // keyed by descendant

  bool has(Timestep t) const { return steps.count(t) != 0; }
  bool solitary(Timestep t) const;
};

// 1 - k_v - 2 delta (n - n_v); callers turn a non-positive value into
// NonPositiveRhs.
double bot_rhs(double k_v, int n, int n_v, double delta);

struct ChildPick {
  int n_u = 0;
  double d = 0.0;  // D(u, (tau_u, tau])
  double b = 0.0;  // rhs of the picked child constraint
};
// sum_u (D_u + b_u) + (n_v - sum_u n_u) delta.
double compose_rhs(std::span<const ChildPick> picks, int n_v, double delta);

// Bot constraints are always slack; otherwise (1 + 1/H) z > load strictly.
bool is_slack(const Constraint& c, int height);
double slack_margin(const Constraint& c, int height);

// Greatest awake timestep <= tau; throws NoAwakeTimestep.
Timestep prev_awake(const LocalLp& lp, Timestep tau, NodeId v = kNoNode);

// Same-timestep parent dual mass charged to u's constraints at tau.
double loss(const ConstraintStore& store, const LocalLp& child, NodeId u,
            const LocalLp& parent, Timestep tau);

double dual_objective(const ConstraintStore& store, std::span<const int> ids);

}  // namespace hstk

#endif  // HSTK_LP_HPP_
