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

#include "hstk/lp.hpp"

#include "hstk/errors.hpp"

namespace hstk {

const char* source_name(Source s) {
  switch (s) {
    case Source::kInitial: return "initial";
    case Source::kSimple: return "simple";
    case Source::kFull: return "full";
  }
  return "?";
}

Constraint& ConstraintStore::add(Constraint c) {
  c.id = size();
  all_.push_back(std::move(c));
  return all_.back();
}

std::vector<Term> ConstraintStore::flatten(int id) const {
  std::vector<Term> out;
  std::vector<int> stack{id};
  while (!stack.empty()) {
    const Constraint& c = all_[stack.back()];
    stack.pop_back();
    out.insert(out.end(), c.terms.begin(), c.terms.end());
    stack.insert(stack.end(), c.children.begin(), c.children.end());
  }
  return out;
}

bool LocalLp::solitary(Timestep t) const {
  auto it = steps.find(t);
  return it != steps.end() && it->second.solitary;
}

double bot_rhs(double k_v, int n, int n_v, double delta) {
  return 1.0 - k_v - 2.0 * delta * (n - n_v);
}

double compose_rhs(std::span<const ChildPick> picks, int n_v, double delta) {
  double s = 0.0;
  int covered = 0;
  for (const auto& p : picks) {
    s += p.d + p.b;
    covered += p.n_u;
  }
  return s + (n_v - covered) * delta;
}

double slack_margin(const Constraint& c, int height) {
  return (1.0 + 1.0 / height) * c.z - c.load;
}

bool is_slack(const Constraint& c, int height) {
  return c.bot || (!c.depleted && slack_margin(c, height) > 0.0);
}

Timestep prev_awake(const LocalLp& lp, Timestep tau, NodeId v) {
  auto it = lp.awake.upper_bound(tau);
  if (it == lp.awake.begin())
    throw NoAwakeTimestep("no awake timestep at or before (" + std::to_string(tau.q) + "," +
                          std::to_string(tau.tick) + ") for node " + std::to_string(v));
  return *std::prev(it);
}

double loss(const ConstraintStore& store, const LocalLp& child, NodeId u,
            const LocalLp& parent, Timestep tau) {
  auto cs = child.steps.find(tau);
  if (cs == child.steps.end() || cs->second.solitary) return 0.0;
  auto ps = parent.steps.find(tau);
  if (ps == parent.steps.end()) return 0.0;
  double s = 0.0;
  for (int pid : ps->second.cons) {
    const Constraint& p = store[pid];
    for (int cid : p.children) {
      const Constraint& c = store[cid];
      if (c.owner == u && c.tau == tau) s += c.rhs * p.z;
    }
  }
  return s;
}

double dual_objective(const ConstraintStore& store, std::span<const int> ids) {
  double s = 0.0;
  for (int id : ids) s += store[id].rhs * store[id].z;
  return s;
}

}  // namespace hstk
