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

#include "hstk/ledger.hpp"

#include <algorithm>

#include "hstk/errors.hpp"
#include "hstk/textio.hpp"

namespace hstk {

const char* attribution_name(Attribution a) {
  switch (a) {
    case Attribution::kLocal: return "loc";
    case Attribution::kInherited: return "inh";
    case Attribution::kTopup: return "top";
  }
  return "?";
}

MovementLedger::MovementLedger(const Hst& hst)
    : hst_(&hst), mass_(hst.size(), 0.0), series_(hst.size()) {}

double MovementLedger::subtree_mass(NodeId v) const {
  double s = 0.0;
  for (NodeId l : hst_->leaves_below(v)) s += mass_[l];
  return s;
}

double MovementLedger::total_mass() const { return subtree_mass(hst_->root()); }

void MovementLedger::Series::add(Timestep at, double dg, double dr,
                                 Attribution a) {
  if (t.empty() || t.back() < at) {
    t.push_back(at);
    auto push = [](std::vector<double>& c) { c.push_back(c.empty() ? 0.0 : c.back()); };
    push(g), push(r), push(loc), push(inh), push(top);
  } else if (at < t.back()) {
    throw InvariantBreach("ledger entry out of timestep order");
  }
  g.back() += dg;
  r.back() += dr;
  if (dg != 0.0) {
    if (a == Attribution::kLocal) loc.back() += dg;
    else if (a == Attribution::kInherited) inh.back() += dg;
    else top.back() += dg;
  }
}

size_t MovementLedger::Series::upto(Timestep at) const {
  return std::upper_bound(t.begin(), t.end(), at) - t.begin();
}

double MovementLedger::prefix(const Series& s, const std::vector<double>& col,
                              Timestep lo, Timestep hi) const {
  if (!(lo < hi)) return 0.0;
  size_t a = s.upto(lo), b = s.upto(hi);
  double hi_v = b ? col[b - 1] : 0.0;
  double lo_v = a ? col[a - 1] : 0.0;
  return hi_v - lo_v;
}

double MovementLedger::g(NodeId v, Timestep lo, Timestep hi) const {
  return prefix(series_[v], series_[v].g, lo, hi);
}
double MovementLedger::r(NodeId v, Timestep lo, Timestep hi) const {
  return prefix(series_[v], series_[v].r, lo, hi);
}
double MovementLedger::g_part(NodeId v, Attribution a, Timestep lo,
                              Timestep hi) const {
  const Series& s = series_[v];
  const auto& col = a == Attribution::kLocal ? s.loc
                    : a == Attribution::kInherited ? s.inh : s.top;
  return prefix(s, col, lo, hi);
}

double MovementLedger::move(NodeId src, NodeId dst, double amount, Timestep t,
                            Attribution a) {
  if (amount == 0.0 || src == dst) return 0.0;
  const NodeId top = hst_->lca(src, dst);
  double cost = 0.0;
  for (NodeId u = src; u != top; u = hst_->parent(u)) {
    series_[u].add(t, amount, 0.0, a);
    cost += amount * hst_->node(u).edge_cost;
  }
  for (NodeId u = dst; u != top; u = hst_->parent(u))
    series_[u].add(t, 0.0, amount, a);
  mass_[src] -= amount;
  mass_[dst] += amount;
  return cost;
}

std::vector<DrainPiece> apply_transfer(MovementLedger& ledger,
                                       std::span<const NodeId> sources,
                                       NodeId dest, double amount, Timestep t,
                                       Attribution a, double floor) {
  std::vector<DrainPiece> out;
  if (amount <= 0.0) return out;
  double left = amount;
  for (NodeId s : sources) {
    if (left <= 0.0) break;
    double avail = ledger.mass(s) - floor;
    if (avail <= 0.0) continue;
    double take = std::min(avail, left);
    ledger.move(s, dest, take, t, a);
    out.push_back({s, take});
    left -= take;
  }
  // Relative slack absorbs the rounding of the subtraction chain above.
  if (left > 1e-12 * amount)
    throw InsufficientMass("sources short by " + format_double(left) + " of " +
                           format_double(amount));
  return out;
}

}  // namespace hstk
