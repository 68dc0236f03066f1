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

#ifndef HSTK_LEDGER_HPP_
#define HSTK_LEDGER_HPP_

#include <span>
#include <utility>
#include <vector>

#include "hstk/hst.hpp"
#include "hstk/instance.hpp"

namespace hstk {

enum class Attribution { kLocal, kInherited, kTopup };
const char* attribution_name(Attribution a);

// Leaf masses plus per-edge give/receive series. Series are cumulative and
// appended in nondecreasing timestep order, so any interval sum is two binary
// searches.
class MovementLedger {
 public:
  MovementLedger() = default;
  explicit MovementLedger(const Hst& hst);

  double mass(NodeId leaf) const { return mass_[leaf]; }
  void set_mass(NodeId leaf, double m) { mass_[leaf] = m; }
  double subtree_mass(NodeId v) const;
  double total_mass() const;

  // Moves mass from leaf src to leaf dst at timestep t. g grows on every edge
  // from src up to the lca, r on every edge from the lca down to dst.
  // Returns the upward cost amount * up_cost(src, lca).
  double move(NodeId src, NodeId dst, double amount, Timestep t,
              Attribution a);

  // Sums over the half-open interval (lo, hi].
  double g(NodeId v, Timestep lo, Timestep hi) const;
  double r(NodeId v, Timestep lo, Timestep hi) const;
  double g_part(NodeId v, Attribution a, Timestep lo, Timestep hi) const;
  double D(NodeId v, Timestep lo, Timestep hi) const {
    return g(v, lo, hi) - r(v, lo, hi);
  }

 private:
  struct Series {
    std::vector<Timestep> t;
    // Cumulative give, receive and the three give components.
    std::vector<double> g, r, loc, inh, top;
    void add(Timestep at, double dg, double dr, Attribution a);
    size_t upto(Timestep at) const;  // number of entries with time <= at
  };
  double prefix(const Series& s, const std::vector<double>& col,
                Timestep lo, Timestep hi) const;

  const Hst* hst_ = nullptr;
  std::vector<double> mass_;
  std::vector<Series> series_;
};

struct DrainPiece {
  NodeId src;
  double amount;
};

// Drains amount from the sources in order, never taking a leaf below floor,
// and moves it into dest. Throws InsufficientMass if the sources cannot cover
// the amount.
std::vector<DrainPiece> apply_transfer(MovementLedger& ledger,
                                       std::span<const NodeId> sources,
                                       NodeId dest, double amount, Timestep t,
                                       Attribution a, double floor);

}  // namespace hstk

#endif  // HSTK_LEDGER_HPP_
