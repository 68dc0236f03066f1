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


#ifndef HSTK_ORACLE_HPP_
#define HSTK_ORACLE_HPP_

#include <cstdint>
#include <string>
#include <vector>

#include "hstk/hst.hpp"
#include "hstk/instance.hpp"
#include "hstk/lp.hpp"

namespace hstk {

struct OracleLimits {
  int64_t max_graph_nodes = 2'000'000;
  int64_t max_combinations = 100'000;
};

// One unit of server crossing the edge (u, parent(u)) upward.
struct Move {
  NodeId u = kNoNode;
  Timestep at;
  int64_t amount = 0;
  bool operator==(const Move&) const = default;
};

struct OptResult {
  double cost = 0.0;
  std::vector<Move> moves;  // sorted by (at, u)
  int64_t graph_nodes = 0;
  int64_t combinations = 1;
};

// kDummyTour prepends visits to the 2k dummy leaves at timesteps (0,1) ..
// (0,2k), matching the online algorithm's starting configuration, so the
// solution is feasible for every constraint the run can generate.
enum class OptPrefix { kNone, kDummyTour };

// Layered min-cost flow over the tree with dummies: one layer per distinct
// service time, up-arcs cost c_u, everything else free, free initial
// placement. Upward moves of a layer at time t land on timestep (t, 0).
// Requires unit windows. Throws GraphTooLarge.
OptResult opt_kserver(const Instance& inst, OptPrefix prefix = OptPrefix::kNone,
                      const OracleLimits& lim = {});

// Minimum over service-time assignments, each request choosing an arrival or
// deadline time inside its own window. Throws TooManyCombinations.
OptResult opt_tw_bruteforce(const Instance& inst, OptPrefix prefix = OptPrefix::kNone,
                            const OracleLimits& lim = {});

struct RootCheck {
  int64_t checked = 0;
  int64_t violations = 0;
  double min_slack = 0.0;  // min over constraints of lhs - rhs
  int worst = -1;
};

// Evaluates every constraint owned by the root on the given movements.
RootCheck verify_root_constraints(const Hst& with_dummies, const ConstraintStore& store,
                                  const std::vector<Move>& moves);

// Cheapest way to bring leaf's mass up to 1 - delta' when every other leaf l
// can give mass(l) - (delta - gamma); solved as a transport flow on the tree.
double gather_cost_flow(const Hst& with_dummies, const std::vector<double>& mass, NodeId leaf,
                        double delta_prime, double delta, double gamma);

std::string render_opt_json(const Hst& with_dummies, const OptResult& r);

}  // namespace hstk

#endif  // HSTK_ORACLE_HPP_
