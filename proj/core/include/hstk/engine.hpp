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

#ifndef HSTK_ENGINE_HPP_
#define HSTK_ENGINE_HPP_

#include <cstdint>
#include <map>
#include <memory>
#include <set>
#include <vector>

#include "hstk/hst.hpp"
#include "hstk/instance.hpp"
#include "hstk/ledger.hpp"
#include "hstk/lp.hpp"
#include "hstk/trace.hpp"
#include "hstk/tw.hpp"

namespace hstk {

struct RequestOutcome {
  int id = 0;
  NodeId leaf = kNoNode;
  int64_t b = 0, e = 0;
  // Leaf mass reached 1 - delta' at some timestep inside the window.
  bool saturated = false;
  Timestep saturated_at;
  bool piggybacked = false;
  // Saturated or piggybacked; time-window requests also count once their
  // leaf holds 1 - 2 delta' inside the window, which keeps them non-critical.
  bool served = false;
  bool critical = false;
  int64_t iterations = 0;
  double movement = 0.0;
  double dual = 0.0;  // root dual gained while serving this request
};

struct RunResult {
  Mode mode = Mode::kServer;
  ParamSet params;
  std::shared_ptr<const Hst> hst;  // with dummies
  std::shared_ptr<const ConstraintStore> store;
  double movement = 0.0;
  double piggyback = 0.0;
  double root_dual = 0.0;
  int64_t iterations = 0;
  std::vector<RequestOutcome> requests;
  uint64_t checksum = 0;  // digest of the emitted trace when one was attached
};

struct RunOptions {
  EventSink* sink = nullptr;
  // Guard against runaway loops; exceeding it aborts the run.
  int64_t max_iterations_per_request = 50'000'000;
};

// Runs the k-server algorithm (unit windows required) or the time-windows
// algorithm on the instance.
RunResult run_algorithm(const Instance& inst, Mode mode,
                        const RunOptions& opts = {});

// Smallest i such that some sibling of backbone[i] has an active leaf below
// it. Throws NoActiveLeaves.
int pick_i0(const Hst& hst, const MovementLedger& ledger,
            const std::vector<NodeId>& backbone, double delta);

// Children of parent(v) other than v whose subtrees hold an active leaf.
std::vector<NodeId> activesib(const Hst& hst, const MovementLedger& ledger,
                              NodeId v, double delta);

}  // namespace hstk

#endif  // HSTK_ENGINE_HPP_
