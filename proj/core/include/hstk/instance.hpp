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

#ifndef HSTK_INSTANCE_HPP_
#define HSTK_INSTANCE_HPP_

#include <compare>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "hstk/hst.hpp"

namespace hstk {

// (request time, tick), ordered lexicographically. Tick 0 is the request time
// itself; the algorithms mint ticks 1, 2, ... for successive iterations.
struct Timestep {
  int64_t q = 0;
  int64_t tick = 0;

  auto operator<=>(const Timestep&) const = default;
  Timestep next() const { return {q, tick + 1}; }
  int64_t floor() const { return q; }
};

struct Request {
  NodeId leaf = kNoNode;
  int64_t b = 0;
  int64_t e = 0;

  bool operator==(const Request&) const = default;
};

enum class Mode { kServer, kTimeWindows };
const char* mode_name(Mode m);

// Explicit overrides from "param" records or the command line. Unset fields
// fall back to the defaults derived from n (and the aspect ratio in TW mode).
struct ParamOverrides {
  std::optional<double> delta_prime;
  std::optional<double> delta;
  std::optional<double> gamma;
  std::optional<double> m;
  std::optional<bool> count_dummies;

  bool operator==(const ParamOverrides&) const = default;
};

struct ParamSet {
  double delta_prime = 0.0;
  double delta = 0.0;
  double gamma = 0.0;
  // Number of leaves entering the formulas; dummies included unless switched
  // off.
  int n = 0;
  // Aspect ratio of the leaf metric of the tree with dummies.
  double aspect = 1.0;
  double m = 0.0;
  bool count_dummies = true;
};

struct Instance {
  Hst hst;  // without dummy leaves
  int k = 1;
  std::vector<Request> requests;  // sorted by arrival, strictly increasing
  ParamOverrides overrides;

  // True iff every window has e = b + 1.
  bool unit_windows() const;
  Mode natural_mode() const {
    return unit_windows() ? Mode::kServer : Mode::kTimeWindows;
  }
};

// Applies defaults and overrides for the given mode, then enforces
// delta' - 2*delta*n > 0, delta >= 4*gamma and, in TW mode,
// delta' >= gamma*n*aspect. Throws ParamViolation naming the inequality.
ParamSet resolve_params(const Instance& inst, Mode mode);
// M from the iteration-count bound; honours the override if present.
double default_m(const Hst& with_dummies, int k, double gamma, Mode mode);

// Grammar: tree block ("hst", "node" records), "k <int>",
// "request <leaf> <b> <e>" records, optional "param <name> <value>" records
// (delta_prime, delta, gamma, M, count_dummies). Params are checked against
// the instance's natural mode.
Instance parse_instance(std::string_view text);
std::string render_instance(const Instance& inst);
std::string instance_digest(const Instance& inst);

// "const:L" or "uniform:A:B" (inclusive, A >= 1).
struct WindowLaw {
  int64_t lo = 1;
  int64_t hi = 1;
  static WindowLaw parse(std::string_view s);
  std::string render() const;
};

// Gaps between arrivals are drawn from {2, 3, 4}, so unit windows never
// collide with the next arrival; longer windows are nudged forward until
// their end time is unused.
Instance generate_random(const Hst& hst, int k, int num_requests,
                         const WindowLaw& law, uint64_t seed);

// Desk-scale parameters: delta' = 0.3 and delta = 0.95 delta' / (2n); gamma
// is delta / 4, capped at delta' / (n * aspect) in TW mode. They satisfy the
// inequalities of the mode while keeping iteration counts small.
ParamOverrides scaled_overrides(const Instance& inst, Mode mode);

// Aspect ratio (max/min pairwise distance) over the leaves of the tree.
double leaf_aspect_ratio(const Hst& hst);

}  // namespace hstk

#endif  // HSTK_INSTANCE_HPP_
