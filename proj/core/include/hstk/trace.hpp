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

#ifndef HSTK_TRACE_HPP_
#define HSTK_TRACE_HPP_

#include <cstdint>
#include <iosfwd>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "hstk/hst.hpp"
#include "hstk/instance.hpp"
#include "hstk/ledger.hpp"
#include "hstk/lp.hpp"

namespace hstk {

// Self-contained: the auditor rebuilds tree, parameters and the starting
// configuration from this event alone.
struct EvRunBegin {
  Mode mode = Mode::kServer;
  std::string instance;
  double delta_prime = 0, delta = 0, gamma = 0, m = 0, aspect = 1;
  int n = 0;
  bool count_dummies = true;
};
struct EvStep {  // fresh while-loop iteration
  Timestep tau;
  int i0 = 0;
};
struct EvRequest {
  int id = 0;
  NodeId leaf = kNoNode;
  int64_t b = 0, e = 0;
  double mass = 0;  // leaf mass on arrival
};
struct EvStepAdded {
  NodeId v = kNoNode;
  Timestep tau;
  bool solitary = false;
  double gamma = 0;
};
struct EvConstraint {
  Constraint c;  // z holds the value set at creation
};
struct EvDual {
  int cid = 0;
  double dz = 0;
};
struct EvY {
  NodeId v = kNoNode, u = kNoNode;
  Timestep tau_u, tau;
  double ds = 0;
  double dy = 0;  // total increase over S_u
  int count = 0;  // |S_u|
};
struct EvTransfer {
  NodeId src = kNoNode, dst = kNoNode;
  double amount = 0;
  Attribution attr = Attribution::kLocal;
  Timestep tau;
};
struct EvDepleted {
  int cid = 0;
};
struct EvAwakeRemoved {
  NodeId v = kNoNode;
  Timestep tau;
};
struct EvCallBegin {
  bool full = false;
  NodeId v = kNoNode;
  Timestep tau;
  std::vector<NodeId> picks;  // U for full updates, principal child first
  double xi = 0;
};
struct EvCallEnd {
  bool full = false;
  NodeId v = kNoNode;
  Timestep tau;
  double dual = 0;
  double transferred = 0;
  double topup = 0;
};
struct EvSaturated {
  int id = 0;
  Timestep tau;
  double mass = 0;
};
struct EvCritical {
  int id = 0;
  int64_t q = 0;
  double cost = 0;
  int logcost = 0;
};
struct EvBuildTree {
  int64_t q = 0;
  std::vector<NodeId> z;
};
struct EvSpawn {
  NodeId v = kNoNode, w = kNoNode;
  int64_t q = 0;
  std::vector<NodeId> s;
};
struct EvFTree {
  NodeId v = kNoNode;
  int64_t q = 0;
  std::vector<NodeId> nodes;
  double cost = 0;
};
struct EvWitnessNode {
  NodeId v = kNoNode, w = kNoNode;
  int64_t q = 0;
  int elr = -1;  // request id, -1 when no outstanding request lies below w
  NodeId elr_leaf = kNoNode;
  int64_t elr_b = 0, elr_e = 0;
};
struct EvWitnessEdge {
  NodeId v = kNoNode, w = kNoNode;
  int64_t q = 0;
  NodeId child = kNoNode;
  int64_t child_q = 0;
};
struct EvPiggyback {
  int64_t q = 0;
  std::vector<int> ids;
  double charge = 0;
};
struct EvLoopEnd {
  int id = 0;
  int64_t iterations = 0;
};
struct EvRunEnd {
  double movement = 0, piggyback = 0, root_dual = 0;
};

using Event =
    std::variant<EvRunBegin, EvStep, EvRequest, EvStepAdded, EvConstraint,
                 EvDual, EvY, EvTransfer, EvDepleted, EvAwakeRemoved,
                 EvCallBegin, EvCallEnd, EvSaturated, EvCritical, EvBuildTree,
                 EvSpawn, EvFTree, EvWitnessNode, EvWitnessEdge, EvPiggyback,
                 EvLoopEnd, EvRunEnd>;

class EventSink {
 public:
  virtual ~EventSink() = default;
  virtual void emit(const Event& ev) = 0;
};

// One JSON object per line. Field order is fixed and doubles use the
// shortest round-trip form, so equal runs give byte-identical traces.
std::string serialize(const Event& ev);
// Throws ParseError carrying line_no.
Event parse_event(std::string_view line, int line_no = 0);

// Hashes every line; writes them too when given a stream.
class TraceWriter : public EventSink {
 public:
  explicit TraceWriter(std::ostream* out = nullptr) : out_(out) {}
  void emit(const Event& ev) override;
  uint64_t digest() const { return digest_; }
  int64_t count() const { return count_; }

 private:
  std::ostream* out_;
  uint64_t digest_ = 14695981039346656037ull;
  int64_t count_ = 0;
};

class TeeSink : public EventSink {
 public:
  void add(EventSink* s) { sinks_.push_back(s); }
  void emit(const Event& ev) override {
    for (auto* s : sinks_) s->emit(ev);
  }

 private:
  std::vector<EventSink*> sinks_;
};

}  // namespace hstk

#endif  // HSTK_TRACE_HPP_
