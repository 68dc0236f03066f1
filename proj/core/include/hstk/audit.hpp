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


#ifndef HSTK_AUDIT_HPP_
#define HSTK_AUDIT_HPP_

#include <cstdint>
#include <iosfwd>
#include <map>
#include <memory>
#include <string>
#include <vector>

#include "hstk/trace.hpp"

namespace hstk {

// Equality-type checks use kRelTol relative to the larger magnitude, with
// kAbsTol as the floor for quantities near zero.
inline constexpr double kRelTol = 1e-9;
inline constexpr double kAbsTol = 1e-12;

struct CheckResult {
  std::string name;
  int64_t evaluated = 0;
  int64_t violations = 0;
  std::string first;  // first counterexample, empty when clean
  bool passed() const { return violations == 0; }
};

struct AuditReport {
  std::vector<CheckResult> checks;  // fixed order, see audit.cc
  // max over local-LP variables of (sum of z over constraints containing the
  // variable) / c_u.
  double beta_measured = 0.0;
  // Same, counting only the simple-update duals at their own local LP.
  double beta_simple = 0.0;
  double y_max = 0.0, y_bound = 0.0;
  int64_t s_max = 0;
  double m = 0.0;
  // Largest pointwise overlap seen by each congestion check, as histograms
  // over (vertex, u) groups.
  std::map<int, int64_t> congestion_solitary, congestion_forest;
  double movement = 0.0, piggyback = 0.0, root_dual = 0.0;
  int64_t events = 0;
  bool complete = false;  // a run_end event was seen

  bool passed() const;
  const CheckResult* find(const std::string& name) const;
};

// Replays a trace and re-derives every quantity the engine reports from the
// raw events, using its own mass, ledger and constraint bookkeeping.
class Auditor : public EventSink {
 public:
  Auditor();
  ~Auditor() override;
  void emit(const Event& ev) override;
  // Finalizes pending post-hoc checks; call once after the last event.
  AuditReport finish();

 private:
  struct State;
  std::unique_ptr<State> s_;
};

// Reads a JSON-lines trace and audits it. Throws ParseError.
AuditReport audit_stream(std::istream& in);

std::string render_audit_json(const AuditReport& r);
std::string render_audit_table(const AuditReport& r);

}  // namespace hstk

#endif  // HSTK_AUDIT_HPP_
