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


#ifndef HSTK_REPORT_HPP_
#define HSTK_REPORT_HPP_

#include <cstdint>
#include <optional>
#include <string>

#include "hstk/audit.hpp"
#include "hstk/engine.hpp"
#include "hstk/oracle.hpp"

namespace hstk {

enum class OracleKind { kNone, kFlow, kBrute };
OracleKind parse_oracle_kind(const std::string& s);  // throws Error

struct OracleSummary {
  OracleKind kind = OracleKind::kNone;
  // Optimum when the servers must first visit every dummy leaf, which is the
  // solution the root constraints are checked against.
  double opt = 0.0;
  double opt_plain = 0.0;  // optimum of the instance alone
  int64_t combinations = 1;
  int64_t root_checked = 0;
  int64_t root_violations = 0;
  double min_slack = 0.0;
};

// Everything here is a function of the trace (plus the oracle, itself a
// function of the instance recorded in the trace), so equal runs render
// byte-identical reports. Wall time is only present when asked for.
struct RunReport {
  std::string instance_digest;
  std::string trace_digest;
  Mode mode = Mode::kServer;
  ParamSet params;
  int k = 0;
  int height = 0;
  int64_t events = 0;
  int64_t requests = 0;
  int64_t iterations = 0;
  int64_t constraints = 0;
  int64_t critical = 0, piggybacked = 0;
  double movement = 0.0, piggyback = 0.0, root_dual = 0.0;
  std::optional<AuditReport> audit;
  std::optional<OracleSummary> oracle;
  std::optional<double> wall_ms;

  double total_cost() const { return movement + piggyback; }
  // movement <= 2H * root dual; k-server runs only.
  std::optional<bool> movement_chain() const;
  // root dual / beta <= opt, which needs zero root-constraint violations.
  std::optional<bool> dual_chain() const;
  std::optional<double> certified_ratio() const;
  // Audit clean, chains hold and every root constraint is satisfied.
  bool ok() const;
};

// Collects report fields and the generated constraints from a trace.
class ReportBuilder : public EventSink {
 public:
  void emit(const Event& ev) override;
  bool complete() const { return complete_; }
  const Instance& instance() const { return instance_; }
  const ConstraintStore& store() const { return store_; }
  RunReport report() const;

 private:
  TraceWriter digest_;
  Instance instance_;
  ConstraintStore store_;
  RunReport r_;
  bool complete_ = false;
};

// Solves the oracle and checks every root constraint against its solution.
// Throws GraphTooLarge, TooManyCombinations or ParamViolation.
OracleSummary run_oracle(const Instance& inst, OracleKind kind, const ConstraintStore& store,
                         const OracleLimits& lim = {});

std::string render_report_json(const RunReport& r);
// Header line "# hst-kserver-report v1", then one key,value row per field.
std::string render_report_csv(const RunReport& r);
std::string render_report_table(const RunReport& r);

}  // namespace hstk

#endif  // HSTK_REPORT_HPP_
