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


// hstk: generate instances, run the online algorithms, audit traces and
// compare against the offline oracles.
//
// Exit codes: 0 ok, 2 invariant breach (failed audit, broken cost chain or
// aborted run), 3 input error (bad flags, unreadable or malformed files,
// parameter inequalities).

#include <atomic>
#include <chrono>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <mutex>
#include <optional>
#include <sstream>
#include <thread>

#include "CLI11.hpp"
#include "hstk/audit.hpp"
#include "hstk/engine.hpp"
#include "hstk/errors.hpp"
#include "hstk/instance.hpp"
#include "hstk/oracle.hpp"
#include "hstk/report.hpp"
#include "hstk/textio.hpp"
#include "hstk/trace.hpp"

namespace fs = std::filesystem;
using namespace hstk;

namespace {

constexpr int kExitBreach = 2;
constexpr int kExitInput = 3;

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot read " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_file(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write " + path.string());
  out << text;
}

// "scaled" selects the desk-scale preset; k=v pairs override single fields.
void apply_params(Instance& inst, const std::string& pairs, std::optional<Mode> mode = {}) {
  if (pairs.empty()) return;
  std::stringstream ss(pairs);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (item.empty()) continue;
    if (item == "scaled") {
      inst.overrides = scaled_overrides(inst, mode.value_or(inst.natural_mode()));
      continue;
    }
    const auto eq = item.find('=');
    if (eq == std::string::npos) throw Error("bad --params entry '" + item + "'");
    const std::string key = item.substr(0, eq);
    const double v = parse_double(item.substr(eq + 1), 0);
    auto& o = inst.overrides;
    if (key == "delta_prime") o.delta_prime = v;
    else if (key == "delta") o.delta = v;
    else if (key == "gamma") o.gamma = v;
    else if (key == "M" || key == "m") o.m = v;
    else if (key == "count_dummies") o.count_dummies = v != 0.0;
    else throw Error("unknown parameter '" + key + "'");
  }
}

Mode parse_algo(const std::string& s, const Instance& inst) {
  if (s.empty()) return inst.natural_mode();
  if (s == "kserver") return Mode::kServer;
  if (s == "tw") return Mode::kTimeWindows;
  throw Error("unknown algorithm '" + s + "' (expected kserver or tw)");
}

OracleKind default_oracle(const std::string& s, Mode mode) {
  if (!s.empty()) return parse_oracle_kind(s);
  return mode == Mode::kServer ? OracleKind::kFlow : OracleKind::kBrute;
}

// Oracle caps are not failures: the ratio is omitted and a notice printed.
void attach_oracle(RunReport& rep, const Instance& inst, OracleKind kind,
                   const ConstraintStore& store, std::ostream& notice) {
  if (kind == OracleKind::kNone) return;
  try {
    rep.oracle = run_oracle(inst, kind, store);
  } catch (const GraphTooLarge& e) {
    notice << "oracle skipped, ratio omitted: " << e.what() << '\n';
  } catch (const TooManyCombinations& e) {
    notice << "oracle skipped, ratio omitted: " << e.what() << '\n';
  }
}

void write_reports(const fs::path& dir, const RunReport& rep) {
  write_file(dir / "report.json", render_report_json(rep));
  write_file(dir / "report.csv", render_report_csv(rep));
}

// One row per request; "steps" counts while-loop iterations spent on it.
std::string render_requests_csv(const Hst& hst, const RunResult& res) {
  std::string out = "id,leaf,b,e,served,saturated_at,piggybacked,critical,steps,movement,dual\n";
  for (const RequestOutcome& r : res.requests) {
    out += std::to_string(r.id) + "," + hst.node(r.leaf).name + "," + std::to_string(r.b) + "," +
           std::to_string(r.e) + "," + (r.served ? "1" : "0") + ",";
    if (r.saturated)
      out += "(" + std::to_string(r.saturated_at.q) + ";" + std::to_string(r.saturated_at.tick) + ")";
    out += std::string(",") + (r.piggybacked ? "1" : "0") + "," + (r.critical ? "1" : "0") + "," +
           std::to_string(r.iterations) + "," + format_double(r.movement) + "," +
           format_double(r.dual) + "\n";
  }
  return out;
}

struct RunArgs {
  std::string instance, algo, params, out = ".", oracle = "none", audit = "post";
  bool timing = false;
};

int cmd_run(const RunArgs& a) {
  Instance inst = parse_instance(read_file(a.instance));
  const Mode mode = parse_algo(a.algo, inst);
  apply_params(inst, a.params, mode);
  resolve_params(inst, mode);  // parameter problems are input errors
  if (a.audit != "inline" && a.audit != "post" && a.audit != "off")
    throw Error("unknown audit mode '" + a.audit + "'");
  const OracleKind ok = parse_oracle_kind(a.oracle);
  const fs::path dir(a.out);
  fs::create_directories(dir);
  const fs::path trace_path = dir / "trace.jsonl";

  std::ofstream trace(trace_path, std::ios::binary);
  if (!trace) throw Error("cannot write " + trace_path.string());
  TraceWriter writer(&trace);
  ReportBuilder builder;
  Auditor inline_auditor;
  TeeSink tee;
  tee.add(&writer);
  tee.add(&builder);
  if (a.audit == "inline") tee.add(&inline_auditor);
  RunOptions opts;
  opts.sink = &tee;

  const auto t0 = std::chrono::steady_clock::now();
  int code = 0;
  try {
    const RunResult res = run_algorithm(inst, mode, opts);
    write_file(dir / "requests.csv", render_requests_csv(*res.hst, res));
  } catch (const RunAbort& e) {
    std::cerr << "run aborted: " << e.what() << '\n';
    code = kExitBreach;
  }
  const auto t1 = std::chrono::steady_clock::now();
  trace.close();

  RunReport rep = builder.report();
  if (a.audit == "inline") {
    rep.audit = inline_auditor.finish();
  } else if (a.audit == "post") {
    std::ifstream in(trace_path, std::ios::binary);
    rep.audit = audit_stream(in);
  }
  if (code == 0) attach_oracle(rep, builder.instance(), ok, builder.store(), std::cerr);
  if (a.timing) rep.wall_ms = std::chrono::duration<double, std::milli>(t1 - t0).count();
  write_reports(dir, rep);
  std::cout << render_report_table(rep);
  if (rep.audit && !rep.audit->passed()) std::cout << render_audit_table(*rep.audit);
  if (!rep.ok()) code = kExitBreach;
  return code;
}

int cmd_audit(const std::string& trace_path, const std::string& oracle, const std::string& out,
              bool table) {
  std::ifstream in(trace_path, std::ios::binary);
  if (!in) throw Error("cannot read " + trace_path);
  Auditor auditor;
  ReportBuilder builder;
  std::string line;
  int no = 0;
  while (std::getline(in, line)) {
    ++no;
    if (line.empty()) continue;
    const Event ev = parse_event(line, no);
    auditor.emit(ev);
    builder.emit(ev);
  }
  RunReport rep = builder.report();
  rep.audit = auditor.finish();
  if (builder.complete())
    attach_oracle(rep, builder.instance(), parse_oracle_kind(oracle), builder.store(), std::cerr);
  if (!out.empty()) {
    fs::create_directories(out);
    write_reports(out, rep);
  }
  std::cout << render_report_table(rep);
  if (table) std::cout << render_audit_table(*rep.audit);
  return rep.ok() ? 0 : kExitBreach;
}

struct CompareLine {
  std::string text;
  bool breach = false;
};

CompareLine compare_one(const std::string& path, const std::string& algo, const std::string& params,
                        const std::string& oracle) {
  Instance inst = parse_instance(read_file(path));
  const Mode mode = parse_algo(algo, inst);
  apply_params(inst, params, mode);
  resolve_params(inst, mode);
  ReportBuilder builder;
  Auditor auditor;
  TeeSink tee;
  tee.add(&builder);
  tee.add(&auditor);
  RunOptions opts;
  opts.sink = &tee;
  CompareLine out;
  try {
    run_algorithm(inst, mode, opts);
  } catch (const RunAbort& e) {
    return {path + ": run aborted: " + e.what(), true};
  }
  RunReport rep = builder.report();
  rep.audit = auditor.finish();
  std::ostringstream notice;
  attach_oracle(rep, builder.instance(), default_oracle(oracle, mode), builder.store(), notice);
  std::ostringstream o;
  o << path << ": cost " << format_double(rep.total_cost()) << " dual "
    << format_double(rep.root_dual) << " beta " << format_double(rep.audit->beta_measured);
  if (auto c = rep.movement_chain()) o << " movement<=2H*dual " << (*c ? "yes" : "NO");
  if (rep.oracle) {
    o << " opt " << format_double(rep.oracle->opt) << " root-violations "
      << rep.oracle->root_violations;
    if (auto c = rep.dual_chain()) o << " dual/beta<=opt " << (*c ? "yes" : "NO");
    if (auto q = rep.certified_ratio()) o << " ratio " << format_double(*q);
    else o << " ratio n/a (opt is zero; dual must be <= 0 up to tolerance)";
  } else {
    o << " " << notice.str();
  }
  o << " audit " << (rep.audit->passed() ? "pass" : "FAIL");
  out.text = o.str();
  out.breach = !rep.ok();
  return out;
}

int cmd_compare(const std::vector<std::string>& files, const std::string& algo,
                const std::string& params, const std::string& oracle, int jobs) {
  std::vector<CompareLine> lines(files.size());
  std::atomic<size_t> next{0};
  std::mutex err_mu;
  std::string input_error;
  auto worker = [&] {
    for (size_t i; (i = next++) < files.size();) {
      try {
        lines[i] = compare_one(files[i], algo, params, oracle);
      } catch (const Error& e) {
        std::lock_guard lock(err_mu);
        if (input_error.empty()) input_error = files[i] + ": " + e.what();
      }
    }
  };
  std::vector<std::thread> pool;
  for (int j = 0; j < std::max(1, jobs); ++j) pool.emplace_back(worker);
  for (auto& t : pool) t.join();
  if (!input_error.empty()) throw Error(input_error);
  bool breach = false;
  for (const auto& l : lines) {
    std::cout << l.text << '\n';
    breach = breach || l.breach;
  }
  return breach ? kExitBreach : 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"hstk: online k-server on HSTs, with audits and offline oracles"};
  app.require_subcommand(1);

  auto* gen = app.add_subcommand("gen", "write a random instance on a balanced tree");
  int leaves = 4, k = 1, reqs = 10, height = 2;
  uint64_t seed = 1;
  double lambda = 20.0;
  std::string window = "const:1", gen_out, gen_params;
  gen->add_option("--leaves", leaves, "real leaves")->capture_default_str();
  gen->add_option("--k", k, "servers")->capture_default_str();
  gen->add_option("--reqs", reqs, "requests")->capture_default_str();
  gen->add_option("--seed", seed)->capture_default_str();
  gen->add_option("--window", window, "const:L or uniform:A:B")->capture_default_str();
  gen->add_option("--lambda", lambda)->capture_default_str();
  gen->add_option("--height", height)->capture_default_str();
  gen->add_option("--params", gen_params, "scaled and/or k=v pairs, embedded as param records");
  gen->add_option("--out", gen_out, "output file (stdout when absent)");

  auto* run = app.add_subcommand("run", "run an algorithm, write trace and reports");
  RunArgs ra;
  run->add_option("--instance", ra.instance)->required();
  run->add_option("--algo", ra.algo, "kserver or tw (default: from the windows)");
  run->add_option("--seed", seed, "accepted for symmetry with gen; runs are deterministic");
  run->add_option("--params", ra.params, "scaled and/or delta_prime,delta,gamma,M,count_dummies=v");
  run->add_option("--out", ra.out, "output directory")->capture_default_str();
  run->add_option("--oracle", ra.oracle, "flow, brute or none")->capture_default_str();
  run->add_option("--audit", ra.audit, "inline, post or off")->capture_default_str();
  run->add_flag("--timing", ra.timing, "add wall time to the reports");

  auto* audit = app.add_subcommand("audit", "audit a stored trace and rebuild its reports");
  std::string trace_path, audit_oracle = "none", audit_out;
  bool audit_table = false;
  audit->add_option("--trace", trace_path)->required();
  audit->add_option("--oracle", audit_oracle, "flow, brute or none")->capture_default_str();
  audit->add_option("--out", audit_out, "write report.json and report.csv here");
  audit->add_flag("--checks", audit_table, "print the per-check table");

  auto* compare = app.add_subcommand("compare", "run and certify against the offline optimum");
  std::vector<std::string> files;
  std::string cmp_algo, cmp_params, cmp_oracle;
  int jobs = 1;
  compare->add_option("--instance", files)->required();
  compare->add_option("--algo", cmp_algo);
  compare->add_option("--params", cmp_params);
  compare->add_option("--oracle", cmp_oracle, "flow or brute (default by algorithm)");
  compare->add_option("--jobs", jobs)->capture_default_str();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : kExitInput;
  }

  try {
    if (*gen) {
      Hst tree = balanced_hst(leaves, height, lambda);
      Instance inst = generate_random(tree, k, reqs, WindowLaw::parse(window), seed);
      apply_params(inst, gen_params);
      const std::string text = render_instance(parse_instance(render_instance(inst)));
      if (gen_out.empty()) std::cout << text;
      else write_file(gen_out, text);
      return 0;
    }
    if (*run) return cmd_run(ra);
    if (*audit) return cmd_audit(trace_path, audit_oracle, audit_out, audit_table);
    if (*compare) return cmd_compare(files, cmp_algo, cmp_params, cmp_oracle, jobs);
  } catch (const RunAbort& e) {
    std::cerr << "invariant breach: " << e.what() << '\n';
    return kExitBreach;
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitInput;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitInput;
  }
  return 0;
}
