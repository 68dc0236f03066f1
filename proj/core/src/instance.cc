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

#include "hstk/instance.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <random>
#include <set>

#include "hstk/errors.hpp"
#include "hstk/textio.hpp"

namespace hstk {

const char* mode_name(Mode m) {
  return m == Mode::kServer ? "kserver" : "tw";
}

bool Instance::unit_windows() const {
  return std::all_of(requests.begin(), requests.end(),
                     [](const Request& r) { return r.e == r.b + 1; });
}

double leaf_aspect_ratio(const Hst& hst) {
  // Leaves meeting at level L are 2 * (1 + lambda + ... + lambda^(L-1)) apart.
  auto dist_at = [&](int level) {
    double d = 0.0;
    for (int i = 0; i < level; ++i) d += hst.lambda_pow(i);
    return 2.0 * d;
  };
  int lo = -1, hi = -1;
  for (const auto& nd : hst.nodes()) {
    if (nd.children.size() < 2) continue;
    if (lo < 0 || nd.level < lo) lo = nd.level;
    hi = std::max(hi, nd.level);
  }
  if (lo < 0) return 1.0;
  return dist_at(hi) / dist_at(lo);
}

double default_m(const Hst& with_dummies, int k, double gamma, Mode mode) {
  const double h = with_dummies.height();
  const double lh = with_dummies.lambda_pow(with_dummies.height());
  if (mode == Mode::kServer) return std::floor(5.0 * h * lh * k / (4.0 * gamma)) + 1.0;
  return std::floor(5.0 * h * lh * lh * k / (2.0 * gamma)) + 1.0;
}

ParamSet resolve_params(const Instance& inst, Mode mode) {
  const Hst full = add_dummy_leaves(inst.hst, inst.k);
  ParamSet p;
  p.count_dummies = inst.overrides.count_dummies.value_or(true);
  p.n = p.count_dummies ? full.leaf_count() : full.real_leaf_count();
  p.aspect = leaf_aspect_ratio(full);
  const double n = p.n;
  p.delta_prime = inst.overrides.delta_prime.value_or(1.0 / (n * n));
  p.delta = inst.overrides.delta.value_or(1.0 / (10.0 * n * n * n));
  const double g0 = 1.0 / (n * n * n * n);
  p.gamma = inst.overrides.gamma.value_or(mode == Mode::kServer ? g0 : g0 / p.aspect);
  if (!(p.delta_prime > 0 && p.delta > 0 && p.gamma > 0))
    throw ParamViolation("delta', delta and gamma must be positive");
  if (!(p.delta_prime - 2.0 * p.delta * n > 0.0))
    throw ParamViolation("delta' - 2*delta*n > 0 fails (delta'=" + format_double(p.delta_prime) +
                         ", delta=" + format_double(p.delta) + ", n=" + std::to_string(p.n) + ")");
  if (!(p.delta >= 4.0 * p.gamma))
    throw ParamViolation("delta >= 4*gamma fails (delta=" + format_double(p.delta) +
                         ", gamma=" + format_double(p.gamma) + ")");
  if (mode == Mode::kTimeWindows && !(p.delta_prime >= p.gamma * n * p.aspect))
    throw ParamViolation("delta' >= gamma*n*aspect fails (delta'=" + format_double(p.delta_prime) +
                         ", gamma=" + format_double(p.gamma) +
                         ", aspect=" + format_double(p.aspect) + ")");
  p.m = inst.overrides.m.value_or(default_m(full, inst.k, p.gamma, mode));
  if (!(p.m >= 1.0)) throw ParamViolation("M must be at least 1");
  return p;
}

Instance parse_instance(std::string_view text) {
  LineReader in(text);
  std::optional<double> lambda;
  std::optional<int> k;
  std::vector<NodeSpec> records;
  struct RawRequest {
    std::string leaf;
    int64_t b, e;
    int line;
  };
  std::vector<RawRequest> raw;
  Instance inst;
  while (auto line = in.next()) {
    const auto& tok = line->tokens;
    const int ln = line->number;
    if (tok[0] == "hst") {
      if (lambda) throw ParseError(ln, "duplicate 'hst' header");
      if (tok.size() != 2) throw ParseError(ln, "expected 'hst <lambda>'");
      lambda = parse_double(tok[1], ln);
    } else if (tok[0] == "node") {
      if (!lambda) throw ParseError(ln, "'node' before 'hst' header");
      records.push_back(parse_node_record(*line));
    } else if (tok[0] == "k") {
      if (k) throw ParseError(ln, "duplicate 'k' record");
      if (tok.size() != 2) throw ParseError(ln, "expected 'k <int>'");
      int64_t v = parse_int(tok[1], ln);
      if (v < 1 || v > 64) throw ParseError(ln, "k must be in [1, 64]");
      k = static_cast<int>(v);
    } else if (tok[0] == "request") {
      if (tok.size() != 4) throw ParseError(ln, "expected 'request <leaf> <b> <e>'");
      int64_t b = parse_int(tok[2], ln), e = parse_int(tok[3], ln);
      if (b < 1) throw ParseError(ln, "arrival times start at 1");
      if (e < b) throw ParseError(ln, "window ends before it opens");
      raw.push_back({tok[1], b, e, ln});
    } else if (tok[0] == "param") {
      if (tok.size() != 3) throw ParseError(ln, "expected 'param <name> <value>'");
      const std::string& name = tok[1];
      auto& o = inst.overrides;
      if (name == "delta_prime") o.delta_prime = parse_double(tok[2], ln);
      else if (name == "delta") o.delta = parse_double(tok[2], ln);
      else if (name == "gamma") o.gamma = parse_double(tok[2], ln);
      else if (name == "M") o.m = parse_double(tok[2], ln);
      else if (name == "count_dummies") {
        int64_t v = parse_int(tok[2], ln);
        if (v != 0 && v != 1) throw ParseError(ln, "count_dummies must be 0 or 1");
        o.count_dummies = v == 1;
      } else {
        throw ParseError(ln, "unknown param '" + name + "'");
      }
    } else {
      throw ParseError(ln, "unexpected record '" + tok[0] + "'");
    }
  }
  if (!lambda) throw ParseError(in.last_line(), "missing 'hst' header");
  if (!k) throw ParseError(in.last_line(), "missing 'k' record");
  inst.hst = build_hst(records, *lambda);
  inst.k = *k;

  std::set<int64_t> times;
  for (const auto& r : raw) {
    NodeId leaf = inst.hst.find(r.leaf);
    if (!inst.hst.is_leaf(leaf))
      throw ParseError(r.line, "request at internal node '" + r.leaf + "'");
    for (int64_t t : {r.b, r.e})
      if (!times.insert(t).second)
        throw DuplicateTime("line " + std::to_string(r.line) + ": time " +
                            std::to_string(t) + " is used twice");
    inst.requests.push_back({leaf, r.b, r.e});
  }
  std::sort(inst.requests.begin(), inst.requests.end(),
            [](const Request& a, const Request& b) { return a.b < b.b; });
  resolve_params(inst, inst.natural_mode());
  return inst;
}

std::string render_instance(const Instance& inst) {
  std::string out = render_hst(inst.hst);
  out += "k " + std::to_string(inst.k) + "\n";
  const auto& o = inst.overrides;
  auto param = [&](const char* name, const std::optional<double>& v) {
    if (v) out += std::string("param ") + name + " " + format_double(*v) + "\n";
  };
  param("delta_prime", o.delta_prime);
  param("delta", o.delta);
  param("gamma", o.gamma);
  param("M", o.m);
  if (o.count_dummies) out += std::string("param count_dummies ") + (*o.count_dummies ? "1" : "0") + "\n";
  for (const auto& r : inst.requests)
    out += "request " + inst.hst.node(r.leaf).name + " " + std::to_string(r.b) + " " +
           std::to_string(r.e) + "\n";
  return out;
}

std::string instance_digest(const Instance& inst) {
  return hex64(fnv1a64(render_instance(inst)));
}

WindowLaw WindowLaw::parse(std::string_view s) {
  auto num = [&](std::string_view t) {
    int64_t v = 0;
    auto [p, ec] = std::from_chars(t.data(), t.data() + t.size(), v);
    if (ec != std::errc() || p != t.data() + t.size() || v < 1)
      throw Error("bad window law '" + std::string(s) + "'");
    return v;
  };
  WindowLaw w;
  if (s.starts_with("const:")) {
    w.lo = w.hi = num(s.substr(6));
  } else if (s.starts_with("uniform:")) {
    auto rest = s.substr(8);
    auto colon = rest.find(':');
    if (colon == std::string_view::npos) throw Error("bad window law '" + std::string(s) + "'");
    w.lo = num(rest.substr(0, colon));
    w.hi = num(rest.substr(colon + 1));
    if (w.hi < w.lo) throw Error("bad window law '" + std::string(s) + "'");
  } else {
    throw Error("bad window law '" + std::string(s) + "'");
  }
  return w;
}

std::string WindowLaw::render() const {
  if (lo == hi) return "const:" + std::to_string(lo);
  return "uniform:" + std::to_string(lo) + ":" + std::to_string(hi);
}

Instance generate_random(const Hst& hst, int k, int num_requests,
                         const WindowLaw& law, uint64_t seed) {
  std::mt19937_64 rng(seed);
  const auto leaves = hst.real_leaves();
  if (leaves.empty()) throw MalformedTree("tree has no leaves");
  std::uniform_int_distribution<size_t> pick(0, leaves.size() - 1);
  std::uniform_int_distribution<int64_t> gap(2, 4);
  std::uniform_int_distribution<int64_t> width(law.lo, law.hi);
  Instance inst;
  inst.hst = hst;
  inst.k = k;
  std::vector<int64_t> arrivals;
  int64_t t = 1;
  for (int i = 0; i < num_requests; ++i) {
    arrivals.push_back(t);
    t += gap(rng);
  }
  std::set<int64_t> used(arrivals.begin(), arrivals.end());
  for (int64_t b : arrivals) {
    NodeId leaf = leaves[pick(rng)];
    int64_t e = b + width(rng);
    while (used.count(e)) ++e;
    used.insert(e);
    inst.requests.push_back({leaf, b, e});
  }
  return inst;
}

ParamOverrides scaled_overrides(const Instance& inst, Mode mode) {
  const Hst full = add_dummy_leaves(inst.hst, inst.k);
  const bool dummies = inst.overrides.count_dummies.value_or(true);
  const double n = dummies ? full.leaf_count() : full.real_leaf_count();
  ParamOverrides o = inst.overrides;
  o.delta_prime = 0.3;
  o.delta = 0.95 * 0.3 / (2.0 * n);
  o.gamma = *o.delta / 4.0;
  if (mode == Mode::kTimeWindows) o.gamma = std::min(*o.gamma, 0.3 / (n * leaf_aspect_ratio(full)));
  return o;
}

}  // namespace hstk
