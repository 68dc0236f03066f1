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

#include "hstk/trace.hpp"

#include <ostream>

#include "hstk/errors.hpp"
#include "hstk/textio.hpp"
#include "json.hpp"

namespace hstk {
namespace {

class Obj {
 public:
  explicit Obj(const char* ev) { out_ = "{\"ev\":\""; out_ += ev; out_ += '"'; }
  Obj& key(const char* k) {
    out_ += ",\"";
    out_ += k;
    out_ += "\":";
    return *this;
  }
  Obj& i(const char* k, int64_t v) { key(k); out_ += std::to_string(v); return *this; }
  Obj& d(const char* k, double v) { key(k); append_double(out_, v); return *this; }
  Obj& b(const char* k, bool v) { key(k); out_ += v ? "true" : "false"; return *this; }
  Obj& s(const char* k, std::string_view v) {
    key(k);
    out_ += '"';
    for (char c : v) {
      switch (c) {
        case '"': out_ += "\\\""; break;
        case '\\': out_ += "\\\\"; break;
        case '\n': out_ += "\\n"; break;
        case '\t': out_ += "\\t"; break;
        default:
          if (static_cast<unsigned char>(c) < 0x20) {
            char buf[8];
            snprintf(buf, sizeof buf, "\\u%04x", c);
            out_ += buf;
          } else {
            out_ += c;
          }
      }
    }
    out_ += '"';
    return *this;
  }
  Obj& t(const char* k, Timestep v) {
    key(k);
    out_ += '[' + std::to_string(v.q) + ',' + std::to_string(v.tick) + ']';
    return *this;
  }
  template <typename T>
  Obj& ints(const char* k, const std::vector<T>& v) {
    key(k);
    out_ += '[';
    for (size_t j = 0; j < v.size(); ++j) {
      if (j) out_ += ',';
      out_ += std::to_string(v[j]);
    }
    out_ += ']';
    return *this;
  }
  Obj& terms(const char* k, const std::vector<Term>& v) {
    key(k);
    out_ += '[';
    for (size_t j = 0; j < v.size(); ++j) {
      if (j) out_ += ',';
      const Term& x = v[j];
      out_ += '[' + std::to_string(x.u) + ',' + std::to_string(x.lo.q) + ',' +
              std::to_string(x.lo.tick) + ',' + std::to_string(x.hi.q) + ',' +
              std::to_string(x.hi.tick) + ']';
    }
    out_ += ']';
    return *this;
  }
  std::string done() { return out_ + "}"; }

 private:
  std::string out_;
};

struct Serializer {
  std::string operator()(const EvRunBegin& e) const {
    return Obj("run_begin").s("mode", mode_name(e.mode)).s("instance", e.instance)
        .d("delta_prime", e.delta_prime).d("delta", e.delta).d("gamma", e.gamma)
        .d("M", e.m).d("aspect", e.aspect).i("n", e.n).b("count_dummies", e.count_dummies)
        .done();
  }
  std::string operator()(const EvStep& e) const {
    return Obj("timestep_advanced").t("tau", e.tau).i("i0", e.i0).done();
  }
  std::string operator()(const EvRequest& e) const {
    return Obj("request").i("id", e.id).i("leaf", e.leaf).i("b", e.b).i("e", e.e)
        .d("mass", e.mass).done();
  }
  std::string operator()(const EvStepAdded& e) const {
    return Obj("step_added").i("v", e.v).t("tau", e.tau).b("solitary", e.solitary)
        .d("gamma", e.gamma).done();
  }
  std::string operator()(const EvConstraint& e) const {
    const Constraint& c = e.c;
    return Obj("constraint_added").i("id", c.id).i("owner", c.owner).t("tau", c.tau)
        .s("source", source_name(c.source)).b("bot", c.bot).d("rhs", c.rhs).d("z0", c.z)
        .i("req_leaf", c.req_leaf).i("req_b", c.req_b).ints("children", c.children)
        .terms("terms", c.terms).done();
  }
  std::string operator()(const EvDual& e) const {
    return Obj("dual_raised").i("cid", e.cid).d("dz", e.dz).done();
  }
  std::string operator()(const EvY& e) const {
    return Obj("y_raised").i("v", e.v).i("u", e.u).t("tau_u", e.tau_u).t("tau", e.tau)
        .d("ds", e.ds).d("dy", e.dy).i("count", e.count).done();
  }
  std::string operator()(const EvTransfer& e) const {
    return Obj("transfer").i("src", e.src).i("dst", e.dst).d("amount", e.amount)
        .s("attr", attribution_name(e.attr)).t("tau", e.tau).done();
  }
  std::string operator()(const EvDepleted& e) const {
    return Obj("depleted").i("cid", e.cid).done();
  }
  std::string operator()(const EvAwakeRemoved& e) const {
    return Obj("awake_removed").i("v", e.v).t("tau", e.tau).done();
  }
  std::string operator()(const EvCallBegin& e) const {
    return Obj("call_begin").s("proc", e.full ? "full" : "simple").i("v", e.v)
        .t("tau", e.tau).ints("picks", e.picks).d("xi", e.xi).done();
  }
  std::string operator()(const EvCallEnd& e) const {
    return Obj("call_end").s("proc", e.full ? "full" : "simple").i("v", e.v)
        .t("tau", e.tau).d("dual", e.dual).d("transferred", e.transferred)
        .d("topup", e.topup).done();
  }
  std::string operator()(const EvSaturated& e) const {
    return Obj("saturated").i("id", e.id).t("tau", e.tau).d("mass", e.mass).done();
  }
  std::string operator()(const EvCritical& e) const {
    return Obj("critical").i("id", e.id).i("q", e.q).d("cost", e.cost)
        .i("logcost", e.logcost).done();
  }
  std::string operator()(const EvBuildTree& e) const {
    return Obj("buildtree").i("q", e.q).ints("z", e.z).done();
  }
  std::string operator()(const EvSpawn& e) const {
    return Obj("spawn").i("v", e.v).i("w", e.w).i("q", e.q).ints("s", e.s).done();
  }
  std::string operator()(const EvFTree& e) const {
    return Obj("ftree").i("v", e.v).i("q", e.q).ints("nodes", e.nodes).d("cost", e.cost)
        .done();
  }
  std::string operator()(const EvWitnessNode& e) const {
    return Obj("witness_node").i("v", e.v).i("w", e.w).i("q", e.q).i("elr", e.elr)
        .i("elr_leaf", e.elr_leaf).i("elr_b", e.elr_b).i("elr_e", e.elr_e).done();
  }
  std::string operator()(const EvWitnessEdge& e) const {
    return Obj("witness_edge").i("v", e.v).i("w", e.w).i("q", e.q).i("child", e.child)
        .i("child_q", e.child_q).done();
  }
  std::string operator()(const EvPiggyback& e) const {
    return Obj("piggyback_served").i("q", e.q).ints("ids", e.ids).d("charge", e.charge)
        .done();
  }
  std::string operator()(const EvLoopEnd& e) const {
    return Obj("loop_end").i("id", e.id).i("iterations", e.iterations).done();
  }
  std::string operator()(const EvRunEnd& e) const {
    return Obj("run_end").d("movement", e.movement).d("piggyback", e.piggyback)
        .d("root_dual", e.root_dual).done();
  }
};

using nlohmann::json;

Timestep ts(const json& j) { return {j.at(0).get<int64_t>(), j.at(1).get<int64_t>()}; }

template <typename T>
std::vector<T> ints(const json& j) {
  std::vector<T> out;
  for (const auto& x : j) out.push_back(x.get<T>());
  return out;
}

Source parse_source(const std::string& s) {
  if (s == "initial") return Source::kInitial;
  if (s == "simple") return Source::kSimple;
  if (s == "full") return Source::kFull;
  throw Error("unknown constraint source '" + s + "'");
}

Attribution parse_attr(const std::string& s) {
  if (s == "loc") return Attribution::kLocal;
  if (s == "inh") return Attribution::kInherited;
  if (s == "top") return Attribution::kTopup;
  throw Error("unknown attribution '" + s + "'");
}

Event from_json(const json& j) {
  const std::string ev = j.at("ev").get<std::string>();
  auto D = [&](const char* k) { return j.at(k).get<double>(); };
  auto I = [&](const char* k) { return j.at(k).get<int64_t>(); };
  auto N = [&](const char* k) { return j.at(k).get<NodeId>(); };
  auto T = [&](const char* k) { return ts(j.at(k)); };
  if (ev == "run_begin") {
    EvRunBegin e;
    const std::string mode = j.at("mode").get<std::string>();
    if (mode != "kserver" && mode != "tw") throw Error("unknown mode '" + mode + "'");
    e.mode = mode == "kserver" ? Mode::kServer : Mode::kTimeWindows;
    e.instance = j.at("instance").get<std::string>();
    e.delta_prime = D("delta_prime"), e.delta = D("delta"), e.gamma = D("gamma");
    e.m = D("M"), e.aspect = D("aspect");
    e.n = static_cast<int>(I("n"));
    e.count_dummies = j.at("count_dummies").get<bool>();
    return e;
  }
  if (ev == "timestep_advanced") return EvStep{T("tau"), static_cast<int>(I("i0"))};
  if (ev == "request") return EvRequest{static_cast<int>(I("id")), N("leaf"), I("b"), I("e"), D("mass")};
  if (ev == "step_added") return EvStepAdded{N("v"), T("tau"), j.at("solitary").get<bool>(), D("gamma")};
  if (ev == "constraint_added") {
    EvConstraint e;
    Constraint& c = e.c;
    c.id = static_cast<int>(I("id"));
    c.owner = N("owner");
    c.tau = T("tau");
    c.source = parse_source(j.at("source").get<std::string>());
    c.bot = j.at("bot").get<bool>();
    c.rhs = D("rhs");
    c.z = D("z0");
    c.req_leaf = N("req_leaf");
    c.req_b = I("req_b");
    c.children = ints<int>(j.at("children"));
    for (const auto& t : j.at("terms"))
      c.terms.push_back({t.at(0).get<NodeId>(), {t.at(1).get<int64_t>(), t.at(2).get<int64_t>()},
                         {t.at(3).get<int64_t>(), t.at(4).get<int64_t>()}});
    return e;
  }
  if (ev == "dual_raised") return EvDual{static_cast<int>(I("cid")), D("dz")};
  if (ev == "y_raised")
    return EvY{N("v"), N("u"), T("tau_u"), T("tau"), D("ds"), D("dy"), static_cast<int>(I("count"))};
  if (ev == "transfer")
    return EvTransfer{N("src"), N("dst"), D("amount"), parse_attr(j.at("attr").get<std::string>()), T("tau")};
  if (ev == "depleted") return EvDepleted{static_cast<int>(I("cid"))};
  if (ev == "awake_removed") return EvAwakeRemoved{N("v"), T("tau")};
  if (ev == "call_begin")
    return EvCallBegin{j.at("proc").get<std::string>() == "full", N("v"), T("tau"),
                       ints<NodeId>(j.at("picks")), D("xi")};
  if (ev == "call_end")
    return EvCallEnd{j.at("proc").get<std::string>() == "full", N("v"), T("tau"), D("dual"),
                     D("transferred"), D("topup")};
  if (ev == "saturated") return EvSaturated{static_cast<int>(I("id")), T("tau"), D("mass")};
  if (ev == "critical")
    return EvCritical{static_cast<int>(I("id")), I("q"), D("cost"), static_cast<int>(I("logcost"))};
  if (ev == "buildtree") return EvBuildTree{I("q"), ints<NodeId>(j.at("z"))};
  if (ev == "spawn") return EvSpawn{N("v"), N("w"), I("q"), ints<NodeId>(j.at("s"))};
  if (ev == "ftree") return EvFTree{N("v"), I("q"), ints<NodeId>(j.at("nodes")), D("cost")};
  if (ev == "witness_node")
    return EvWitnessNode{N("v"), N("w"), I("q"), static_cast<int>(I("elr")), N("elr_leaf"),
                         I("elr_b"), I("elr_e")};
  if (ev == "witness_edge") return EvWitnessEdge{N("v"), N("w"), I("q"), N("child"), I("child_q")};
  if (ev == "piggyback_served") return EvPiggyback{I("q"), ints<int>(j.at("ids")), D("charge")};
  if (ev == "loop_end") return EvLoopEnd{static_cast<int>(I("id")), I("iterations")};
  if (ev == "run_end") return EvRunEnd{D("movement"), D("piggyback"), D("root_dual")};
  throw Error("unknown event '" + ev + "'");
}

}  // namespace

std::string serialize(const Event& ev) { return std::visit(Serializer{}, ev); }

Event parse_event(std::string_view line, int line_no) {
  try {
    return from_json(json::parse(line));
  } catch (const json::exception& e) {
    throw ParseError(line_no, std::string("bad trace record: ") + e.what());
  } catch (const ParseError&) {
    throw;
  } catch (const Error& e) {
    throw ParseError(line_no, e.what());
  }
}

void TraceWriter::emit(const Event& ev) {
  std::string line = serialize(ev);
  line += '\n';
  digest_ = fnv1a64(line, digest_);
  ++count_;
  if (out_) out_->write(line.data(), static_cast<std::streamsize>(line.size()));
}

}  // namespace hstk
