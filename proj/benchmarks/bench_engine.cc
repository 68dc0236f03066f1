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


// Wall-clock profile of the hot paths at desk scale. Iteration counts are
// data, so each benchmark also reports them as counters.

#include <benchmark/benchmark.h>

#include <vector>

#include "hstk/audit.hpp"
#include "hstk/engine.hpp"
#include "hstk/hst.hpp"
#include "hstk/instance.hpp"
#include "hstk/oracle.hpp"
#include "hstk/trace.hpp"

namespace hstk {
namespace {

Instance make(int leaves, int height, double lambda, int k, int requests, const char* law,
              uint64_t seed) {
  Instance inst = generate_random(balanced_hst(leaves, height, lambda), k, requests,
                                  WindowLaw::parse(law), seed);
  inst.overrides = scaled_overrides(inst, inst.natural_mode());
  return inst;
}

// Args: leaves, height, k, requests.
void BM_KServer(benchmark::State& st) {
  const Instance inst = make(st.range(0), st.range(1), 20, st.range(2), st.range(3), "const:1", 7);
  int64_t iters = 0;
  for (auto _ : st) {
    RunResult r = run_algorithm(inst, Mode::kServer);
    iters = r.iterations;
    benchmark::DoNotOptimize(r.movement);
  }
  st.counters["loop_iterations"] = static_cast<double>(iters);
}
BENCHMARK(BM_KServer)
    ->Args({4, 1, 1, 10})
    ->Args({8, 1, 3, 30})
    ->Args({8, 2, 2, 6})
    ->Unit(benchmark::kMillisecond);

void BM_KServerTw(benchmark::State& st) {
  const Instance inst =
      make(st.range(0), st.range(1), 20, st.range(2), st.range(3), "uniform:2:6", 7);
  int64_t iters = 0;
  for (auto _ : st) {
    RunResult r = run_algorithm(inst, Mode::kTimeWindows);
    iters = r.iterations;
    benchmark::DoNotOptimize(r.movement);
  }
  st.counters["loop_iterations"] = static_cast<double>(iters);
}
BENCHMARK(BM_KServerTw)->Args({6, 1, 1, 12})->Args({4, 2, 1, 4})->Unit(benchmark::kMillisecond);

// Engine plus trace serialization plus the replaying auditor.
void BM_AuditedRun(benchmark::State& st) {
  const Instance inst = make(6, 1, 20, 2, 20, "const:1", 11);
  int64_t events = 0;
  for (auto _ : st) {
    Auditor auditor;
    TraceWriter writer;
    TeeSink tee;
    tee.add(&auditor);
    tee.add(&writer);
    RunOptions opts;
    opts.sink = &tee;
    run_algorithm(inst, Mode::kServer, opts);
    AuditReport rep = auditor.finish();
    events = writer.count();
    benchmark::DoNotOptimize(rep.beta_measured);
  }
  st.counters["events"] = static_cast<double>(events);
}
BENCHMARK(BM_AuditedRun)->Unit(benchmark::kMillisecond);

void BM_FlowOracle(benchmark::State& st) {
  const Instance inst = make(8, 2, 20, 3, st.range(0), "const:1", 5);
  for (auto _ : st) benchmark::DoNotOptimize(opt_kserver(inst, OptPrefix::kDummyTour).cost);
}
BENCHMARK(BM_FlowOracle)->Arg(10)->Arg(30)->Unit(benchmark::kMillisecond);

void BM_GatherFlow(benchmark::State& st) {
  const Hst hst = add_dummy_leaves(balanced_hst(8, 2, 20), 2);
  std::vector<double> mass(hst.size(), 0.0);
  for (NodeId l : hst.leaves()) mass[l] = hst.node(l).is_dummy ? 0.5 : 0.01;
  const NodeId target = hst.real_leaves().front();
  for (auto _ : st)
    benchmark::DoNotOptimize(gather_cost_flow(hst, mass, target, 0.3, 0.01, 0.0025));
}
BENCHMARK(BM_GatherFlow);

}  // namespace
}  // namespace hstk

BENCHMARK_MAIN();
