// Copyright 2026 The stylescene Authors
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

#include <benchmark/benchmark.h>

#include <string>

#include "stylescene/embedding.hpp"
#include "stylescene/fsm.hpp"
#include "stylescene/planner.hpp"
#include "stylescene/synthetic.hpp"

namespace stylescene {
namespace {

void BM_Episode(benchmark::State& state) {
  const KinematicRuntime rt;
  const Scene scene = synthetic_apartment();
  const ScriptDatabase db = build_database(
      load_short_scripts(std::string(STYLESCENE_DATA_DIR) + "/example_scripts.json"), rt.text);
  const LongScript script = plan(db, "a relaxed afternoon", scene, rt.text, nullptr, PlanOptions{});
  EpisodeConfig cfg;
  cfg.horizon = 20000;
  std::uint64_t seed = 0;
  std::int64_t ticks = 0;
  for (auto _ : state) {
    const auto trace = run_episode(scene, script, cfg, rt.view(), seed++);
    ticks += trace.ticks();
  }
  state.counters["ticks/s"] = benchmark::Counter(static_cast<double>(ticks),
                                                 benchmark::Counter::kIsRate);
}
BENCHMARK(BM_Episode)->Unit(benchmark::kMillisecond);

}  // namespace
}  // namespace stylescene
