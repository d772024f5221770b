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
#include <vector>

#include "stylescene/embedding.hpp"
#include "stylescene/planner.hpp"
#include "stylescene/scriptdb.hpp"
#include "stylescene/synthetic.hpp"

namespace stylescene {
namespace {

void BM_Retrieve(benchmark::State& state) {
  const TestEmbedder e(64, 1);
  const ScriptDatabase db =
      build_database(random_short_scripts(static_cast<std::size_t>(state.range(0)), 2), e);
  const EmbeddingVector query = normalize(e.embed("a quiet evening at home"));
  const std::vector<StyleLabel> styles = {StyleLabel::kRelaxed, StyleLabel::kTired};
  for (auto _ : state) benchmark::DoNotOptimize(retrieve(db, query, styles, 5));
}
BENCHMARK(BM_Retrieve)->Arg(1000)->Arg(10000);

void BM_Plan(benchmark::State& state) {
  const TestEmbedder e;
  const ScriptDatabase db = build_database(
      load_short_scripts(std::string(STYLESCENE_DATA_DIR) + "/example_scripts.json"), e);
  const Scene scene = synthetic_apartment();
  for (auto _ : state)
    benchmark::DoNotOptimize(plan(db, "a relaxed afternoon", scene, e, nullptr, PlanOptions{}));
}
BENCHMARK(BM_Plan);

}  // namespace
}  // namespace stylescene
