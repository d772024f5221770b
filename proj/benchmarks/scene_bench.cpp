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

#include "stylescene/rng.hpp"
#include "stylescene/scene.hpp"
#include "stylescene/synthetic.hpp"

namespace stylescene {
namespace {

void BM_Heightmap(benchmark::State& state) {
  const Scene scene = synthetic_apartment();
  Rng rng(3);
  for (auto _ : state) {
    const Vec2 root(rng.uniform(0.5, 5.5), rng.uniform(0.5, 4.5));
    benchmark::DoNotOptimize(compute_heightmap(scene, root, rng.uniform(-3, 3)));
  }
}
BENCHMARK(BM_Heightmap);

PointCloud random_cloud(std::size_t n) {
  Rng rng(21);
  PointCloud pts(n);
  for (auto& p : pts) p = Vec3(rng.uniform(-5, 5), rng.uniform(-5, 5), rng.uniform(0, 2));
  return pts;
}

void BM_NearestQuery(benchmark::State& state) {
  const SurfacePart part(random_cloud(static_cast<std::size_t>(state.range(0))));
  Rng rng(8);
  for (auto _ : state) {
    const Vec3 q(rng.uniform(-6, 6), rng.uniform(-6, 6), rng.uniform(-1, 3));
    benchmark::DoNotOptimize(part.nearest(q));
  }
}
BENCHMARK(BM_NearestQuery)->Arg(1000)->Arg(100000);

void BM_NearestBuild(benchmark::State& state) {
  const PointCloud pts = random_cloud(100000);
  for (auto _ : state) {
    const SurfacePart part(pts);
    benchmark::DoNotOptimize(part.size());
  }
}
BENCHMARK(BM_NearestBuild)->Unit(benchmark::kMillisecond);

}  // namespace
}  // namespace stylescene
