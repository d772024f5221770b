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

#include <cmath>
#include <cstring>

#include "stylescene/scene.hpp"

namespace stylescene {

std::uint64_t HeightmapObservation::hash() const {
  std::uint64_t h = 0xCBF29CE484222325ULL;
  for (double v : grid) {
    std::uint64_t bits;
    std::memcpy(&bits, &v, sizeof bits);
    for (int b = 0; b < 8; ++b) {
      h ^= (bits >> (8 * b)) & 0xFF;
      h *= 0x100000001B3ULL;
    }
  }
  return h;
}

HeightmapObservation compute_heightmap(const Scene& scene, const Vec2& root,
                                       double yaw,
                                       std::span<const ObjectDisplacement> displaced,
                                       double gating) {
  using H = HeightmapObservation;
  H out;
  out.origin = root;
  out.yaw = yaw;

  const auto& objects = scene.objects();
  std::vector<Vec3> offset(objects.size(), Vec3::Zero());
  std::vector<char> moved(objects.size(), 0);
  for (const auto& d : displaced) {
    if (d.object < objects.size()) {
      offset[d.object] = d.offset;
      moved[d.object] = 1;
    }
  }
  std::vector<char> gated(objects.size(), 0);
  bool any = false;
  for (std::size_t i = 0; i < objects.size(); ++i) {
    const Vec2 c = (objects[i].aabb.center() + offset[i]).head<2>();
    gated[i] = (c - root).norm() <= gating;
    any = any || gated[i];
  }
  if (!any) return out;

  const double c = std::cos(yaw);
  const double s = std::sin(yaw);
  constexpr double kHalf = 0.5 * H::kSize;
  const auto splat = [&](const Vec3& p) {
    const double dx = p.x() - root.x();
    const double dy = p.y() - root.y();
    const double lx = c * dx + s * dy;
    const double ly = -s * dx + c * dy;
    const double fi = std::floor(lx / H::kCellSize + kHalf);
    const double fj = std::floor(ly / H::kCellSize + kHalf);
    if (fi < 0.0 || fj < 0.0 || fi >= H::kSize || fj >= H::kSize) return;
    double& cell = out.grid[static_cast<std::size_t>(fi) * H::kSize +
                            static_cast<std::size_t>(fj)];
    if (p.z() > cell) cell = p.z();
  };

  // Every sample within the rotated grid lies inside this radius.
  const double reach = kHalf * H::kCellSize * std::sqrt(2.0) + 1e-9;
  const Vec2 lo = root.array() - reach;
  const Vec2 hi = root.array() + reach;
  scene.index().for_each_in_rect(lo, hi, [&](const SpatialGrid::Entry& e) {
    if (gated[e.object] && !moved[e.object]) splat(e.point);
  });
  for (std::size_t i = 0; i < objects.size(); ++i) {
    if (!moved[i] || !gated[i]) continue;
    for (const auto& p : scene.indexed_points(i)) splat(p + offset[i]);
  }
  return out;
}

}  // namespace stylescene
