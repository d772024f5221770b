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

#ifndef STYLESCENE_SCENE_HPP_
#define STYLESCENE_SCENE_HPP_

#include <algorithm>
#include <array>
#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Core>
#include <nlohmann/json_fwd.hpp>

#include "stylescene/rng.hpp"

namespace stylescene {

// World frame: meters, z up, ground plane at z = 0.
using Vec2 = Eigen::Vector2d;
using Vec3 = Eigen::Vector3d;
using PointCloud = std::vector<Vec3>;

inline constexpr double kDefaultVoxelSize = 0.10;

struct Aabb {
  Vec3 min = Vec3::Zero();
  Vec3 max = Vec3::Zero();

  bool valid() const { return (min.array() <= max.array()).all(); }
  Vec3 center() const { return 0.5 * (min + max); }
  Vec3 extent() const { return max - min; }
  Aabb inflated(double margin) const {
    return {min.array() - margin, max.array() + margin};
  }
  Aabb translated(const Vec3& offset) const { return {min + offset, max + offset}; }
  bool contains(const Vec3& p, double tol = 0.0) const;
  // x varies fastest, then y, then z.
  std::array<Vec3, 8> corners() const;
};

// Planar distance from p to the AABB's ground footprint (0 inside).
double footprint_distance(const Aabb& box, const Vec2& p);

// Centers of the boundary voxels of `box`, ordered by x, then y, then z
// (x fastest). Each axis is split into max(1, ceil(extent / voxel_size))
// equal cells, so cells never exceed voxel_size and a degenerate axis yields
// a single layer on that coordinate.
PointCloud voxelize_box(const Aabb& box, double voxel_size);

struct NearestPoint {
  Vec3 point;
  double distance = 0.0;
  std::size_t index = 0;
};

// Labeled interactable point set with a k-d tree for exact nearest queries.
class SurfacePart {
 public:
  SurfacePart() = default;
  explicit SurfacePart(PointCloud points);

  const PointCloud& points() const { return points_; }
  bool empty() const { return points_.empty(); }
  std::size_t size() const { return points_.size(); }

  // Exact Euclidean nearest; ties resolve to the lowest index. Throws
  // ValidationError on an empty part.
  NearestPoint nearest(const Vec3& q) const;

 private:
  struct Node {
    std::uint32_t begin, end;  // range into order_
    std::int32_t left = -1, right = -1;
    std::uint8_t axis = 0;
    double split = 0.0;
    Vec3 lo, hi;  // bounds of the points in this node
  };

  std::int32_t build(std::uint32_t begin, std::uint32_t end);
  void search(std::int32_t node, const Vec3& q, double& best_d2,
              std::size_t& best) const;

  PointCloud points_;
  std::vector<std::uint32_t> order_;
  std::vector<Node> nodes_;
};

NearestPoint nearest_surface_point(const SurfacePart& part, const Vec3& q);

inline constexpr const char* kSurfacePart = "surface";

struct SceneObject {
  std::string id;
  std::string category;
  std::string room;
  bool dynamic = false;
  Vec3 position = Vec3::Zero();  // pose (x, y, yaw) or dynamic root (x, y, z)
  double yaw = 0.0;
  Aabb aabb;  // world frame
  // Always holds kSurfacePart (all geometry points, world frame).
  std::map<std::string, SurfacePart> parts;

  const SurfacePart& part(const std::string& label) const;
};

struct GroundRect {
  Vec2 min = Vec2(-5.0, -5.0);
  Vec2 max = Vec2(5.0, 5.0);
};

// Uniform 2D grid (columns) over every indexed surface point.
class SpatialGrid {
 public:
  struct Entry {
    Vec3 point;
    std::uint32_t object;
  };

  static constexpr double kCellSize = 0.5;

  SpatialGrid() = default;
  explicit SpatialGrid(std::vector<Entry> entries);

  std::size_t size() const { return entries_.size(); }
  const std::vector<Entry>& entries() const { return entries_; }

  template <typename F>
  void for_each_in_rect(const Vec2& lo, const Vec2& hi, F&& f) const {
    if (entries_.empty()) return;
    const int x0 = std::max(0, cell_x(lo.x()));
    const int x1 = std::min(nx_ - 1, cell_x(hi.x()));
    const int y0 = std::max(0, cell_y(lo.y()));
    const int y1 = std::min(ny_ - 1, cell_y(hi.y()));
    for (int y = y0; y <= y1; ++y) {
      for (int x = x0; x <= x1; ++x) {
        const std::size_t c = static_cast<std::size_t>(y) * nx_ + x;
        for (std::uint32_t k = offsets_[c]; k < offsets_[c + 1]; ++k) {
          f(entries_[k]);
        }
      }
    }
  }

 private:
  int cell_x(double x) const;
  int cell_y(double y) const;

  std::vector<Entry> entries_;  // sorted by cell
  std::vector<std::uint32_t> offsets_;
  Vec2 origin_ = Vec2::Zero();
  int nx_ = 0;
  int ny_ = 0;
};

// Immutable after construction; shared read-only across episodes. Dynamic
// object poses during an episode live in episode state, not here.
class Scene {
 public:
  Scene() = default;
  Scene(std::vector<SceneObject> objects, std::optional<GroundRect> bounds,
        double voxel_size = kDefaultVoxelSize);

  const std::vector<SceneObject>& objects() const { return objects_; }
  const SceneObject* find(const std::string& id) const;
  std::optional<std::size_t> index_of(const std::string& id) const;
  const GroundRect& bounds() const { return bounds_; }
  double voxel_size() const { return voxel_size_; }
  const SpatialGrid& index() const { return index_; }
  // Union of every part point of object i (world frame).
  const PointCloud& indexed_points(std::size_t i) const { return indexed_[i]; }
  bool has_category(const std::string& category) const;

 private:
  std::vector<SceneObject> objects_;
  std::vector<PointCloud> indexed_;
  GroundRect bounds_;
  double voxel_size_ = kDefaultVoxelSize;
  SpatialGrid index_;
};

inline constexpr int kSceneSchemaVersion = 1;

// Parses the scene JSON schema. Diagnostics carry JSON paths such as
// "objects[2].pose.yaw". Relative PLY paths resolve against `base_dir`.
Scene scene_from_json(const nlohmann::json& j,
                      const std::filesystem::path& base_dir = {});
Scene load_scene(const std::filesystem::path& path);

// Vertex positions from an ASCII PLY file.
PointCloud load_ascii_ply(const std::filesystem::path& path);

struct Spawn {
  Vec2 position = Vec2::Zero();
  double yaw = 0.0;
};

// Rejection-samples the ground rectangle until a disk of radius `clearance`
// touches no object footprint. Throws InfeasibleError("scene too crowded")
// after `max_attempts` rejections.
Spawn sample_spawn(const Scene& scene, Rng& rng, double clearance,
                   int max_attempts = 10000);

// Rigid translation of a dynamic object away from its scene pose.
struct ObjectDisplacement {
  std::size_t object = 0;
  Vec3 offset = Vec3::Zero();
};

struct HeightmapObservation {
  static constexpr int kSize = 12;
  static constexpr int kCells = kSize * kSize;
  static constexpr double kCellSize = 0.15;

  // Row i runs along the facing direction, column j along the left side;
  // flattened row-major. Heights in meters above ground, never negative.
  std::array<double, kCells> grid{};
  Vec2 origin = Vec2::Zero();
  double yaw = 0.0;

  double at(int i, int j) const { return grid[static_cast<std::size_t>(i * kSize + j)]; }
  std::uint64_t hash() const;
};

inline constexpr double kDefaultHeightmapGating = 2.0;

// Egocentric max-height grid centered on `root`, rotated to `yaw`. Only
// objects whose AABB centroid lies within `gating` meters (planar) of the
// root contribute.
HeightmapObservation compute_heightmap(
    const Scene& scene, const Vec2& root, double yaw,
    std::span<const ObjectDisplacement> displaced = {},
    double gating = kDefaultHeightmapGating);

}  // namespace stylescene

#endif  // STYLESCENE_SCENE_HPP_
