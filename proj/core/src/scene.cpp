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

#include "stylescene/scene.hpp"

#include <cmath>
#include <fstream>
#include <limits>
#include <numbers>
#include <sstream>

#include <nlohmann/json.hpp>

#include "stylescene/error.hpp"

namespace stylescene {
namespace {

using nlohmann::json;

double squared_distance(const Vec3& a, const Vec3& b) {
  const double dx = a.x() - b.x();
  const double dy = a.y() - b.y();
  const double dz = a.z() - b.z();
  return dx * dx + dy * dy + dz * dz;
}

int cell_count(double extent, double voxel) {
  if (extent <= 0.0) return 1;
  return std::max(1, static_cast<int>(std::ceil(extent / voxel - 1e-9)));
}

bool lex_less(const Vec3& a, const Vec3& b) {
  if (a.x() != b.x()) return a.x() < b.x();
  if (a.y() != b.y()) return a.y() < b.y();
  return a.z() < b.z();
}

// --- JSON helpers with path diagnostics -----------------------------------

[[noreturn]] void schema_error(const std::string& path, const std::string& msg) {
  throw ValidationError("scene schema: " + path + ": " + msg);
}

double get_number(const json& j, const char* key, const std::string& path) {
  const auto it = j.find(key);
  if (it == j.end()) schema_error(path + "." + key, "required");
  if (!it->is_number()) schema_error(path + "." + key, "expected number");
  return it->get<double>();
}

Vec3 get_vec3(const json& j, const std::string& path) {
  if (!j.is_array() || j.size() != 3) schema_error(path, "expected [x, y, z]");
  Vec3 v;
  for (int i = 0; i < 3; ++i) {
    if (!j[i].is_number()) schema_error(path + "[" + std::to_string(i) + "]", "expected number");
    v[i] = j[i].get<double>();
  }
  return v;
}

Vec2 get_vec2(const json& j, const std::string& path) {
  if (!j.is_array() || j.size() != 2) schema_error(path, "expected [x, y]");
  if (!j[0].is_number() || !j[1].is_number()) schema_error(path, "expected numbers");
  return {j[0].get<double>(), j[1].get<double>()};
}

Aabb get_box(const json& j, const std::string& path) {
  if (!j.is_object()) schema_error(path, "expected {min, max}");
  if (!j.contains("min")) schema_error(path + ".min", "required");
  if (!j.contains("max")) schema_error(path + ".max", "required");
  Aabb box{get_vec3(j["min"], path + ".min"), get_vec3(j["max"], path + ".max")};
  if (!box.valid()) schema_error(path, "min exceeds max");
  return box;
}

PointCloud get_points(const json& j, const std::string& path) {
  if (!j.is_array()) schema_error(path, "expected array of [x, y, z]");
  PointCloud out;
  out.reserve(j.size());
  for (std::size_t i = 0; i < j.size(); ++i) {
    out.push_back(get_vec3(j[i], path + "[" + std::to_string(i) + "]"));
  }
  return out;
}

struct Placement {
  Vec3 position;
  double yaw;

  Vec3 apply(const Vec3& local) const {
    const double c = std::cos(yaw), s = std::sin(yaw);
    return {position.x() + c * local.x() - s * local.y(),
            position.y() + s * local.x() + c * local.y(),
            position.z() + local.z()};
  }
};

}  // namespace

bool Aabb::contains(const Vec3& p, double tol) const {
  return (p.array() >= min.array() - tol).all() &&
         (p.array() <= max.array() + tol).all();
}

std::array<Vec3, 8> Aabb::corners() const {
  std::array<Vec3, 8> out;
  for (int k = 0; k < 8; ++k) {
    out[k] = Vec3((k & 1) ? max.x() : min.x(), (k & 2) ? max.y() : min.y(),
                  (k & 4) ? max.z() : min.z());
  }
  return out;
}

double footprint_distance(const Aabb& box, const Vec2& p) {
  const double dx = std::max({box.min.x() - p.x(), 0.0, p.x() - box.max.x()});
  const double dy = std::max({box.min.y() - p.y(), 0.0, p.y() - box.max.y()});
  return std::sqrt(dx * dx + dy * dy);
}

PointCloud voxelize_box(const Aabb& box, double voxel_size) {
  if (!(voxel_size > 0.0)) throw ValidationError("voxel_size must be positive");
  if (!box.valid()) throw ValidationError("invalid AABB");
  const Vec3 ext = box.extent();
  const int n[3] = {cell_count(ext.x(), voxel_size), cell_count(ext.y(), voxel_size),
                    cell_count(ext.z(), voxel_size)};
  const Vec3 step(ext.x() / n[0], ext.y() / n[1], ext.z() / n[2]);
  PointCloud out;
  for (int k = 0; k < n[2]; ++k) {
    const bool kb = k == 0 || k == n[2] - 1;
    for (int j = 0; j < n[1]; ++j) {
      const bool jb = j == 0 || j == n[1] - 1;
      for (int i = 0; i < n[0]; ++i) {
        const bool ib = i == 0 || i == n[0] - 1;
        if (!(ib || jb || kb)) continue;
        out.emplace_back(box.min.x() + (i + 0.5) * step.x(),
                         box.min.y() + (j + 0.5) * step.y(),
                         box.min.z() + (k + 0.5) * step.z());
      }
    }
  }
  return out;
}

// --- SurfacePart -----------------------------------------------------------

SurfacePart::SurfacePart(PointCloud points) : points_(std::move(points)) {
  if (points_.size() >= std::numeric_limits<std::uint32_t>::max()) {
    throw ValidationError("part too large");
  }
  order_.resize(points_.size());
  for (std::uint32_t i = 0; i < order_.size(); ++i) order_[i] = i;
  if (!points_.empty()) {
    nodes_.reserve(2 * points_.size() / 8 + 2);
    build(0, static_cast<std::uint32_t>(points_.size()));
  }
}

std::int32_t SurfacePart::build(std::uint32_t begin, std::uint32_t end) {
  constexpr std::uint32_t kLeafSize = 8;
  Node node;
  node.begin = begin;
  node.end = end;
  node.lo = Vec3::Constant(std::numeric_limits<double>::infinity());
  node.hi = -node.lo;
  for (std::uint32_t k = begin; k < end; ++k) {
    node.lo = node.lo.cwiseMin(points_[order_[k]]);
    node.hi = node.hi.cwiseMax(points_[order_[k]]);
  }
  const auto id = static_cast<std::int32_t>(nodes_.size());
  nodes_.push_back(node);
  if (end - begin <= kLeafSize) return id;

  Eigen::Index axis = 0;
  (node.hi - node.lo).maxCoeff(&axis);
  const std::uint32_t mid = begin + (end - begin) / 2;
  std::nth_element(order_.begin() + begin, order_.begin() + mid,
                   order_.begin() + end, [&](std::uint32_t a, std::uint32_t b) {
                     return points_[a][axis] < points_[b][axis];
                   });
  const std::int32_t left = build(begin, mid);
  const std::int32_t right = build(mid, end);
  nodes_[id].left = left;
  nodes_[id].right = right;
  nodes_[id].axis = static_cast<std::uint8_t>(axis);
  nodes_[id].split = points_[order_[mid]][axis];
  return id;
}

void SurfacePart::search(std::int32_t id, const Vec3& q, double& best_d2,
                         std::size_t& best) const {
  const Node& node = nodes_[static_cast<std::size_t>(id)];
  double lb = 0.0;
  for (int a = 0; a < 3; ++a) {
    const double d = std::max({node.lo[a] - q[a], 0.0, q[a] - node.hi[a]});
    lb += d * d;
  }
  // Equal bounds may still hide a lower-index tie.
  if (lb > best_d2) return;
  if (node.left < 0) {
    for (std::uint32_t k = node.begin; k < node.end; ++k) {
      const std::uint32_t idx = order_[k];
      const double d2 = squared_distance(points_[idx], q);
      if (d2 < best_d2 || (d2 == best_d2 && idx < best)) {
        best_d2 = d2;
        best = idx;
      }
    }
    return;
  }
  const bool go_left_first = q[node.axis] < node.split;
  search(go_left_first ? node.left : node.right, q, best_d2, best);
  search(go_left_first ? node.right : node.left, q, best_d2, best);
}

NearestPoint SurfacePart::nearest(const Vec3& q) const {
  if (points_.empty()) throw ValidationError("nearest point query on empty part");
  double best_d2 = std::numeric_limits<double>::infinity();
  std::size_t best = std::numeric_limits<std::size_t>::max();
  search(0, q, best_d2, best);
  return {points_[best], std::sqrt(best_d2), best};
}

NearestPoint nearest_surface_point(const SurfacePart& part, const Vec3& q) {
  return part.nearest(q);
}

const SurfacePart& SceneObject::part(const std::string& label) const {
  const auto it = parts.find(label);
  if (it == parts.end()) {
    throw ValidationError("object " + id + " has no part '" + label + "'");
  }
  return it->second;
}

// --- SpatialGrid -----------------------------------------------------------

SpatialGrid::SpatialGrid(std::vector<Entry> entries) {
  if (entries.empty()) return;
  Vec2 lo(std::numeric_limits<double>::infinity(), std::numeric_limits<double>::infinity());
  Vec2 hi = -lo;
  for (const auto& e : entries) {
    lo = lo.cwiseMin(e.point.head<2>());
    hi = hi.cwiseMax(e.point.head<2>());
  }
  origin_ = lo;
  nx_ = static_cast<int>(std::floor((hi.x() - lo.x()) / kCellSize)) + 1;
  ny_ = static_cast<int>(std::floor((hi.y() - lo.y()) / kCellSize)) + 1;
  const std::size_t cells = static_cast<std::size_t>(nx_) * ny_;
  offsets_.assign(cells + 1, 0);
  std::vector<std::uint32_t> cell_of(entries.size());
  for (std::size_t k = 0; k < entries.size(); ++k) {
    const int cx = std::clamp(cell_x(entries[k].point.x()), 0, nx_ - 1);
    const int cy = std::clamp(cell_y(entries[k].point.y()), 0, ny_ - 1);
    cell_of[k] = static_cast<std::uint32_t>(cy * nx_ + cx);
    ++offsets_[cell_of[k] + 1];
  }
  for (std::size_t c = 0; c < cells; ++c) offsets_[c + 1] += offsets_[c];
  entries_.resize(entries.size());
  std::vector<std::uint32_t> cursor(offsets_.begin(), offsets_.end() - 1);
  for (std::size_t k = 0; k < entries.size(); ++k) {
    entries_[cursor[cell_of[k]]++] = entries[k];
  }
}

int SpatialGrid::cell_x(double x) const {
  const double c = std::floor((x - origin_.x()) / kCellSize);
  return static_cast<int>(std::clamp(c, -1.0, static_cast<double>(nx_)));
}

int SpatialGrid::cell_y(double y) const {
  const double c = std::floor((y - origin_.y()) / kCellSize);
  return static_cast<int>(std::clamp(c, -1.0, static_cast<double>(ny_)));
}

// --- Scene -----------------------------------------------------------------

Scene::Scene(std::vector<SceneObject> objects, std::optional<GroundRect> bounds,
             double voxel_size)
    : objects_(std::move(objects)), voxel_size_(voxel_size) {
  if (!(voxel_size_ > 0.0)) throw ValidationError("voxel_size must be positive");
  std::vector<SpatialGrid::Entry> entries;
  indexed_.reserve(objects_.size());
  for (std::size_t i = 0; i < objects_.size(); ++i) {
    PointCloud all;
    for (const auto& [label, part] : objects_[i].parts) {
      all.insert(all.end(), part.points().begin(), part.points().end());
    }
    std::sort(all.begin(), all.end(), lex_less);
    all.erase(std::unique(all.begin(), all.end()), all.end());
    for (const auto& p : all) {
      entries.push_back({p, static_cast<std::uint32_t>(i)});
    }
    indexed_.push_back(std::move(all));
  }
  index_ = SpatialGrid(std::move(entries));

  if (bounds) {
    bounds_ = *bounds;
  } else if (!objects_.empty()) {
    Vec2 lo = objects_.front().aabb.min.head<2>();
    Vec2 hi = objects_.front().aabb.max.head<2>();
    for (const auto& o : objects_) {
      lo = lo.cwiseMin(o.aabb.min.head<2>());
      hi = hi.cwiseMax(o.aabb.max.head<2>());
    }
    bounds_ = {lo.array() - 1.0, hi.array() + 1.0};
  }
  if (!(bounds_.min.array() < bounds_.max.array()).all()) {
    throw ValidationError("scene bounds are empty");
  }
}

const SceneObject* Scene::find(const std::string& id) const {
  const auto i = index_of(id);
  return i ? &objects_[*i] : nullptr;
}

std::optional<std::size_t> Scene::index_of(const std::string& id) const {
  for (std::size_t i = 0; i < objects_.size(); ++i) {
    if (objects_[i].id == id) return i;
  }
  return std::nullopt;
}

bool Scene::has_category(const std::string& category) const {
  return std::any_of(objects_.begin(), objects_.end(),
                     [&](const SceneObject& o) { return o.category == category; });
}

PointCloud load_ascii_ply(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path.string());
  std::string line;
  if (!std::getline(in, line) || line.rfind("ply", 0) != 0) {
    throw ValidationError(path.string() + ": not a PLY file");
  }
  std::size_t vertices = 0;
  bool ascii = false;
  std::vector<std::string> props;
  bool in_vertex = false;
  while (std::getline(in, line)) {
    std::istringstream ss(line);
    std::string tok;
    ss >> tok;
    if (tok == "format") {
      std::string fmt;
      ss >> fmt;
      ascii = fmt == "ascii";
    } else if (tok == "element") {
      std::string name;
      ss >> name;
      in_vertex = name == "vertex";
      if (in_vertex) ss >> vertices;
    } else if (tok == "property" && in_vertex) {
      std::string type, name;
      ss >> type >> name;
      props.push_back(name);
    } else if (tok == "end_header") {
      break;
    }
  }
  if (!ascii) throw ValidationError(path.string() + ": only ASCII PLY is supported");
  const auto col = [&](const char* name) -> std::size_t {
    const auto it = std::find(props.begin(), props.end(), name);
    if (it == props.end()) {
      throw ValidationError(path.string() + ": vertex property '" + name + "' missing");
    }
    return static_cast<std::size_t>(it - props.begin());
  };
  const std::size_t cx = col("x"), cy = col("y"), cz = col("z");
  PointCloud out;
  out.reserve(vertices);
  for (std::size_t v = 0; v < vertices; ++v) {
    if (!std::getline(in, line)) {
      throw ValidationError(path.string() + ": truncated at vertex " + std::to_string(v));
    }
    std::istringstream ss(line);
    std::vector<double> values;
    double x;
    while (ss >> x) values.push_back(x);
    if (values.size() < props.size()) {
      throw ValidationError(path.string() + ": short vertex row " + std::to_string(v));
    }
    out.emplace_back(values[cx], values[cy], values[cz]);
  }
  return out;
}

Scene scene_from_json(const json& j, const std::filesystem::path& base_dir) {
  if (!j.is_object()) schema_error("$", "expected object");
  if (const auto v = j.find("v"); v != j.end()) {
    if (!v->is_number_integer() || v->get<int>() != kSceneSchemaVersion) {
      schema_error("$.v", "unsupported schema version");
    }
  }
  double voxel = kDefaultVoxelSize;
  if (j.contains("voxel_size")) voxel = get_number(j, "voxel_size", "$");
  if (!(voxel > 0.0)) schema_error("$.voxel_size", "must be positive");

  std::optional<GroundRect> bounds;
  if (const auto b = j.find("bounds"); b != j.end()) {
    if (!b->is_object()) schema_error("$.bounds", "expected {min, max}");
    GroundRect r;
    r.min = get_vec2(b->value("min", json()), "$.bounds.min");
    r.max = get_vec2(b->value("max", json()), "$.bounds.max");
    bounds = r;
  }

  std::vector<SceneObject> objects;
  const auto objs = j.find("objects");
  if (objs != j.end()) {
    if (!objs->is_array()) schema_error("$.objects", "expected array");
    for (std::size_t i = 0; i < objs->size(); ++i) {
      const json& o = (*objs)[i];
      const std::string path = "objects[" + std::to_string(i) + "]";
      if (!o.is_object()) schema_error(path, "expected object");
      SceneObject obj;
      if (!o.contains("id") || !o["id"].is_string()) schema_error(path + ".id", "expected string");
      obj.id = o["id"].get<std::string>();
      if (!o.contains("category") || !o["category"].is_string()) {
        schema_error(path + ".category", "expected string");
      }
      obj.category = o["category"].get<std::string>();
      if (o.contains("room")) {
        if (!o["room"].is_string()) schema_error(path + ".room", "expected string");
        obj.room = o["room"].get<std::string>();
      }
      if (o.contains("dynamic")) {
        if (!o["dynamic"].is_boolean()) schema_error(path + ".dynamic", "expected boolean");
        obj.dynamic = o["dynamic"].get<bool>();
      }
      if (o.contains("pose")) {
        const json& p = o["pose"];
        if (!p.is_object()) schema_error(path + ".pose", "expected {x, y, yaw}");
        obj.position = Vec3(get_number(p, "x", path + ".pose"),
                            get_number(p, "y", path + ".pose"), 0.0);
        obj.yaw = p.contains("yaw") ? get_number(p, "yaw", path + ".pose") : 0.0;
      } else if (o.contains("root")) {
        const json& p = o["root"];
        if (!p.is_object()) schema_error(path + ".root", "expected {x, y, z}");
        obj.position = Vec3(get_number(p, "x", path + ".root"),
                            get_number(p, "y", path + ".root"),
                            get_number(p, "z", path + ".root"));
      } else {
        schema_error(path, "one of pose or root is required");
      }
      const Placement place{obj.position, obj.yaw};

      if (!o.contains("geometry") || !o["geometry"].is_object()) {
        schema_error(path + ".geometry", "expected object");
      }
      const json& g = o["geometry"];
      PointCloud local;
      if (g.contains("box")) {
        local = voxelize_box(get_box(g["box"], path + ".geometry.box"), voxel);
      } else if (g.contains("points")) {
        local = get_points(g["points"], path + ".geometry.points");
      } else if (g.contains("ply")) {
        if (!g["ply"].is_string()) schema_error(path + ".geometry.ply", "expected path");
        std::filesystem::path ply = g["ply"].get<std::string>();
        if (ply.is_relative()) ply = base_dir / ply;
        local = load_ascii_ply(ply);
      } else {
        schema_error(path + ".geometry", "one of box, points or ply is required");
      }
      if (local.empty()) schema_error(path + ".geometry", "no surface points");

      // World AABB of the placed geometry.
      PointCloud world;
      world.reserve(local.size());
      for (const auto& p : local) world.push_back(place.apply(p));
      if (g.contains("box")) {
        const Aabb lb = get_box(g["box"], path + ".geometry.box");
        Aabb wb{Vec3::Constant(std::numeric_limits<double>::infinity()),
                Vec3::Constant(-std::numeric_limits<double>::infinity())};
        for (const auto& c : lb.corners()) {
          wb.min = wb.min.cwiseMin(place.apply(c));
          wb.max = wb.max.cwiseMax(place.apply(c));
        }
        obj.aabb = wb;
      } else {
        obj.aabb = {world.front(), world.front()};
        for (const auto& p : world) {
          obj.aabb.min = obj.aabb.min.cwiseMin(p);
          obj.aabb.max = obj.aabb.max.cwiseMax(p);
        }
      }
      if (obj.dynamic && obj.aabb.extent().maxCoeff() > 0.5 + 1e-9) {
        schema_error(path, "dynamic object exceeds 0.5 m carryable size");
      }

      if (o.contains("parts")) {
        const json& parts = o["parts"];
        if (!parts.is_object()) schema_error(path + ".parts", "expected object");
        for (const auto& [label, spec] : parts.items()) {
          const std::string ppath = path + ".parts." + label;
          PointCloud pts;
          if (spec.is_object() && spec.contains("box")) {
            for (const auto& p : voxelize_box(get_box(spec["box"], ppath + ".box"), voxel)) {
              pts.push_back(place.apply(p));
            }
          } else if (spec.is_array()) {
            for (std::size_t k = 0; k < spec.size(); ++k) {
              const json& e = spec[k];
              const std::string epath = ppath + "[" + std::to_string(k) + "]";
              if (e.is_number_integer()) {
                const auto idx = e.get<long long>();
                if (idx < 0 || static_cast<std::size_t>(idx) >= world.size()) {
                  schema_error(epath, "point index out of range");
                }
                pts.push_back(world[static_cast<std::size_t>(idx)]);
              } else {
                pts.push_back(place.apply(get_vec3(e, epath)));
              }
            }
          } else {
            schema_error(ppath, "expected indices, points, or {box}");
          }
          if (pts.empty()) schema_error(ppath, "empty part");
          const Aabb inflated = obj.aabb.inflated(voxel + 1e-9);
          for (const auto& p : pts) {
            if (!inflated.contains(p)) schema_error(ppath, "part point outside object AABB");
          }
          obj.parts.emplace(label, SurfacePart(std::move(pts)));
        }
      }
      obj.parts.insert_or_assign(kSurfacePart, SurfacePart(std::move(world)));
      objects.push_back(std::move(obj));
    }
  }
  for (std::size_t a = 0; a < objects.size(); ++a) {
    for (std::size_t b = a + 1; b < objects.size(); ++b) {
      if (objects[a].id == objects[b].id) {
        schema_error("objects[" + std::to_string(b) + "].id", "duplicate id " + objects[b].id);
      }
    }
  }
  return Scene(std::move(objects), bounds, voxel);
}

Scene load_scene(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open scene " + path.string());
  json j;
  try {
    j = json::parse(in);
  } catch (const json::parse_error& e) {
    throw ValidationError(path.string() + ": " + e.what());
  }
  return scene_from_json(j, path.parent_path());
}

Spawn sample_spawn(const Scene& scene, Rng& rng, double clearance, int max_attempts) {
  if (clearance < 0.0) throw ValidationError("clearance must be non-negative");
  const GroundRect& b = scene.bounds();
  for (int attempt = 0; attempt < max_attempts; ++attempt) {
    const Vec2 p(rng.uniform(b.min.x(), b.max.x()), rng.uniform(b.min.y(), b.max.y()));
    const double yaw = rng.uniform(0.0, 2.0 * std::numbers::pi);
    bool clear = true;
    for (const auto& o : scene.objects()) {
      if (footprint_distance(o.aabb, p) <= clearance) {
        clear = false;
        break;
      }
    }
    if (clear) return {p, yaw};
  }
  throw InfeasibleError("scene too crowded: no spawn after " +
                        std::to_string(max_attempts) + " attempts");
}

}  // namespace stylescene
