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

#include "stylescene/tasks.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <fstream>

#include <nlohmann/json.hpp>

#include "stylescene/error.hpp"

namespace stylescene {
namespace {

using nlohmann::json;

constexpr double kBranchThreshold = 0.5;  // squared meters
constexpr int kMaxTargetAttempts = 10000;

double sq2(const Vec2& a, const Vec2& b) {
  const double dx = a.x() - b.x();
  const double dy = a.y() - b.y();
  return dx * dx + dy * dy;
}

double sq3(const Vec3& a, const Vec3& b) {
  const double dx = a.x() - b.x();
  const double dy = a.y() - b.y();
  const double dz = a.z() - b.z();
  return dx * dx + dy * dy + dz * dz;
}

double dot2(const Vec2& a, const Vec2& b) { return a.x() * b.x() + a.y() * b.y(); }

// Field table shared by the JSON reader and writer.
template <typename F>
void for_each_field(EpisodeConfig& cfg, F&& f) {
  f("dt", cfg.dt);
  f("gamma", cfg.gamma);
  f("lambda_style", cfg.lambda_style);
  f("lambda_task", cfg.lambda_task);
  f("loco_threshold", cfg.loco_threshold);
  f("sit_threshold", cfg.sit_threshold);
  f("reach_threshold", cfg.reach_threshold);
  f("lie_threshold", cfg.lie_threshold);
  f("carry_threshold", cfg.carry_threshold);
  f("getup_threshold", cfg.getup_threshold);
  f("hold_time", cfg.hold_time);
  f("success_hold_terminate", cfg.success_hold_terminate);
  f("max_contact_force", cfg.max_contact_force);
  f("fall_height", cfg.fall_height);
  f("walk_speed", cfg.walk_speed);
  f("contact_speed", cfg.contact_speed);
  f("standing_height", cfg.standing_height);
  f("spawn_clearance", cfg.spawn_clearance);
  f("heightmap_gating", cfg.heightmap_gating);
}

Vec2 sample_clear_point(const Scene& scene, Rng& rng, double clearance,
                        const std::function<bool(const Vec2&)>& accept,
                        const std::function<bool(const SceneObject&)>& counts) {
  const GroundRect& b = scene.bounds();
  for (int attempt = 0; attempt < kMaxTargetAttempts; ++attempt) {
    const Vec2 p(rng.uniform(b.min.x(), b.max.x()), rng.uniform(b.min.y(), b.max.y()));
    if (!accept(p)) continue;
    bool clear = true;
    for (const auto& o : scene.objects()) {
      if (counts(o) && footprint_distance(o.aabb, p) <= clearance) {
        clear = false;
        break;
      }
    }
    if (clear) return p;
  }
  throw InfeasibleError("no feasible goal target inside scene bounds");
}

const SceneObject& require_object(const Scene& scene, const std::string& id) {
  const SceneObject* o = scene.find(id);
  if (o == nullptr) throw ValidationError("scene has no object '" + id + "'");
  return *o;
}

}  // namespace

void EpisodeConfig::validate() const {
  EpisodeConfig copy = *this;
  for_each_field(copy, [](const char* name, double v) {
    if (std::string_view(name) == "gamma" || std::string_view(name) == "lambda_style" ||
        std::string_view(name) == "lambda_task") {
      return;
    }
    if (!(v > 0.0) || !std::isfinite(v)) {
      throw ValidationError(std::string("episode config: ") + name + " must be positive");
    }
  });
  if (!(gamma >= 0.0 && gamma <= 1.0)) {
    throw ValidationError("episode config: gamma must lie in [0, 1]");
  }
  if (!(lambda_style >= 0.0) || !(lambda_task >= 0.0)) {
    throw ValidationError("episode config: lambda weights must be non-negative");
  }
  if (horizon <= 0) throw ValidationError("episode config: horizon must be positive");
}

json to_json(const EpisodeConfig& cfg) {
  json j;
  EpisodeConfig copy = cfg;
  for_each_field(copy, [&](const char* name, double v) { j[name] = v; });
  j["horizon"] = cfg.horizon;
  return j;
}

EpisodeConfig episode_config_from_json(const json& j) {
  if (!j.is_object()) throw ValidationError("episode config: expected object");
  EpisodeConfig cfg;
  std::size_t known = 0;
  for_each_field(cfg, [&](const char* name, double& v) {
    const auto it = j.find(name);
    if (it == j.end()) return;
    if (!it->is_number()) {
      throw ValidationError(std::string("episode config: ") + name + " must be a number");
    }
    v = it->get<double>();
    ++known;
  });
  if (const auto it = j.find("horizon"); it != j.end()) {
    if (!it->is_number_integer()) {
      throw ValidationError("episode config: horizon must be an integer");
    }
    cfg.horizon = it->get<int>();
    ++known;
  }
  if (known != j.size()) {
    for (const auto& [key, value] : j.items()) {
      bool found = key == "horizon";
      for_each_field(cfg, [&](const char* name, double&) { found = found || key == name; });
      if (!found) throw ValidationError("episode config: unknown key '" + key + "'");
    }
  }
  cfg.validate();
  return cfg;
}

EpisodeConfig load_episode_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open config " + path.string());
  try {
    return episode_config_from_json(json::parse(in));
  } catch (const json::parse_error& e) {
    throw ValidationError(path.string() + ": " + e.what());
  }
}

std::string_view goal_kind(const GoalCondition& goal) {
  switch (goal.index()) {
    case 0: return "loco";
    case 1: return "hsi";
    default: return "doi";
  }
}

std::optional<double> RewardBreakdown::term(std::string_view name) const {
  for (const auto& [k, v] : terms) {
    if (k == name) return v;
  }
  return std::nullopt;
}

LocoGoal make_loco_goal(const Scene& scene, const CharacterState& state,
                        LocoMode mode, Rng& rng, const EpisodeConfig& cfg) {
  LocoGoal goal;
  goal.mode = mode;
  if (mode == LocoMode::kIdle) {
    goal.target = state.root2();
    goal.target_speed = 0.0;
    return goal;
  }
  const Vec2 root = state.root2();
  goal.target = sample_clear_point(
      scene, rng, cfg.spawn_clearance,
      [&](const Vec2& p) { return sq2(p, root) >= 1.0; },
      [](const SceneObject&) { return true; });
  goal.target_speed = cfg.walk_speed;
  return goal;
}

LocoGoal make_object_approach_goal(const SceneObject& object,
                                   const CharacterState& state,
                                   const EpisodeConfig& cfg) {
  const Vec2 center = object.aabb.center().head<2>();
  const double radius = 0.5 * object.aabb.extent().head<2>().norm() + 0.3;
  const Vec2 dir = target_direction(center, state.root2(), -state.facing);
  LocoGoal goal;
  goal.mode = LocoMode::kWalk;
  goal.target = center + radius * dir;
  goal.target_speed = cfg.walk_speed;
  return goal;
}

HsiGoal make_hsi_goal(const Scene& scene, const std::string& object_id,
                      const std::string& part_label, std::optional<JointId> joint,
                      const CharacterState& state, const EpisodeConfig& cfg) {
  const SceneObject& object = require_object(scene, object_id);
  const SurfacePart& part = object.part(part_label);
  HsiGoal goal;
  goal.object_id = object_id;
  goal.part = part_label;
  goal.target_speed = cfg.walk_speed;
  if (joint) {
    goal.joint = *joint;
    goal.target = part.nearest(state.joint(*joint)).point;
    return goal;
  }
  const NearestPoint left = part.nearest(state.joint(JointId::kLeftHand));
  const NearestPoint right = part.nearest(state.joint(JointId::kRightHand));
  if (right.distance < left.distance) {
    goal.joint = JointId::kRightHand;
    goal.target = right.point;
  } else {
    goal.joint = JointId::kLeftHand;
    goal.target = left.point;
  }
  return goal;
}

HsiGoal make_getup_goal(const Scene& scene, const std::string& object_id,
                        const std::string& part_label, const CharacterState& state,
                        const EpisodeConfig& cfg) {
  HsiGoal goal = make_hsi_goal(scene, object_id, part_label, JointId::kPelvis, state, cfg);
  const Aabb box = require_object(scene, object_id).aabb.inflated(0.35);
  Vec2 p = state.root2();
  const bool inside = p.x() >= box.min.x() && p.x() <= box.max.x() &&
                      p.y() >= box.min.y() && p.y() <= box.max.y();
  if (inside) {
    const double gaps[4] = {p.x() - box.min.x(), box.max.x() - p.x(),
                            p.y() - box.min.y(), box.max.y() - p.y()};
    int side = 0;
    for (int k = 1; k < 4; ++k) {
      if (gaps[k] < gaps[side]) side = k;
    }
    switch (side) {
      case 0: p.x() = box.min.x(); break;
      case 1: p.x() = box.max.x(); break;
      case 2: p.y() = box.min.y(); break;
      default: p.y() = box.max.y(); break;
    }
  }
  goal.standing_target = Vec3(p.x(), p.y(), cfg.standing_height);
  return goal;
}

DoiGoal make_doi_goal(const Scene& scene, const std::string& object_id,
                      const Aabb& current_box, std::optional<Vec2> target,
                      Rng& rng, const EpisodeConfig& cfg) {
  const SceneObject& object = require_object(scene, object_id);
  if (!object.dynamic) {
    throw ValidationError("carry target '" + object_id + "' is a static object");
  }
  DoiGoal goal;
  goal.object_id = object_id;
  goal.bbox_corners = current_box.corners();
  goal.target_speed = cfg.walk_speed;
  const Vec2 center = current_box.center().head<2>();
  const Vec2 ground =
      target ? *target
             : sample_clear_point(
                   scene, rng, cfg.spawn_clearance,
                   [&](const Vec2& p) { return sq2(p, center) >= 1.0; },
                   [](const SceneObject& o) { return !o.dynamic; });
  goal.target = Vec3(ground.x(), ground.y(), 0.5 * current_box.extent().z());
  return goal;
}

Vec2 target_direction(const Vec2& from, const Vec2& to, const Vec2& fallback) {
  const Vec2 d = to - from;
  const double n = std::sqrt(dot2(d, d));
  if (n > 0.0) return d / n;
  return fallback;
}

RewardBreakdown loco_reward(const CharacterState& state, const CharacterState& prev,
                            const LocoGoal& goal) {
  const Vec2 root = state.root2();
  const double d2 = sq2(goal.target, root);
  const Vec2 dir = target_direction(root, goal.target, state.facing);
  const Vec2 vel = state.root_vel.head<2>();
  const double speed_err = goal.target_speed - dot2(dir, vel);
  const double align = dot2(dir, state.facing);
  const double r_far = 0.6 * std::exp(-0.5 * d2) +
                       0.2 * std::exp(-2.0 * speed_err * speed_err) +
                       0.2 * align * align;
  const double r_near = std::exp(-10.0 * d2);
  const double r_still =
      std::exp(-2.0 * sq2(state.root_vel.head<2>(), prev.root_vel.head<2>()));

  RewardBreakdown out;
  out.terms = {{"far", r_far}, {"near", r_near}, {"still", r_still}};
  if (d2 > kBranchThreshold) {
    out.branch = RewardBranch::kFar;
    out.total = 0.4 * r_near + 0.5 * r_far + 0.0;
  } else {
    out.branch = RewardBranch::kNear;
    out.total = 0.4 * r_near + 0.5 + 0.1 * r_still;
  }
  return out;
}

RewardBreakdown idle_reward(const CharacterState& state, const CharacterState& prev,
                            const LocoGoal& goal) {
  const Vec2 root = state.root2();
  const double d2 = sq2(goal.target, root);
  const double slack = std::max(0.0, std::sqrt(d2) - kIdleFreeRadius);
  const double slack2 = slack * slack;
  const Vec2 dir = target_direction(root, goal.target, state.facing);
  const Vec2 vel = state.root_vel.head<2>();
  const double speed_err = 0.0 - dot2(dir, vel);
  const double align = dot2(dir, state.facing);
  const double r_far = 0.6 * std::exp(-0.5 * d2) +
                       0.2 * std::exp(-2.0 * speed_err * speed_err) +
                       0.2 * align * align;
  const double r_near = std::exp(-10.0 * slack2);
  const double r_still =
      std::exp(-2.0 * sq2(state.root_vel.head<2>(), prev.root_vel.head<2>()));

  RewardBreakdown out;
  out.terms = {{"far", r_far}, {"near", r_near}, {"still", r_still}};
  if (slack2 > kBranchThreshold) {
    out.branch = RewardBranch::kFar;
    out.total = 0.4 * r_near + 0.5 * r_far + 0.0;
  } else {
    out.branch = RewardBranch::kNear;
    out.total = 0.4 * r_near + 0.5 + 0.1 * r_still;
  }
  return out;
}

RewardBreakdown hsi_reward(const CharacterState& state, const Vec3& joint_pos,
                           const Vec3& contact, const HsiGoal& goal) {
  const double d2 = sq3(goal.target, state.root_pos);
  const Vec2 dir = target_direction(state.root2(), goal.target.head<2>(), state.facing);
  const double speed_err = goal.target_speed - dot2(dir, state.root_vel.head<2>());
  const double r_far = std::exp(-2.0 * speed_err * speed_err);
  const double r_near = std::exp(-10.0 * sq3(contact, joint_pos));

  RewardBreakdown out;
  out.terms = {{"far", r_far}, {"near", r_near}};
  if (d2 > kBranchThreshold) {
    out.branch = RewardBranch::kFar;
    out.total = 0.7 * r_near + 0.3 * r_far;
  } else {
    out.branch = RewardBranch::kNear;
    out.total = 0.7 * r_near + 0.3;
  }
  return out;
}

RewardBreakdown getup_reward(const CharacterState& state, const Vec3& pelvis_pos,
                             const Vec3& seat_contact, const HsiGoal& goal,
                             GetUpPhase phase) {
  if (phase == GetUpPhase::kSeated) {
    return hsi_reward(state, pelvis_pos, seat_contact, goal);
  }
  if (!goal.standing_target) {
    throw ValidationError("getup goal lacks a standing target");
  }
  HsiGoal rising = goal;
  rising.target = *goal.standing_target;
  return hsi_reward(state, pelvis_pos, *goal.standing_target, rising);
}

Vec3 doi_goal_velocity(const ObjectState& object, const DoiGoal& goal,
                       double carry_threshold) {
  const Vec3 d = goal.target - object.position;
  const double n = std::sqrt(sq3(goal.target, object.position));
  if (n <= carry_threshold || n == 0.0) return Vec3::Zero();
  return goal.target_speed * (d / n);
}

RewardBreakdown doi_reward(const CharacterState& state, const Vec3& hand_pos,
                           const ObjectState& object, const DoiGoal& goal,
                           double carry_threshold) {
  const Vec3 v_goal = doi_goal_velocity(object, goal, carry_threshold);
  const double r_walk =
      0.8 * std::exp(-10.0 * sq2(state.root2(), object.position.head<2>())) +
      0.2 * std::exp(-2.0 * sq2(state.root_vel.head<2>(), v_goal.head<2>()));
  const double r_hand = std::exp(-0.5 * sq3(hand_pos, object.position));
  const double r_carry = 0.7 * std::exp(-10.0 * sq3(object.position, goal.target)) +
                         0.3 * std::exp(-2.0 * sq3(object.velocity, v_goal));

  RewardBreakdown out;
  out.terms = {{"walk", r_walk}, {"hand", r_hand}, {"carry", r_carry}};
  if (sq3(object.position, goal.target) > kBranchThreshold) {
    out.branch = RewardBranch::kFar;
    out.total = 0.3 * r_walk + 0.5 * r_carry + 0.2 * r_hand;
  } else {
    out.branch = RewardBranch::kNear;
    out.total = 0.3 * r_walk + 0.5 * r_carry + 0.2;
  }
  return out;
}

double combine(double style_reward, double task_reward, const EpisodeConfig& cfg) {
  const auto in_unit = [](double x) { return x >= 0.0 && x <= 1.0; };
  if (!in_unit(style_reward) || !in_unit(task_reward)) {
    throw ValidationError("combine: rewards must lie in [0, 1]");
  }
  return cfg.lambda_style * style_reward + cfg.lambda_task * task_reward;
}

double discounted_return(std::span<const double> rewards, double gamma) {
  if (!(gamma >= 0.0 && gamma <= 1.0)) {
    throw ValidationError("discounted_return: gamma must lie in [0, 1]");
  }
  double total = 0.0;
  double weight = 1.0;
  for (double r : rewards) {
    total += weight * r;
    weight *= gamma;
  }
  return total;
}

}  // namespace stylescene
