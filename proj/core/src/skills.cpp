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

#include "stylescene/skills.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

#include <nlohmann/json.hpp>

#include "stylescene/error.hpp"

namespace stylescene {
namespace {

constexpr double kSnapTolerance = 1e-12;
constexpr double kContactRadius = 0.5;  // 2D distance where approach ends
constexpr double kHoldMargin = 0.3;

double wrap_angle(double a) {
  a = std::remainder(a, 2.0 * std::numbers::pi);
  return a;
}

// Step of at most `max_step` along `d`; exact `d` when within reach.
template <typename V>
V clamped_step(const V& d, double max_step, bool* arrived) {
  const double dist = d.norm();
  if (dist <= max_step + kSnapTolerance) {
    *arrived = true;
    return d;
  }
  *arrived = false;
  return d * (max_step / dist);
}

void set_root_velocity(CharacterState& s, const Vec3& before, double dt) {
  s.root_vel = (s.root_pos - before) / dt;
}

class WalkPolicy final : public Policy {
 public:
  std::size_t action_dim() const override { return 0; }
  Action act(const Observation&) override { return {}; }
  void advance(const Action&, StepContext& ctx) override {
    const auto* goal = std::get_if<LocoGoal>(&ctx.goal);
    if (goal == nullptr) throw ValidationError("walk policy needs a loco goal");
    if (goal->mode == LocoMode::kIdle) {
      ctx.character.root_vel = Vec3::Zero();
      return;
    }
    ctx.character = kinematic_walk(ctx.character, goal->target, goal->target_speed,
                                   ctx.cfg.dt);
  }
};

class ContactPolicy final : public Policy {
 public:
  explicit ContactPolicy(SkillId skill) : skill_(skill) {}

  std::size_t action_dim() const override { return 0; }
  Action act(const Observation&) override { return {}; }
  void advance(const Action&, StepContext& ctx) override {
    const auto* goal = std::get_if<HsiGoal>(&ctx.goal);
    if (goal == nullptr) throw ValidationError("contact policy needs an HSI goal");
    if (ctx.phase != SkillPhase::kContact) {
      const Vec2 to = goal->target.head<2>() - ctx.character.root2();
      if (to.norm() > kContactRadius) {
        ctx.phase = SkillPhase::kApproach;
        ctx.character = kinematic_walk(ctx.character, goal->target.head<2>(),
                                       goal->target_speed, ctx.cfg.dt);
        return;
      }
      ctx.phase = SkillPhase::kContact;
    }
    const SceneObject* object = ctx.scene.find(goal->object_id);
    if (object == nullptr) throw ValidationError("unknown object " + goal->object_id);
    ctx.character = kinematic_contact(ctx.character, object->part(goal->part), goal->joint,
                                      skill_, ctx.cfg.contact_speed, ctx.cfg.dt);
  }

 private:
  SkillId skill_;
};

class GetUpPolicy final : public Policy {
 public:
  std::size_t action_dim() const override { return 0; }
  Action act(const Observation&) override { return {}; }
  void advance(const Action&, StepContext& ctx) override {
    const auto* goal = std::get_if<HsiGoal>(&ctx.goal);
    if (goal == nullptr || !goal->standing_target) {
      throw ValidationError("getup policy needs a goal with a standing target");
    }
    ctx.phase = SkillPhase::kRising;
    ctx.character = kinematic_getup(ctx.character, *goal->standing_target,
                                    ctx.cfg.contact_speed, ctx.cfg.dt);
  }
};

class CarryPolicy final : public Policy {
 public:
  std::size_t action_dim() const override { return 0; }
  Action act(const Observation&) override { return {}; }
  void advance(const Action&, StepContext& ctx) override {
    const auto* goal = std::get_if<DoiGoal>(&ctx.goal);
    if (goal == nullptr) throw ValidationError("carry policy needs a DOI goal");
    if (ctx.object == nullptr) throw ValidationError("carry policy needs an object");
    CarryStep step =
        kinematic_carry(ctx.character, *ctx.object, ctx.scene, *goal, ctx.phase, ctx.cfg);
    ctx.character = std::move(step.character);
    *ctx.object = step.object;
    ctx.phase = step.phase;
  }
};

}  // namespace

std::string_view to_string(SkillPhase phase) {
  switch (phase) {
    case SkillPhase::kNone: return "none";
    case SkillPhase::kApproach: return "approach";
    case SkillPhase::kContact: return "contact";
    case SkillPhase::kSeated: return "seated";
    case SkillPhase::kRising: return "rising";
    case SkillPhase::kGrasp: return "grasp";
    case SkillPhase::kTransport: return "transport";
    case SkillPhase::kReleased: return "released";
  }
  return "none";
}

std::vector<double> Observation::flatten() const {
  std::vector<double> out;
  out.reserve(proprio.size() + heightmap.size() + goal.size() + z.dim());
  out.insert(out.end(), proprio.begin(), proprio.end());
  out.insert(out.end(), heightmap.begin(), heightmap.end());
  out.insert(out.end(), goal.begin(), goal.end());
  out.insert(out.end(), z.values.begin(), z.values.end());
  return out;
}

nlohmann::json Observation::to_json() const {
  return {{"proprio", proprio}, {"heightmap", heightmap}, {"goal", goal}, {"z", z.values}};
}

std::vector<double> encode_proprio(const CharacterState& state) {
  std::vector<double> out;
  out.reserve(kProprioDim);
  for (int i = 0; i < 3; ++i) out.push_back(state.root_pos[i]);
  for (int i = 0; i < 3; ++i) out.push_back(state.root_vel[i]);
  out.push_back(state.facing.x());
  out.push_back(state.facing.y());
  for (const Vec3& j : state.joints) {
    for (int i = 0; i < 3; ++i) out.push_back(j[i] - state.root_pos[i]);
  }
  for (const auto& q : state.rotations) {
    out.insert(out.end(), {q.w(), q.x(), q.y(), q.z()});
  }
  return out;
}

std::vector<double> encode_goal(const GoalCondition& goal, const CharacterState& state) {
  std::vector<double> out;
  if (const auto* loco = std::get_if<LocoGoal>(&goal)) {
    out = {loco->target.x() - state.root_pos.x(), loco->target.y() - state.root_pos.y()};
  } else if (const auto* hsi = std::get_if<HsiGoal>(&goal)) {
    const Vec3 rel = hsi->target - state.root_pos;
    out = {rel.x(), rel.y(), rel.z(),
           hsi->joint == JointId::kPelvis ? 1.0 : 0.0,
           hsi->joint == JointId::kLeftHand ? 1.0 : 0.0,
           hsi->joint == JointId::kRightHand ? 1.0 : 0.0};
  } else {
    const auto& doi = std::get<DoiGoal>(goal);
    for (const Vec3& c : doi.bbox_corners) {
      for (int i = 0; i < 3; ++i) out.push_back(c[i] - state.root_pos[i]);
    }
    for (int i = 0; i < 3; ++i) out.push_back(doi.target[i] - state.root_pos[i]);
  }
  return out;
}

Observation make_observation(const CharacterState& state,
                             const HeightmapObservation& heightmap,
                             const GoalCondition& goal, EmbeddingVector z) {
  Observation obs;
  obs.proprio = encode_proprio(state);
  obs.heightmap = heightmap.grid;
  obs.goal = encode_goal(goal, state);
  obs.z = std::move(z);
  return obs;
}

Aabb DynamicObject::box(const Scene& scene) const {
  return scene.objects().at(index).aabb.translated(offset);
}

ObjectState DynamicObject::state(const Scene& scene) const {
  return {box(scene).center(), velocity};
}

void PolicyRegistry::register_policy(SkillId skill, PolicyFactory factory) {
  factories_[static_cast<std::size_t>(skill)] = std::move(factory);
}

bool PolicyRegistry::contains(SkillId skill) const {
  return static_cast<bool>(factories_[static_cast<std::size_t>(skill)]);
}

std::unique_ptr<Policy> PolicyRegistry::create(SkillId skill) const {
  const auto& factory = factories_[static_cast<std::size_t>(skill)];
  if (!factory) {
    throw ValidationError("no policy registered for skill '" +
                          std::string(to_string(skill)) + "'");
  }
  return factory();
}

PolicyRegistry PolicyRegistry::kinematic() {
  PolicyRegistry r;
  r.register_policy(SkillId::kWalk, [] { return std::make_unique<WalkPolicy>(); });
  r.register_policy(SkillId::kIdle, [] { return std::make_unique<WalkPolicy>(); });
  for (SkillId s : {SkillId::kSit, SkillId::kLie, SkillId::kReach}) {
    r.register_policy(s, [s] { return std::make_unique<ContactPolicy>(s); });
  }
  r.register_policy(SkillId::kGetUp, [] { return std::make_unique<GetUpPolicy>(); });
  r.register_policy(SkillId::kCarry, [] { return std::make_unique<CarryPolicy>(); });
  return r;
}

std::string interaction_part(const SceneObject& object, SkillId skill) {
  std::vector<const char*> prefs;
  switch (skill) {
    case SkillId::kSit: prefs = {"seat"}; break;
    case SkillId::kLie: prefs = {"bed", "seat"}; break;
    case SkillId::kGetUp: prefs = {"seat", "bed"}; break;
    case SkillId::kReach: prefs = {"front"}; break;
    default: break;
  }
  for (const char* p : prefs) {
    if (object.parts.count(p) != 0) return p;
  }
  return kSurfacePart;
}

CharacterState kinematic_walk(const CharacterState& state, const Vec2& target,
                              double speed, double dt) {
  CharacterState s = state;
  const Vec2 d = target - state.root2();
  bool arrived = false;
  const Vec2 step = clamped_step(d, speed * dt, &arrived);
  const Vec2 next = arrived ? target : Vec2(state.root2() + step);
  double yaw = state.yaw;
  if (d.norm() > 0.0) {
    const double want = std::atan2(d.y(), d.x());
    const double turn = std::clamp(wrap_angle(want - yaw), -std::numbers::pi * dt,
                                   std::numbers::pi * dt);
    yaw = state.yaw + turn;
  }
  move_rigid(s, Vec3(next.x(), next.y(), state.root_pos.z()), yaw);
  set_root_velocity(s, state.root_pos, dt);
  return s;
}

CharacterState kinematic_contact(const CharacterState& state, const SurfacePart& part,
                                 JointId joint, SkillId skill, double speed, double dt) {
  CharacterState s = state;
  const Vec3& from = state.joint(joint);
  const NearestPoint nearest = part.nearest(from);
  bool arrived = false;
  const Vec3 delta = clamped_step(Vec3(nearest.point - from), speed * dt, &arrived);
  if (joint == JointId::kPelvis) {
    const Vec3 root = arrived ? nearest.point : Vec3(state.root_pos + delta);
    move_rigid(s, root, state.yaw);
    if (arrived && skill == SkillId::kSit) s.posture = Posture::kSeated;
    if (arrived && skill == SkillId::kLie) s.posture = Posture::kLying;
  } else {
    s.joint(joint) = arrived ? nearest.point : Vec3(from + delta);
  }
  set_root_velocity(s, state.root_pos, dt);
  return s;
}

CharacterState kinematic_getup(const CharacterState& state, const Vec3& standing_target,
                               double speed, double dt) {
  CharacterState s = state;
  bool arrived = false;
  const Vec3 delta =
      clamped_step(Vec3(standing_target - state.root_pos), speed * dt, &arrived);
  move_rigid(s, arrived ? standing_target : Vec3(state.root_pos + delta), state.yaw);
  if (arrived) s.posture = Posture::kStanding;
  set_root_velocity(s, state.root_pos, dt);
  return s;
}

std::array<Vec3, 2> grip_points(const Aabb& box, const Vec2& facing) {
  const Vec2 left(-facing.y(), facing.x());
  const Vec3 c = box.center();
  const Vec3 half = 0.5 * box.extent();
  double t = std::numeric_limits<double>::infinity();
  for (int i = 0; i < 2; ++i) {
    if (std::abs(left[i]) > 0.0) t = std::min(t, half[i] / std::abs(left[i]));
  }
  const Vec3 off(t * left.x(), t * left.y(), 0.0);
  return {c + off, c - off};
}

CarryStep kinematic_carry(const CharacterState& state, const DynamicObject& object,
                          const Scene& scene, const DoiGoal& goal, SkillPhase phase,
                          const EpisodeConfig& cfg) {
  CarryStep out{state, object, phase};
  out.object.velocity = Vec3::Zero();
  out.character.root_vel = Vec3::Zero();
  const Aabb box = object.box(scene);
  const Vec3 center = box.center();

  if (phase == SkillPhase::kNone || phase == SkillPhase::kApproach) {
    if ((goal.target - center).norm() <= kSnapTolerance) {
      out.phase = SkillPhase::kReleased;
      return out;
    }
    out.phase = SkillPhase::kApproach;
    const Vec2 c2 = center.head<2>();
    const double radius = 0.5 * std::max(box.extent().x(), box.extent().y()) + kHoldMargin;
    const Vec2 away = target_direction(c2, state.root2(), -state.facing);
    const Vec2 stand = c2 + radius * away;
    if ((state.root2() - c2).norm() > radius + 1e-9) {
      out.character = kinematic_walk(state, stand, goal.target_speed, cfg.dt);
      return out;
    }
    out.phase = SkillPhase::kGrasp;
  }

  if (out.phase == SkillPhase::kGrasp) {
    const auto grips = grip_points(box, state.facing);
    bool all_arrived = true;
    const JointId hands[2] = {JointId::kLeftHand, JointId::kRightHand};
    for (int h = 0; h < 2; ++h) {
      bool arrived = false;
      const Vec3& from = state.joint(hands[h]);
      const Vec3 delta =
          clamped_step(Vec3(grips[h] - from), cfg.contact_speed * cfg.dt, &arrived);
      out.character.joint(hands[h]) = arrived ? grips[h] : Vec3(from + delta);
      all_arrived = all_arrived && arrived;
    }
    if (all_arrived) out.phase = SkillPhase::kTransport;
    return out;
  }

  if (out.phase == SkillPhase::kTransport) {
    bool arrived = false;
    const Vec3 delta =
        clamped_step(Vec3(goal.target - center), goal.target_speed * cfg.dt, &arrived);
    out.object.offset = arrived ? Vec3(object.offset + (goal.target - center))
                                : Vec3(object.offset + delta);
    const Vec3 moved = out.object.box(scene).center() - center;
    out.object.velocity = moved / cfg.dt;
    const Vec3 left = state.joint(JointId::kLeftHand);
    const Vec3 right = state.joint(JointId::kRightHand);
    move_rigid(out.character, state.root_pos + Vec3(moved.x(), moved.y(), 0.0), state.yaw);
    out.character.joint(JointId::kLeftHand) = left + moved;
    out.character.joint(JointId::kRightHand) = right + moved;
    set_root_velocity(out.character, state.root_pos, cfg.dt);
    if (arrived) out.phase = SkillPhase::kReleased;
  }
  return out;
}

std::string window_signature(std::span<const CharacterState> window) {
  if (window.empty()) return "still standing";
  const CharacterState& s = window.back();
  const double speed = s.root_vel.head<2>().norm();
  const char* pace = speed < 0.05 ? "still" : speed < 1.0 ? "slow" : speed < 2.0 ? "walking"
                                                                                  : "fast";
  return std::string(pace) + " " + std::string(to_string(s.posture));
}

double StubStyleReward::style_reward(std::span<const CharacterState> window,
                                     const EmbeddingVector& z) const {
  if (z.dim() < 2 || z.is_zero()) return 0.5;
  const EmbeddingVector sig = test_embed(window_signature(window), z.dim(), seed_);
  return std::clamp(0.5 + 0.5 * cosine_similarity(sig, z), 0.0, 1.0);
}

}  // namespace stylescene
