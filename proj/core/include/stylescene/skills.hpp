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

#ifndef STYLESCENE_SKILLS_HPP_
#define STYLESCENE_SKILLS_HPP_

#include <array>
#include <cstddef>
#include <functional>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "stylescene/character.hpp"
#include "stylescene/embedding.hpp"
#include "stylescene/scene.hpp"
#include "stylescene/scriptdb.hpp"
#include "stylescene/tasks.hpp"

namespace stylescene {

// Sub-stage of the active skill. Policies own the transitions; the FSM only
// stores the value and reads it for GetUp reward selection.
enum class SkillPhase : std::uint8_t {
  kNone,
  kApproach,
  kContact,
  kSeated,
  kRising,
  kGrasp,
  kTransport,
  kReleased,
};

std::string_view to_string(SkillPhase phase);

inline constexpr std::size_t kProprioDim = 3 + 3 + 2 + kJointCount * 3 + kJointCount * 4;

struct Action {
  std::vector<double> values;
};

struct Observation {
  std::vector<double> proprio;  // s_t
  std::array<double, HeightmapObservation::kCells> heightmap{};
  std::vector<double> goal;  // g_t
  EmbeddingVector z;

  // (s, h, g, z) concatenated, the wire format for external controllers.
  std::vector<double> flatten() const;
  nlohmann::json to_json() const;
};

std::vector<double> encode_proprio(const CharacterState& state);

// Loco: 2 reals; HSI: 3 reals + joint one-of-three; DOI: 24 + 3 reals. All
// positions are relative to the character root.
std::vector<double> encode_goal(const GoalCondition& goal, const CharacterState& state);

Observation make_observation(const CharacterState& state,
                             const HeightmapObservation& heightmap,
                             const GoalCondition& goal, EmbeddingVector z);

// Episode-side state of a dynamic object: rigid offset from its scene pose.
struct DynamicObject {
  std::size_t index = 0;  // into Scene::objects()
  Vec3 offset = Vec3::Zero();
  Vec3 velocity = Vec3::Zero();

  Aabb box(const Scene& scene) const;
  ObjectState state(const Scene& scene) const;
};

struct StepContext {
  const Scene& scene;
  const EpisodeConfig& cfg;
  const GoalCondition& goal;
  CharacterState& character;
  SkillPhase& phase;
  DynamicObject* object = nullptr;  // set for Carry
  double force_proxy = 0.0;         // kinematic policies leave it at 0
};

class Policy {
 public:
  virtual ~Policy() = default;

  virtual std::size_t action_dim() const = 0;
  virtual Action act(const Observation& obs) = 0;
  // Environment-side integration of one tick.
  virtual void advance(const Action& action, StepContext& ctx) = 0;
};

using PolicyFactory = std::function<std::unique_ptr<Policy>()>;

class PolicyRegistry {
 public:
  void register_policy(SkillId skill, PolicyFactory factory);
  bool contains(SkillId skill) const;
  // Fresh instance per call. Throws ValidationError naming the skill when
  // nothing is registered for it.
  std::unique_ptr<Policy> create(SkillId skill) const;

  static PolicyRegistry kinematic();

 private:
  std::array<PolicyFactory, kAllSkills.size()> factories_{};
};

// Part used for contact by a skill on an object: Sit prefers "seat", Lie
// prefers "bed" then "seat", Reach prefers "front"; otherwise "surface".
std::string interaction_part(const SceneObject& object, SkillId skill);

// Moves the root toward `target` by min(speed*dt, distance), snapping on
// arrival, and turns yaw toward the travel direction by at most pi*dt.
CharacterState kinematic_walk(const CharacterState& state, const Vec2& target,
                              double speed, double dt);

// Moves `joint` toward its nearest point on `part` by at most speed*dt. The
// pelvis carries the whole body; hands move alone. Sets Seated/Lying when
// the pelvis arrives for Sit/Lie.
CharacterState kinematic_contact(const CharacterState& state, const SurfacePart& part,
                                 JointId joint, SkillId skill, double speed, double dt);

// Moves the pelvis (and the body with it) to the standing target; Standing on
// arrival.
CharacterState kinematic_getup(const CharacterState& state, const Vec3& standing_target,
                               double speed, double dt);

struct CarryStep {
  CharacterState character;
  DynamicObject object;
  SkillPhase phase = SkillPhase::kApproach;
};

// Approach, grasp at the AABB sides, transport, release exactly at the goal.
CarryStep kinematic_carry(const CharacterState& state, const DynamicObject& object,
                          const Scene& scene, const DoiGoal& goal, SkillPhase phase,
                          const EpisodeConfig& cfg);

// Grip points on the AABB boundary along the character's lateral axis.
std::array<Vec3, 2> grip_points(const Aabb& box, const Vec2& facing);

class StyleRewardProvider {
 public:
  virtual ~StyleRewardProvider() = default;
  // Must return a value in [0, 1].
  virtual double style_reward(std::span<const CharacterState> window,
                              const EmbeddingVector& z) const = 0;
};

// Short text describing a motion window ("walking standing", "still seated").
std::string window_signature(std::span<const CharacterState> window);

class StubStyleReward final : public StyleRewardProvider {
 public:
  explicit StubStyleReward(std::uint64_t seed = 0) : seed_(seed) {}

  double style_reward(std::span<const CharacterState> window,
                      const EmbeddingVector& z) const override;

 private:
  std::uint64_t seed_;
};

}  // namespace stylescene

#endif  // STYLESCENE_SKILLS_HPP_
