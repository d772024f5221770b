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

#ifndef STYLESCENE_TASKS_HPP_
#define STYLESCENE_TASKS_HPP_

#include <array>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <variant>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "stylescene/character.hpp"
#include "stylescene/rng.hpp"
#include "stylescene/scene.hpp"

namespace stylescene {

// Episode constants. Distances in meters, times in seconds.
struct EpisodeConfig {
  double dt = 1.0 / 30.0;
  int horizon = 300;  // ticks per episode
  double gamma = 0.99;
  double lambda_style = 0.5;
  double lambda_task = 0.5;
  double loco_threshold = 0.20;
  double sit_threshold = 0.20;
  double reach_threshold = 0.20;
  double lie_threshold = 0.30;
  double carry_threshold = 0.20;
  double getup_threshold = 0.10;
  double hold_time = 0.5;
  double success_hold_terminate = 2.0;
  double max_contact_force = 5000.0;
  double fall_height = 0.3;
  double walk_speed = 1.5;     // g_vel for Walk, HSI approach and DOI
  double contact_speed = 1.0;  // kinematic joint speed during contact
  double standing_height = kStandingPelvisHeight;
  double spawn_clearance = 0.4;
  double heightmap_gating = kDefaultHeightmapGating;

  // Throws ValidationError naming the first non-positive field.
  void validate() const;
};

nlohmann::json to_json(const EpisodeConfig& cfg);
// Missing keys keep their defaults; unknown keys are rejected.
EpisodeConfig episode_config_from_json(const nlohmann::json& j);
EpisodeConfig load_episode_config(const std::filesystem::path& path);

enum class LocoMode : std::uint8_t { kWalk, kIdle };

struct LocoGoal {
  Vec2 target = Vec2::Zero();
  double target_speed = 0.0;
  LocoMode mode = LocoMode::kWalk;
};

struct HsiGoal {
  Vec3 target = Vec3::Zero();  // nearest part point at creation
  JointId joint = JointId::kPelvis;
  std::string object_id;
  std::string part;
  double target_speed = 0.0;
  // Set for GetUp: object-adjacent ground point at standing pelvis height.
  std::optional<Vec3> standing_target;
};

struct DoiGoal {
  std::array<Vec3, 8> bbox_corners{};
  Vec3 target = Vec3::Zero();
  double target_speed = 0.0;
  std::string object_id;
};

using GoalCondition = std::variant<LocoGoal, HsiGoal, DoiGoal>;

std::string_view goal_kind(const GoalCondition& goal);

enum class RewardBranch : std::uint8_t { kFar, kNear };

struct RewardBreakdown {
  double total = 0.0;
  std::vector<std::pair<std::string, double>> terms;
  RewardBranch branch = RewardBranch::kNear;

  std::optional<double> term(std::string_view name) const;
};

// Walk: uniform target inside the scene bounds at least 1 m from the root.
// Idle: the current root position. Throws InfeasibleError when no Walk
// target exists.
LocoGoal make_loco_goal(const Scene& scene, const CharacterState& state,
                        LocoMode mode, Rng& rng, const EpisodeConfig& cfg);

// Walk toward an object: ground point at (footprint half-diagonal + 0.3 m)
// from the object's centroid, on the side facing the character.
LocoGoal make_object_approach_goal(const SceneObject& object,
                                   const CharacterState& state,
                                   const EpisodeConfig& cfg);

// Target is the part point nearest the constrained joint. Pass no joint for
// Reach to pick whichever hand is nearer the part.
HsiGoal make_hsi_goal(const Scene& scene, const std::string& object_id,
                      const std::string& part_label,
                      std::optional<JointId> joint, const CharacterState& state,
                      const EpisodeConfig& cfg);

// GetUp: HSI goal on the pelvis plus a standing target beside the object.
HsiGoal make_getup_goal(const Scene& scene, const std::string& object_id,
                        const std::string& part_label,
                        const CharacterState& state, const EpisodeConfig& cfg);

// `current_box` is the object's AABB at creation (dynamic objects move).
// Without `target`, a ground point is sampled at least 1 m from the object,
// clear of static footprints. Target z is the object's half-height.
DoiGoal make_doi_goal(const Scene& scene, const std::string& object_id,
                      const Aabb& current_box, std::optional<Vec2> target,
                      Rng& rng, const EpisodeConfig& cfg);

// Unit planar direction from `from` to `to`; `fallback` when they coincide.
Vec2 target_direction(const Vec2& from, const Vec2& to, const Vec2& fallback);

RewardBreakdown loco_reward(const CharacterState& state,
                            const CharacterState& prev, const LocoGoal& goal);

// Loco template with the distance clamped to max(0, d - 3) for the branch
// test and r_near, and zero target speed.
RewardBreakdown idle_reward(const CharacterState& state,
                            const CharacterState& prev, const LocoGoal& goal);

inline constexpr double kIdleFreeRadius = 3.0;

// `contact` is the part point nearest `joint_pos` this tick.
RewardBreakdown hsi_reward(const CharacterState& state, const Vec3& joint_pos,
                           const Vec3& contact, const HsiGoal& goal);

enum class GetUpPhase : std::uint8_t { kSeated, kRising };

RewardBreakdown getup_reward(const CharacterState& state, const Vec3& pelvis_pos,
                             const Vec3& seat_contact, const HsiGoal& goal,
                             GetUpPhase phase);

struct ObjectState {
  Vec3 position = Vec3::Zero();  // AABB center
  Vec3 velocity = Vec3::Zero();
};

// Goal velocity for the carried object: target speed toward the goal, zero
// once within `carry_threshold`.
Vec3 doi_goal_velocity(const ObjectState& object, const DoiGoal& goal,
                       double carry_threshold);

RewardBreakdown doi_reward(const CharacterState& state, const Vec3& hand_pos,
                           const ObjectState& object, const DoiGoal& goal,
                           double carry_threshold);

// lambda_style * style + lambda_task * task. Throws ValidationError for
// inputs outside [0, 1].
double combine(double style_reward, double task_reward, const EpisodeConfig& cfg);

double discounted_return(std::span<const double> rewards, double gamma);

}  // namespace stylescene

#endif  // STYLESCENE_TASKS_HPP_
