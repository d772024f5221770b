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

#ifndef STYLESCENE_CHARACTER_HPP_
#define STYLESCENE_CHARACTER_HPP_

#include <array>
#include <cstddef>
#include <string_view>

#include <Eigen/Geometry>

#include "stylescene/scene.hpp"

namespace stylescene {

enum class JointId : std::uint8_t {
  kPelvis,
  kLeftHand,
  kRightHand,
  kLeftFoot,
  kRightFoot,
  kHead,
};

inline constexpr std::size_t kJointCount = 6;
inline constexpr std::array<JointId, kJointCount> kAllJoints = {
    JointId::kPelvis,   JointId::kLeftHand,  JointId::kRightHand,
    JointId::kLeftFoot, JointId::kRightFoot, JointId::kHead};

std::string_view to_string(JointId joint);

enum class Posture : std::uint8_t { kStanding, kSeated, kLying };

std::string_view to_string(Posture posture);

inline constexpr double kStandingPelvisHeight = 0.9;

// Proprioception. The root is the pelvis.
struct CharacterState {
  Vec3 root_pos = Vec3(0.0, 0.0, kStandingPelvisHeight);
  Vec3 root_vel = Vec3::Zero();
  double yaw = 0.0;
  Vec2 facing = Vec2(1.0, 0.0);
  std::array<Vec3, kJointCount> joints{};
  std::array<Eigen::Quaterniond, kJointCount> rotations{};
  Posture posture = Posture::kStanding;

  const Vec3& joint(JointId j) const { return joints[static_cast<std::size_t>(j)]; }
  Vec3& joint(JointId j) { return joints[static_cast<std::size_t>(j)]; }
  Vec2 root2() const { return root_pos.head<2>(); }
};

// Default standing pose at `position` facing `yaw`.
CharacterState standing_character(const Vec2& position, double yaw);

// Moves the root to `new_root` and turns to `new_yaw`, carrying every joint
// rigidly about the root. Velocity is not touched.
void move_rigid(CharacterState& state, const Vec3& new_root, double new_yaw);

// Unit planar heading for a yaw angle.
inline Vec2 heading(double yaw) { return {std::cos(yaw), std::sin(yaw)}; }

}  // namespace stylescene

#endif  // STYLESCENE_CHARACTER_HPP_
