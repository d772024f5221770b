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

#include "stylescene/character.hpp"

#include <cmath>

namespace stylescene {
namespace {

// Standing offsets from the pelvis in the body frame (x forward, y left).
const std::array<Vec3, kJointCount> kStandingOffsets = {
    Vec3(0.0, 0.0, 0.0),    Vec3(0.05, 0.22, 0.0),  Vec3(0.05, -0.22, 0.0),
    Vec3(0.0, 0.1, -0.85),  Vec3(0.0, -0.1, -0.85), Vec3(0.0, 0.0, 0.65)};

Eigen::Quaterniond yaw_quat(double yaw) {
  return Eigen::Quaterniond(Eigen::AngleAxisd(yaw, Vec3::UnitZ()));
}

}  // namespace

std::string_view to_string(JointId joint) {
  static constexpr std::array<std::string_view, kJointCount> kNames = {
      "pelvis", "left_hand", "right_hand", "left_foot", "right_foot", "head"};
  return kNames[static_cast<std::size_t>(joint)];
}

std::string_view to_string(Posture posture) {
  switch (posture) {
    case Posture::kStanding: return "standing";
    case Posture::kSeated: return "seated";
    case Posture::kLying: return "lying";
  }
  return "standing";
}

CharacterState standing_character(const Vec2& position, double yaw) {
  CharacterState s;
  s.root_pos = Vec3(position.x(), position.y(), kStandingPelvisHeight);
  s.yaw = yaw;
  s.facing = heading(yaw);
  const Eigen::Quaterniond q = yaw_quat(yaw);
  for (std::size_t j = 0; j < kJointCount; ++j) {
    s.joints[j] = s.root_pos + q * kStandingOffsets[j];
    s.rotations[j] = q;
  }
  return s;
}

void move_rigid(CharacterState& state, const Vec3& new_root, double new_yaw) {
  const Eigen::Quaterniond turn = yaw_quat(new_yaw - state.yaw);
  for (std::size_t j = 0; j < kJointCount; ++j) {
    state.joints[j] = new_root + turn * (state.joints[j] - state.root_pos);
    state.rotations[j] = (turn * state.rotations[j]).normalized();
  }
  state.root_pos = new_root;
  state.joints[static_cast<std::size_t>(JointId::kPelvis)] = new_root;
  state.yaw = new_yaw;
  state.facing = heading(new_yaw);
}

}  // namespace stylescene
