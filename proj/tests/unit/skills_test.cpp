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

#include <cmath>
#include <numbers>

#include <gtest/gtest.h>

#include "stylescene/error.hpp"
#include "stylescene/synthetic.hpp"

namespace stylescene {
namespace {

constexpr double kDt = 1.0 / 30.0;

TEST(KinematicWalk, StepLengthAndDirection) {
  const CharacterState s = standing_character(Vec2(0.0, 0.0), 0.0);
  const CharacterState n = kinematic_walk(s, Vec2(3.0, 0.0), 1.5, kDt);
  EXPECT_NEAR(n.root_pos.x(), 0.05, 1e-12);
  EXPECT_NEAR(n.root_pos.y(), 0.0, 1e-12);
  EXPECT_NEAR(n.root_vel.x(), 1.5, 1e-9);
  EXPECT_EQ(n.root_pos.z(), s.root_pos.z());
}

TEST(KinematicWalk, SnapsAndFixedPoint) {
  const CharacterState s = standing_character(Vec2(1.0, 1.0), 0.0);
  const CharacterState snapped = kinematic_walk(s, Vec2(1.01, 1.0), 1.5, kDt);
  EXPECT_EQ(snapped.root2(), Vec2(1.01, 1.0));
  const CharacterState still = kinematic_walk(snapped, Vec2(1.01, 1.0), 1.5, kDt);
  EXPECT_EQ(still.root_pos, snapped.root_pos);
  EXPECT_EQ(still.root_vel, Vec3::Zero());
}

TEST(KinematicWalk, YawRateLimited) {
  const CharacterState s = standing_character(Vec2(0.0, 0.0), 0.0);
  const CharacterState n = kinematic_walk(s, Vec2(-3.0, 0.0), 1.5, kDt);
  EXPECT_LE(std::abs(n.yaw - s.yaw), std::numbers::pi * kDt + 1e-12);
}

TEST(KinematicWalk, ContractionWithinTickBound) {
  Rng rng(3);
  for (int n = 0; n < 200; ++n) {
    CharacterState s = standing_character(Vec2(rng.uniform(-4, 4), rng.uniform(-4, 4)),
                                          rng.uniform(-3, 3));
    const Vec2 target(rng.uniform(-4, 4), rng.uniform(-4, 4));
    const double d0 = (target - s.root2()).norm();
    const int bound = static_cast<int>(std::ceil(d0 / (1.5 * kDt))) + 1;
    double last = d0;
    int ticks = 0;
    while ((target - s.root2()).norm() > 0.0 && ticks <= bound) {
      const CharacterState next = kinematic_walk(s, target, 1.5, kDt);
      const double d = (target - next.root2()).norm();
      ASSERT_LE(d, last);
      ASSERT_LE((next.root_pos - s.root_pos).norm(), 1.5 * kDt + 1e-12);
      for (std::size_t j = 0; j < kJointCount; ++j) {
        // Joints also sweep around the root while the heading turns.
        const double arm = (s.joints[j] - s.root_pos).head<2>().norm();
        ASSERT_LE((next.joints[j] - s.joints[j]).norm(),
                  1.5 * kDt + arm * std::numbers::pi * kDt + 1e-9);
        ASSERT_TRUE(next.joints[j].allFinite());
      }
      last = d;
      s = next;
      ++ticks;
    }
    EXPECT_LE(ticks, bound);
    EXPECT_EQ(s.root2(), target);
  }
}

TEST(KinematicContact, PelvisDropsOntoSeat) {
  const CharacterState start = standing_character(Vec2(0.0, 0.0), 0.0);
  const Vec3 seat = start.root_pos - Vec3(0.0, 0.0, 0.3);
  const SurfacePart part(PointCloud{seat});
  CharacterState s = start;
  int ticks = 0;
  while (s.joint(JointId::kPelvis) != seat && ticks < 50) {
    s = kinematic_contact(s, part, JointId::kPelvis, SkillId::kSit, 1.0, kDt);
    ++ticks;
  }
  EXPECT_EQ(ticks, 9);
  EXPECT_EQ(s.posture, Posture::kSeated);
  const CharacterState again = kinematic_contact(s, part, JointId::kPelvis, SkillId::kSit, 1.0, kDt);
  EXPECT_EQ(again.root_pos, s.root_pos);
}

TEST(KinematicContact, ReachMovesOnlyTheHand) {
  const CharacterState start = standing_character(Vec2(0.0, 0.0), 0.0);
  const Vec3 point = start.joint(JointId::kRightHand) + Vec3(0.2, 0.0, 0.1);
  const SurfacePart part(PointCloud{point});
  const CharacterState s =
      kinematic_contact(start, part, JointId::kRightHand, SkillId::kReach, 1.0, kDt);
  EXPECT_EQ(s.root_pos, start.root_pos);
  EXPECT_EQ(s.joint(JointId::kLeftHand), start.joint(JointId::kLeftHand));
  EXPECT_NEAR((s.joint(JointId::kRightHand) - start.joint(JointId::kRightHand)).norm(), kDt,
              1e-12);
}

TEST(KinematicGetUp, RisesToStandingTarget) {
  CharacterState s = standing_character(Vec2(0.0, 0.0), 0.0);
  move_rigid(s, Vec3(0.0, 0.0, 0.45), 0.0);
  s.posture = Posture::kSeated;
  const Vec3 target(0.6, 0.0, 0.9);
  int ticks = 0;
  while (s.root_pos != target && ticks < 100) {
    s = kinematic_getup(s, target, 1.0, kDt);
    ++ticks;
  }
  EXPECT_EQ(s.root_pos, target);
  EXPECT_EQ(s.posture, Posture::kStanding);
  EXPECT_LE(ticks, static_cast<int>(std::ceil(Vec3(0.6, 0, 0.45).norm() / kDt)) + 1);
}

struct CarryRun {
  int approach = 0, grasp = 0, transport = 0;
  double max_grip_gap = 0.0;
  DynamicObject object;
};

CarryRun run_carry(const Scene& scene, const std::string& id, const Vec2& start,
                   const Vec3& target) {
  EpisodeConfig cfg;
  DynamicObject obj{*scene.index_of(id), Vec3::Zero(), Vec3::Zero()};
  DoiGoal goal;
  goal.target = target;
  goal.target_speed = cfg.walk_speed;
  CharacterState s = standing_character(start, 0.0);
  SkillPhase phase = SkillPhase::kApproach;
  CarryRun run;
  for (int t = 0; t < 1000 && phase != SkillPhase::kReleased; ++t) {
    const SkillPhase before = phase;
    const CarryStep step = kinematic_carry(s, obj, scene, goal, phase, cfg);
    s = step.character;
    obj = step.object;
    phase = step.phase;
    if (before == SkillPhase::kApproach) ++run.approach;
    if (before == SkillPhase::kGrasp) ++run.grasp;
    if (before == SkillPhase::kTransport) {
      ++run.transport;
      const auto grips = grip_points(obj.box(scene), s.facing);
      run.max_grip_gap = std::max({run.max_grip_gap, (s.joint(JointId::kLeftHand) - grips[0]).norm(),
                                   (s.joint(JointId::kRightHand) - grips[1]).norm()});
    }
  }
  run.object = obj;
  return run;
}

TEST(KinematicCarry, TwoMetersTransport) {
  const Scene scene = synthetic_apartment();
  const Vec3 center = scene.find("toy_1")->aabb.center();
  const Vec3 target = center + Vec3(2.0, 0.0, 0.0);
  const CarryRun run = run_carry(scene, "toy_1", center.head<2>() - Vec2(1.5, 0.0), target);
  EXPECT_NEAR(run.transport, 40, 1);
  EXPECT_GT(run.approach, 0);
  EXPECT_GT(run.grasp, 0);
  EXPECT_LE(run.max_grip_gap, 1e-12);
  EXPECT_EQ(run.object.box(scene).center(), target);
}

TEST(KinematicCarry, AlreadyAtGoalReleasesImmediately) {
  const Scene scene = synthetic_apartment();
  const Vec3 center = scene.find("toy_1")->aabb.center();
  const CarryRun run = run_carry(scene, "toy_1", center.head<2>() - Vec2(1.0, 0.0), center);
  EXPECT_EQ(run.approach, 1);
  EXPECT_EQ(run.transport, 0);
}

TEST(StubStyleReward, AlignedAntipodalOrthogonal) {
  const StubStyleReward stub(0);
  const std::vector<CharacterState> window = {standing_character(Vec2::Zero(), 0.0)};
  const EmbeddingVector sig = test_embed(window_signature(window), 64, 0);
  EXPECT_NEAR(stub.style_reward(window, sig), 1.0, 1e-12);
  EmbeddingVector anti = sig;
  for (double& v : anti.values) v = -v;
  EXPECT_NEAR(stub.style_reward(window, anti), 0.0, 1e-12);
  // Gram-Schmidt against the signature.
  EmbeddingVector other = test_embed("unrelated text", 64, 0);
  const double d = cosine_similarity(other, sig);
  for (std::size_t i = 0; i < 64; ++i) other.values[i] -= d * sig.values[i];
  EXPECT_NEAR(stub.style_reward(window, normalize(other)), 0.5, 1e-12);
  EXPECT_EQ(stub.style_reward(window, EmbeddingVector::zero(64)), 0.5);
}

TEST(Registry, KinematicCoversAllSkills) {
  const PolicyRegistry r = PolicyRegistry::kinematic();
  for (SkillId s : kAllSkills) EXPECT_TRUE(r.contains(s)) << to_string(s);
  PolicyRegistry empty;
  try {
    empty.create(SkillId::kLie);
    FAIL() << "expected an error";
  } catch (const ValidationError& e) {
    EXPECT_NE(std::string(e.what()).find("lie"), std::string::npos);
  }
}

TEST(Observation, Dimensions) {
  const CharacterState s = standing_character(Vec2(1.0, 2.0), 0.3);
  EXPECT_EQ(encode_proprio(s).size(), 50u);
  LocoGoal lg;
  lg.target = Vec2(3.0, 2.0);
  EXPECT_EQ(encode_goal(lg, s), (std::vector<double>{2.0, 0.0}));
  HsiGoal hg;
  hg.joint = JointId::kRightHand;
  const auto hsi = encode_goal(hg, s);
  ASSERT_EQ(hsi.size(), 6u);
  EXPECT_EQ(hsi[5], 1.0);
  EXPECT_EQ(encode_goal(DoiGoal{}, s).size(), 27u);
  const Observation obs = make_observation(s, HeightmapObservation{}, GoalCondition(lg),
                                           EmbeddingVector::zero(64));
  EXPECT_EQ(obs.flatten().size(), 50u + 144u + 2u + 64u);
}

TEST(InteractionPart, Preferences) {
  const Scene scene = synthetic_apartment();
  EXPECT_EQ(interaction_part(*scene.find("sofa_1"), SkillId::kSit), "seat");
  EXPECT_EQ(interaction_part(*scene.find("bed_1"), SkillId::kLie), "bed");
  EXPECT_EQ(interaction_part(*scene.find("sofa_1"), SkillId::kLie), "seat");
  EXPECT_EQ(interaction_part(*scene.find("shelf_1"), SkillId::kReach), "front");
  EXPECT_EQ(interaction_part(*scene.find("lamp_1"), SkillId::kReach), "surface");
}

}  // namespace
}  // namespace stylescene
