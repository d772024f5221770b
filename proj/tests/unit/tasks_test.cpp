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

#include <cmath>
#include <numbers>
#include <vector>

#include <gtest/gtest.h>
#include <nlohmann/json.hpp>

#include "checks.hpp"
#include "oracles.hpp"
#include "stylescene/error.hpp"
#include "stylescene/synthetic.hpp"

namespace stylescene {
namespace {

CharacterState at(double x, double y, double yaw = 0.0) {
  return standing_character(Vec2(x, y), yaw);
}

TEST(LocoReward, AtTargetIsOne) {
  const CharacterState s = at(1.0, 2.0);
  LocoGoal g;
  g.target = Vec2(1.0, 2.0);
  g.target_speed = 1.5;
  const auto r = loco_reward(s, s, g);
  EXPECT_EQ(r.branch, RewardBranch::kNear);
  EXPECT_NEAR(r.total, 1.0, 1e-12);
}

TEST(LocoReward, TwoMetersPerpendicularFacing) {
  // Facing +y, target along +x.
  const CharacterState s = at(0.0, 0.0, std::numbers::pi / 2);
  LocoGoal g;
  g.target = Vec2(2.0, 0.0);
  g.target_speed = 1.5;
  const auto r = loco_reward(s, s, g);
  EXPECT_EQ(r.branch, RewardBranch::kFar);
  EXPECT_NEAR(r.total, 0.0417, 5e-5);
  EXPECT_NEAR(r.total, 0.5 * (0.6 * std::exp(-2.0) + 0.2 * std::exp(-4.5)) + 0.4 * std::exp(-40.0),
              1e-12);
}

TEST(LocoReward, BranchBoundaryIsStrict) {
  const CharacterState s = at(0.0, 0.0);
  LocoGoal g;
  g.target = Vec2(0.5, 0.5);  // squared distance exactly 0.5
  EXPECT_EQ(loco_reward(s, s, g).branch, RewardBranch::kNear);
  g.target = Vec2(0.5, 0.5000001);
  EXPECT_EQ(loco_reward(s, s, g).branch, RewardBranch::kFar);
}

TEST(LocoReward, SingularDirectionUsesFacing) {
  CharacterState s = at(0.0, 0.0, 0.0);
  s.root_vel = Vec3(1.0, 0.0, 0.0);
  LocoGoal g;
  g.target = Vec2(0.0, 0.0);
  g.target_speed = 1.0;
  const auto r = loco_reward(s, s, g);
  ASSERT_TRUE(r.term("far").has_value());
  EXPECT_NEAR(*r.term("far"), 1.0, 1e-12);
  EXPECT_TRUE(std::isfinite(r.total));
}

TEST(IdleReward, WithinFreeRadiusIsOne) {
  const CharacterState s = at(2.0, 0.0);
  LocoGoal g;
  g.mode = LocoMode::kIdle;
  g.target = Vec2(0.0, 0.0);
  EXPECT_NEAR(idle_reward(s, s, g).total, 1.0, 1e-12);
}

TEST(IdleReward, FiveMetersIsFar) {
  const CharacterState s = at(5.0, 0.0);
  LocoGoal g;
  g.mode = LocoMode::kIdle;
  const auto r = idle_reward(s, s, g);
  EXPECT_EQ(r.branch, RewardBranch::kFar);
  EXPECT_NEAR(*r.term("near"), std::exp(-40.0), 1e-15);
}

TEST(HsiReward, NearBranchContactOffset) {
  const CharacterState s = at(0.0, 0.0);
  HsiGoal g;
  g.target = s.root_pos;
  const Vec3 joint = s.root_pos;
  const Vec3 contact = joint + Vec3(0.1, 0.0, 0.0);
  const auto r = hsi_reward(s, joint, contact, g);
  EXPECT_EQ(r.branch, RewardBranch::kNear);
  EXPECT_NEAR(r.total, 0.9334, 5e-5);
  EXPECT_NEAR(r.total, 0.7 * std::exp(-0.1) + 0.3, 1e-12);
}

TEST(HsiReward, FarBranchMatchedSpeed) {
  CharacterState s = at(0.0, 0.0);
  s.root_vel = Vec3(1.5, 0.0, 0.0);
  HsiGoal g;
  g.target = Vec3(1.5, 0.0, 0.9);
  g.target_speed = 1.5;
  const Vec3 joint = s.root_pos;
  const auto r = hsi_reward(s, joint, g.target, g);
  EXPECT_EQ(r.branch, RewardBranch::kFar);
  EXPECT_NEAR(r.total, 0.7 * std::exp(-10.0 * 2.25) + 0.3, 1e-12);
}

TEST(HsiReward, OnContactIsOne) {
  const CharacterState s = at(0.0, 0.0);
  HsiGoal g;
  g.target = s.root_pos;
  EXPECT_NEAR(hsi_reward(s, s.root_pos, s.root_pos, g).total, 1.0, 1e-12);
}

TEST(GetUpReward, RisingWithoutStandingTargetThrows) {
  const CharacterState s = at(0.0, 0.0);
  HsiGoal g;
  EXPECT_THROW(getup_reward(s, s.root_pos, s.root_pos, g, GetUpPhase::kRising), ValidationError);
}

TEST(GetUpReward, PhaseExamples) {
  const CharacterState s = at(0.0, 0.0);
  HsiGoal g;
  g.target = Vec3(0.0, 0.0, 0.45);
  g.standing_target = Vec3(0.0, 0.0, 0.9);
  EXPECT_NEAR(getup_reward(s, s.root_pos, s.root_pos, g, GetUpPhase::kRising).total, 1.0, 1e-12);
  CharacterState seated = s;
  seated.root_pos = g.target;
  EXPECT_NEAR(getup_reward(seated, g.target, g.target, g, GetUpPhase::kSeated).total, 1.0, 1e-12);
  CharacterState low = s;
  low.root_pos.z() = 0.6;
  const auto r = getup_reward(low, low.root_pos, low.root_pos, g, GetUpPhase::kRising);
  EXPECT_NEAR(*r.term("near"), 0.4066, 5e-5);
  EXPECT_NEAR(*r.term("near"), std::exp(-0.9), 1e-12);
}

TEST(DoiReward, EverythingAtGoalIsOne) {
  CharacterState s = at(1.0, 1.0);
  DoiGoal g;
  g.target = Vec3(1.0, 1.0, 0.15);
  g.target_speed = 1.5;
  ObjectState obj;
  obj.position = g.target;
  const auto r = doi_reward(s, obj.position, obj, g, 0.2);
  EXPECT_EQ(r.branch, RewardBranch::kNear);
  EXPECT_NEAR(r.total, 1.0, 1e-12);
}

TEST(DoiReward, TwoMetersFromGoal) {
  CharacterState s = at(0.0, 0.0);
  DoiGoal g;
  g.target = Vec3(2.0, 0.0, 0.15);
  g.target_speed = 1.5;
  ObjectState obj;
  obj.position = Vec3(0.0, 0.0, 0.15);
  obj.velocity = Vec3(1.5, 0.0, 0.0);
  s.root_vel = Vec3(1.5, 0.0, 0.0);
  const auto r = doi_reward(s, obj.position, obj, g, 0.2);
  EXPECT_EQ(r.branch, RewardBranch::kFar);
  EXPECT_NEAR(*r.term("carry"), 0.7 * std::exp(-40.0) + 0.3, 1e-12);
  EXPECT_NEAR(r.total, 0.3 + 0.5 * *r.term("carry") + 0.2, 1e-12);
}

TEST(DoiReward, HandOneMeterAway) {
  CharacterState s = at(0.0, 0.0);
  DoiGoal g;
  g.target = Vec3(0.0, 0.0, 0.15);
  ObjectState obj;
  obj.position = g.target;
  const auto r = doi_reward(s, obj.position + Vec3(0.0, 1.0, 0.0), obj, g, 0.2);
  EXPECT_NEAR(*r.term("hand"), 0.6065, 5e-5);
}

TEST(DoiReward, GoalVelocityZeroInsideThreshold) {
  DoiGoal g;
  g.target = Vec3(0.1, 0.0, 0.0);
  g.target_speed = 1.5;
  ObjectState obj;
  EXPECT_EQ(doi_goal_velocity(obj, g, 0.2), Vec3::Zero());
  g.target = Vec3(3.0, 0.0, 0.0);
  EXPECT_NEAR((doi_goal_velocity(obj, g, 0.2) - Vec3(1.5, 0.0, 0.0)).norm(), 0.0, 1e-15);
}

TEST(RewardOracle, AllTemplatesAgree) {
  using check::RewardTemplate;
  for (auto t : {RewardTemplate::kLoco, RewardTemplate::kIdle, RewardTemplate::kHsi,
                 RewardTemplate::kGetUp, RewardTemplate::kDoi}) {
    const auto cmp = check::compare_rewards(t, 2000, 17);
    EXPECT_LE(cmp.max_abs_diff, 1e-9) << check::to_string(t);
    EXPECT_GT(cmp.far_count, 100u) << check::to_string(t);
    EXPECT_GT(cmp.near_count, 100u) << check::to_string(t);
  }
}

TEST(RewardRange, TotalsAndTermsInUnitInterval) {
  Rng rng(5);
  for (int n = 0; n < 20000; ++n) {
    CharacterState s = at(rng.uniform(-5, 5), rng.uniform(-5, 5), rng.uniform(-3, 3));
    s.root_vel = Vec3(rng.normal() * 3, rng.normal() * 3, 0.0);
    CharacterState prev = s;
    prev.root_vel = Vec3(rng.normal() * 3, rng.normal() * 3, 0.0);
    LocoGoal lg;
    lg.target = Vec2(rng.uniform(-5, 5), rng.uniform(-5, 5));
    lg.target_speed = rng.uniform(0, 3);
    HsiGoal hg;
    hg.target = Vec3(rng.uniform(-5, 5), rng.uniform(-5, 5), rng.uniform(0, 1));
    DoiGoal dg;
    dg.target = hg.target;
    dg.target_speed = 1.5;
    ObjectState obj{Vec3(rng.uniform(-5, 5), rng.uniform(-5, 5), 0.1),
                    Vec3(rng.normal(), rng.normal(), 0.0)};
    for (const auto& r : {loco_reward(s, prev, lg), idle_reward(s, prev, lg),
                          hsi_reward(s, s.root_pos, hg.target, hg),
                          doi_reward(s, s.root_pos, obj, dg, 0.2)}) {
      ASSERT_GE(r.total, 0.0);
      ASSERT_LE(r.total, 1.0);
      for (const auto& [name, v] : r.terms) {
        ASSERT_GE(v, 0.0) << name;
        ASSERT_LE(v, 1.0) << name;
      }
    }
  }
}

TEST(RewardMonotone, NearDecreasesWithDistance) {
  const CharacterState s = at(0.0, 0.0);
  HsiGoal g;
  g.target = s.root_pos;
  double last = 2.0;
  for (double d = 0.0; d < 2.0; d += 0.05) {
    const double r = *hsi_reward(s, s.root_pos, s.root_pos + Vec3(d, 0, 0), g).term("near");
    EXPECT_LT(r, last);
    last = r;
  }
}

TEST(Combine, Examples) {
  EpisodeConfig cfg;
  EXPECT_DOUBLE_EQ(combine(1.0, 1.0, cfg), 1.0);
  EXPECT_DOUBLE_EQ(combine(0.0, 0.6, cfg), 0.3);
  cfg.lambda_style = 0.3;
  cfg.lambda_task = 0.7;
  EXPECT_NEAR(combine(0.4, 0.8, cfg), 0.68, 1e-15);
  EXPECT_THROW(combine(1.2, 0.5, cfg), ValidationError);
  EXPECT_THROW(combine(0.5, -0.1, cfg), ValidationError);
}

TEST(DiscountedReturn, Examples) {
  const std::vector<double> ones(300, 1.0);
  EXPECT_DOUBLE_EQ(discounted_return(ones, 1.0), 300.0);
  const std::vector<double> r = {0.7, 1.0, 1.0};
  EXPECT_DOUBLE_EQ(discounted_return(r, 0.0), 0.7);
  const std::vector<double> three = {1.0, 1.0, 1.0};
  EXPECT_DOUBLE_EQ(discounted_return(three, 0.5), 1.75);
  EXPECT_THROW(discounted_return(three, 1.5), ValidationError);
}

TEST(EpisodeConfigJson, RoundTripAndErrors) {
  EpisodeConfig cfg;
  cfg.horizon = 1234;
  cfg.lambda_style = 0.25;
  const EpisodeConfig back = episode_config_from_json(to_json(cfg));
  EXPECT_EQ(back.horizon, 1234);
  EXPECT_EQ(back.lambda_style, 0.25);
  EXPECT_EQ(episode_config_from_json(nlohmann::json::object()).horizon, 300);
  EXPECT_THROW(episode_config_from_json({{"bogus", 1}}), ValidationError);
  EXPECT_THROW(episode_config_from_json({{"dt", 0.0}}), ValidationError);
  EXPECT_THROW(episode_config_from_json({{"gamma", 1.5}}), ValidationError);
}

TEST(Goals, IdleTargetIsRoot) {
  const Scene scene = synthetic_apartment();
  Rng rng(1);
  const auto g = make_loco_goal(scene, at(2.0, 3.0), LocoMode::kIdle, rng, EpisodeConfig{});
  EXPECT_EQ(g.target, Vec2(2.0, 3.0));
  EXPECT_EQ(g.target_speed, 0.0);
}

TEST(Goals, WalkTargetAtLeastOneMeterAndReproducible) {
  const Scene scene = synthetic_apartment();
  const CharacterState s = at(5.0, 4.0);
  for (std::uint64_t seed = 0; seed < 200; ++seed) {
    Rng a(seed), b(seed);
    const auto ga = make_loco_goal(scene, s, LocoMode::kWalk, a, EpisodeConfig{});
    const auto gb = make_loco_goal(scene, s, LocoMode::kWalk, b, EpisodeConfig{});
    EXPECT_GE((ga.target - s.root2()).norm(), 1.0);
    EXPECT_EQ(ga.target, gb.target);
    EXPECT_EQ(ga.target_speed, 1.5);
  }
}

TEST(Goals, HsiTargetMatchesLinearScan) {
  const Scene scene = synthetic_apartment();
  const CharacterState s = at(2.0, 4.5);
  const auto g = make_hsi_goal(scene, "sofa_1", "seat", JointId::kPelvis, s, EpisodeConfig{});
  const auto& pts = scene.find("sofa_1")->part("seat").points();
  const auto ref = oracle::linear_nearest(pts, s.joint(JointId::kPelvis));
  EXPECT_EQ(g.target, pts[ref.index]);
}

TEST(Goals, ReachPicksNearerHand) {
  const Scene scene = synthetic_apartment();
  const CharacterState s = at(1.2, 3.0, std::numbers::pi / 2);
  const auto g = make_hsi_goal(scene, "shelf_1", "front", std::nullopt, s, EpisodeConfig{});
  const auto& pts = scene.find("shelf_1")->part("front").points();
  const auto l = oracle::linear_nearest(pts, s.joint(JointId::kLeftHand));
  const auto r = oracle::linear_nearest(pts, s.joint(JointId::kRightHand));
  EXPECT_EQ(g.joint, r.distance < l.distance ? JointId::kRightHand : JointId::kLeftHand);
  EXPECT_EQ(g.target, pts[(r.distance < l.distance ? r : l).index]);
}

TEST(Goals, DoiCornersAndStaticRejected) {
  const Scene scene = synthetic_apartment();
  Rng rng(3);
  const Aabb unit{Vec3(-0.5, -0.5, 0.0), Vec3(0.5, 0.5, 1.0)};
  const auto g = make_doi_goal(scene, "toy_1", unit, Vec2(4.0, 4.0), rng, EpisodeConfig{});
  for (const auto& c : g.bbox_corners) {
    EXPECT_EQ(std::abs(c.x()), 0.5);
    EXPECT_EQ(std::abs(c.y()), 0.5);
    EXPECT_TRUE(c.z() == 0.0 || c.z() == 1.0);
  }
  EXPECT_EQ(g.target, Vec3(4.0, 4.0, 0.5));
  EXPECT_THROW(make_doi_goal(scene, "sofa_1", unit, std::nullopt, rng, EpisodeConfig{}),
               ValidationError);
  Rng a(9), b(9);
  const Aabb toy = scene.find("toy_1")->aabb;
  EXPECT_EQ(make_doi_goal(scene, "toy_1", toy, std::nullopt, a, EpisodeConfig{}).target,
            make_doi_goal(scene, "toy_1", toy, std::nullopt, b, EpisodeConfig{}).target);
}

}  // namespace
}  // namespace stylescene
