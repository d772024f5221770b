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

#include "stylescene/fsm.hpp"

#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <gtest/gtest.h>
#include <nlohmann/json.hpp>

#include "stylescene/error.hpp"
#include "stylescene/planner.hpp"
#include "stylescene/synthetic.hpp"

namespace stylescene {
namespace {

namespace fs = std::filesystem;

Scene empty_scene() {
  return scene_from_json({{"v", 1}, {"bounds", {{"min", {-5, -5}}, {"max", {5, 5}}}},
                          {"objects", nlohmann::json::array()}});
}

LongScript single(SkillId skill, std::optional<std::string> object = {},
                  std::optional<std::string> caption = {}) {
  LongScript s;
  s.keyframes.push_back(Keyframe{skill, std::nullopt, std::move(caption), std::nullopt});
  if (object) s.scene_binding[0] = *object;
  return s;
}

std::string dump(const ExecutionTrace& trace) {
  std::ostringstream out;
  write_trace(trace, out);
  return out.str();
}

LongScript apartment_plan(std::uint64_t seed = 0) {
  const TestEmbedder e;
  const ScriptDatabase db = build_database(
      load_short_scripts(fs::path(STYLESCENE_DATA_DIR) / "example_scripts.json"), e);
  PlanOptions opts;
  opts.seed = seed;
  return plan(db, "a relaxed afternoon", synthetic_apartment(), e, nullptr, opts);
}

TEST(Episode, EmptyScriptCompletesImmediately) {
  const KinematicRuntime rt;
  const Scene scene = empty_scene();
  const LongScript script;
  const auto trace = run_episode(scene, script, EpisodeConfig{}, rt.view(), 1);
  EXPECT_EQ(trace.termination, TerminationReason::kScriptComplete);
  EXPECT_EQ(trace.ticks(), 0);
  EXPECT_TRUE(trace.outcomes.empty());
}

TEST(Episode, MissingBindingFailsAtInit) {
  const KinematicRuntime rt;
  const Scene scene = synthetic_apartment();
  EXPECT_THROW(init_episode(scene, single(SkillId::kSit), EpisodeConfig{}, 0, rt.view()),
               ValidationError);
  EXPECT_THROW(init_episode(scene, single(SkillId::kSit, "sofa_9"), EpisodeConfig{}, 0, rt.view()),
               ValidationError);
  EXPECT_THROW(
      init_episode(scene, single(SkillId::kCarry, "sofa_1"), EpisodeConfig{}, 0, rt.view()),
      ValidationError);
}

TEST(Episode, UnregisteredSkillNamed) {
  const PolicyRegistry empty;
  const TestEmbedder text;
  const StubStyleReward style;
  const Runtime rt{empty, text, style};
  const Scene scene = synthetic_apartment();
  try {
    init_episode(scene, single(SkillId::kSit, "sofa_1"), EpisodeConfig{}, 0, rt);
    FAIL() << "expected an error";
  } catch (const ValidationError& e) {
    EXPECT_NE(std::string(e.what()).find("sit"), std::string::npos) << e.what();
  }
}

TEST(Episode, InfeasibleSceneHasNoTicks) {
  nlohmann::json j = {{"v", 1},
                      {"bounds", {{"min", {-1, -1}}, {"max", {1, 1}}}},
                      {"objects",
                       {{{"id", "slab"},
                         {"category", "floor"},
                         {"pose", {{"x", 0.0}, {"y", 0.0}, {"yaw", 0.0}}},
                         {"geometry", {{"box", {{"min", {-2, -2, 0}}, {"max", {2, 2, 0.1}}}}}}}}}};
  const Scene scene = scene_from_json(j);
  const KinematicRuntime rt;
  const auto trace = run_episode(scene, single(SkillId::kIdle), EpisodeConfig{}, rt.view(), 0);
  EXPECT_EQ(trace.termination, TerminationReason::kInfeasible);
  EXPECT_EQ(trace.ticks(), 0);
  EXPECT_FALSE(trace.message.empty());
}

TEST(Completion, FifteenTicksHold) {
  const KinematicRuntime rt;
  const Scene scene = empty_scene();
  const LongScript script = single(SkillId::kIdle);
  EpisodeConfig cfg;
  FsmState fsm = init_episode(scene, script, cfg, 2, rt.view());
  for (int i = 0; i < 14; ++i) EXPECT_FALSE(check_completion(fsm, cfg)) << i;
  EXPECT_TRUE(check_completion(fsm, cfg));
}

TEST(Completion, ViolationResetsTimer) {
  const KinematicRuntime rt;
  const Scene scene = empty_scene();
  const LongScript script = single(SkillId::kIdle);
  EpisodeConfig cfg;
  FsmState fsm = init_episode(scene, script, cfg, 2, rt.view());
  for (int i = 0; i < 14; ++i) check_completion(fsm, cfg);
  move_rigid(fsm.character, fsm.character.root_pos + Vec3(0.5, 0.0, 0.0), fsm.character.yaw);
  EXPECT_FALSE(check_completion(fsm, cfg));
  EXPECT_EQ(fsm.hold_timer, 0.0);
}

TEST(Completion, Thresholds) {
  const EpisodeConfig cfg;
  EXPECT_EQ(success_threshold(SkillId::kSit, cfg), 0.20);
  EXPECT_EQ(success_threshold(SkillId::kReach, cfg), 0.20);
  EXPECT_EQ(success_threshold(SkillId::kLie, cfg), 0.30);
  EXPECT_EQ(success_threshold(SkillId::kCarry, cfg), 0.20);
  EXPECT_EQ(success_threshold(SkillId::kGetUp, cfg), 0.10);
}

TEST(Termination, Rules) {
  const KinematicRuntime rt;
  const Scene scene = empty_scene();
  const LongScript script = single(SkillId::kIdle);
  EpisodeConfig cfg;
  FsmState fsm = init_episode(scene, script, cfg, 2, rt.view());
  EXPECT_FALSE(check_termination(fsm, cfg, 0.0).has_value());
  EXPECT_EQ(check_termination(fsm, cfg, 6000.0), TerminationReason::kExcessiveContactForce);

  FsmState fallen = init_episode(scene, script, cfg, 2, rt.view());
  move_rigid(fallen.character, Vec3(fallen.character.root_pos.x(), fallen.character.root_pos.y(), 0.1),
             0.0);
  EXPECT_EQ(check_termination(fallen, cfg, 0.0), TerminationReason::kFall);
  fallen.character.posture = Posture::kLying;
  EXPECT_NE(check_termination(fallen, cfg, 0.0), TerminationReason::kFall);

  FsmState late = init_episode(scene, script, cfg, 2, rt.view());
  late.tick = cfg.horizon;
  EXPECT_EQ(check_termination(late, cfg, 0.0), TerminationReason::kHorizonReached);

  FsmState held = init_episode(scene, script, cfg, 2, rt.view());
  for (int i = 0; i < 59; ++i) held.hold_timer += cfg.dt;
  EXPECT_FALSE(check_termination(held, cfg, 0.0).has_value());
  held.hold_timer += cfg.dt;
  EXPECT_EQ(check_termination(held, cfg, 0.0), TerminationReason::kSuccessHold);
}

TEST(Tick, WalkThreeMeters) {
  const KinematicRuntime rt;
  const Scene scene = empty_scene();
  const LongScript script = single(SkillId::kWalk, std::nullopt, "brisk walk");
  EpisodeConfig cfg;
  FsmState fsm = init_episode(scene, script, cfg, 4, rt.view());
  LocoGoal goal;
  goal.target = fsm.character.root2() + 3.0 * fsm.character.facing;
  goal.target_speed = cfg.walk_speed;
  fsm.goal = goal;
  EXPECT_FALSE(fsm.z.is_zero());
  int ticks = 0;
  while (fsm.cursor == 0 && ticks < 500) {
    const Vec2 before = fsm.character.root2();
    const auto events = tick(fsm, rt.view(), cfg);
    ++ticks;
    const double step = (fsm.character.root2() - before).norm();
    if (ticks <= 59) EXPECT_NEAR(step, cfg.walk_speed * cfg.dt, 1e-9) << ticks;
    if (fsm.cursor == 1) {
      ASSERT_EQ(events.size(), 1u);
      EXPECT_EQ(events[0].kind, FsmEvent::Kind::kKeyframeCompleted);
    }
  }
  // Within 0.2 m after 56 ticks, then held for 15.
  EXPECT_NEAR(ticks, 71, 1);
  ASSERT_EQ(fsm.trace.outcomes.size(), 1u);
  EXPECT_TRUE(fsm.trace.outcomes[0].success);
  EXPECT_EQ(fsm.trace.outcomes[0].ticks, ticks);
}

TEST(Tick, ReachHasZeroTextCondition) {
  const KinematicRuntime rt;
  const Scene scene = synthetic_apartment();
  LongScript script = single(SkillId::kReach, "shelf_1", "touching the shelf");
  FsmState fsm = init_episode(scene, script, EpisodeConfig{}, 0, rt.view());
  EXPECT_TRUE(fsm.z.is_zero());
  LongScript sit = single(SkillId::kSit, "sofa_1", "leaning back");
  FsmState s = init_episode(scene, sit, EpisodeConfig{}, 0, rt.view());
  EXPECT_FALSE(s.z.is_zero());
}

TEST(RunEpisode, DeterministicPerSeed) {
  const KinematicRuntime rt;
  const Scene scene = synthetic_apartment();
  const LongScript script = apartment_plan();
  EpisodeConfig cfg;
  cfg.horizon = 20000;
  const auto a = run_episode(scene, script, cfg, rt.view(), 11);
  const auto b = run_episode(scene, script, cfg, rt.view(), 11);
  const auto c = run_episode(scene, script, cfg, rt.view(), 12);
  EXPECT_EQ(dump(a), dump(b));
  EXPECT_NE(dump(a), dump(c));
}

TEST(RunEpisode, KinematicPlanSucceedsWithinThresholds) {
  const KinematicRuntime rt;
  const Scene scene = synthetic_apartment();
  const LongScript script = apartment_plan(5);
  EpisodeConfig cfg;
  cfg.horizon = 20000;
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    const auto trace = run_episode(scene, script, cfg, rt.view(), seed);
    EXPECT_EQ(trace.termination, TerminationReason::kScriptComplete) << trace.message;
    ASSERT_EQ(trace.outcomes.size(), script.keyframes.size());
    std::size_t last_cursor = 0;
    for (const auto& r : trace.records) {
      EXPECT_GE(r.cursor, last_cursor);
      last_cursor = r.cursor;
      EXPECT_GE(r.reward, 0.0);
      EXPECT_LE(r.reward, 1.0);
    }
    for (const auto& o : trace.outcomes) {
      EXPECT_TRUE(o.success) << o.keyframe;
      EXPECT_LE(o.error, success_threshold(o.skill, cfg) + 1e-12);
    }
  }
}

TEST(RunEpisodes, ParallelMatchesSerial) {
  const KinematicRuntime rt;
  const Scene scene = synthetic_apartment();
  const LongScript script = apartment_plan(1);
  EpisodeConfig cfg;
  cfg.horizon = 20000;
  const auto serial = run_episodes(scene, script, cfg, rt.view(), 9, 6, 1);
  const auto parallel = run_episodes(scene, script, cfg, rt.view(), 9, 6, 4);
  ASSERT_EQ(serial.size(), parallel.size());
  for (std::size_t i = 0; i < serial.size(); ++i) EXPECT_EQ(dump(serial[i]), dump(parallel[i]));
  EXPECT_EQ(serial[2].seed, derive_seed(9, 2));
}

TEST(RunEpisode, HorizonMarksOpenKeyframeFailed) {
  const KinematicRuntime rt;
  const Scene scene = synthetic_apartment();
  const LongScript script = apartment_plan();
  EpisodeConfig cfg;
  cfg.horizon = 30;
  const auto trace = run_episode(scene, script, cfg, rt.view(), 0);
  EXPECT_EQ(trace.termination, TerminationReason::kHorizonReached);
  EXPECT_EQ(trace.ticks(), 30);
  ASSERT_FALSE(trace.outcomes.empty());
  EXPECT_FALSE(trace.outcomes.back().success);
}

TEST(TraceIo, RoundTrip) {
  const KinematicRuntime rt;
  const Scene scene = synthetic_apartment();
  const LongScript script = apartment_plan();
  EpisodeConfig cfg;
  cfg.horizon = 400;
  const auto trace = run_episode(scene, script, cfg, rt.view(), 3);
  const fs::path p = fs::temp_directory_path() / "stylescene_trace_roundtrip.jsonl";
  save_trace(trace, p);
  const auto back = load_trace(p);
  EXPECT_EQ(back.ticks(), trace.ticks());
  EXPECT_EQ(back.outcomes, trace.outcomes);
  EXPECT_EQ(back.termination, trace.termination);
  EXPECT_EQ(dump(back), dump(trace));
}

TEST(TraceIo, MalformedLineNamed) {
  const fs::path p = fs::temp_directory_path() / "stylescene_trace_bad.jsonl";
  {
    std::ofstream out(p);
    out << "{\"tick\": 0\n";
  }
  try {
    load_trace(p);
    FAIL() << "expected an error";
  } catch (const ValidationError& e) {
    EXPECT_NE(std::string(e.what()).find(":1"), std::string::npos) << e.what();
  }
}

TEST(TerminationNames, RoundTrip) {
  for (auto r : {TerminationReason::kHorizonReached, TerminationReason::kFall,
                 TerminationReason::kExcessiveContactForce, TerminationReason::kSuccessHold,
                 TerminationReason::kScriptComplete, TerminationReason::kInfeasible}) {
    EXPECT_EQ(parse_termination(to_string(r)), r);
  }
}

}  // namespace
}  // namespace stylescene
