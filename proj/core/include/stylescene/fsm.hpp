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

#ifndef STYLESCENE_FSM_HPP_
#define STYLESCENE_FSM_HPP_

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "stylescene/planner.hpp"
#include "stylescene/skills.hpp"
#include "stylescene/tasks.hpp"

namespace stylescene {

enum class TerminationReason : std::uint8_t {
  kHorizonReached,
  kFall,
  kExcessiveContactForce,
  kSuccessHold,
  kScriptComplete,
  kInfeasible,
};

std::string_view to_string(TerminationReason reason);
std::optional<TerminationReason> parse_termination(std::string_view name);

struct KeyframeOutcome {
  std::size_t keyframe = 0;
  SkillId skill = SkillId::kWalk;
  bool success = false;
  double error = 0.0;  // final contact / position error, meters
  int ticks = 0;

  friend bool operator==(const KeyframeOutcome&, const KeyframeOutcome&) = default;
};

struct ObjectPose {
  std::string id;
  Vec3 center = Vec3::Zero();
};

struct TraceRecord {
  int tick = 0;
  std::size_t cursor = 0;
  SkillId skill = SkillId::kWalk;
  SkillPhase phase = SkillPhase::kNone;
  std::string goal_kind;
  CharacterState character;
  RewardBreakdown task;
  double style_reward = 0.0;
  double reward = 0.0;
  double error = 0.0;
  double hold_timer = 0.0;
  std::uint64_t heightmap_hash = 0;
  std::vector<ObjectPose> objects;  // dynamic objects, episode pose
};

struct ExecutionTrace {
  std::uint64_t seed = 0;
  std::vector<TraceRecord> records;
  std::vector<KeyframeOutcome> outcomes;
  TerminationReason termination = TerminationReason::kInfeasible;
  std::string message;

  int ticks() const { return static_cast<int>(records.size()); }
};

// Providers an episode calls into. All must be safe for concurrent use.
struct Runtime {
  const PolicyRegistry& registry;
  const EmbeddingProvider& text;
  const StyleRewardProvider& style;
};

// Kinematic registry, test embedder and stub style reward bundled together.
struct KinematicRuntime {
  PolicyRegistry registry = PolicyRegistry::kinematic();
  TestEmbedder text;
  StubStyleReward style;

  Runtime view() const { return {registry, text, style}; }
};

struct FsmState {
  const Scene* scene = nullptr;
  const LongScript* script = nullptr;
  std::size_t cursor = 0;
  CharacterState character;
  std::vector<DynamicObject> objects;  // one per dynamic scene object
  std::optional<GoalCondition> goal;
  double hold_timer = 0.0;
  int tick = 0;
  Rng rng{0};
  SkillPhase phase = SkillPhase::kNone;
  std::unique_ptr<Policy> policy;
  EmbeddingVector z;
  int keyframe_start_tick = 0;
  double force_proxy = 0.0;
  std::optional<std::string> infeasible;  // set when a goal could not be placed
  std::vector<CharacterState> window;  // recent frames for the style reward
  ExecutionTrace trace;

  DynamicObject* object_state(const std::string& id);
  const DynamicObject* object_state(const std::string& id) const;
};

inline constexpr std::size_t kStyleWindow = 8;

// Validates bindings, spawns the character and builds the first goal.
// Throws ValidationError for unbound object keyframes and InfeasibleError
// when no spawn or goal can be placed.
FsmState init_episode(const Scene& scene, const LongScript& script, const EpisodeConfig& cfg,
                      std::uint64_t seed, const Runtime& runtime);

// Active keyframe's distance to success (meters).
double current_error(const FsmState& fsm);

double success_threshold(SkillId skill, const EpisodeConfig& cfg);

// Advances or resets the hold timer and reports whether the condition has
// held for hold_time.
bool check_completion(FsmState& fsm, const EpisodeConfig& cfg);

std::optional<TerminationReason> check_termination(const FsmState& fsm,
                                                   const EpisodeConfig& cfg,
                                                   double force_proxy);

struct FsmEvent {
  enum class Kind : std::uint8_t { kKeyframeCompleted, kKeyframeStarted, kInfeasible };
  Kind kind;
  std::size_t keyframe;
};

std::vector<FsmEvent> tick(FsmState& fsm, const Runtime& runtime, const EpisodeConfig& cfg);

// Records the outcome of an unfinished keyframe and the termination reason.
void finish_episode(FsmState& fsm, TerminationReason reason, const EpisodeConfig& cfg);

ExecutionTrace run_episode(const Scene& scene, const LongScript& script,
                           const EpisodeConfig& cfg, const Runtime& runtime,
                           std::uint64_t seed);

// Episode i uses derive_seed(base_seed, i). Output order matches i
// regardless of `parallel`.
std::vector<ExecutionTrace> run_episodes(const Scene& scene, const LongScript& script,
                                         const EpisodeConfig& cfg, const Runtime& runtime,
                                         std::uint64_t base_seed, std::size_t count,
                                         std::size_t parallel);

nlohmann::json trace_record_to_json(const TraceRecord& record);
TraceRecord trace_record_from_json(const nlohmann::json& j);
nlohmann::json trace_summary_to_json(const ExecutionTrace& trace);

// JSON lines: one record per tick, then {"summary": {...}}.
void write_trace(const ExecutionTrace& trace, std::ostream& out);
void save_trace(const ExecutionTrace& trace, const std::filesystem::path& path);
ExecutionTrace load_trace(const std::filesystem::path& path);

}  // namespace stylescene

#endif  // STYLESCENE_FSM_HPP_
