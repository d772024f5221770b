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

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <mutex>
#include <thread>

#include "stylescene/error.hpp"

namespace stylescene {
namespace {

constexpr double kTimeTolerance = 1e-9;

const SceneObject* bound_object(const FsmState& fsm, std::size_t keyframe) {
  const auto it = fsm.script->scene_binding.find(keyframe);
  if (it == fsm.script->scene_binding.end()) return nullptr;
  return fsm.scene->find(it->second);
}

const SceneObject& require_bound(const FsmState& fsm, std::size_t keyframe) {
  const SceneObject* o = bound_object(fsm, keyframe);
  if (o == nullptr) {
    throw ValidationError("keyframe " + std::to_string(keyframe) + " has no scene binding");
  }
  return *o;
}

void setup_keyframe(FsmState& fsm, const Runtime& runtime, const EpisodeConfig& cfg) {
  const Keyframe& kf = fsm.script->keyframes[fsm.cursor];
  const Scene& scene = *fsm.scene;
  const CharacterState& ch = fsm.character;
  fsm.phase = SkillPhase::kNone;
  switch (kf.skill) {
    case SkillId::kWalk:
      if (const SceneObject* o = bound_object(fsm, fsm.cursor)) {
        SceneObject moved = *o;
        if (const DynamicObject* d = fsm.object_state(o->id)) moved.aabb = d->box(scene);
        fsm.goal = make_object_approach_goal(moved, ch, cfg);
      } else {
        fsm.goal = make_loco_goal(scene, ch, LocoMode::kWalk, fsm.rng, cfg);
      }
      break;
    case SkillId::kIdle:
      fsm.goal = make_loco_goal(scene, ch, LocoMode::kIdle, fsm.rng, cfg);
      break;
    case SkillId::kSit:
    case SkillId::kLie: {
      const SceneObject& o = require_bound(fsm, fsm.cursor);
      fsm.goal = make_hsi_goal(scene, o.id, interaction_part(o, kf.skill), JointId::kPelvis,
                               ch, cfg);
      fsm.phase = SkillPhase::kApproach;
      break;
    }
    case SkillId::kReach: {
      const SceneObject& o = require_bound(fsm, fsm.cursor);
      fsm.goal = make_hsi_goal(scene, o.id, interaction_part(o, kf.skill), std::nullopt, ch,
                               cfg);
      fsm.phase = SkillPhase::kApproach;
      break;
    }
    case SkillId::kGetUp: {
      const SceneObject& o = require_bound(fsm, fsm.cursor);
      fsm.goal = make_getup_goal(scene, o.id, interaction_part(o, kf.skill), ch, cfg);
      fsm.phase = ch.posture == Posture::kStanding ? SkillPhase::kRising : SkillPhase::kSeated;
      break;
    }
    case SkillId::kCarry: {
      const SceneObject& o = require_bound(fsm, fsm.cursor);
      const DynamicObject* d = fsm.object_state(o.id);
      if (d == nullptr) throw ValidationError("carry target '" + o.id + "' is not dynamic");
      fsm.goal = make_doi_goal(scene, o.id, d->box(scene), std::nullopt, fsm.rng, cfg);
      fsm.phase = SkillPhase::kApproach;
      break;
    }
  }
  fsm.z = is_text_conditioned(kf.skill) && kf.caption ? runtime.text.embed(*kf.caption)
                                                      : EmbeddingVector::zero(runtime.text.dim());
  fsm.policy = runtime.registry.create(kf.skill);
  fsm.hold_timer = 0.0;
  fsm.keyframe_start_tick = fsm.tick;
}

Vec3 nearer_hand(const CharacterState& ch, const Vec3& p) {
  const Vec3& l = ch.joint(JointId::kLeftHand);
  const Vec3& r = ch.joint(JointId::kRightHand);
  return (r - p).squaredNorm() < (l - p).squaredNorm() ? r : l;
}

RewardBreakdown task_reward(const FsmState& fsm, const CharacterState& prev,
                            const EpisodeConfig& cfg) {
  const SkillId skill = fsm.script->keyframes[fsm.cursor].skill;
  const CharacterState& ch = fsm.character;
  const GoalCondition& goal = *fsm.goal;
  switch (skill) {
    case SkillId::kWalk: return loco_reward(ch, prev, std::get<LocoGoal>(goal));
    case SkillId::kIdle: return idle_reward(ch, prev, std::get<LocoGoal>(goal));
    case SkillId::kSit:
    case SkillId::kLie:
    case SkillId::kReach: {
      const auto& g = std::get<HsiGoal>(goal);
      const Vec3& joint = ch.joint(g.joint);
      const Vec3 contact = fsm.scene->find(g.object_id)->part(g.part).nearest(joint).point;
      return hsi_reward(ch, joint, contact, g);
    }
    case SkillId::kGetUp: {
      const auto& g = std::get<HsiGoal>(goal);
      const Vec3& pelvis = ch.joint(JointId::kPelvis);
      const Vec3 seat = fsm.scene->find(g.object_id)->part(g.part).nearest(pelvis).point;
      return getup_reward(ch, pelvis, seat, g,
                          fsm.phase == SkillPhase::kSeated ? GetUpPhase::kSeated
                                                           : GetUpPhase::kRising);
    }
    case SkillId::kCarry: {
      const auto& g = std::get<DoiGoal>(goal);
      const ObjectState obj = fsm.object_state(g.object_id)->state(*fsm.scene);
      return doi_reward(ch, nearer_hand(ch, obj.position), obj, g, cfg.carry_threshold);
    }
  }
  return {};
}

std::vector<ObjectPose> object_poses(const FsmState& fsm) {
  std::vector<ObjectPose> out;
  out.reserve(fsm.objects.size());
  for (const auto& d : fsm.objects) {
    out.push_back({fsm.scene->objects()[d.index].id, d.box(*fsm.scene).center()});
  }
  return out;
}

}  // namespace

std::string_view to_string(TerminationReason reason) {
  switch (reason) {
    case TerminationReason::kHorizonReached: return "HorizonReached";
    case TerminationReason::kFall: return "Fall";
    case TerminationReason::kExcessiveContactForce: return "ExcessiveContactForce";
    case TerminationReason::kSuccessHold: return "SuccessHold";
    case TerminationReason::kScriptComplete: return "ScriptComplete";
    case TerminationReason::kInfeasible: return "Infeasible";
  }
  return "Infeasible";
}

std::optional<TerminationReason> parse_termination(std::string_view name) {
  for (auto r : {TerminationReason::kHorizonReached, TerminationReason::kFall,
                 TerminationReason::kExcessiveContactForce, TerminationReason::kSuccessHold,
                 TerminationReason::kScriptComplete, TerminationReason::kInfeasible}) {
    if (to_string(r) == name) return r;
  }
  return std::nullopt;
}

DynamicObject* FsmState::object_state(const std::string& id) {
  const auto idx = scene->index_of(id);
  if (!idx) return nullptr;
  for (auto& d : objects) {
    if (d.index == *idx) return &d;
  }
  return nullptr;
}

const DynamicObject* FsmState::object_state(const std::string& id) const {
  return const_cast<FsmState*>(this)->object_state(id);
}

FsmState init_episode(const Scene& scene, const LongScript& script, const EpisodeConfig& cfg,
                      std::uint64_t seed, const Runtime& runtime) {
  cfg.validate();
  for (std::size_t i = 0; i < script.keyframes.size(); ++i) {
    const Keyframe& kf = script.keyframes[i];
    const auto it = script.scene_binding.find(i);
    if (it == script.scene_binding.end()) {
      if (requires_object(kf.skill)) {
        throw ValidationError("keyframe " + std::to_string(i) + " (" +
                              std::string(to_string(kf.skill)) + ") has no scene binding");
      }
      continue;
    }
    const SceneObject* o = scene.find(it->second);
    if (o == nullptr) {
      throw ValidationError("keyframe " + std::to_string(i) + " is bound to missing object '" +
                            it->second + "'");
    }
    if (kf.skill == SkillId::kCarry && !o->dynamic) {
      throw ValidationError("keyframe " + std::to_string(i) + " carries static object '" +
                            o->id + "'");
    }
  }

  FsmState fsm;
  fsm.scene = &scene;
  fsm.script = &script;
  fsm.rng = Rng(seed);
  fsm.trace.seed = seed;
  for (std::size_t i = 0; i < scene.objects().size(); ++i) {
    if (scene.objects()[i].dynamic) fsm.objects.push_back({i, Vec3::Zero(), Vec3::Zero()});
  }
  const Spawn spawn = sample_spawn(scene, fsm.rng, cfg.spawn_clearance);
  fsm.character = standing_character(spawn.position, spawn.yaw);
  move_rigid(fsm.character, Vec3(spawn.position.x(), spawn.position.y(), cfg.standing_height),
             spawn.yaw);
  fsm.z = EmbeddingVector::zero(runtime.text.dim());
  if (!script.keyframes.empty()) setup_keyframe(fsm, runtime, cfg);
  return fsm;
}

double success_threshold(SkillId skill, const EpisodeConfig& cfg) {
  switch (skill) {
    case SkillId::kWalk:
    case SkillId::kIdle: return cfg.loco_threshold;
    case SkillId::kSit: return cfg.sit_threshold;
    case SkillId::kLie: return cfg.lie_threshold;
    case SkillId::kReach: return cfg.reach_threshold;
    case SkillId::kGetUp: return cfg.getup_threshold;
    case SkillId::kCarry: return cfg.carry_threshold;
  }
  return 0.0;
}

double current_error(const FsmState& fsm) {
  if (!fsm.goal) return 0.0;
  const CharacterState& ch = fsm.character;
  if (const auto* g = std::get_if<LocoGoal>(&*fsm.goal)) {
    return (g->target - ch.root2()).norm();
  }
  if (const auto* g = std::get_if<HsiGoal>(&*fsm.goal)) {
    if (g->standing_target) return (ch.joint(JointId::kPelvis) - *g->standing_target).norm();
    return fsm.scene->find(g->object_id)->part(g->part).nearest(ch.joint(g->joint)).distance;
  }
  const auto& g = std::get<DoiGoal>(*fsm.goal);
  return (fsm.object_state(g.object_id)->state(*fsm.scene).position - g.target).norm();
}

bool check_completion(FsmState& fsm, const EpisodeConfig& cfg) {
  if (fsm.cursor >= fsm.script->keyframes.size()) return false;
  const SkillId skill = fsm.script->keyframes[fsm.cursor].skill;
  if (current_error(fsm) <= success_threshold(skill, cfg)) {
    fsm.hold_timer += cfg.dt;
  } else {
    fsm.hold_timer = 0.0;
  }
  return fsm.hold_timer >= cfg.hold_time - kTimeTolerance;
}

std::optional<TerminationReason> check_termination(const FsmState& fsm,
                                                   const EpisodeConfig& cfg,
                                                   double force_proxy) {
  if (fsm.infeasible) return TerminationReason::kInfeasible;
  if (fsm.character.posture == Posture::kStanding &&
      fsm.character.joint(JointId::kPelvis).z() < cfg.fall_height) {
    return TerminationReason::kFall;
  }
  if (force_proxy > cfg.max_contact_force) return TerminationReason::kExcessiveContactForce;
  const std::size_t n = fsm.script->keyframes.size();
  if (n > 0 && fsm.cursor + 1 == n &&
      fsm.hold_timer >= cfg.success_hold_terminate - kTimeTolerance) {
    return TerminationReason::kSuccessHold;
  }
  if (fsm.cursor >= n) return TerminationReason::kScriptComplete;
  if (fsm.tick >= cfg.horizon) return TerminationReason::kHorizonReached;
  return std::nullopt;
}

std::vector<FsmEvent> tick(FsmState& fsm, const Runtime& runtime, const EpisodeConfig& cfg) {
  if (fsm.cursor >= fsm.script->keyframes.size() || !fsm.goal || !fsm.policy) {
    throw ValidationError("tick called on a finished episode");
  }
  std::vector<FsmEvent> events;
  const Scene& scene = *fsm.scene;
  const Keyframe& kf = fsm.script->keyframes[fsm.cursor];

  std::vector<ObjectDisplacement> displaced;
  for (const auto& d : fsm.objects) {
    if (!d.offset.isZero(0.0)) displaced.push_back({d.index, d.offset});
  }
  const HeightmapObservation hm = compute_heightmap(
      scene, fsm.character.root2(), fsm.character.yaw, displaced, cfg.heightmap_gating);
  const Observation obs = make_observation(fsm.character, hm, *fsm.goal, fsm.z);
  const Action action = fsm.policy->act(obs);
  for (double v : action.values) {
    if (!std::isfinite(v)) throw ValidationError("policy produced a non-finite action");
  }

  const CharacterState prev = fsm.character;
  DynamicObject* carried = nullptr;
  if (const auto* g = std::get_if<DoiGoal>(&*fsm.goal)) carried = fsm.object_state(g->object_id);
  StepContext ctx{scene, cfg, *fsm.goal, fsm.character, fsm.phase, carried, 0.0};
  fsm.policy->advance(action, ctx);
  fsm.force_proxy = ctx.force_proxy;

  const RewardBreakdown task = task_reward(fsm, prev, cfg);
  fsm.window.push_back(fsm.character);
  if (fsm.window.size() > kStyleWindow) fsm.window.erase(fsm.window.begin());
  const double style = runtime.style.style_reward(fsm.window, fsm.z);
  const double reward = combine(style, task.total, cfg);

  const bool done = check_completion(fsm, cfg);
  const double error = current_error(fsm);

  TraceRecord rec;
  rec.tick = fsm.tick;
  rec.cursor = fsm.cursor;
  rec.skill = kf.skill;
  rec.phase = fsm.phase;
  rec.goal_kind = std::string(goal_kind(*fsm.goal));
  rec.character = fsm.character;
  rec.task = task;
  rec.style_reward = style;
  rec.reward = reward;
  rec.error = error;
  rec.hold_timer = fsm.hold_timer;
  rec.heightmap_hash = hm.hash();
  rec.objects = object_poses(fsm);
  fsm.trace.records.push_back(std::move(rec));
  ++fsm.tick;

  if (done) {
    fsm.trace.outcomes.push_back(
        {fsm.cursor, kf.skill, true, error, fsm.tick - fsm.keyframe_start_tick});
    events.push_back({FsmEvent::Kind::kKeyframeCompleted, fsm.cursor});
    ++fsm.cursor;
    if (fsm.cursor < fsm.script->keyframes.size()) {
      try {
        setup_keyframe(fsm, runtime, cfg);
        events.push_back({FsmEvent::Kind::kKeyframeStarted, fsm.cursor});
      } catch (const InfeasibleError& e) {
        fsm.infeasible = e.what();
        events.push_back({FsmEvent::Kind::kInfeasible, fsm.cursor});
      }
    } else {
      fsm.goal.reset();
      fsm.policy.reset();
    }
  }
  return events;
}

void finish_episode(FsmState& fsm, TerminationReason reason, const EpisodeConfig&) {
  fsm.trace.termination = reason;
  const bool open = fsm.cursor < fsm.script->keyframes.size() && fsm.goal && !fsm.infeasible;
  if (open) {
    const bool success = reason == TerminationReason::kSuccessHold;
    fsm.trace.outcomes.push_back({fsm.cursor, fsm.script->keyframes[fsm.cursor].skill, success,
                                  current_error(fsm), fsm.tick - fsm.keyframe_start_tick});
  }
  if (fsm.infeasible) fsm.trace.message = *fsm.infeasible;
}

ExecutionTrace run_episode(const Scene& scene, const LongScript& script,
                           const EpisodeConfig& cfg, const Runtime& runtime,
                           std::uint64_t seed) {
  FsmState fsm;
  try {
    fsm = init_episode(scene, script, cfg, seed, runtime);
  } catch (const InfeasibleError& e) {
    ExecutionTrace trace;
    trace.seed = seed;
    trace.termination = TerminationReason::kInfeasible;
    trace.message = e.what();
    return trace;
  }
  while (true) {
    if (const auto reason = check_termination(fsm, cfg, fsm.force_proxy)) {
      finish_episode(fsm, *reason, cfg);
      break;
    }
    tick(fsm, runtime, cfg);
  }
  return std::move(fsm.trace);
}

std::vector<ExecutionTrace> run_episodes(const Scene& scene, const LongScript& script,
                                         const EpisodeConfig& cfg, const Runtime& runtime,
                                         std::uint64_t base_seed, std::size_t count,
                                         std::size_t parallel) {
  std::vector<ExecutionTrace> out(count);
  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;
  const auto worker = [&] {
    for (std::size_t i = next++; i < count; i = next++) {
      try {
        out[i] = run_episode(scene, script, cfg, runtime, derive_seed(base_seed, i));
      } catch (...) {
        std::lock_guard<std::mutex> lock(failure_mutex);
        if (!failure) failure = std::current_exception();
      }
    }
  };
  const std::size_t threads = std::clamp<std::size_t>(parallel, 1, std::max<std::size_t>(count, 1));
  if (threads == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    pool.reserve(threads);
    for (std::size_t t = 0; t < threads; ++t) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
  }
  if (failure) std::rethrow_exception(failure);
  return out;
}

}  // namespace stylescene
