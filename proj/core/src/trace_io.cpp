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

#include <fstream>
#include <ostream>
#include <string>

#include <nlohmann/json.hpp>

#include "stylescene/error.hpp"
#include "stylescene/fsm.hpp"

namespace stylescene {
namespace {

using nlohmann::json;

json vec(const Vec3& v) { return json::array({v.x(), v.y(), v.z()}); }

Vec3 vec3_from(const json& j) {
  if (!j.is_array() || j.size() != 3) throw ValidationError("expected [x, y, z]");
  return {j[0].get<double>(), j[1].get<double>(), j[2].get<double>()};
}

std::optional<SkillPhase> parse_phase(std::string_view name) {
  for (int p = 0; p <= static_cast<int>(SkillPhase::kReleased); ++p) {
    if (to_string(static_cast<SkillPhase>(p)) == name) return static_cast<SkillPhase>(p);
  }
  return std::nullopt;
}

Posture parse_posture(const std::string& name) {
  for (auto p : {Posture::kStanding, Posture::kSeated, Posture::kLying}) {
    if (to_string(p) == name) return p;
  }
  throw ValidationError("unknown posture '" + name + "'");
}

SkillId skill_at(const json& j, const char* key) {
  const auto s = parse_skill(j.at(key).get<std::string>());
  if (!s) throw ValidationError(std::string("unknown skill in ") + key);
  return *s;
}

json outcome_to_json(const KeyframeOutcome& o) {
  return {{"keyframe", o.keyframe},
          {"skill", to_string(o.skill)},
          {"success", o.success},
          {"error", o.error},
          {"ticks", o.ticks}};
}

}  // namespace

json trace_record_to_json(const TraceRecord& r) {
  const CharacterState& c = r.character;
  json joints = json::array();
  json rotations = json::array();
  for (std::size_t i = 0; i < kJointCount; ++i) {
    joints.push_back(vec(c.joints[i]));
    const auto& q = c.rotations[i];
    rotations.push_back(json::array({q.w(), q.x(), q.y(), q.z()}));
  }
  json terms = json::array();
  for (const auto& [name, value] : r.task.terms) terms.push_back(json::array({name, value}));
  json objects = json::array();
  for (const auto& o : r.objects) objects.push_back({{"id", o.id}, {"center", vec(o.center)}});
  return {{"tick", r.tick},
          {"cursor", r.cursor},
          {"skill", to_string(r.skill)},
          {"phase", to_string(r.phase)},
          {"goal", r.goal_kind},
          {"root_pos", vec(c.root_pos)},
          {"root_vel", vec(c.root_vel)},
          {"yaw", c.yaw},
          {"facing", json::array({c.facing.x(), c.facing.y()})},
          {"posture", to_string(c.posture)},
          {"joints", std::move(joints)},
          {"rotations", std::move(rotations)},
          {"task", {{"total", r.task.total},
                    {"branch", r.task.branch == RewardBranch::kFar ? "far" : "near"},
                    {"terms", std::move(terms)}}},
          {"style_reward", r.style_reward},
          {"reward", r.reward},
          {"error", r.error},
          {"hold", r.hold_timer},
          {"heightmap_hash", r.heightmap_hash},
          {"objects", std::move(objects)}};
}

TraceRecord trace_record_from_json(const json& j) {
  TraceRecord r;
  r.tick = j.at("tick").get<int>();
  r.cursor = j.at("cursor").get<std::size_t>();
  r.skill = skill_at(j, "skill");
  const auto phase = parse_phase(j.at("phase").get<std::string>());
  if (!phase) throw ValidationError("unknown phase");
  r.phase = *phase;
  r.goal_kind = j.at("goal").get<std::string>();
  CharacterState& c = r.character;
  c.root_pos = vec3_from(j.at("root_pos"));
  c.root_vel = vec3_from(j.at("root_vel"));
  c.yaw = j.at("yaw").get<double>();
  const json& f = j.at("facing");
  c.facing = Vec2(f.at(0).get<double>(), f.at(1).get<double>());
  c.posture = parse_posture(j.at("posture").get<std::string>());
  const json& joints = j.at("joints");
  const json& rotations = j.at("rotations");
  if (joints.size() != kJointCount || rotations.size() != kJointCount) {
    throw ValidationError("expected " + std::to_string(kJointCount) + " joints");
  }
  for (std::size_t i = 0; i < kJointCount; ++i) {
    c.joints[i] = vec3_from(joints[i]);
    const json& q = rotations[i];
    c.rotations[i] = Eigen::Quaterniond(q.at(0).get<double>(), q.at(1).get<double>(),
                                        q.at(2).get<double>(), q.at(3).get<double>());
  }
  const json& task = j.at("task");
  r.task.total = task.at("total").get<double>();
  r.task.branch = task.at("branch").get<std::string>() == "far" ? RewardBranch::kFar
                                                                 : RewardBranch::kNear;
  for (const auto& t : task.at("terms")) {
    r.task.terms.emplace_back(t.at(0).get<std::string>(), t.at(1).get<double>());
  }
  r.style_reward = j.at("style_reward").get<double>();
  r.reward = j.at("reward").get<double>();
  r.error = j.at("error").get<double>();
  r.hold_timer = j.at("hold").get<double>();
  r.heightmap_hash = j.at("heightmap_hash").get<std::uint64_t>();
  for (const auto& o : j.at("objects")) {
    r.objects.push_back({o.at("id").get<std::string>(), vec3_from(o.at("center"))});
  }
  return r;
}

json trace_summary_to_json(const ExecutionTrace& trace) {
  json outcomes = json::array();
  for (const auto& o : trace.outcomes) outcomes.push_back(outcome_to_json(o));
  return {{"seed", trace.seed},
          {"termination", to_string(trace.termination)},
          {"message", trace.message},
          {"ticks", trace.ticks()},
          {"outcomes", std::move(outcomes)}};
}

void write_trace(const ExecutionTrace& trace, std::ostream& out) {
  for (const auto& r : trace.records) out << trace_record_to_json(r).dump() << '\n';
  out << json{{"summary", trace_summary_to_json(trace)}}.dump() << '\n';
}

void save_trace(const ExecutionTrace& trace, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write trace " + path.string());
  write_trace(trace, out);
  if (!out) throw IoError("write failed for " + path.string());
}

ExecutionTrace load_trace(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open trace " + path.string());
  ExecutionTrace trace;
  bool have_summary = false;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    const std::string where = path.string() + ":" + std::to_string(line_no);
    if (have_summary) throw ValidationError(where + ": data after summary line");
    try {
      const json j = json::parse(line);
      if (const auto s = j.find("summary"); s != j.end()) {
        trace.seed = s->at("seed").get<std::uint64_t>();
        const auto reason = parse_termination(s->at("termination").get<std::string>());
        if (!reason) throw ValidationError("unknown termination reason");
        trace.termination = *reason;
        trace.message = s->value("message", "");
        for (const auto& o : s->at("outcomes")) {
          trace.outcomes.push_back({o.at("keyframe").get<std::size_t>(), skill_at(o, "skill"),
                                    o.at("success").get<bool>(), o.at("error").get<double>(),
                                    o.at("ticks").get<int>()});
        }
        have_summary = true;
      } else {
        trace.records.push_back(trace_record_from_json(j));
      }
    } catch (const json::exception& e) {
      throw ValidationError(where + ": " + e.what());
    } catch (const ValidationError& e) {
      throw ValidationError(where + ": " + e.what());
    }
  }
  if (!have_summary) throw ValidationError(path.string() + ": missing summary line");
  return trace;
}

}  // namespace stylescene
