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

#include "stylescene/scriptdb.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include <nlohmann/json.hpp>

#include "base64.hpp"
#include "stylescene/error.hpp"

namespace stylescene {
namespace {

using nlohmann::json;

constexpr std::array<std::string_view, 7> kSkillNames = {
    "walk", "idle", "sit", "lie", "getup", "reach", "carry"};
constexpr std::array<std::string_view, 9> kStyleNames = {
    "neutral", "happy", "angry", "hurried", "tired",
    "sad",     "stressed", "drunk", "relaxed"};

constexpr std::string_view kIdPrefix = "ss-";

std::string lowercase(std::string_view s) {
  std::string out(s);
  std::transform(out.begin(), out.end(), out.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return out;
}

std::optional<std::uint64_t> serial_of(std::string_view id) {
  if (id.substr(0, kIdPrefix.size()) != kIdPrefix) return std::nullopt;
  const auto digits = id.substr(kIdPrefix.size());
  if (digits.empty()) return std::nullopt;
  std::uint64_t v = 0;
  for (char c : digits) {
    if (c < '0' || c > '9') return std::nullopt;
    v = v * 10 + static_cast<std::uint64_t>(c - '0');
  }
  return v;
}

std::optional<std::string> optional_string(const json& j, const char* key,
                                           const std::string& where) {
  const auto it = j.find(key);
  if (it == j.end() || it->is_null()) return std::nullopt;
  if (!it->is_string()) {
    throw ValidationError(where + "." + key + ": expected string or null");
  }
  return it->get<std::string>();
}

}  // namespace

std::string_view to_string(SkillId skill) {
  return kSkillNames[static_cast<std::size_t>(skill)];
}

std::string_view to_string(StyleLabel style) {
  return kStyleNames[static_cast<std::size_t>(style)];
}

std::optional<SkillId> parse_skill(std::string_view name) {
  const std::string n = lowercase(name);
  for (std::size_t i = 0; i < kSkillNames.size(); ++i) {
    if (n == kSkillNames[i]) return static_cast<SkillId>(i);
  }
  if (n == "loco") return SkillId::kWalk;
  if (n == "touch") return SkillId::kReach;
  if (n == "sitdown") return SkillId::kSit;
  if (n == "liedown") return SkillId::kLie;
  if (n == "get_up") return SkillId::kGetUp;
  return std::nullopt;
}

std::optional<StyleLabel> parse_style(std::string_view name) {
  const std::string n = lowercase(name);
  for (std::size_t i = 0; i < kStyleNames.size(); ++i) {
    if (n == kStyleNames[i]) return static_cast<StyleLabel>(i);
  }
  return std::nullopt;
}

bool requires_object(SkillId skill) {
  return skill != SkillId::kWalk && skill != SkillId::kIdle;
}

bool is_text_conditioned(SkillId skill) {
  return skill != SkillId::kReach && skill != SkillId::kGetUp;
}

std::string ValidityReport::to_string() const {
  std::string out;
  for (const auto& v : violations) {
    if (!out.empty()) out += "; ";
    out += v;
  }
  return out.empty() ? "ok" : out;
}

ValidityReport validate_keyframe(const Keyframe& kf) {
  ValidityReport report;
  const std::string skill(to_string(kf.skill));
  if (requires_object(kf.skill) &&
      (!kf.object_ref.has_value() || kf.object_ref->empty())) {
    report.violations.push_back(skill + ": missing object_ref");
  }
  if (!is_text_conditioned(kf.skill)) {
    if (kf.caption.has_value()) {
      report.violations.push_back(skill + ": caption not allowed");
    }
    if (kf.style.has_value()) {
      report.violations.push_back(skill + ": style not allowed");
    }
  }
  if (kf.caption.has_value() && !kf.style.has_value()) {
    report.violations.push_back(skill + ": caption without style");
  }
  return report;
}

StyleLabel modal_style(std::span<const Keyframe> keyframes) {
  std::array<int, kAllStyles.size()> counts{};
  std::array<std::size_t, kAllStyles.size()> first_seen;
  first_seen.fill(keyframes.size());
  for (std::size_t i = 0; i < keyframes.size(); ++i) {
    const auto& style = keyframes[i].style;
    if (!style || *style == StyleLabel::kNeutral) continue;
    const auto s = static_cast<std::size_t>(*style);
    ++counts[s];
    first_seen[s] = std::min(first_seen[s], i);
  }
  StyleLabel best = StyleLabel::kNeutral;
  int best_count = 0;
  std::size_t best_first = keyframes.size();
  for (std::size_t s = 0; s < counts.size(); ++s) {
    if (counts[s] > best_count ||
        (counts[s] == best_count && counts[s] > 0 && first_seen[s] < best_first)) {
      best = static_cast<StyleLabel>(s);
      best_count = counts[s];
      best_first = first_seen[s];
    }
  }
  return best;
}

ValidityReport validate_short_script(const ShortScript& script) {
  ValidityReport report;
  if (script.keyframes.empty()) {
    report.violations.push_back("keyframe list is empty");
  }
  for (std::size_t i = 0; i < script.keyframes.size(); ++i) {
    for (auto& v : validate_keyframe(script.keyframes[i]).violations) {
      report.violations.push_back("keyframes[" + std::to_string(i) + "] " + v);
    }
  }
  if (script.summary.empty()) {
    report.violations.push_back("summary is empty");
  }
  const StyleLabel expected = modal_style(script.keyframes);
  if (script.style_label != expected) {
    report.violations.push_back(
        "style_label " + std::string(to_string(script.style_label)) +
        " does not match keyframe styles (expected " +
        std::string(to_string(expected)) + ")");
  }
  return report;
}

const ScriptDatabase::Entry* ScriptDatabase::find(std::string_view id) const {
  const auto it = by_id_.find(std::string(id));
  return it == by_id_.end() ? nullptr : &entries_[it->second];
}

std::string ScriptDatabase::next_id() const {
  char buf[32];
  std::snprintf(buf, sizeof buf, "ss-%06llu",
                static_cast<unsigned long long>(serial_ + 1));
  return buf;
}

void ScriptDatabase::insert(ShortScript script, EmbeddingVector key) {
  const ValidityReport report = validate_short_script(script);
  if (!report.ok()) {
    throw ValidationError("invalid short script: " + report.to_string());
  }
  if (script.id.empty()) throw ValidationError("short script id is empty");
  if (by_id_.contains(script.id)) {
    throw ValidationError("duplicate short script id " + script.id);
  }
  if (key_dim_ != 0 && key.dim() != key_dim_) {
    throw ValidationError("key dim " + std::to_string(key.dim()) +
                          " differs from database dim " +
                          std::to_string(key_dim_));
  }
  if (key.dim() == 0 || std::abs(norm(key) - 1.0) > 1e-6) {
    throw ValidationError("key for " + script.id + " is not unit-norm");
  }
  if (const auto serial = serial_of(script.id)) {
    serial_ = std::max(serial_, *serial);
  }
  key_dim_ = key.dim();
  style_index_[static_cast<std::size_t>(script.style_label)].push_back(script.id);
  by_id_.emplace(script.id, entries_.size());
  entries_.push_back(Entry{std::move(script), std::move(key)});
}

std::string insert_script(ScriptDatabase& db, ShortScript script,
                          const EmbeddingProvider& provider) {
  const ValidityReport report = validate_short_script(script);
  if (!report.ok()) {
    throw ValidationError("invalid short script: " + report.to_string());
  }
  EmbeddingVector key = normalize(provider.embed(script.summary));
  script.id = db.next_id();
  std::string id = script.id;
  db.insert(std::move(script), std::move(key));
  return id;
}

std::vector<std::string> query_by_style(const ScriptDatabase& db,
                                        StyleLabel style) {
  return db.ids_with_style(style);
}

json keyframe_to_json(const Keyframe& kf) {
  json j;
  j["skill"] = to_string(kf.skill);
  j["object"] = kf.object_ref ? json(*kf.object_ref) : json(nullptr);
  j["caption"] = kf.caption ? json(*kf.caption) : json(nullptr);
  j["style"] = kf.style ? json(to_string(*kf.style)) : json(nullptr);
  return j;
}

Keyframe keyframe_from_json(const json& j, const std::string& where) {
  if (!j.is_object()) throw ValidationError(where + ": expected object");
  Keyframe kf;
  const auto skill = optional_string(j, "skill", where);
  if (!skill) throw ValidationError(where + ".skill: required");
  const auto parsed = parse_skill(*skill);
  if (!parsed) throw ValidationError(where + ".skill: unknown skill '" + *skill + "'");
  kf.skill = *parsed;
  kf.object_ref = optional_string(j, "object", where);
  if (kf.object_ref && kf.object_ref->empty()) kf.object_ref.reset();
  kf.caption = optional_string(j, "caption", where);
  if (const auto style = optional_string(j, "style", where)) {
    const auto s = parse_style(*style);
    if (!s) throw ValidationError(where + ".style: unknown style '" + *style + "'");
    kf.style = *s;
  }
  return kf;
}

json short_script_to_json(const ShortScript& script) {
  json j;
  j["id"] = script.id;
  j["summary"] = script.summary;
  j["style_label"] = to_string(script.style_label);
  json kfs = json::array();
  for (const auto& kf : script.keyframes) kfs.push_back(keyframe_to_json(kf));
  j["keyframes"] = std::move(kfs);
  return j;
}

ShortScript short_script_from_json(const json& j, const std::string& where) {
  if (!j.is_object()) throw ValidationError(where + ": expected object");
  ShortScript script;
  script.id = optional_string(j, "id", where).value_or("");
  script.summary = optional_string(j, "summary", where).value_or("");
  const auto it = j.find("keyframes");
  if (it == j.end() || !it->is_array()) {
    throw ValidationError(where + ".keyframes: expected array");
  }
  for (std::size_t i = 0; i < it->size(); ++i) {
    script.keyframes.push_back(keyframe_from_json(
        (*it)[i], where + ".keyframes[" + std::to_string(i) + "]"));
  }
  if (const auto label = optional_string(j, "style_label", where)) {
    const auto s = parse_style(*label);
    if (!s) {
      throw ValidationError(where + ".style_label: unknown style '" + *label + "'");
    }
    script.style_label = *s;
  } else {
    script.style_label = modal_style(script.keyframes);
  }
  return script;
}

void save_db(const ScriptDatabase& db, const std::filesystem::path& path) {
  std::filesystem::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot open " + tmp.string() + " for writing");
    for (const auto& entry : db.entries()) {
      json j = short_script_to_json(entry.script);
      j["key_b64"] = detail::doubles_to_base64(entry.key.values);
      j["v"] = kScriptDbSchemaVersion;
      out << j.dump() << '\n';
    }
    out.flush();
    if (!out) throw IoError("write failed for " + tmp.string());
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec) throw IoError("cannot move database into " + path.string() + ": " + ec.message());
}

ScriptDatabase load_db(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  ScriptDatabase db;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    const std::string where = path.filename().string() + ":" + std::to_string(line_no);
    json j;
    try {
      j = json::parse(line);
    } catch (const json::parse_error& e) {
      throw ValidationError(where + ": malformed record: " + e.what());
    }
    if (!j.is_object()) throw ValidationError(where + ": record is not an object");
    const auto v = j.find("v");
    if (v == j.end() || !v->is_number_integer()) {
      throw ValidationError(where + ": missing schema version");
    }
    if (v->get<int>() != kScriptDbSchemaVersion) {
      throw ValidationError(where + ": schema version " +
                            std::to_string(v->get<int>()) + " != " +
                            std::to_string(kScriptDbSchemaVersion));
    }
    ShortScript script = short_script_from_json(j, where);
    const auto key_it = j.find("key_b64");
    if (key_it == j.end() || !key_it->is_string()) {
      throw ValidationError(where + ": missing key_b64");
    }
    auto key = detail::doubles_from_base64(key_it->get<std::string>());
    if (!key) throw ValidationError(where + ": key_b64 is not valid base64 doubles");
    try {
      db.insert(std::move(script), EmbeddingVector{std::move(*key)});
    } catch (const ValidationError& e) {
      throw ValidationError(where + ": " + e.what());
    }
  }
  return db;
}

std::vector<ShortScript> load_short_scripts(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  json j;
  try {
    j = json::parse(in);
  } catch (const json::parse_error& e) {
    throw ValidationError(path.string() + ": " + e.what());
  }
  if (j.is_object() && j.contains("scripts")) j = j["scripts"];
  if (!j.is_array()) throw ValidationError(path.string() + ": expected a JSON array");
  std::vector<ShortScript> out;
  for (std::size_t i = 0; i < j.size(); ++i) {
    out.push_back(short_script_from_json(j[i], "scripts[" + std::to_string(i) + "]"));
  }
  return out;
}

}  // namespace stylescene
