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

#ifndef STYLESCENE_SCRIPTDB_HPP_
#define STYLESCENE_SCRIPTDB_HPP_

#include <array>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "stylescene/embedding.hpp"

namespace stylescene {

enum class SkillId : std::uint8_t { kWalk, kIdle, kSit, kLie, kGetUp, kReach, kCarry };

inline constexpr std::array<SkillId, 7> kAllSkills = {
    SkillId::kWalk, SkillId::kIdle,  SkillId::kSit,  SkillId::kLie,
    SkillId::kGetUp, SkillId::kReach, SkillId::kCarry};

enum class StyleLabel : std::uint8_t {
  kNeutral,
  kHappy,
  kAngry,
  kHurried,
  kTired,
  kSad,
  kStressed,
  kDrunk,
  kRelaxed,
};

inline constexpr std::array<StyleLabel, 9> kAllStyles = {
    StyleLabel::kNeutral, StyleLabel::kHappy,    StyleLabel::kAngry,
    StyleLabel::kHurried, StyleLabel::kTired,    StyleLabel::kSad,
    StyleLabel::kStressed, StyleLabel::kDrunk,   StyleLabel::kRelaxed};

std::string_view to_string(SkillId skill);
std::string_view to_string(StyleLabel style);

// Accepts canonical lowercase names plus the aliases loco, touch, sitdown,
// liedown and get_up.
std::optional<SkillId> parse_skill(std::string_view name);
std::optional<StyleLabel> parse_style(std::string_view name);

// Sit, Lie, Reach, Carry and GetUp act on an object.
bool requires_object(SkillId skill);
// Reach and GetUp run without text conditioning.
bool is_text_conditioned(SkillId skill);

struct Keyframe {
  SkillId skill = SkillId::kWalk;
  std::optional<std::string> object_ref;  // object category, not instance
  std::optional<std::string> caption;
  std::optional<StyleLabel> style;

  friend bool operator==(const Keyframe&, const Keyframe&) = default;
};

struct ShortScript {
  std::string id;
  std::vector<Keyframe> keyframes;
  std::string summary;
  StyleLabel style_label = StyleLabel::kNeutral;

  friend bool operator==(const ShortScript&, const ShortScript&) = default;
};

struct ValidityReport {
  std::vector<std::string> violations;

  bool ok() const { return violations.empty(); }
  std::string to_string() const;
};

ValidityReport validate_keyframe(const Keyframe& kf);
ValidityReport validate_short_script(const ShortScript& script);

// Most frequent non-neutral keyframe style; ties go to the style seen first.
// Neutral when no keyframe carries a non-neutral style.
StyleLabel modal_style(std::span<const Keyframe> keyframes);

// Insertion-ordered store of scripts keyed by unit-norm summary embeddings.
// Read-shared after construction; insert requires exclusive access.
class ScriptDatabase {
 public:
  struct Entry {
    ShortScript script;
    EmbeddingVector key;

    friend bool operator==(const Entry&, const Entry&) = default;
  };

  std::size_t size() const { return entries_.size(); }
  bool empty() const { return entries_.empty(); }
  const std::vector<Entry>& entries() const { return entries_; }

  const Entry* find(std::string_view id) const;
  const std::vector<std::string>& ids_with_style(StyleLabel style) const {
    return style_index_[static_cast<std::size_t>(style)];
  }
  // 0 until the first insert fixes it.
  std::size_t key_dim() const { return key_dim_; }

  // Stores `script` under its own id. Throws ValidationError when the script
  // is invalid, the id is taken, the key is not unit-norm, or the key dim
  // differs from earlier keys; on throw the database is unchanged.
  void insert(ShortScript script, EmbeddingVector key);

  // Next unused sequential id ("ss-000001", ...).
  std::string next_id() const;

  friend bool operator==(const ScriptDatabase& a, const ScriptDatabase& b) {
    return a.entries_ == b.entries_;
  }

 private:
  std::vector<Entry> entries_;
  std::unordered_map<std::string, std::size_t> by_id_;
  std::array<std::vector<std::string>, kAllStyles.size()> style_index_;
  std::size_t key_dim_ = 0;
  std::uint64_t serial_ = 0;
};

// Validates `script`, embeds its summary, assigns a fresh id and stores it.
// Returns the new id. Provider failures propagate; the db stays unchanged.
std::string insert_script(ScriptDatabase& db, ShortScript script,
                          const EmbeddingProvider& provider);

// Ids with the given style label, in insertion order.
std::vector<std::string> query_by_style(const ScriptDatabase& db,
                                        StyleLabel style);

inline constexpr int kScriptDbSchemaVersion = 1;

// JSON-lines persistence (*.sdb). Writes to a sibling temp file and renames,
// so a failed save never leaves a partial database behind.
void save_db(const ScriptDatabase& db, const std::filesystem::path& path);
ScriptDatabase load_db(const std::filesystem::path& path);

nlohmann::json keyframe_to_json(const Keyframe& kf);
// `where` prefixes diagnostics, e.g. "scripts[3].keyframes[1]".
Keyframe keyframe_from_json(const nlohmann::json& j, const std::string& where);
nlohmann::json short_script_to_json(const ShortScript& script);
ShortScript short_script_from_json(const nlohmann::json& j,
                                   const std::string& where);

// Reads a JSON array of ShortScript records (the build-db input format).
std::vector<ShortScript> load_short_scripts(const std::filesystem::path& path);

}  // namespace stylescene

#endif  // STYLESCENE_SCRIPTDB_HPP_
