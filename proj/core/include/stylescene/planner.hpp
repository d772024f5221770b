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

#ifndef STYLESCENE_PLANNER_HPP_
#define STYLESCENE_PLANNER_HPP_

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "stylescene/embedding.hpp"
#include "stylescene/scene.hpp"
#include "stylescene/scriptdb.hpp"

namespace stylescene {

struct SynopsisEntry {
  std::string category;
  std::size_t count = 0;
  std::string room;

  friend bool operator==(const SynopsisEntry&, const SynopsisEntry&) = default;
};

// (category, count, room) triples sorted by category then room.
std::vector<SynopsisEntry> scene_synopsis(const Scene& scene);

struct Retrieved {
  std::string id;
  double similarity = 0.0;
  StyleLabel style = StyleLabel::kNeutral;

  friend bool operator==(const Retrieved&, const Retrieved&) = default;
};

struct Candidate {
  std::string id;
  std::string summary;
  StyleLabel style = StyleLabel::kNeutral;
  double similarity = 0.0;
};

struct Composition {
  std::vector<std::string> ordered_ids;
  std::string prose;
};

// The LLM role. Implementations may throw; callers fall back to the
// deterministic path on any error or invalid output.
class NarrativeProvider {
 public:
  virtual ~NarrativeProvider() = default;

  virtual std::vector<StyleLabel> select_styles(const std::string& theme,
                                                std::span<const StyleLabel> styles,
                                                std::size_t m) const = 0;
  virtual Composition compose(const std::string& theme,
                              std::span<const StyleLabel> styles,
                              std::span<const Candidate> candidates,
                              std::span<const SynopsisEntry> synopsis) const = 0;
};

struct HttpNarrativeOptions {
  std::string url;  // base; requests go to <url>/styles and <url>/compose
  double timeout_seconds = 30.0;
  int retries = 1;
};

class HttpNarrativeProvider final : public NarrativeProvider {
 public:
  explicit HttpNarrativeProvider(HttpNarrativeOptions options);

  std::vector<StyleLabel> select_styles(const std::string& theme,
                                        std::span<const StyleLabel> styles,
                                        std::size_t m) const override;
  Composition compose(const std::string& theme, std::span<const StyleLabel> styles,
                      std::span<const Candidate> candidates,
                      std::span<const SynopsisEntry> synopsis) const override;

 private:
  HttpNarrativeOptions options_;
};

inline constexpr const char* kLlmUrlEnv = "STYLESCENE_LLM_URL";

std::optional<HttpNarrativeOptions> narrative_options_from_env();

// Top-m styles by similarity of the theme to each style name; ties keep the
// enumeration order.
std::vector<StyleLabel> fallback_select_styles(const std::string& theme, std::size_t m,
                                               const EmbeddingProvider& embedder);

std::vector<StyleLabel> select_styles(const std::string& theme, std::size_t m,
                                      const EmbeddingProvider& embedder,
                                      const NarrativeProvider* narrative);

// Per style (in the given order): the top-k ids by descending similarity,
// ties by ascending id.
std::vector<Retrieved> retrieve(const ScriptDatabase& db, const EmbeddingVector& query,
                                std::span<const StyleLabel> styles, std::size_t k);

// True iff `seq` is a concatenation of (Sit GetUp), (Lie GetUp), (Idle),
// (Walk Carry), (Walk Reach) and free Walk tokens.
bool validate_skill_sequence(std::span<const SkillId> seq);

std::vector<SkillId> skills_of(std::span<const Keyframe> keyframes);

// Closes Sit/Lie with a neutral GetUp, drops unmatched GetUp, and inserts a
// neutral Walk before Sit, Lie, Reach, Carry and Idle that follows an
// interaction. Idempotent.
std::vector<Keyframe> insert_transitions(std::span<const Keyframe> keyframes);

struct ProvenanceSpan {
  std::string script_id;
  std::size_t begin = 0;  // keyframe range [begin, end)
  std::size_t end = 0;

  friend bool operator==(const ProvenanceSpan&, const ProvenanceSpan&) = default;
};

struct LongScript {
  std::string theme;
  std::vector<StyleLabel> styles;
  std::vector<Keyframe> keyframes;
  std::vector<ProvenanceSpan> provenance;
  std::map<std::size_t, std::string> scene_binding;  // keyframe -> object id
  std::string prose;
  std::optional<Spawn> spawn;
};

struct PlanOptions {
  std::size_t m = 3;
  std::size_t k = 5;
  std::size_t max_scripts = 4;
  std::uint64_t seed = 0;
  double spawn_clearance = 0.4;
};

// Scripts whose every referenced category exists in the scene (Carry needs a
// dynamic instance).
bool scene_supports(const Scene& scene, const ShortScript& script);

std::vector<std::string> missing_categories(const Scene& scene,
                                            std::span<const ShortScript> scripts);

// Greedy descending-similarity selection (ties by id) of scene-compatible
// scripts, at most `max_scripts`.
std::vector<std::string> fallback_compose(const ScriptDatabase& db,
                                          std::span<const Retrieved> retrieved,
                                          const Scene& scene, std::size_t max_scripts);

// Concatenates the scripts, inserts transitions and binds object-bearing
// keyframes to scene instances. Throws InfeasibleError when nothing fits.
LongScript assemble_long_script(const ScriptDatabase& db,
                                std::span<const Retrieved> retrieved, const Scene& scene,
                                const NarrativeProvider* narrative, const std::string& theme,
                                std::span<const StyleLabel> styles, const Spawn& spawn,
                                std::size_t max_scripts = 4);

// Binding of a keyframe sequence: nearest instance of the category to the
// previous bound object's centroid, the first to `anchor`; ties by index.
std::map<std::size_t, std::string> bind_keyframes(std::span<const Keyframe> keyframes,
                                                  const Scene& scene, const Vec2& anchor);

LongScript plan(const ScriptDatabase& db, const std::string& theme, const Scene& scene,
                const EmbeddingProvider& embedder, const NarrativeProvider* narrative,
                const PlanOptions& options);

inline constexpr int kLongScriptSchemaVersion = 1;

nlohmann::json to_json(const LongScript& script);
LongScript long_script_from_json(const nlohmann::json& j);
void save_long_script(const LongScript& script, const std::filesystem::path& path);
LongScript load_long_script(const std::filesystem::path& path);

}  // namespace stylescene

#endif  // STYLESCENE_PLANNER_HPP_
