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

#include "stylescene/planner.hpp"

#include <algorithm>
#include <fstream>
#include <limits>
#include <set>
#include <utility>

#include <nlohmann/json.hpp>
#include <spdlog/spdlog.h>

#include "stylescene/error.hpp"
#include "stylescene/rng.hpp"

namespace stylescene {
namespace {

using nlohmann::json;

bool is_opener(SkillId s) { return s == SkillId::kSit || s == SkillId::kLie; }

bool is_interaction_closer(SkillId s) {
  return s == SkillId::kGetUp || s == SkillId::kReach || s == SkillId::kCarry;
}

// Keyframe with the index of the source script it came from.
using Tagged = std::pair<Keyframe, std::size_t>;

std::vector<Tagged> insert_tagged(const std::vector<Tagged>& in) {
  std::vector<Tagged> out;
  out.reserve(in.size() * 2);
  const auto close_open_tuple = [&out] {
    if (!out.empty() && is_opener(out.back().first.skill)) {
      Keyframe getup;
      getup.skill = SkillId::kGetUp;
      getup.object_ref = out.back().first.object_ref;
      out.emplace_back(std::move(getup), out.back().second);
    }
  };
  for (const auto& [kf, tag] : in) {
    if (kf.skill == SkillId::kGetUp) {
      if (!out.empty() && is_opener(out.back().first.skill)) out.emplace_back(kf, tag);
      continue;
    }
    close_open_tuple();
    const bool prev_walk = !out.empty() && out.back().first.skill == SkillId::kWalk;
    bool needs_walk = is_opener(kf.skill) || kf.skill == SkillId::kReach ||
                      kf.skill == SkillId::kCarry;
    if (kf.skill == SkillId::kIdle) {
      needs_walk = !out.empty() && is_interaction_closer(out.back().first.skill);
    }
    if (needs_walk && !prev_walk) {
      Keyframe walk;
      walk.skill = SkillId::kWalk;
      walk.object_ref = kf.object_ref;
      walk.style = StyleLabel::kNeutral;
      out.emplace_back(std::move(walk), tag);
    }
    out.emplace_back(kf, tag);
  }
  close_open_tuple();
  return out;
}

double centroid_distance2(const SceneObject& o, const Vec2& p) {
  const Vec3 c = o.aabb.center();
  const double dx = c.x() - p.x();
  const double dy = c.y() - p.y();
  return dx * dx + dy * dy;
}

std::vector<Candidate> make_candidates(const ScriptDatabase& db,
                                       std::span<const Retrieved> retrieved) {
  std::vector<Candidate> out;
  for (const auto& r : retrieved) {
    const auto* entry = db.find(r.id);
    if (entry == nullptr) throw ValidationError("retrieved id " + r.id + " not in database");
    out.push_back({r.id, entry->script.summary, r.style, r.similarity});
  }
  return out;
}

bool composition_valid(const Composition& c, std::span<const Candidate> candidates,
                       const ScriptDatabase& db, const Scene& scene) {
  if (c.ordered_ids.empty()) return false;
  std::set<std::string> seen;
  for (const auto& id : c.ordered_ids) {
    const bool known = std::any_of(candidates.begin(), candidates.end(),
                                   [&](const Candidate& k) { return k.id == id; });
    if (!known || !seen.insert(id).second) return false;
    if (!scene_supports(scene, db.find(id)->script)) return false;
  }
  return true;
}

json spawn_to_json(const Spawn& s) {
  return {{"x", s.position.x()}, {"y", s.position.y()}, {"yaw", s.yaw}};
}

double number_at(const json& j, const char* key, const std::string& where) {
  const auto it = j.find(key);
  if (it == j.end() || !it->is_number()) {
    throw ValidationError(where + "." + key + ": expected number");
  }
  return it->get<double>();
}

}  // namespace

std::vector<SynopsisEntry> scene_synopsis(const Scene& scene) {
  std::map<std::pair<std::string, std::string>, std::size_t> counts;
  for (const auto& o : scene.objects()) ++counts[{o.category, o.room}];
  std::vector<SynopsisEntry> out;
  for (const auto& [key, n] : counts) out.push_back({key.first, n, key.second});
  return out;
}

std::vector<StyleLabel> fallback_select_styles(const std::string& theme, std::size_t m,
                                               const EmbeddingProvider& embedder) {
  if (m == 0) throw ValidationError("select_styles: m must be at least 1");
  const EmbeddingVector q = embedder.embed(theme);
  std::vector<std::pair<double, std::size_t>> scored;
  for (std::size_t i = 0; i < kAllStyles.size(); ++i) {
    const EmbeddingVector s = embedder.embed(to_string(kAllStyles[i]));
    scored.emplace_back(cosine_similarity(q, s), i);
  }
  std::stable_sort(scored.begin(), scored.end(),
                   [](const auto& a, const auto& b) { return a.first > b.first; });
  std::vector<StyleLabel> out;
  for (std::size_t i = 0; i < std::min(m, scored.size()); ++i) {
    out.push_back(kAllStyles[scored[i].second]);
  }
  return out;
}

std::vector<StyleLabel> select_styles(const std::string& theme, std::size_t m,
                                      const EmbeddingProvider& embedder,
                                      const NarrativeProvider* narrative) {
  if (m == 0) throw ValidationError("select_styles: m must be at least 1");
  if (narrative != nullptr) {
    try {
      std::vector<StyleLabel> picked = narrative->select_styles(theme, kAllStyles, m);
      std::set<StyleLabel> distinct(picked.begin(), picked.end());
      if (!picked.empty() && picked.size() <= m && distinct.size() == picked.size()) {
        return picked;
      }
      spdlog::warn("narrative provider returned an invalid style list; using fallback");
    } catch (const std::exception& e) {
      spdlog::warn("narrative provider failed ({}); using fallback style selection",
                   e.what());
    }
  }
  return fallback_select_styles(theme, m, embedder);
}

std::vector<Retrieved> retrieve(const ScriptDatabase& db, const EmbeddingVector& query,
                                std::span<const StyleLabel> styles, std::size_t k) {
  if (k == 0) throw ValidationError("retrieve: k must be at least 1");
  std::vector<Retrieved> out;
  for (StyleLabel style : styles) {
    const auto& ids = db.ids_with_style(style);
    std::vector<Retrieved> bucket;
    bucket.reserve(ids.size());
    for (const auto& id : ids) {
      bucket.push_back({id, cosine_similarity(query, db.find(id)->key), style});
    }
    const std::size_t n = std::min(k, bucket.size());
    std::partial_sort(bucket.begin(), bucket.begin() + static_cast<std::ptrdiff_t>(n),
                      bucket.end(), [](const Retrieved& a, const Retrieved& b) {
                        if (a.similarity != b.similarity) return a.similarity > b.similarity;
                        return a.id < b.id;
                      });
    out.insert(out.end(), bucket.begin(), bucket.begin() + static_cast<std::ptrdiff_t>(n));
  }
  return out;
}

bool validate_skill_sequence(std::span<const SkillId> seq) {
  std::size_t i = 0;
  while (i < seq.size()) {
    const bool has_next = i + 1 < seq.size();
    switch (seq[i]) {
      case SkillId::kWalk:
        i += (has_next && (seq[i + 1] == SkillId::kCarry || seq[i + 1] == SkillId::kReach))
                 ? 2
                 : 1;
        break;
      case SkillId::kIdle:
        i += 1;
        break;
      case SkillId::kSit:
      case SkillId::kLie:
        if (!has_next || seq[i + 1] != SkillId::kGetUp) return false;
        i += 2;
        break;
      default:
        return false;
    }
  }
  return true;
}

std::vector<SkillId> skills_of(std::span<const Keyframe> keyframes) {
  std::vector<SkillId> out;
  out.reserve(keyframes.size());
  for (const auto& kf : keyframes) out.push_back(kf.skill);
  return out;
}

std::vector<Keyframe> insert_transitions(std::span<const Keyframe> keyframes) {
  std::vector<Tagged> tagged;
  tagged.reserve(keyframes.size());
  for (const auto& kf : keyframes) tagged.emplace_back(kf, 0);
  std::vector<Keyframe> out;
  for (auto& [kf, tag] : insert_tagged(tagged)) out.push_back(std::move(kf));
  return out;
}

bool scene_supports(const Scene& scene, const ShortScript& script) {
  for (const auto& kf : script.keyframes) {
    if (!kf.object_ref) continue;
    const bool ok = std::any_of(
        scene.objects().begin(), scene.objects().end(), [&](const SceneObject& o) {
          return o.category == *kf.object_ref && (kf.skill != SkillId::kCarry || o.dynamic);
        });
    if (!ok) return false;
  }
  return true;
}

std::vector<std::string> missing_categories(const Scene& scene,
                                            std::span<const ShortScript> scripts) {
  std::set<std::string> missing;
  for (const auto& script : scripts) {
    for (const auto& kf : script.keyframes) {
      if (!kf.object_ref) continue;
      const bool ok = std::any_of(
          scene.objects().begin(), scene.objects().end(), [&](const SceneObject& o) {
            return o.category == *kf.object_ref &&
                   (kf.skill != SkillId::kCarry || o.dynamic);
          });
      if (!ok) {
        missing.insert(kf.skill == SkillId::kCarry && scene.has_category(*kf.object_ref)
                           ? *kf.object_ref + " (carryable)"
                           : *kf.object_ref);
      }
    }
  }
  return {missing.begin(), missing.end()};
}

std::vector<std::string> fallback_compose(const ScriptDatabase& db,
                                          std::span<const Retrieved> retrieved,
                                          const Scene& scene, std::size_t max_scripts) {
  std::vector<Retrieved> ranked(retrieved.begin(), retrieved.end());
  std::stable_sort(ranked.begin(), ranked.end(), [](const Retrieved& a, const Retrieved& b) {
    if (a.similarity != b.similarity) return a.similarity > b.similarity;
    return a.id < b.id;
  });
  std::vector<std::string> out;
  std::set<std::string> seen;
  for (const auto& r : ranked) {
    if (out.size() >= max_scripts) break;
    const auto* entry = db.find(r.id);
    if (entry == nullptr || !seen.insert(r.id).second) continue;
    if (scene_supports(scene, entry->script)) out.push_back(r.id);
  }
  return out;
}

std::map<std::size_t, std::string> bind_keyframes(std::span<const Keyframe> keyframes,
                                                  const Scene& scene, const Vec2& anchor) {
  std::map<std::size_t, std::string> binding;
  Vec2 from = anchor;
  for (std::size_t i = 0; i < keyframes.size(); ++i) {
    const Keyframe& kf = keyframes[i];
    if (!kf.object_ref) continue;
    const SceneObject* best = nullptr;
    double best_d2 = std::numeric_limits<double>::infinity();
    for (const auto& o : scene.objects()) {
      if (o.category != *kf.object_ref) continue;
      if (kf.skill == SkillId::kCarry && !o.dynamic) continue;
      const double d2 = centroid_distance2(o, from);
      if (d2 < best_d2) {
        best_d2 = d2;
        best = &o;
      }
    }
    if (best == nullptr) {
      throw InfeasibleError("unsatisfiable plan: scene has no '" + *kf.object_ref + "'");
    }
    binding[i] = best->id;
    from = best->aabb.center().head<2>();
  }
  return binding;
}

LongScript assemble_long_script(const ScriptDatabase& db,
                                std::span<const Retrieved> retrieved, const Scene& scene,
                                const NarrativeProvider* narrative, const std::string& theme,
                                std::span<const StyleLabel> styles, const Spawn& spawn,
                                std::size_t max_scripts) {
  const std::vector<Candidate> candidates = make_candidates(db, retrieved);
  Composition chosen;
  if (narrative != nullptr && !candidates.empty()) {
    try {
      const auto synopsis = scene_synopsis(scene);
      Composition c = narrative->compose(theme, styles, candidates, synopsis);
      if (composition_valid(c, candidates, db, scene)) {
        chosen = std::move(c);
      } else {
        spdlog::warn("narrative provider returned an invalid composition; using fallback");
      }
    } catch (const std::exception& e) {
      spdlog::warn("narrative provider failed ({}); using fallback composition", e.what());
    }
  }
  if (chosen.ordered_ids.empty()) {
    chosen.ordered_ids = fallback_compose(db, retrieved, scene, max_scripts);
    chosen.prose.clear();
  }
  if (chosen.ordered_ids.empty()) {
    std::vector<ShortScript> scripts;
    for (const auto& c : candidates) scripts.push_back(db.find(c.id)->script);
    std::string list;
    for (const auto& m : missing_categories(scene, scripts)) {
      list += (list.empty() ? "" : ", ") + m;
    }
    throw InfeasibleError("unsatisfiable plan: no retrieved script fits the scene" +
                          (list.empty() ? std::string() : "; missing categories: " + list));
  }

  std::vector<Tagged> tagged;
  for (std::size_t s = 0; s < chosen.ordered_ids.size(); ++s) {
    for (const auto& kf : db.find(chosen.ordered_ids[s])->script.keyframes) {
      tagged.emplace_back(kf, s);
    }
  }
  const std::vector<Tagged> expanded = insert_tagged(tagged);

  LongScript out;
  out.theme = theme;
  out.styles.assign(styles.begin(), styles.end());
  out.prose = chosen.prose;
  out.spawn = spawn;
  for (std::size_t i = 0; i < expanded.size(); ++i) {
    out.keyframes.push_back(expanded[i].first);
    const std::string& id = chosen.ordered_ids[expanded[i].second];
    if (out.provenance.empty() || out.provenance.back().script_id != id ||
        out.provenance.back().end != i) {
      out.provenance.push_back({id, i, i + 1});
    } else {
      out.provenance.back().end = i + 1;
    }
  }
  out.scene_binding = bind_keyframes(out.keyframes, scene, spawn.position);
  return out;
}

LongScript plan(const ScriptDatabase& db, const std::string& theme, const Scene& scene,
                const EmbeddingProvider& embedder, const NarrativeProvider* narrative,
                const PlanOptions& options) {
  if (theme.empty()) throw ValidationError("theme is empty");
  const auto styles = select_styles(theme, options.m, embedder, narrative);
  const auto retrieved = retrieve(db, embedder.embed(theme), styles, options.k);
  if (retrieved.empty()) {
    throw InfeasibleError("unsatisfiable plan: database has no scripts for the selected styles");
  }
  Rng rng(options.seed);
  const Spawn spawn = sample_spawn(scene, rng, options.spawn_clearance);
  return assemble_long_script(db, retrieved, scene, narrative, theme, styles, spawn,
                              options.max_scripts);
}

json to_json(const LongScript& script) {
  json j;
  j["v"] = kLongScriptSchemaVersion;
  j["theme"] = script.theme;
  json styles = json::array();
  for (StyleLabel s : script.styles) styles.push_back(to_string(s));
  j["styles"] = std::move(styles);
  json kfs = json::array();
  for (std::size_t i = 0; i < script.keyframes.size(); ++i) {
    json k = keyframe_to_json(script.keyframes[i]);
    const auto it = script.scene_binding.find(i);
    k["object_id"] = it == script.scene_binding.end() ? json(nullptr) : json(it->second);
    kfs.push_back(std::move(k));
  }
  j["keyframes"] = std::move(kfs);
  json prov = json::array();
  for (const auto& p : script.provenance) {
    prov.push_back({{"script_id", p.script_id}, {"begin", p.begin}, {"end", p.end}});
  }
  j["provenance"] = std::move(prov);
  j["prose"] = script.prose;
  j["spawn"] = script.spawn ? spawn_to_json(*script.spawn) : json(nullptr);
  return j;
}

LongScript long_script_from_json(const json& j) {
  if (!j.is_object()) throw ValidationError("long script: expected object");
  if (j.value("v", 0) != kLongScriptSchemaVersion) {
    throw ValidationError("long script: unsupported schema version");
  }
  LongScript out;
  out.theme = j.value("theme", "");
  for (const auto& s : j.value("styles", json::array())) {
    const auto parsed = s.is_string() ? parse_style(s.get<std::string>()) : std::nullopt;
    if (!parsed) throw ValidationError("long script: bad style " + s.dump());
    out.styles.push_back(*parsed);
  }
  const auto kfs = j.find("keyframes");
  if (kfs == j.end() || !kfs->is_array()) {
    throw ValidationError("long script: keyframes must be an array");
  }
  for (std::size_t i = 0; i < kfs->size(); ++i) {
    const std::string where = "keyframes[" + std::to_string(i) + "]";
    const json& k = (*kfs)[i];
    Keyframe kf = keyframe_from_json(k, where);
    const ValidityReport report = validate_keyframe(kf);
    if (!report.ok()) throw ValidationError(where + ": " + report.to_string());
    out.keyframes.push_back(std::move(kf));
    if (const auto it = k.find("object_id"); it != k.end() && !it->is_null()) {
      if (!it->is_string()) throw ValidationError(where + ".object_id: expected string");
      out.scene_binding[i] = it->get<std::string>();
    }
  }
  for (const auto& p : j.value("provenance", json::array())) {
    out.provenance.push_back({p.at("script_id").get<std::string>(),
                              p.at("begin").get<std::size_t>(),
                              p.at("end").get<std::size_t>()});
  }
  out.prose = j.value("prose", "");
  if (const auto it = j.find("spawn"); it != j.end() && !it->is_null()) {
    out.spawn = Spawn{Vec2(number_at(*it, "x", "spawn"), number_at(*it, "y", "spawn")),
                      number_at(*it, "yaw", "spawn")};
  }
  return out;
}

void save_long_script(const LongScript& script, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write " + path.string());
  out << to_json(script).dump(2) << '\n';
  if (!out) throw IoError("write failed for " + path.string());
}

LongScript load_long_script(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open long script " + path.string());
  try {
    return long_script_from_json(json::parse(in));
  } catch (const json::exception& e) {
    throw ValidationError(path.string() + ": " + e.what());
  }
}

}  // namespace stylescene
