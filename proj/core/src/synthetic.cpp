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

#include "stylescene/synthetic.hpp"

#include <array>
#include <string>

#include "stylescene/rng.hpp"

namespace stylescene {
namespace {

using nlohmann::json;

json box(double x0, double y0, double z0, double x1, double y1, double z1) {
  return {{"min", {x0, y0, z0}}, {"max", {x1, y1, z1}}};
}

json static_object(const std::string& id, const std::string& category, const std::string& room,
                   double x, double y, double yaw, json geometry, json parts = json::object()) {
  json o = {{"id", id},
            {"category", category},
            {"room", room},
            {"dynamic", false},
            {"pose", {{"x", x}, {"y", y}, {"yaw", yaw}}},
            {"geometry", {{"box", std::move(geometry)}}}};
  if (!parts.empty()) o["parts"] = std::move(parts);
  return o;
}

json dynamic_object(const std::string& id, const std::string& category, const std::string& room,
                    double x, double y, json geometry) {
  return {{"id", id},
          {"category", category},
          {"room", room},
          {"dynamic", true},
          {"root", {{"x", x}, {"y", y}, {"z", 0.0}}},
          {"geometry", {{"box", std::move(geometry)}}}};
}

template <std::size_t N>
const std::string& pick(const std::array<std::string, N>& items, Rng& rng) {
  return items[static_cast<std::size_t>(rng.next_u64() % N)];
}

std::string style_adjective(StyleLabel style) {
  switch (style) {
    case StyleLabel::kNeutral: return "calmly";
    case StyleLabel::kHappy: return "happily";
    case StyleLabel::kAngry: return "angrily";
    case StyleLabel::kHurried: return "hurriedly";
    case StyleLabel::kTired: return "tiredly";
    case StyleLabel::kSad: return "sadly";
    case StyleLabel::kStressed: return "nervously";
    case StyleLabel::kDrunk: return "drunkenly";
    case StyleLabel::kRelaxed: return "leisurely";
  }
  return "calmly";
}

}  // namespace

json synthetic_apartment_json() {
  json objects = json::array();
  objects.push_back(static_object(
      "sofa_1", "sofa", "living", 2.0, 6.5, 0.0, box(-1.0, -0.45, 0.0, 1.0, 0.45, 0.8),
      {{"seat", {{"box", box(-0.9, -0.35, 0.4, 0.9, 0.35, 0.45)}}}}));
  objects.push_back(static_object(
      "armchair_1", "armchair", "living", 4.5, 6.5, 0.0, box(-0.45, -0.45, 0.0, 0.45, 0.45, 0.9),
      {{"seat", {{"box", box(-0.35, -0.35, 0.4, 0.35, 0.35, 0.45)}}}}));
  objects.push_back(static_object(
      "shelf_1", "shelf", "living", 0.4, 3.0, 0.0, box(-0.2, -0.6, 0.0, 0.2, 0.6, 1.8),
      {{"front", {{"box", box(0.15, -0.5, 0.8, 0.2, 0.5, 1.6)}}}}));
  objects.push_back(static_object(
      "table_1", "table", "living", 3.0, 3.5, 0.0, box(-0.6, -0.4, 0.0, 0.6, 0.4, 0.75),
      {{"top", {{"box", box(-0.6, -0.4, 0.7, 0.6, 0.4, 0.75)}}}}));
  objects.push_back(static_object("lamp_1", "lamp", "living", 5.3, 1.0, 0.0,
                                  box(-0.2, -0.2, 0.0, 0.2, 0.2, 1.6)));
  objects.push_back(static_object(
      "bed_1", "bed", "bedroom", 8.5, 5.5, 0.0, box(-1.0, -1.1, 0.0, 1.0, 1.1, 0.5),
      {{"bed", {{"box", box(-0.9, -1.0, 0.45, 0.9, 1.0, 0.5)}}}}));
  objects.push_back(static_object("wardrobe_1", "wardrobe", "bedroom", 9.5, 1.5, 0.0,
                                  box(-0.3, -0.6, 0.0, 0.3, 0.6, 2.0)));
  objects.push_back(static_object(
      "chair_1", "chair", "bedroom", 7.2, 2.0, 1.5707963267948966,
      box(-0.25, -0.25, 0.0, 0.25, 0.25, 0.9),
      {{"seat", {{"box", box(-0.2, -0.2, 0.4, 0.2, 0.2, 0.45)}}}}));
  objects.push_back(dynamic_object("toy_1", "toy", "living", 2.5, 1.5,
                                   box(-0.15, -0.15, 0.0, 0.15, 0.15, 0.3)));
  objects.push_back(dynamic_object("vase_1", "vase", "living", 1.4, 4.6,
                                   box(-0.1, -0.1, 0.0, 0.1, 0.1, 0.4)));
  return {{"v", kSceneSchemaVersion},
          {"voxel_size", kDefaultVoxelSize},
          {"bounds", {{"min", {0.0, 0.0}}, {"max", {10.0, 8.0}}}},
          {"objects", std::move(objects)}};
}

Scene synthetic_apartment() { return scene_from_json(synthetic_apartment_json()); }

json random_box_scene_json(std::size_t count, double voxel, std::uint64_t seed,
                           const GroundRect& bounds) {
  Rng rng(seed);
  json objects = json::array();
  for (std::size_t i = 0; i < count; ++i) {
    const double sx = rng.uniform(0.2, 1.5);
    const double sy = rng.uniform(0.2, 1.5);
    const double sz = rng.uniform(0.2, 2.0);
    const double x = rng.uniform(bounds.min.x() + sx, bounds.max.x() - sx);
    const double y = rng.uniform(bounds.min.y() + sy, bounds.max.y() - sy);
    objects.push_back(static_object("box_" + std::to_string(i), "box", "", x, y, 0.0,
                                    box(-0.5 * sx, -0.5 * sy, 0.0, 0.5 * sx, 0.5 * sy, sz)));
  }
  return {{"v", kSceneSchemaVersion},
          {"voxel_size", voxel},
          {"bounds", {{"min", {bounds.min.x(), bounds.min.y()}},
                      {"max", {bounds.max.x(), bounds.max.y()}}}},
          {"objects", std::move(objects)}};
}

std::vector<ShortScript> random_short_scripts(std::size_t count, std::uint64_t seed) {
  static const std::array<std::string, 3> kSeats = {"sofa", "armchair", "chair"};
  static const std::array<std::string, 2> kBeds = {"bed", "sofa"};
  static const std::array<std::string, 4> kReachables = {"shelf", "table", "lamp", "wardrobe"};
  static const std::array<std::string, 2> kCarryables = {"toy", "vase"};
  static const std::array<std::string, 6> kTimes = {"in the morning", "after lunch",
                                                    "in the afternoon", "before dinner",
                                                    "late at night", "on a rainy day"};
  static const std::array<std::string, 5> kMoods = {"feels", "seems", "looks", "is", "acts"};

  Rng rng(seed);
  std::vector<ShortScript> out;
  out.reserve(count);
  for (std::size_t n = 0; n < count; ++n) {
    const StyleLabel style = kAllStyles[rng.next_u64() % kAllStyles.size()];
    const std::string adv = style_adjective(style);
    ShortScript script;
    std::string story;
    const int tuples = 2 + static_cast<int>(rng.next_u64() % 3);
    for (int t = 0; t < tuples; ++t) {
      const auto kind = rng.next_u64() % 6;
      auto styled = [&](SkillId skill, std::optional<std::string> obj, const std::string& what) {
        script.keyframes.push_back({skill, std::move(obj), adv + " " + what, style});
      };
      auto plain = [&](SkillId skill, std::string obj) {
        script.keyframes.push_back({skill, std::move(obj), std::nullopt, std::nullopt});
      };
      std::string part;
      switch (kind) {
        case 0:
          styled(SkillId::kIdle, std::nullopt, "stand still");
          part = "pauses";
          break;
        case 1:
          styled(SkillId::kWalk, std::nullopt, "walk around");
          part = "wanders around";
          break;
        case 2: {
          const std::string& seat = pick(kSeats, rng);
          styled(SkillId::kSit, seat, "sit down");
          plain(SkillId::kGetUp, seat);
          part = "sits on the " + seat;
          break;
        }
        case 3: {
          const std::string& bed = pick(kBeds, rng);
          styled(SkillId::kLie, bed, "lie down");
          plain(SkillId::kGetUp, bed);
          part = "lies on the " + bed;
          break;
        }
        case 4: {
          const std::string& target = pick(kReachables, rng);
          styled(SkillId::kWalk, target, "walk over");
          plain(SkillId::kReach, target);
          part = "touches the " + target;
          break;
        }
        default: {
          const std::string& thing = pick(kCarryables, rng);
          styled(SkillId::kWalk, thing, "walk over");
          styled(SkillId::kCarry, thing, "carry it");
          part = "moves the " + thing;
          break;
        }
      }
      story += (story.empty() ? "" : ", then ") + part;
    }
    script.summary = "The character " + pick(kMoods, rng) + " " + std::string(to_string(style)) +
                     " " + pick(kTimes, rng) + " and " + story + ".";
    script.style_label = modal_style(script.keyframes);
    out.push_back(std::move(script));
  }
  return out;
}

ScriptDatabase build_database(const std::vector<ShortScript>& scripts,
                              const EmbeddingProvider& provider) {
  ScriptDatabase db;
  for (const auto& s : scripts) insert_script(db, s, provider);
  return db;
}

}  // namespace stylescene
