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

#ifndef STYLESCENE_SYNTHETIC_HPP_
#define STYLESCENE_SYNTHETIC_HPP_

#include <cstdint>
#include <vector>

#include <nlohmann/json.hpp>

#include "stylescene/scene.hpp"
#include "stylescene/scriptdb.hpp"

namespace stylescene {

// Two-room apartment (10 m x 8 m): sofa, armchair, shelf, table, lamp, bed,
// wardrobe, chair and two carryable objects (toy, vase).
nlohmann::json synthetic_apartment_json();
Scene synthetic_apartment();

// `count` random axis-aligned boxes inside `bounds`, voxelized at `voxel`.
nlohmann::json random_box_scene_json(std::size_t count, double voxel, std::uint64_t seed,
                                     const GroundRect& bounds);

// Valid short scripts over the apartment categories (ids left empty).
std::vector<ShortScript> random_short_scripts(std::size_t count, std::uint64_t seed);

ScriptDatabase build_database(const std::vector<ShortScript>& scripts,
                              const EmbeddingProvider& provider);

}  // namespace stylescene

#endif  // STYLESCENE_SYNTHETIC_HPP_
