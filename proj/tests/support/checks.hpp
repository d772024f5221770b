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

#ifndef STYLESCENE_TESTS_SUPPORT_CHECKS_HPP_
#define STYLESCENE_TESTS_SUPPORT_CHECKS_HPP_

// Randomized comparisons of library code against the oracles. Shared by
// the unit tests and the acceptance binary.

#include <cstddef>
#include <cstdint>
#include <string>

namespace stylescene::check {

enum class RewardTemplate { kLoco, kIdle, kHsi, kGetUp, kDoi };

std::string to_string(RewardTemplate t);

struct RewardComparison {
  double max_abs_diff = 0.0;
  std::size_t far_count = 0;
  std::size_t near_count = 0;
};

// Evaluates `count` random states for the template with both the library and
// the oracle. Roughly half the states land in the near branch.
RewardComparison compare_rewards(RewardTemplate t, std::size_t count, std::uint64_t seed);

struct RetrievalComparison {
  std::size_t queries = 0;
  std::size_t mismatches = 0;
};

RetrievalComparison compare_retrieval(std::size_t db_size, std::size_t queries,
                                      std::uint64_t seed);

struct GrammarComparison {
  std::size_t sequences = 0;
  std::size_t mismatches = 0;
};

// Every sequence over the 7 skills with length <= max_len.
GrammarComparison compare_grammar(std::size_t max_len);

struct HeightmapComparison {
  std::size_t scenes = 0;
  std::size_t cells_checked = 0;
  std::size_t exact_cells = 0;  // cells with an unambiguous analytic height
  std::size_t failures = 0;
  double max_error = 0.0;
};

HeightmapComparison compare_heightmaps(std::size_t scenes, std::uint64_t seed);

}  // namespace stylescene::check

#endif  // STYLESCENE_TESTS_SUPPORT_CHECKS_HPP_
