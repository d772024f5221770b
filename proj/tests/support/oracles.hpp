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

#ifndef STYLESCENE_TESTS_SUPPORT_ORACLES_HPP_
#define STYLESCENE_TESTS_SUPPORT_ORACLES_HPP_

// Reference implementations used only by tests. They are written directly
// from the formulas on plain arrays and share no code with the library.

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "stylescene/planner.hpp"
#include "stylescene/scene.hpp"
#include "stylescene/scriptdb.hpp"

namespace stylescene::oracle {

using A2 = std::array<double, 2>;
using A3 = std::array<double, 3>;

double loco_reward(const A2& root, const A2& target, const A2& vel, const A2& prev_vel,
                   const A2& facing, double g_vel);

double idle_reward(const A2& root, const A2& target, const A2& vel, const A2& prev_vel,
                   const A2& facing);

double hsi_reward(const A3& root, const A3& target, const A2& vel, const A2& facing,
                  double g_vel, const A3& joint, const A3& contact);

double doi_reward(const A2& root, const A2& root_vel, const A3& hand, const A3& obj,
                  const A3& obj_vel, const A3& goal, double speed, double carry_threshold);

// All concatenations of the skill tuples with total length <= max_len.
std::vector<std::vector<SkillId>> enumerate_grammar(std::size_t max_len);

std::vector<Retrieved> brute_force_retrieve(const ScriptDatabase& db,
                                            const std::vector<double>& query,
                                            const std::vector<StyleLabel>& styles,
                                            std::size_t k);

struct ScanResult {
  std::size_t index;
  double distance;
};
ScanResult linear_nearest(const std::vector<Vec3>& points, const Vec3& q);

struct OracleBox {
  double x0, y0, x1, y1, top;
};

// Expected height of heightmap cell (i, j). Sets `ambiguous` when the cell
// straddles a footprint edge, where only 0 <= h <= top bounds hold.
double analytic_cell_height(const std::vector<OracleBox>& boxes, double rx, double ry,
                            double yaw, int i, int j, bool* ambiguous, double* upper);

double frechet_1d(double mu_a, double sigma_a, double mu_b, double sigma_b);

// Extended precision Frechet distance through the eigenvalues of the
// (non-symmetric) product Sa * Sb.
long double frechet_long_double(const Eigen::VectorXd& mu_a, const Eigen::MatrixXd& sa,
                                const Eigen::VectorXd& mu_b, const Eigen::MatrixXd& sb);

}  // namespace stylescene::oracle

#endif  // STYLESCENE_TESTS_SUPPORT_ORACLES_HPP_
