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

#ifndef STYLESCENE_METRICS_HPP_
#define STYLESCENE_METRICS_HPP_

#include <map>
#include <optional>
#include <span>
#include <string>

#include <Eigen/Core>
#include <nlohmann/json_fwd.hpp>

#include "stylescene/embedding.hpp"
#include "stylescene/fsm.hpp"

namespace stylescene {

// frames x dim, one row per 30 Hz frame.
using MotionFeature = Eigen::MatrixXd;

// Per frame: joint rotations (w, x, y, z) in joint order, then joint
// positions relative to the root.
MotionFeature motion_features(const ExecutionTrace& trace);

inline constexpr std::size_t kMotionFeatureDim = kJointCount * 4 + kJointCount * 3;

// Percentage of successful keyframe outcomes per skill. Skills without
// attempts are absent.
std::map<SkillId, double> success_rate(std::span<const ExecutionTrace> traces);

// Mean final error per skill over all attempts. Skills without attempts are
// absent.
std::map<SkillId, double> contact_error(std::span<const ExecutionTrace> traces);

// Mean final error for one skill; throws ValidationError without attempts.
double contact_error(std::span<const ExecutionTrace> traces, SkillId skill);

// Mean pairwise L2 distance between flattened samples, truncated to the
// shortest sample. Summation order is fixed by sorting, so any permutation of
// the samples yields the same bits.
double apd(std::span<const MotionFeature> samples);

struct GaussianStats {
  Eigen::VectorXd mu;
  Eigen::MatrixXd sigma;
};

inline constexpr double kCovarianceRegularizer = 1e-6;
inline constexpr double kFidClampTolerance = 1e-6;

// Unbiased covariance; adds 1e-6 I when there are fewer than dim+1 frames.
GaussianStats fit_gaussian(const Eigen::MatrixXd& frames);

// ||mu_a - mu_b||^2 + Tr(Sa + Sb - 2 (Sa Sb)^1/2), computed through the
// symmetric product Sa^1/2 Sb Sa^1/2.
double frechet_distance(const GaussianStats& a, const GaussianStats& b);

double fid(const Eigen::MatrixXd& frames_a, const Eigen::MatrixXd& frames_b);

// Pools the frames of every sample in each set.
double fid(std::span<const MotionFeature> set_a, std::span<const MotionFeature> set_b);

double script_diversity(std::span<const std::string> texts, const EmbeddingProvider& provider);

struct MetricsReport {
  std::size_t episodes = 0;
  std::map<std::string, std::size_t> terminations;
  std::map<SkillId, double> success_rate;
  std::map<SkillId, double> contact_error;
  std::map<SkillId, std::size_t> attempts;
  std::optional<double> apd;
  std::optional<double> fid;
  std::optional<double> diversity;
};

// FID uses `reference` when non-empty, else the traces themselves.
MetricsReport evaluate_traces(std::span<const ExecutionTrace> traces,
                              std::span<const ExecutionTrace> reference);

nlohmann::json to_json(const MetricsReport& report);
std::string to_csv(const MetricsReport& report);

}  // namespace stylescene

#endif  // STYLESCENE_METRICS_HPP_
