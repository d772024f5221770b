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

#include "stylescene/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include <Eigen/Eigenvalues>
#include <nlohmann/json.hpp>
#include <spdlog/spdlog.h>

#include "stylescene/error.hpp"

namespace stylescene {
namespace {

void require_finite(const Eigen::MatrixXd& m, const char* what) {
  if (!m.allFinite()) throw ValidationError(std::string(what) + " contains non-finite values");
}

Eigen::MatrixXd pool(std::span<const MotionFeature> set) {
  if (set.empty()) throw ValidationError("fid: empty sample set");
  Eigen::Index rows = 0;
  const Eigen::Index cols = set.front().cols();
  for (const auto& s : set) {
    if (s.cols() != cols) throw ValidationError("fid: feature dim mismatch within a set");
    rows += s.rows();
  }
  Eigen::MatrixXd out(rows, cols);
  Eigen::Index r = 0;
  for (const auto& s : set) {
    out.middleRows(r, s.rows()) = s;
    r += s.rows();
  }
  return out;
}

Eigen::MatrixXd symmetric_sqrt(const Eigen::MatrixXd& m) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(m);
  if (eig.info() != Eigen::Success) throw ValidationError("eigendecomposition failed");
  const Eigen::VectorXd root = eig.eigenvalues().cwiseMax(0.0).cwiseSqrt();
  return eig.eigenvectors() * root.asDiagonal() * eig.eigenvectors().transpose();
}

}  // namespace

MotionFeature motion_features(const ExecutionTrace& trace) {
  MotionFeature out(static_cast<Eigen::Index>(trace.records.size()),
                    static_cast<Eigen::Index>(kMotionFeatureDim));
  for (std::size_t f = 0; f < trace.records.size(); ++f) {
    const CharacterState& c = trace.records[f].character;
    Eigen::Index col = 0;
    const auto row = static_cast<Eigen::Index>(f);
    for (const auto& q : c.rotations) {
      out(row, col++) = q.w();
      out(row, col++) = q.x();
      out(row, col++) = q.y();
      out(row, col++) = q.z();
    }
    for (const Vec3& j : c.joints) {
      for (int i = 0; i < 3; ++i) out(row, col++) = j[i] - c.root_pos[i];
    }
  }
  return out;
}

std::map<SkillId, double> success_rate(std::span<const ExecutionTrace> traces) {
  std::map<SkillId, std::pair<std::size_t, std::size_t>> counts;
  for (const auto& t : traces) {
    for (const auto& o : t.outcomes) {
      auto& [ok, total] = counts[o.skill];
      ok += o.success ? 1 : 0;
      ++total;
    }
  }
  std::map<SkillId, double> out;
  for (const auto& [skill, c] : counts) {
    out[skill] = 100.0 * static_cast<double>(c.first) / static_cast<double>(c.second);
  }
  return out;
}

std::map<SkillId, double> contact_error(std::span<const ExecutionTrace> traces) {
  std::map<SkillId, std::pair<double, std::size_t>> sums;
  for (const auto& t : traces) {
    for (const auto& o : t.outcomes) {
      auto& [sum, n] = sums[o.skill];
      sum += o.error;
      ++n;
    }
  }
  std::map<SkillId, double> out;
  for (const auto& [skill, s] : sums) out[skill] = s.first / static_cast<double>(s.second);
  return out;
}

double contact_error(std::span<const ExecutionTrace> traces, SkillId skill) {
  const auto all = contact_error(traces);
  const auto it = all.find(skill);
  if (it == all.end()) {
    throw ValidationError("contact_error: no attempts of skill '" +
                          std::string(to_string(skill)) + "'");
  }
  return it->second;
}

double apd(std::span<const MotionFeature> samples) {
  if (samples.size() < 2) throw ValidationError("apd needs at least two samples");
  const Eigen::Index cols = samples.front().cols();
  Eigen::Index rows = samples.front().rows();
  for (const auto& s : samples) {
    if (s.cols() != cols) throw ValidationError("apd: feature dim mismatch");
    require_finite(s, "apd sample");
    rows = std::min(rows, s.rows());
  }
  std::vector<double> dists;
  dists.reserve(samples.size() * (samples.size() - 1) / 2);
  for (std::size_t i = 0; i < samples.size(); ++i) {
    for (std::size_t j = i + 1; j < samples.size(); ++j) {
      double sum = 0.0;
      for (Eigen::Index r = 0; r < rows; ++r) {
        for (Eigen::Index c = 0; c < cols; ++c) {
          const double d = samples[i](r, c) - samples[j](r, c);
          sum += d * d;
        }
      }
      dists.push_back(std::sqrt(sum));
    }
  }
  std::sort(dists.begin(), dists.end());
  double total = 0.0;
  for (double d : dists) total += d;
  return total / static_cast<double>(dists.size());
}

GaussianStats fit_gaussian(const Eigen::MatrixXd& frames) {
  if (frames.rows() == 0 || frames.cols() == 0) {
    throw ValidationError("fit_gaussian: no frames");
  }
  require_finite(frames, "features");
  GaussianStats g;
  g.mu = frames.colwise().mean().transpose();
  const Eigen::MatrixXd centered = frames.rowwise() - g.mu.transpose();
  const double n = static_cast<double>(frames.rows());
  g.sigma = frames.rows() > 1 ? Eigen::MatrixXd(centered.transpose() * centered / (n - 1.0))
                              : Eigen::MatrixXd::Zero(frames.cols(), frames.cols());
  g.sigma = 0.5 * (g.sigma + g.sigma.transpose());
  if (frames.rows() < frames.cols() + 1) {
    g.sigma.diagonal().array() += kCovarianceRegularizer;
  }
  return g;
}

double frechet_distance(const GaussianStats& a, const GaussianStats& b) {
  if (a.mu.size() != b.mu.size() || a.sigma.rows() != b.sigma.rows()) {
    throw ValidationError("fid: dimension mismatch");
  }
  require_finite(a.sigma, "covariance");
  require_finite(b.sigma, "covariance");
  const Eigen::MatrixXd root_a = symmetric_sqrt(a.sigma);
  Eigen::MatrixXd m = root_a * b.sigma * root_a;
  m = 0.5 * (m + m.transpose());
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(m, Eigen::EigenvaluesOnly);
  if (eig.info() != Eigen::Success) throw ValidationError("eigendecomposition failed");
  const double trace_sqrt = eig.eigenvalues().cwiseMax(0.0).cwiseSqrt().sum();
  const double d = (a.mu - b.mu).squaredNorm() + a.sigma.trace() + b.sigma.trace() -
                   2.0 * trace_sqrt;
  if (d < 0.0 && d >= -kFidClampTolerance) return 0.0;
  if (d < 0.0) spdlog::warn("fid: negative trace residue {}", d);
  return d;
}

double fid(const Eigen::MatrixXd& frames_a, const Eigen::MatrixXd& frames_b) {
  if (frames_a.cols() != frames_b.cols()) throw ValidationError("fid: dimension mismatch");
  return frechet_distance(fit_gaussian(frames_a), fit_gaussian(frames_b));
}

double fid(std::span<const MotionFeature> set_a, std::span<const MotionFeature> set_b) {
  return fid(pool(set_a), pool(set_b));
}

double script_diversity(std::span<const std::string> texts, const EmbeddingProvider& provider) {
  if (texts.size() < 2) throw ValidationError("script_diversity needs at least two texts");
  const auto vectors = provider.embed_batch(texts);
  double sum = 0.0;
  std::size_t pairs = 0;
  for (std::size_t i = 0; i < vectors.size(); ++i) {
    for (std::size_t j = i + 1; j < vectors.size(); ++j) {
      sum += cosine_similarity(vectors[i], vectors[j]);
      ++pairs;
    }
  }
  return sum / static_cast<double>(pairs);
}

MetricsReport evaluate_traces(std::span<const ExecutionTrace> traces,
                              std::span<const ExecutionTrace> reference) {
  if (traces.empty()) throw ValidationError("evaluate: no traces");
  MetricsReport report;
  report.episodes = traces.size();
  for (const auto& t : traces) {
    ++report.terminations[std::string(to_string(t.termination))];
    for (const auto& o : t.outcomes) ++report.attempts[o.skill];
  }
  report.success_rate = success_rate(traces);
  report.contact_error = contact_error(traces);

  std::vector<MotionFeature> features;
  for (const auto& t : traces) {
    if (!t.records.empty()) features.push_back(motion_features(t));
  }
  if (features.size() >= 2) report.apd = apd(features);
  std::vector<MotionFeature> ref;
  for (const auto& t : reference) {
    if (!t.records.empty()) ref.push_back(motion_features(t));
  }
  if (!features.empty()) report.fid = fid(features, ref.empty() ? features : ref);
  return report;
}

nlohmann::json to_json(const MetricsReport& report) {
  nlohmann::json j;
  j["episodes"] = report.episodes;
  j["terminations"] = report.terminations;
  nlohmann::json rate = nlohmann::json::object();
  nlohmann::json err = nlohmann::json::object();
  nlohmann::json attempts = nlohmann::json::object();
  for (const auto& [s, v] : report.success_rate) rate[std::string(to_string(s))] = v;
  for (const auto& [s, v] : report.contact_error) err[std::string(to_string(s))] = v;
  for (const auto& [s, v] : report.attempts) attempts[std::string(to_string(s))] = v;
  j["success_rate"] = std::move(rate);
  j["contact_error"] = std::move(err);
  j["attempts"] = std::move(attempts);
  j["apd"] = report.apd ? nlohmann::json(*report.apd) : nlohmann::json(nullptr);
  j["fid"] = report.fid ? nlohmann::json(*report.fid) : nlohmann::json(nullptr);
  j["diversity"] = report.diversity ? nlohmann::json(*report.diversity) : nlohmann::json(nullptr);
  return j;
}

std::string to_csv(const MetricsReport& report) {
  std::ostringstream out;
  out.precision(17);
  out << "skill,attempts,success_rate,contact_error\n";
  for (const auto& [skill, n] : report.attempts) {
    out << to_string(skill) << ',' << n << ',' << report.success_rate.at(skill) << ','
        << report.contact_error.at(skill) << '\n';
  }
  return out.str();
}

}  // namespace stylescene
