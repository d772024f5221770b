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

#include <cmath>
#include <cstdlib>
#include <map>
#include <mutex>

#include <Eigen/Dense>
#include <httplib.h>

#include "http_util.hpp"
#include "stylescene/embedding.hpp"
#include "stylescene/error.hpp"
#include "stylescene/rng.hpp"

namespace stylescene {
namespace detail {

SplitUrl split_url(const std::string& url) {
  const auto scheme_end = url.find("://");
  if (scheme_end == std::string::npos) {
    throw ValidationError("url without scheme: " + url);
  }
  const auto path_begin = url.find('/', scheme_end + 3);
  if (path_begin == std::string::npos) return {url, "/"};
  return {url.substr(0, path_begin), url.substr(path_begin)};
}

nlohmann::json post_json(const std::string& url, const nlohmann::json& body,
                         double timeout_seconds, int retries) {
  const SplitUrl parts = split_url(url);
  const auto secs = static_cast<time_t>(timeout_seconds);
  const auto usecs =
      static_cast<time_t>((timeout_seconds - static_cast<double>(secs)) * 1e6);
  const std::string payload = body.dump();
  std::string last_error;
  for (int attempt = 0; attempt <= retries; ++attempt) {
    httplib::Client client(parts.origin);
    client.set_connection_timeout(secs, usecs);
    client.set_read_timeout(secs, usecs);
    client.set_write_timeout(secs, usecs);
    auto res = client.Post(parts.path, payload, "application/json");
    if (!res) {
      last_error = "transport error: " + httplib::to_string(res.error());
      continue;
    }
    if (res->status >= 500) {
      last_error = "HTTP " + std::to_string(res->status);
      continue;
    }
    if (res->status != 200) {
      throw IoError(url + ": HTTP " + std::to_string(res->status));
    }
    try {
      return nlohmann::json::parse(res->body);
    } catch (const nlohmann::json::exception& e) {
      throw IoError(url + ": malformed JSON reply: " + e.what());
    }
  }
  throw IoError(url + ": " + last_error + " after " +
                std::to_string(retries + 1) + " attempt(s)");
}

}  // namespace detail

struct OrthogonalProjection::Impl {
  Eigen::MatrixXd rows;  // out_dim x in_dim, orthonormal rows
};

OrthogonalProjection::OrthogonalProjection(std::size_t in_dim,
                                           std::size_t out_dim,
                                           std::uint64_t seed)
    : in_dim_(in_dim), out_dim_(out_dim), impl_(std::make_unique<Impl>()) {
  if (out_dim == 0 || out_dim > in_dim) {
    throw ValidationError("projection requires 0 < out_dim <= in_dim");
  }
  Rng rng(seed);
  Eigen::MatrixXd gaussian(in_dim, out_dim);
  for (Eigen::Index c = 0; c < gaussian.cols(); ++c) {
    for (Eigen::Index r = 0; r < gaussian.rows(); ++r) {
      gaussian(r, c) = rng.normal();
    }
  }
  Eigen::HouseholderQR<Eigen::MatrixXd> qr(gaussian);
  const Eigen::MatrixXd q =
      qr.householderQ() * Eigen::MatrixXd::Identity(in_dim, out_dim);
  impl_->rows = q.transpose();
}

OrthogonalProjection::~OrthogonalProjection() = default;
OrthogonalProjection::OrthogonalProjection(OrthogonalProjection&&) noexcept =
    default;
OrthogonalProjection& OrthogonalProjection::operator=(
    OrthogonalProjection&&) noexcept = default;

std::vector<double> OrthogonalProjection::apply(
    std::span<const double> x) const {
  if (x.size() != in_dim_) {
    throw ValidationError("projection input dim mismatch");
  }
  const Eigen::Map<const Eigen::VectorXd> in(x.data(),
                                             static_cast<Eigen::Index>(x.size()));
  const Eigen::VectorXd out = impl_->rows * in;
  return {out.data(), out.data() + out.size()};
}

struct HttpEmbeddingProvider::Projections {
  std::mutex mutex;
  std::map<std::size_t, OrthogonalProjection> by_input_dim;
};

HttpEmbeddingProvider::HttpEmbeddingProvider(HttpEmbeddingOptions options)
    : options_(std::move(options)),
      projections_(std::make_unique<Projections>()) {
  if (options_.dim < 2) throw ValidationError("embedding dim must be >= 2");
  detail::split_url(options_.url);
}

HttpEmbeddingProvider::~HttpEmbeddingProvider() = default;

EmbeddingVector HttpEmbeddingProvider::finish(std::vector<double> raw) const {
  if (raw.size() == options_.dim) return normalize(EmbeddingVector{std::move(raw)});
  if (raw.size() < options_.dim) {
    throw IoError("embedding service returned " + std::to_string(raw.size()) +
                  "-d vectors, need at least " + std::to_string(options_.dim));
  }
  const OrthogonalProjection* proj = nullptr;
  {
    std::lock_guard lock(projections_->mutex);
    auto it = projections_->by_input_dim.find(raw.size());
    if (it == projections_->by_input_dim.end()) {
      it = projections_->by_input_dim
               .emplace(raw.size(),
                        OrthogonalProjection(raw.size(), options_.dim,
                                             options_.projection_seed))
               .first;
    }
    proj = &it->second;
  }
  return normalize(EmbeddingVector{proj->apply(raw)});
}

EmbeddingVector HttpEmbeddingProvider::embed(std::string_view text) const {
  const std::string one(text);
  return embed_batch(std::span<const std::string>(&one, 1)).front();
}

std::vector<EmbeddingVector> HttpEmbeddingProvider::embed_batch(
    std::span<const std::string> texts) const {
  nlohmann::json body;
  body["texts"] = std::vector<std::string>(texts.begin(), texts.end());
  const nlohmann::json reply = detail::post_json(
      options_.url, body, options_.timeout_seconds, options_.retries);
  if (!reply.contains("vectors") || !reply["vectors"].is_array() ||
      reply["vectors"].size() != texts.size()) {
    throw IoError(options_.url + ": reply lacks one vector per text");
  }
  std::vector<EmbeddingVector> out;
  out.reserve(texts.size());
  for (const auto& v : reply["vectors"]) {
    try {
      out.push_back(finish(v.get<std::vector<double>>()));
    } catch (const nlohmann::json::exception& e) {
      throw IoError(options_.url + ": non-numeric vector: " + e.what());
    } catch (const ValidationError& e) {
      throw IoError(options_.url + ": " + e.what());
    }
  }
  return out;
}

std::optional<HttpEmbeddingOptions> embedding_options_from_env() {
  const char* url = std::getenv(kEmbedUrlEnv);
  if (url == nullptr || *url == '\0') return std::nullopt;
  HttpEmbeddingOptions options;
  options.url = url;
  return options;
}

}  // namespace stylescene
