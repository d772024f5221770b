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

#ifndef STYLESCENE_EMBEDDING_HPP_
#define STYLESCENE_EMBEDDING_HPP_

#include <cstddef>
#include <cstdint>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace stylescene {

inline constexpr std::size_t kDefaultEmbeddingDim = 64;

struct EmbeddingVector {
  std::vector<double> values;

  std::size_t dim() const { return values.size(); }
  bool is_zero() const;

  static EmbeddingVector zero(std::size_t dim) {
    return EmbeddingVector{std::vector<double>(dim, 0.0)};
  }

  friend bool operator==(const EmbeddingVector&,
                         const EmbeddingVector&) = default;
};

double norm(const EmbeddingVector& v);

// Throws ValidationError("degenerate embedding") for a zero vector.
EmbeddingVector normalize(const EmbeddingVector& v);

// Dot product of two unit vectors. Throws ValidationError on dim mismatch.
double cosine_similarity(const EmbeddingVector& a, const EmbeddingVector& b);

// 1 - cos(a, b), in [0, 2] for unit inputs.
double alignment_loss(const EmbeddingVector& motion,
                      const EmbeddingVector& text);

// Deterministic offline embedder. The vector is the normalized sum of one
// hashed pseudo-random direction per lowercase word token plus a half-weight
// direction hashed from the full byte sequence, so texts sharing words land
// near each other while distinct texts never coincide. No per-process salt.
EmbeddingVector test_embed(std::string_view text, std::size_t dim,
                           std::uint64_t seed);

class EmbeddingProvider {
 public:
  virtual ~EmbeddingProvider() = default;

  // Must be deterministic and safe to call concurrently.
  virtual EmbeddingVector embed(std::string_view text) const = 0;
  virtual std::vector<EmbeddingVector> embed_batch(
      std::span<const std::string> texts) const;
  virtual std::size_t dim() const = 0;
};

class TestEmbedder final : public EmbeddingProvider {
 public:
  explicit TestEmbedder(std::size_t dim = kDefaultEmbeddingDim,
                        std::uint64_t seed = 0);

  EmbeddingVector embed(std::string_view text) const override;
  std::size_t dim() const override { return dim_; }
  std::uint64_t seed() const { return seed_; }

 private:
  std::size_t dim_;
  std::uint64_t seed_;
};

// Fixed seeded projection with orthonormal rows, mapping wide text features
// (e.g. 512-d) onto the working embedding dimension.
class OrthogonalProjection {
 public:
  OrthogonalProjection(std::size_t in_dim, std::size_t out_dim,
                       std::uint64_t seed);
  ~OrthogonalProjection();
  OrthogonalProjection(OrthogonalProjection&&) noexcept;
  OrthogonalProjection& operator=(OrthogonalProjection&&) noexcept;

  std::size_t in_dim() const { return in_dim_; }
  std::size_t out_dim() const { return out_dim_; }

  std::vector<double> apply(std::span<const double> x) const;

 private:
  struct Impl;
  std::size_t in_dim_;
  std::size_t out_dim_;
  std::unique_ptr<Impl> impl_;
};

struct HttpEmbeddingOptions {
  std::string url;  // e.g. http://localhost:8080/embed
  double timeout_seconds = 10.0;
  int retries = 2;
  std::size_t dim = kDefaultEmbeddingDim;
  std::uint64_t projection_seed = 0x5EEDu;
};

// Client for POST {"texts": [...]} -> {"vectors": [[...], ...]}. Vectors whose
// width differs from `dim` are projected with OrthogonalProjection, then
// normalized. Each request opens its own connection.
class HttpEmbeddingProvider final : public EmbeddingProvider {
 public:
  explicit HttpEmbeddingProvider(HttpEmbeddingOptions options);
  ~HttpEmbeddingProvider() override;

  EmbeddingVector embed(std::string_view text) const override;
  std::vector<EmbeddingVector> embed_batch(
      std::span<const std::string> texts) const override;
  std::size_t dim() const override { return options_.dim; }

 private:
  EmbeddingVector finish(std::vector<double> raw) const;

  HttpEmbeddingOptions options_;
  struct Projections;
  std::unique_ptr<Projections> projections_;
};

inline constexpr const char* kEmbedUrlEnv = "STYLESCENE_EMBED_URL";

// Reads STYLESCENE_EMBED_URL; nullopt when unset or empty.
std::optional<HttpEmbeddingOptions> embedding_options_from_env();

}  // namespace stylescene

#endif  // STYLESCENE_EMBEDDING_HPP_
