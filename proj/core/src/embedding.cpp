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

#include "stylescene/embedding.hpp"

#include <cctype>
#include <cmath>

#include "stylescene/error.hpp"
#include "stylescene/rng.hpp"

namespace stylescene {
namespace {

std::uint64_t fnv1a(std::string_view bytes) {
  std::uint64_t h = 0xCBF29CE484222325ULL;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001B3ULL;
  }
  return h;
}

// Adds `weight` times a pseudo-random direction derived from `key` to `acc`.
void accumulate_hashed(std::string_view key, std::uint64_t seed,
                       std::uint64_t domain, double weight,
                       std::vector<double>& acc) {
  const std::uint64_t base = fnv1a(key) ^ splitmix64(seed ^ domain);
  for (std::size_t i = 0; i < acc.size(); ++i) {
    const std::uint64_t bits =
        splitmix64(base + 0x9E3779B97F4A7C15ULL * (i + 1));
    const double u = static_cast<double>(bits >> 11) * 0x1.0p-53;
    acc[i] += weight * (2.0 * u - 1.0);
  }
}

constexpr std::uint64_t kTokenDomain = 0x746F6B656EULL;
constexpr std::uint64_t kTextDomain = 0x74657874ULL;

}  // namespace

bool EmbeddingVector::is_zero() const {
  for (double x : values) {
    if (x != 0.0) return false;
  }
  return true;
}

double norm(const EmbeddingVector& v) {
  double s = 0.0;
  for (double x : v.values) s += x * x;
  return std::sqrt(s);
}

EmbeddingVector normalize(const EmbeddingVector& v) {
  const double n = norm(v);
  if (!(n > 0.0) || !std::isfinite(n)) {
    throw ValidationError("degenerate embedding");
  }
  EmbeddingVector out = v;
  for (double& x : out.values) x /= n;
  return out;
}

double cosine_similarity(const EmbeddingVector& a, const EmbeddingVector& b) {
  if (a.dim() != b.dim()) {
    throw ValidationError("embedding dim mismatch: " +
                          std::to_string(a.dim()) + " vs " +
                          std::to_string(b.dim()));
  }
  double s = 0.0;
  for (std::size_t i = 0; i < a.dim(); ++i) s += a.values[i] * b.values[i];
  return s;
}

double alignment_loss(const EmbeddingVector& motion,
                      const EmbeddingVector& text) {
  return 1.0 - cosine_similarity(motion, text);
}

EmbeddingVector test_embed(std::string_view text, std::size_t dim,
                           std::uint64_t seed) {
  if (dim < 2) throw ValidationError("test_embed requires dim >= 2");
  std::vector<double> acc(dim, 0.0);
  std::string token;
  auto flush = [&] {
    if (!token.empty()) {
      accumulate_hashed(token, seed, kTokenDomain, 1.0, acc);
      token.clear();
    }
  };
  for (unsigned char c : text) {
    if (std::isalnum(c)) {
      token.push_back(static_cast<char>(std::tolower(c)));
    } else {
      flush();
    }
  }
  flush();
  accumulate_hashed(text, seed, kTextDomain, 0.5, acc);
  return normalize(EmbeddingVector{std::move(acc)});
}

std::vector<EmbeddingVector> EmbeddingProvider::embed_batch(
    std::span<const std::string> texts) const {
  std::vector<EmbeddingVector> out;
  out.reserve(texts.size());
  for (const auto& t : texts) out.push_back(embed(t));
  return out;
}

TestEmbedder::TestEmbedder(std::size_t dim, std::uint64_t seed)
    : dim_(dim), seed_(seed) {
  if (dim_ < 2) throw ValidationError("TestEmbedder requires dim >= 2");
}

EmbeddingVector TestEmbedder::embed(std::string_view text) const {
  return test_embed(text, dim_, seed_);
}

}  // namespace stylescene
