// Copyright 2026 The ragmark Authors.
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

#pragma once

// Text backends. The offline backend embeds by signed feature hashing of
// canonical concepts; its completion endpoint is absent, and callers switch
// to their deterministic heuristics instead.

#include <cmath>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "ragmark/core.hpp"
#include "ragmark/lexicon.hpp"
#include "ragmark/text.hpp"

namespace ragmark {

using Embedding = std::vector<double>;

inline constexpr std::size_t kDefaultEmbeddingDim = 256;

inline double dot(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size())
    throw Error("embedding dimension mismatch: " + std::to_string(a.size()) +
                " vs " + std::to_string(b.size()));
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

inline void l2_normalize(Embedding& v) {
  double n = 0.0;
  for (double x : v) n += x * x;
  if (n <= 0.0) return;
  n = std::sqrt(n);
  for (double& x : v) x /= n;
}

// Each distinct concept contributes one signed unit to a hashed bucket.
class HashingEmbedder {
 public:
  explicit HashingEmbedder(std::size_t dim = kDefaultEmbeddingDim, std::uint64_t seed = 0)
      : dim_(dim), seed_(seed) {
    if (dim == 0) throw Error("embedding dimension must be >= 1");
  }

  std::size_t dim() const { return dim_; }

  std::set<std::string> concepts(std::string_view text) const {
    std::set<std::string> out;
    const auto& lex = Lexicon::instance();
    for (const auto& w : split_words(text))
      if (is_content_word(w)) out.insert(lex.concept_of(w));
    return out;
  }

  Embedding embed(std::string_view text) const {
    Embedding v(dim_, 0.0);
    for (const auto& c : concepts(text)) {
      const std::uint64_t h = hash_string(c, seed_);
      v[h % dim_] += (h >> 63) ? -1.0 : 1.0;
    }
    l2_normalize(v);
    return v;
  }

 private:
  std::size_t dim_;
  std::uint64_t seed_;
};

class TextBackend {
 public:
  virtual ~TextBackend() = default;
  virtual std::string id() const = 0;
  // True when the backend has no completion endpoint and callers must use
  // their offline heuristics.
  virtual bool offline() const = 0;
  virtual std::string complete(const std::string& prompt) = 0;
  virtual Embedding embed(std::string_view text) = 0;
};

class OfflineBackend final : public TextBackend {
 public:
  explicit OfflineBackend(std::string id = "offline", HashingEmbedder embedder = HashingEmbedder())
      : id_(std::move(id)), embedder_(embedder) {}

  std::string id() const override { return id_; }
  bool offline() const override { return true; }
  std::string complete(const std::string&) override {
    throw Error("backend '" + id_ + "' is offline and has no completion endpoint");
  }
  Embedding embed(std::string_view text) override { return embedder_.embed(text); }
  const HashingEmbedder& embedder() const { return embedder_; }

 private:
  std::string id_;
  HashingEmbedder embedder_;
};

}  // namespace ragmark
