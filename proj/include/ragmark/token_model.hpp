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

// Vocabulary, whitespace/punctuation tokenizer and an additively smoothed
// n-gram model. The model is the desk-scale stand-in for the generator whose
// next-token distribution the green/red layer biases.

#include <algorithm>
#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <utility>
#include <vector>

#include "json.hpp"
#include "ragmark/core.hpp"
#include "ragmark/text.hpp"

namespace ragmark {

using TokenId = std::uint32_t;
using TokenSequence = std::vector<TokenId>;

inline constexpr std::string_view kUnkToken = "<unk>";
inline constexpr std::string_view kBosToken = "<bos>";

class Vocabulary {
 public:
  Vocabulary() : Vocabulary(std::vector<std::string>{}) {}

  // Tokens keep their order; the reserved <unk>/<bos> entries are appended
  // when absent.
  explicit Vocabulary(std::vector<std::string> tokens) {
    for (auto& t : tokens) add(std::move(t));
    unk_ = add(std::string(kUnkToken));
    bos_ = add(std::string(kBosToken));
  }

  // Returns the id of `token`, inserting it if new.
  TokenId add(std::string token) {
    auto it = index_.find(token);
    if (it != index_.end()) return it->second;
    const auto id = static_cast<TokenId>(tokens_.size());
    index_.emplace(token, id);
    tokens_.push_back(std::move(token));
    return id;
  }

  std::optional<TokenId> find(std::string_view token) const {
    auto it = index_.find(std::string(token));
    if (it == index_.end()) return std::nullopt;
    return it->second;
  }

  TokenId id_or_unk(std::string_view token) const {
    return find(token).value_or(unk_);
  }

  const std::string& token(TokenId id) const {
    if (id >= tokens_.size()) throw Error("token id out of range: " + std::to_string(id));
    return tokens_[id];
  }

  std::size_t size() const { return tokens_.size(); }
  TokenId unk() const { return unk_; }
  TokenId bos() const { return bos_; }
  const std::vector<std::string>& tokens() const { return tokens_; }

  bool operator==(const Vocabulary& o) const { return tokens_ == o.tokens_; }

 private:
  std::vector<std::string> tokens_;
  std::unordered_map<std::string, TokenId> index_;
  TokenId unk_ = 0;
  TokenId bos_ = 0;
};

// Unknown tokens map to <unk>.
inline TokenSequence tokenize(std::string_view text, const Vocabulary& vocab) {
  TokenSequence out;
  for (const auto& w : split_words(text)) out.push_back(vocab.id_or_unk(w));
  return out;
}

// Grows the vocabulary with every unseen token.
inline TokenSequence tokenize(std::string_view text, Vocabulary& vocab,
                              bool build) {
  if (!build) return tokenize(text, std::as_const(vocab));
  TokenSequence out;
  for (auto& w : split_words(text)) out.push_back(vocab.add(std::move(w)));
  return out;
}

inline std::string detokenize(std::span<const TokenId> ids,
                              const Vocabulary& vocab) {
  std::string out;
  for (std::size_t i = 0; i < ids.size(); ++i) {
    if (i) out += ' ';
    out += vocab.token(ids[i]);
  }
  return out;
}

// Additively smoothed n-gram model over a fixed vocabulary size. Contexts
// shorter than `order` are left-padded with <bos>.
class NGramModel {
 public:
  struct ContextCounts {
    std::vector<std::pair<TokenId, std::uint32_t>> next;  // sorted by id
    std::uint64_t total = 0;
  };

  NGramModel() = default;
  NGramModel(std::size_t order, double smoothing, std::size_t vocab_size,
             TokenId bos)
      : order_(order), smoothing_(smoothing), vocab_size_(vocab_size), bos_(bos) {
    if (order < 1 || order > 3) throw Error("n-gram order must be in [1, 3]");
    if (smoothing < 0) throw Error("smoothing must be >= 0");
    if (vocab_size == 0 || vocab_size >= (1u << 21))
      throw Error("vocabulary size must be in [1, 2^21)");
  }

  std::size_t order() const { return order_; }
  double smoothing() const { return smoothing_; }
  std::size_t vocab_size() const { return vocab_size_; }
  TokenId bos() const { return bos_; }

  // Packs the last `order` tokens of `context` (left-padded with <bos>).
  std::uint64_t key(std::span<const TokenId> context) const {
    std::uint64_t k = 0;
    for (std::size_t i = 0; i < order_; ++i) {
      const std::size_t need = order_ - i;  // distance from the end
      TokenId id = context.size() >= need ? context[context.size() - need] : bos_;
      k = (k << 21) | id;
    }
    return k;
  }

  const ContextCounts* find(std::span<const TokenId> context) const {
    auto it = table_.find(key(context));
    return it == table_.end() ? nullptr : &it->second;
  }

  void observe(std::span<const TokenId> context, TokenId next) {
    auto& cc = table_[key(context)];
    auto it = std::lower_bound(
        cc.next.begin(), cc.next.end(), next,
        [](const auto& e, TokenId v) { return e.first < v; });
    if (it != cc.next.end() && it->first == next)
      ++it->second;
    else
      cc.next.insert(it, {next, 1});
    ++cc.total;
  }

  // p(v | context) for every v; uniform when the context was never seen.
  std::vector<double> next_distribution(std::span<const TokenId> context) const {
    std::vector<double> p(vocab_size_);
    const ContextCounts* cc = find(context);
    if (!cc || cc->total == 0) {
      std::fill(p.begin(), p.end(), 1.0 / static_cast<double>(vocab_size_));
      return p;
    }
    const double denom = static_cast<double>(cc->total) +
                         smoothing_ * static_cast<double>(vocab_size_);
    std::fill(p.begin(), p.end(), smoothing_ / denom);
    for (auto [id, c] : cc->next)
      p[id] = (static_cast<double>(c) + smoothing_) / denom;
    return p;
  }

  // Probability of a single continuation, without materializing the vector.
  double prob(std::span<const TokenId> context, TokenId next) const {
    const ContextCounts* cc = find(context);
    if (!cc || cc->total == 0) return 1.0 / static_cast<double>(vocab_size_);
    const double denom = static_cast<double>(cc->total) +
                         smoothing_ * static_cast<double>(vocab_size_);
    auto it = std::lower_bound(
        cc->next.begin(), cc->next.end(), next,
        [](const auto& e, TokenId v) { return e.first < v; });
    const double c = (it != cc->next.end() && it->first == next) ? it->second : 0;
    return (c + smoothing_) / denom;
  }

  // Context windows in key order; used for deterministic serialization.
  std::vector<std::pair<std::vector<TokenId>, const ContextCounts*>> contexts()
      const {
    std::map<std::uint64_t, const ContextCounts*> sorted;
    for (const auto& [k, v] : table_) sorted.emplace(k, &v);
    std::vector<std::pair<std::vector<TokenId>, const ContextCounts*>> out;
    for (auto [k, v] : sorted) {
      std::vector<TokenId> ctx(order_);
      for (std::size_t i = 0; i < order_; ++i)
        ctx[order_ - 1 - i] = static_cast<TokenId>((k >> (21 * i)) & 0x1fffff);
      out.emplace_back(std::move(ctx), v);
    }
    return out;
  }

  std::size_t num_contexts() const { return table_.size(); }

  bool operator==(const NGramModel& o) const {
    if (order_ != o.order_ || smoothing_ != o.smoothing_ ||
        vocab_size_ != o.vocab_size_ || bos_ != o.bos_ ||
        table_.size() != o.table_.size())
      return false;
    for (const auto& [k, v] : table_) {
      auto it = o.table_.find(k);
      if (it == o.table_.end() || it->second.total != v.total ||
          it->second.next != v.next)
        return false;
    }
    return true;
  }

 private:
  std::size_t order_ = 1;
  double smoothing_ = 0.0;
  std::size_t vocab_size_ = 1;
  TokenId bos_ = 0;
  std::unordered_map<std::uint64_t, ContextCounts> table_;
};

inline NGramModel train_ngram(std::span<const TokenSequence> corpus,
                              std::size_t order, double smoothing,
                              std::size_t vocab_size, TokenId bos) {
  if (corpus.empty()) throw Error("train_ngram: empty corpus");
  NGramModel model(order, smoothing, vocab_size, bos);
  for (const auto& seq : corpus) {
    for (std::size_t t = 0; t < seq.size(); ++t) {
      if (seq[t] >= vocab_size)
        throw Error("train_ngram: token id " + std::to_string(seq[t]) +
                    " outside vocabulary");
      model.observe(std::span<const TokenId>(seq.data(), t), seq[t]);
    }
  }
  return model;
}

inline NGramModel train_ngram(std::span<const TokenSequence> corpus,
                              std::size_t order, double smoothing,
                              const Vocabulary& vocab) {
  return train_ngram(corpus, order, smoothing, vocab.size(), vocab.bos());
}

// ---------------------------------------------------------------------------
// Serialization (vocab.json / model.json)

inline nlohmann::ordered_json to_json(const Vocabulary& v) {
  nlohmann::ordered_json j;
  j["format"] = "ragmark.vocab";
  j["version"] = 1;
  j["tokens"] = v.tokens();
  return j;
}

inline Vocabulary vocabulary_from_json(const nlohmann::json& j) {
  if (j.value("format", "") != "ragmark.vocab" || j.value("version", 0) != 1)
    throw Error("not a ragmark.vocab v1 document");
  return Vocabulary(j.at("tokens").get<std::vector<std::string>>());
}

inline nlohmann::ordered_json to_json(const NGramModel& m) {
  nlohmann::ordered_json j;
  j["format"] = "ragmark.ngram";
  j["version"] = 1;
  j["order"] = m.order();
  j["smoothing"] = m.smoothing();
  j["vocab_size"] = m.vocab_size();
  j["bos"] = m.bos();
  auto& ctxs = j["contexts"] = nlohmann::ordered_json::array();
  for (const auto& [ctx, cc] : m.contexts()) {
    nlohmann::ordered_json e;
    e["context"] = ctx;
    auto& nx = e["next"] = nlohmann::ordered_json::array();
    for (auto [id, c] : cc->next) nx.push_back({id, c});
    ctxs.push_back(std::move(e));
  }
  return j;
}

inline NGramModel ngram_from_json(const nlohmann::json& j) {
  if (j.value("format", "") != "ragmark.ngram" || j.value("version", 0) != 1)
    throw Error("not a ragmark.ngram v1 document");
  NGramModel m(j.at("order").get<std::size_t>(), j.at("smoothing").get<double>(),
               j.at("vocab_size").get<std::size_t>(), j.at("bos").get<TokenId>());
  for (const auto& e : j.at("contexts")) {
    auto ctx = e.at("context").get<std::vector<TokenId>>();
    for (const auto& nx : e.at("next")) {
      const auto id = nx.at(0).get<TokenId>();
      const auto c = nx.at(1).get<std::uint32_t>();
      for (std::uint32_t i = 0; i < c; ++i) m.observe(ctx, id);
    }
  }
  return m;
}

}  // namespace ragmark
