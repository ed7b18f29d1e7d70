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

// Lexical watermark layer: a keyed, per-context split of the vocabulary into
// green and red tokens, a sampler that scales green probabilities by
// exp(delta), and the green-token counter used at detection time.
//
// Green membership for context c is decided by rank: the round(gamma * |V|)
// tokens with the smallest keyed hash h(seed, c, v) are green. This gives an
// exact green fraction for every context instead of one that holds only on
// average.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <memory>
#include <span>
#include <unordered_map>
#include <unordered_set>
#include <utility>
#include <vector>

#include "json.hpp"
#include "ragmark/core.hpp"
#include "ragmark/token_model.hpp"

namespace ragmark {

struct PartitionParams {
  double gamma = 0.25;
  double delta = 4.0;
  std::size_t context_width = 1;
  std::uint64_t seed = 0;

  double alpha() const { return std::exp(delta); }

  void validate() const {
    if (!(gamma > 0.0 && gamma < 1.0))
      throw Error("gamma must lie in (0, 1), got " + std::to_string(gamma));
    if (!(delta >= 0.0) || !std::isfinite(delta))
      throw Error("delta must be finite and >= 0, got " + std::to_string(delta));
    if (context_width < 1) throw Error("context width must be >= 1");
  }

  bool operator==(const PartitionParams&) const = default;
};

inline nlohmann::ordered_json to_json(const PartitionParams& p) {
  nlohmann::ordered_json j;
  j["gamma"] = p.gamma;
  j["delta"] = p.delta;
  j["context_width"] = p.context_width;
  j["seed"] = p.seed;
  return j;
}

inline PartitionParams partition_params_from_json(const nlohmann::json& j) {
  PartitionParams p;
  p.gamma = j.value("gamma", p.gamma);
  p.delta = j.value("delta", p.delta);
  p.context_width = j.value("context_width", p.context_width);
  p.seed = j.value("seed", p.seed);
  p.validate();
  return p;
}

inline std::size_t green_list_size(double gamma, std::size_t vocab_size) {
  return static_cast<std::size_t>(
      std::llround(gamma * static_cast<double>(vocab_size)));
}

// Hash state after absorbing the seed and the last k context ids (left-padded
// with `bos`). Ids are absorbed oldest first as 32-bit words.
inline std::uint64_t context_state(std::uint64_t seed,
                                   std::span<const TokenId> context,
                                   std::size_t k, TokenId bos) {
  std::uint64_t h = mix64(seed ^ 0x67726e7265640000ULL);
  for (std::size_t i = 0; i < k; ++i) {
    const std::size_t need = k - i;
    const TokenId id = context.size() >= need ? context[context.size() - need] : bos;
    h = mix64(h ^ (static_cast<std::uint64_t>(id) + 1));
  }
  return h;
}

inline std::uint64_t keyed_hash(std::uint64_t state, TokenId candidate) {
  return mix64(state ^ (static_cast<std::uint64_t>(candidate) *
                        0xff51afd7ed558ccdULL));
}

class GreenMask {
 public:
  GreenMask() = default;
  GreenMask(std::vector<TokenId> context, std::vector<TokenId> members,
            std::size_t vocab_size)
      : context_(std::move(context)),
        members_(std::move(members)),
        bits_(vocab_size, 0) {
    std::sort(members_.begin(), members_.end());
    for (TokenId v : members_) bits_[v] = 1;
  }

  bool contains(TokenId v) const { return v < bits_.size() && bits_[v]; }
  const std::vector<TokenId>& members() const { return members_; }
  const std::vector<TokenId>& context() const { return context_; }
  std::size_t vocab_size() const { return bits_.size(); }

  // Number of green ids <= v.
  std::size_t green_at_or_below(TokenId v) const {
    return static_cast<std::size_t>(
        std::upper_bound(members_.begin(), members_.end(), v) - members_.begin());
  }

 private:
  std::vector<TokenId> context_;
  std::vector<TokenId> members_;
  std::vector<std::uint8_t> bits_;
};

inline GreenMask green_set(const PartitionParams& params,
                           std::span<const TokenId> context,
                           std::size_t vocab_size, TokenId bos) {
  const std::size_t k = params.context_width;
  std::vector<TokenId> window(k);
  for (std::size_t i = 0; i < k; ++i) {
    const std::size_t need = k - i;
    window[i] = context.size() >= need ? context[context.size() - need] : bos;
  }
  const std::uint64_t state = context_state(params.seed, window, k, bos);
  std::vector<std::pair<std::uint64_t, TokenId>> ranked(vocab_size);
  for (std::size_t v = 0; v < vocab_size; ++v)
    ranked[v] = {keyed_hash(state, static_cast<TokenId>(v)), static_cast<TokenId>(v)};
  const std::size_t g = std::min(green_list_size(params.gamma, vocab_size), vocab_size);
  std::nth_element(ranked.begin(), ranked.begin() + static_cast<std::ptrdiff_t>(g),
                   ranked.end());
  std::vector<TokenId> members(g);
  for (std::size_t i = 0; i < g; ++i) members[i] = ranked[i].second;
  return GreenMask(std::move(window), std::move(members), vocab_size);
}

inline GreenMask green_set(const PartitionParams& params,
                           std::span<const TokenId> context,
                           const Vocabulary& vocab) {
  return green_set(params, context, vocab.size(), vocab.bos());
}

// Memoizes green masks per context window. Not thread-safe; give each worker
// its own instance.
class GreenPartition {
 public:
  GreenPartition(PartitionParams params, std::size_t vocab_size, TokenId bos)
      : params_(params), vocab_size_(vocab_size), bos_(bos) {
    params_.validate();
  }
  GreenPartition(PartitionParams params, const Vocabulary& vocab)
      : GreenPartition(params, vocab.size(), vocab.bos()) {}

  const PartitionParams& params() const { return params_; }
  std::size_t vocab_size() const { return vocab_size_; }
  TokenId bos() const { return bos_; }

  std::uint64_t window_key(std::span<const TokenId> context) const {
    return context_state(params_.seed, context, params_.context_width, bos_);
  }

  const GreenMask& mask(std::span<const TokenId> context) {
    const std::uint64_t key = window_key(context);
    auto it = cache_.find(key);
    if (it != cache_.end()) return *it->second;
    auto m = std::make_unique<GreenMask>(green_set(params_, context, vocab_size_, bos_));
    return *cache_.emplace(key, std::move(m)).first->second;
  }

  bool is_green(std::span<const TokenId> context, TokenId v) {
    return mask(context).contains(v);
  }

 private:
  PartitionParams params_;
  std::size_t vocab_size_;
  TokenId bos_;
  std::unordered_map<std::uint64_t, std::unique_ptr<GreenMask>> cache_;
};

// Green entries scaled by exp(delta), then renormalized by
// Z = sum_green p * exp(delta) + sum_red p.
inline std::vector<double> bias_distribution(std::span<const double> p,
                                             const GreenMask& mask,
                                             const PartitionParams& params) {
  const double alpha = params.alpha();
  std::vector<double> out(p.begin(), p.end());
  if (params.delta == 0.0) return out;
  double z = 0.0;
  for (std::size_t v = 0; v < out.size(); ++v) {
    if (mask.contains(static_cast<TokenId>(v))) out[v] *= alpha;
    z += out[v];
  }
  if (z <= 0.0) return std::vector<double>(p.begin(), p.end());
  for (auto& x : out) x /= z;
  return out;
}

// Draws from bias_distribution(model.next_distribution(context)) without
// materializing the dense vector. Mass is laid out as the observed-count part
// (ids ascending) followed by the smoothing part (ids ascending). With
// `mask == nullptr` or alpha == 1 the draw is the unbiased one for the same
// uniform variate.
inline TokenId sample_next(const NGramModel& model,
                           std::span<const TokenId> context,
                           const GreenMask* mask, double alpha, Rng& rng) {
  const auto* cc = model.find(context);
  const bool seen = cc && cc->total > 0;
  const double s = seen ? model.smoothing() : 1.0;
  const std::size_t vocab = model.vocab_size();
  const double a = mask ? alpha : 1.0;
  auto mult = [&](TokenId v) { return mask && mask->contains(v) ? a : 1.0; };

  double count_mass = 0.0;
  if (seen)
    for (auto [id, c] : cc->next) count_mass += static_cast<double>(c) * mult(id);
  const double g = mask ? static_cast<double>(mask->members().size()) : 0.0;
  const double smooth_mass = s * (a * g + (static_cast<double>(vocab) - g));
  double u = rng.uniform() * (count_mass + smooth_mass);

  if (seen) {
    double acc = 0.0;
    for (auto [id, c] : cc->next) {
      acc += static_cast<double>(c) * mult(id);
      if (u < acc) return id;
    }
    u -= count_mass;
    if (smooth_mass <= 0.0) return cc->next.back().first;
  }
  // Smallest x with s * (a * G(<=x) + (x + 1 - G(<=x))) > u.
  std::size_t lo = 0, hi = vocab - 1;
  while (lo < hi) {
    const std::size_t mid = lo + (hi - lo) / 2;
    const double gx = mask ? static_cast<double>(mask->green_at_or_below(
                                 static_cast<TokenId>(mid)))
                           : 0.0;
    const double cum = s * (a * gx + (static_cast<double>(mid + 1) - gx));
    if (cum > u)
      hi = mid;
    else
      lo = mid + 1;
  }
  return static_cast<TokenId>(lo);
}

// Unbiased continuation of `prompt`.
inline TokenSequence sample_ngram(const NGramModel& model,
                                  std::span<const TokenId> prompt,
                                  std::size_t length, std::uint64_t rng_seed) {
  Rng rng(rng_seed);
  TokenSequence ctx(prompt.begin(), prompt.end());
  TokenSequence out;
  out.reserve(length);
  for (std::size_t t = 0; t < length; ++t) {
    const TokenId v = sample_next(model, ctx, nullptr, 1.0, rng);
    ctx.push_back(v);
    out.push_back(v);
  }
  return out;
}

inline TokenSequence generate_watermarked(const NGramModel& model,
                                          GreenPartition& partition,
                                          std::span<const TokenId> prompt,
                                          std::size_t length,
                                          std::uint64_t rng_seed) {
  Rng rng(rng_seed);
  const double alpha = partition.params().alpha();
  TokenSequence ctx(prompt.begin(), prompt.end());
  TokenSequence out;
  out.reserve(length);
  for (std::size_t t = 0; t < length; ++t) {
    const TokenId v = sample_next(model, ctx, &partition.mask(ctx), alpha, rng);
    ctx.push_back(v);
    out.push_back(v);
  }
  return out;
}

inline TokenSequence generate_watermarked(const NGramModel& model,
                                          const PartitionParams& params,
                                          std::span<const TokenId> prompt,
                                          std::size_t length,
                                          std::uint64_t rng_seed) {
  GreenPartition partition(params, model.vocab_size(), model.bos());
  return generate_watermarked(model, partition, prompt, length, rng_seed);
}

// Watermarks an existing token sequence. The generator's distribution at each
// position is a copy-biased mixture (1 - freedom) * [v == original] +
// freedom * p_model(v | output so far), which the green bias is then applied
// to. Positions flagged in `anchored` are copied unchanged. A non-empty
// `support` (sorted ids) restricts the model part to those tokens, mixed with
// the uniform distribution over the support at weight `flatten`.
inline TokenSequence regenerate_watermarked(const NGramModel& model,
                                            GreenPartition& partition,
                                            std::span<const TokenId> original,
                                            std::span<const std::uint8_t> anchored,
                                            double freedom, Rng& rng,
                                            std::span<const TokenId> support = {},
                                            double flatten = 0.0) {
  if (freedom < 0.0 || freedom > 1.0) throw Error("freedom must be in [0, 1]");
  if (flatten < 0.0 || flatten > 1.0) throw Error("flatten must be in [0, 1]");
  if (!anchored.empty() && anchored.size() != original.size())
    throw Error("anchor mask length differs from sequence length");
  const double alpha = partition.params().alpha();
  const std::size_t vocab = model.vocab_size();
  std::vector<std::uint8_t> in_support;
  if (!support.empty()) {
    in_support.assign(vocab, 0);
    for (TokenId v : support) {
      if (v >= vocab) throw Error("support token outside vocabulary");
      in_support[v] = 1;
    }
  }
  std::vector<double> weights(support.size());
  TokenSequence out;
  out.reserve(original.size());
  for (std::size_t t = 0; t < original.size(); ++t) {
    const TokenId orig = original[t];
    if ((!anchored.empty() && anchored[t]) || freedom == 0.0) {
      out.push_back(orig);
      continue;
    }
    const GreenMask& mask = partition.mask(out);
    const auto* cc = model.find(out);
    const bool seen = cc && cc->total > 0;
    const double s = seen ? model.smoothing() : 1.0;
    const double denom = seen ? static_cast<double>(cc->total) + s * static_cast<double>(vocab)
                              : static_cast<double>(vocab);
    const double copy_mass = (1.0 - freedom) * (mask.contains(orig) ? alpha : 1.0);

    if (support.empty()) {
      double cm = 0.0;
      if (seen)
        for (auto [id, c] : cc->next)
          cm += static_cast<double>(c) * (mask.contains(id) ? alpha : 1.0);
      const double g = static_cast<double>(mask.members().size());
      const double model_mass =
          (cm + s * (alpha * g + static_cast<double>(vocab) - g)) / denom;
      const double total = copy_mass + freedom * model_mass;
      if (rng.uniform() * total < copy_mass)
        out.push_back(orig);
      else
        out.push_back(sample_next(model, out, &mask, alpha, rng));
      continue;
    }

    // Restricted model part, renormalized over the support.
    double raw = 0.0;
    for (std::size_t i = 0; i < support.size(); ++i) weights[i] = s;
    if (seen)
      for (auto [id, c] : cc->next)
        if (in_support[id]) {
          auto it = std::lower_bound(support.begin(), support.end(), id);
          weights[static_cast<std::size_t>(it - support.begin())] += static_cast<double>(c);
        }
    for (double w : weights) raw += w;
    const double flat = flatten / static_cast<double>(support.size());
    double biased = 0.0;
    for (std::size_t i = 0; i < support.size(); ++i) {
      weights[i] = (1.0 - flatten) * weights[i] / raw + flat;
      if (mask.contains(support[i])) weights[i] *= alpha;
      biased += weights[i];
    }
    const double model_mass = freedom * biased;
    double u = rng.uniform() * (copy_mass + model_mass);
    if (u < copy_mass) {
      out.push_back(orig);
      continue;
    }
    u = (u - copy_mass) / model_mass * biased;
    TokenId pick = support.back();
    double acc = 0.0;
    for (std::size_t i = 0; i < support.size(); ++i) {
      acc += weights[i];
      if (u < acc) {
        pick = support[i];
        break;
      }
    }
    out.push_back(pick);
  }
  return out;
}

struct GreenCount {
  std::size_t green = 0;
  std::size_t scored = 0;

  double fraction() const {
    return scored ? static_cast<double>(green) / static_cast<double>(scored) : 0.0;
  }
  GreenCount& operator+=(const GreenCount& o) {
    green += o.green;
    scored += o.scored;
    return *this;
  }
  bool operator==(const GreenCount&) const = default;
};

// Scores every position with at least k real preceding tokens.
inline GreenCount count_green(std::span<const TokenId> seq,
                              GreenPartition& partition) {
  GreenCount out;
  const std::size_t k = partition.params().context_width;
  for (std::size_t t = k; t < seq.size(); ++t) {
    ++out.scored;
    if (partition.is_green(seq.subspan(0, t), seq[t])) ++out.green;
  }
  return out;
}

inline GreenCount count_green(std::span<const TokenId> seq,
                              const PartitionParams& params,
                              const Vocabulary& vocab) {
  GreenPartition partition(params, vocab);
  return count_green(seq, partition);
}

// Counter that scores each (context window, token) pair at most once across
// everything it has seen. Repeated pairs carry no fresh evidence: their
// green/red status is fixed by the key, so counting them again inflates the
// variance of the green fraction far beyond the binomial null.
class GreenCounter {
 public:
  GreenCounter(GreenPartition& partition, bool dedup)
      : partition_(partition), dedup_(dedup) {}

  GreenCount count(std::span<const TokenId> seq) {
    GreenCount out;
    const std::size_t k = partition_.params().context_width;
    for (std::size_t t = k; t < seq.size(); ++t) {
      const auto ctx = seq.subspan(0, t);
      if (dedup_) {
        const std::uint64_t key =
            mix64(partition_.window_key(ctx) ^ (static_cast<std::uint64_t>(seq[t]) + 1));
        if (!seen_.insert(key).second) continue;
      }
      ++out.scored;
      if (partition_.is_green(ctx, seq[t])) ++out.green;
    }
    return out;
  }

  bool dedup() const { return dedup_; }

 private:
  GreenPartition& partition_;
  bool dedup_;
  std::unordered_set<std::uint64_t> seen_;
};

}  // namespace ragmark
