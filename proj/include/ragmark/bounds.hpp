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

// Closed-form guarantees of the green/red layer and Monte-Carlo checks that
// hold the sampler to them.
//
// The quality guarantee is stated for cross-entropy (a positive quantity):
// E[-sum_k phat_k ln p_k] <= (1 + (alpha - 1) gamma) * H(p). Written with
// P* = sum p ln p (negative) the inequality flips, since the per-token step
// phat_k <= (1 + (alpha - 1) gamma) p_k is multiplied by ln p_k <= 0.

#include <algorithm>
#include <cmath>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include "json.hpp"
#include "ragmark/core.hpp"
#include "ragmark/green_red.hpp"
#include "ragmark/stats.hpp"
#include "ragmark/token_model.hpp"

namespace ragmark {

inline double spike_entropy(std::span<const double> p, double z) {
  double s = 0.0;
  for (double pk : p) s += pk / (1.0 + z * pk);
  return s;
}

// Modulus at which the per-token green probability bound is evaluated.
inline double spike_modulus(double gamma, double alpha) {
  return (1.0 - gamma) * (alpha - 1.0) / (1.0 + (alpha - 1.0) * gamma);
}

struct SpikeEntropyReport {
  std::vector<double> values;
  double mean = 0.0;
  double modulus = 0.0;
};

struct GreenCountBound {
  double mean_lower = 0.0;
  double variance_upper = 0.0;
  double per_token = 0.0;  // q
  double modulus = 0.0;
};

inline GreenCountBound green_count_bound(const PartitionParams& params,
                                         std::size_t T, double s_star) {
  if (T < 1) throw Error("green_count_bound: T must be >= 1");
  if (!(s_star > 0.0 && s_star <= 1.0))
    throw Error("green_count_bound: S* must lie in (0, 1]");
  const double a = params.alpha(), g = params.gamma;
  GreenCountBound b;
  b.per_token = g * a * s_star / (1.0 + (a - 1.0) * g);
  b.mean_lower = static_cast<double>(T) * b.per_token;
  b.variance_upper = static_cast<double>(T) * b.per_token * (1.0 - b.per_token);
  b.modulus = spike_modulus(g, a);
  return b;
}

inline double perplexity_bound(double alpha, double gamma, double p_star) {
  if (alpha < 1.0) throw Error("perplexity_bound: alpha must be >= 1");
  return (1.0 + (alpha - 1.0) * gamma) * p_star;
}

inline double adversarial_z_drop(std::size_t k, std::size_t m, std::size_t T) {
  if (T == 0 || m > T) throw Error("adversarial_z_drop: need 0 <= m <= T, T > 0");
  return static_cast<double>((k + 1) * m) / std::sqrt(static_cast<double>(T));
}

inline double watermark_removal_prob(std::size_t m, std::size_t T,
                                     std::size_t num_watermarks) {
  if (T == 0 || m > T) throw Error("watermark_removal_prob: need 0 <= m <= T");
  if (num_watermarks < 1) throw Error("watermark_removal_prob: need >= 1 watermark");
  return std::pow(static_cast<double>(m) / static_cast<double>(T),
                  static_cast<double>(num_watermarks));
}

// ---------------------------------------------------------------------------
// Sparse evaluation along model trajectories.

// Spike entropy and Shannon entropy of model.next_distribution(context)
// without the dense vector.
struct PositionStats {
  double spike = 0.0;
  double entropy = 0.0;
};

inline PositionStats position_stats(const NGramModel& model,
                                    std::span<const TokenId> context, double z) {
  const double V = static_cast<double>(model.vocab_size());
  const auto* cc = model.find(context);
  PositionStats ps;
  if (!cc || cc->total == 0) {
    const double p = 1.0 / V;
    ps.spike = V * p / (1.0 + z * p);
    ps.entropy = std::log(V);
    return ps;
  }
  const double s = model.smoothing();
  const double denom = static_cast<double>(cc->total) + s * V;
  const double p0 = s / denom;
  const double rest = V - static_cast<double>(cc->next.size());
  if (p0 > 0) {
    ps.spike = rest * p0 / (1.0 + z * p0);
    ps.entropy = -rest * p0 * std::log(p0);
  }
  for (auto [id, c] : cc->next) {
    const double p = (static_cast<double>(c) + s) / denom;
    ps.spike += p / (1.0 + z * p);
    ps.entropy -= p * std::log(p);
  }
  return ps;
}

struct BoundCheck {
  std::string name;
  double observed = 0.0;
  double bound = 0.0;
  double margin = 0.0;  // allowed slack (3 sigma or tolerance)
  bool pass = false;
  std::string detail;
};

inline nlohmann::ordered_json to_json(const BoundCheck& c) {
  nlohmann::ordered_json j;
  j["name"] = c.name;
  j["observed"] = c.observed;
  j["bound"] = c.bound;
  j["margin"] = c.margin;
  j["pass"] = c.pass;
  if (!c.detail.empty()) j["detail"] = c.detail;
  return j;
}

struct GreenCountCheck {
  double mean_count = 0.0;
  double sample_variance = 0.0;
  double s_star = 0.0;
  double mc_standard_error = 0.0;
  GreenCountBound bound;
  BoundCheck mean_check;
  BoundCheck variance_check;
};

// Samples `sequences` watermarked trajectories of length T from <bos> and
// compares their green counts with the closed-form bounds, S* taken from the
// base model's distributions along the realized contexts.
inline GreenCountCheck verify_green_count(const NGramModel& model,
                                          const PartitionParams& params,
                                          std::size_t T, std::size_t sequences,
                                          std::uint64_t root_seed,
                                          double variance_tolerance = 1.05) {
  GreenPartition partition(params, model.vocab_size(), model.bos());
  const double alpha = params.alpha();
  const double z = spike_modulus(params.gamma, alpha);
  std::vector<double> counts(sequences);
  double spike_sum = 0.0;
  // Spike entropy depends on the context only through the model's key.
  std::unordered_map<std::uint64_t, double> spike_cache;
  TokenSequence ctx;
  ctx.reserve(T);
  for (std::size_t i = 0; i < sequences; ++i) {
    Rng rng(derive_seed(root_seed, i));
    ctx.clear();
    std::size_t green = 0;
    for (std::size_t t = 0; t < T; ++t) {
      const auto key = model.key(ctx);
      auto it = spike_cache.find(key);
      if (it == spike_cache.end())
        it = spike_cache.emplace(key, position_stats(model, ctx, z).spike).first;
      spike_sum += it->second;
      const GreenMask& mask = partition.mask(ctx);
      const TokenId v = sample_next(model, ctx, &mask, alpha, rng);
      green += mask.contains(v) ? 1 : 0;
      ctx.push_back(v);
    }
    counts[i] = static_cast<double>(green);
  }
  GreenCountCheck out;
  out.mean_count = stats::mean(counts);
  out.sample_variance = stats::variance(counts);
  out.s_star = spike_sum / static_cast<double>(sequences * T);
  out.mc_standard_error =
      std::sqrt(out.sample_variance / static_cast<double>(sequences));
  out.bound = green_count_bound(params, T, std::min(1.0, out.s_star));

  out.mean_check.name = "green_count_mean";
  out.mean_check.observed = out.mean_count;
  out.mean_check.bound = out.bound.mean_lower;
  out.mean_check.margin = 3.0 * out.mc_standard_error;
  out.mean_check.pass = out.mean_count >= out.bound.mean_lower - out.mean_check.margin;

  out.variance_check.name = "green_count_variance";
  out.variance_check.observed = out.sample_variance;
  out.variance_check.bound = out.bound.variance_upper;
  out.variance_check.margin = (variance_tolerance - 1.0) * out.bound.variance_upper;
  out.variance_check.pass =
      out.sample_variance <= out.bound.variance_upper * variance_tolerance;
  return out;
}

struct PerplexityCheck {
  double mean_cross_entropy = 0.0;  // sampled, nats per token
  double mean_bound = 0.0;          // (1 + (alpha - 1) gamma) * H, averaged
  double mean_base_entropy = 0.0;
  double sigma = 0.0;               // std error of (observed - bound)
  BoundCheck check;
};

// Each trial draws a fresh partition key, samples a watermarked trajectory and
// records its per-token cross-entropy under the base model against the bound
// evaluated on the same contexts.
inline PerplexityCheck verify_perplexity(const NGramModel& model,
                                         const PartitionParams& params,
                                         std::size_t T, std::size_t trials,
                                         std::uint64_t root_seed) {
  const double alpha = params.alpha();
  const double factor = 1.0 + (alpha - 1.0) * params.gamma;
  std::vector<double> observed(trials), bound(trials), diff(trials), base(trials);
  TokenSequence ctx;
  std::unordered_map<std::uint64_t, double> entropy_cache;
  for (std::size_t i = 0; i < trials; ++i) {
    PartitionParams p = params;
    p.seed = derive_seed(root_seed, 2 * i);
    GreenPartition partition(p, model.vocab_size(), model.bos());
    Rng rng(derive_seed(root_seed, 2 * i + 1));
    ctx.clear();
    double ce = 0.0, h = 0.0;
    for (std::size_t t = 0; t < T; ++t) {
      const auto key = model.key(ctx);
      auto it = entropy_cache.find(key);
      if (it == entropy_cache.end())
        it = entropy_cache.emplace(key, position_stats(model, ctx, 0.0).entropy).first;
      h += it->second;
      const TokenId v = sample_next(model, ctx, &partition.mask(ctx), alpha, rng);
      ce -= std::log(model.prob(ctx, v));
      ctx.push_back(v);
    }
    observed[i] = ce / static_cast<double>(T);
    base[i] = h / static_cast<double>(T);
    bound[i] = factor * base[i];
    diff[i] = observed[i] - bound[i];
  }
  PerplexityCheck out;
  out.mean_cross_entropy = stats::mean(observed);
  out.mean_bound = stats::mean(bound);
  out.mean_base_entropy = stats::mean(base);
  out.sigma = std::sqrt(stats::variance(diff) / static_cast<double>(trials));
  out.check.name = "perplexity";
  out.check.observed = out.mean_cross_entropy;
  out.check.bound = out.mean_bound;
  out.check.margin = 3.0 * out.sigma;
  out.check.pass = out.mean_cross_entropy <= out.mean_bound + out.check.margin;
  return out;
}

// Z of a single sequence against gamma (positions with k real predecessors).
inline double sequence_z(std::span<const TokenId> seq, GreenPartition& partition) {
  const GreenCount gc = count_green(seq, partition);
  if (gc.scored == 0) return 0.0;
  const double g = partition.params().gamma;
  const double t = static_cast<double>(gc.scored);
  return (static_cast<double>(gc.green) - g * t) / std::sqrt(t * g * (1.0 - g));
}

struct AdversarialCheck {
  std::size_t m = 0;
  std::size_t trials = 0;
  std::size_t violations = 0;            // against (k+1) m / sqrt(T)
  std::size_t normalized_violations = 0;  // against (k+1) m / sqrt(T' g (1-g)), T' scored
  double max_drop = 0.0;
  double mean_drop = 0.0;
  double bound = 0.0;
  double normalized_bound = 0.0;
  BoundCheck check;
};

// Each trial samples a watermarked sequence, overwrites m distinct random
// positions with a base-model resample and measures the Z drop.
inline AdversarialCheck verify_adversarial_drop(const NGramModel& model,
                                                const PartitionParams& params,
                                                std::size_t T, std::size_t m,
                                                std::size_t trials,
                                                std::uint64_t root_seed) {
  if (m > T) throw Error("verify_adversarial_drop: m > T");
  GreenPartition partition(params, model.vocab_size(), model.bos());
  const std::size_t k = params.context_width;
  AdversarialCheck out;
  out.m = m;
  out.trials = trials;
  out.bound = adversarial_z_drop(k, m, T);
  double drop_sum = 0.0;
  for (std::size_t i = 0; i < trials; ++i) {
    const auto seq = generate_watermarked(model, partition, {}, T, derive_seed(root_seed, 3 * i));
    const double z0 = sequence_z(seq, partition);
    // Only positions with a full context are scored.
    const auto scored = static_cast<double>(count_green(seq, partition).scored);
    out.normalized_bound = static_cast<double>((k + 1) * m) /
                           std::sqrt(scored * params.gamma * (1.0 - params.gamma));
    auto modified = seq;
    Rng rng(derive_seed(root_seed, 3 * i + 1));
    std::vector<std::size_t> pos(T);
    for (std::size_t j = 0; j < T; ++j) pos[j] = j;
    for (std::size_t j = 0; j < m; ++j)  // partial Fisher-Yates
      std::swap(pos[j], pos[j + rng.below(T - j)]);
    std::sort(pos.begin(), pos.begin() + static_cast<std::ptrdiff_t>(m));
    // Each edited token is redrawn from the unwatermarked model given the
    // edited prefix, never keeping the original.
    for (std::size_t j = 0; j < m; ++j) {
      const std::size_t p = pos[j];
      const auto prefix = std::span<const TokenId>(modified).subspan(0, p);
      TokenId repl = seq[p];
      for (int tries = 0; repl == seq[p]; ++tries)
        repl = tries < 64 ? sample_next(model, prefix, nullptr, 1.0, rng)
                          : static_cast<TokenId>(rng.below(model.vocab_size()));
      modified[p] = repl;
    }
    const double drop = z0 - sequence_z(modified, partition);
    drop_sum += drop;
    out.max_drop = std::max(out.max_drop, drop);
    if (drop > out.bound + 1e-12) ++out.violations;
    if (drop > out.normalized_bound + 1e-12) ++out.normalized_violations;
  }
  out.mean_drop = trials ? drop_sum / static_cast<double>(trials) : 0.0;
  out.check.name = "adversarial_z_drop_m" + std::to_string(m);
  out.check.observed = out.max_drop;
  out.check.bound = out.bound;
  out.check.margin = 0.0;
  out.check.pass = out.violations == 0;
  out.check.detail = std::to_string(out.violations) + "/" + std::to_string(trials) +
                     " trials exceed the bound; normalized bound " +
                     std::to_string(out.normalized_bound) + " exceeded in " +
                     std::to_string(out.normalized_violations);
  return out;
}

}  // namespace ragmark
