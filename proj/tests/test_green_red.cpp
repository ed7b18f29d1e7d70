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

#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <set>

#include "ragmark/bounds.hpp"
#include "ragmark/green_red.hpp"

namespace ragmark {
namespace {

NGramModel near_uniform_model(std::size_t vocab, std::uint64_t seed) {
  Rng rng(seed);
  std::vector<TokenSequence> corpus(1);
  for (int i = 0; i < 20000; ++i)
    corpus[0].push_back(static_cast<TokenId>(rng.below(vocab - 1)));
  return train_ngram(corpus, 1, 1.0, vocab, static_cast<TokenId>(vocab - 1));
}

TEST(GreenSet, SizeIsRoundedFraction) {
  const PartitionParams p{0.25, 4.0, 1, 11};
  for (TokenId c = 0; c < 8; ++c) {
    const TokenSequence ctx{c};
    EXPECT_EQ(green_set(p, ctx, 8, 7).members().size(), 2u);
  }
  EXPECT_EQ(green_list_size(0.25, 1000), 250u);
  EXPECT_EQ(green_list_size(0.5, 3), 2u);
}

TEST(GreenSet, Deterministic) {
  const PartitionParams p{0.25, 4.0, 1, 99};
  const TokenSequence ctx{3, 5};
  EXPECT_EQ(green_set(p, ctx, 100, 99).members(), green_set(p, ctx, 100, 99).members());
}

TEST(GreenSet, OnlyTheLastKTokensMatter) {
  const PartitionParams p{0.25, 4.0, 2, 5};
  const TokenSequence a{1, 2, 3}, b{9, 2, 3}, c{1, 4, 3};
  EXPECT_EQ(green_set(p, a, 200, 199).members(), green_set(p, b, 200, 199).members());
  EXPECT_NE(green_set(p, a, 200, 199).members(), green_set(p, c, 200, 199).members());
}

TEST(GreenSet, ContextsDecorrelate) {
  const PartitionParams p{0.25, 4.0, 1, 2026};
  const std::size_t V = 1000;
  Rng rng(1);
  int low = 0;
  for (int i = 0; i < 1000; ++i) {
    const TokenId x = static_cast<TokenId>(rng.below(V));
    TokenId y = static_cast<TokenId>(rng.below(V));
    if (y == x) y = static_cast<TokenId>((y + 1) % V);
    const TokenSequence cx{x}, cy{y};
    const auto a = green_set(p, cx, V, 0).members();
    const auto b = green_set(p, cy, V, 0).members();
    std::vector<TokenId> inter;
    std::set_intersection(a.begin(), a.end(), b.begin(), b.end(), std::back_inserter(inter));
    const double jaccard = static_cast<double>(inter.size()) /
                           static_cast<double>(a.size() + b.size() - inter.size());
    if (jaccard < 0.9) ++low;
  }
  EXPECT_GE(low, 950);
}

TEST(GreenSet, KeyChangesPartition) {
  const TokenSequence ctx{4};
  PartitionParams p{0.25, 4.0, 1, 1};
  const auto a = green_set(p, ctx, 500, 0).members();
  p.seed = 2;
  EXPECT_NE(a, green_set(p, ctx, 500, 0).members());
}

TEST(BiasDistribution, HandEvaluation) {
  const GreenMask mask({}, {0, 1}, 4);
  const PartitionParams p{0.5, std::log(2.0), 1, 0};
  const std::vector<double> u{0.25, 0.25, 0.25, 0.25};
  const auto q = bias_distribution(u, mask, p);
  EXPECT_NEAR(q[0], 1.0 / 3, 1e-12);
  EXPECT_NEAR(q[1], 1.0 / 3, 1e-12);
  EXPECT_NEAR(q[2], 1.0 / 6, 1e-12);
  EXPECT_NEAR(q[3], 1.0 / 6, 1e-12);
}

TEST(BiasDistribution, ZeroDeltaIsIdentity) {
  const GreenMask mask({}, {1, 3}, 5);
  const PartitionParams p{0.4, 0.0, 1, 0};
  const std::vector<double> x{0.1, 0.2, 0.3, 0.15, 0.25};
  EXPECT_EQ(bias_distribution(x, mask, p), x);
}

TEST(BiasDistribution, AllMassOnRedIsUnchanged) {
  const GreenMask mask({}, {0}, 3);
  const PartitionParams p{0.3, 4.0, 1, 0};
  const std::vector<double> x{0.0, 1.0, 0.0};
  EXPECT_EQ(bias_distribution(x, mask, p), x);
}

TEST(GenerateWatermarked, ZeroDeltaMatchesUnbiasedSampler) {
  const auto m = near_uniform_model(60, 4);
  const PartitionParams p{0.25, 0.0, 1, 8};
  EXPECT_EQ(generate_watermarked(m, p, {}, 300, 77), sample_ngram(m, {}, 300, 77));
}

TEST(GenerateWatermarked, EmptyLength) {
  const auto m = near_uniform_model(20, 4);
  EXPECT_TRUE(generate_watermarked(m, PartitionParams{}, {}, 0, 1).empty());
}

TEST(GenerateWatermarked, GreenFractionMeetsBound) {
  const auto m = near_uniform_model(200, 5);
  const PartitionParams p{0.25, 4.0, 1, 31};
  GreenPartition part(p, m.vocab_size(), m.bos());
  const std::size_t T = 2000;
  const auto seq = generate_watermarked(m, part, {}, T, 3);
  const auto gc = count_green(seq, part);
  // Per-token bound with the spike entropy of the (near uniform) model.
  const double s = spike_modulus(p.gamma, p.alpha());
  double s_sum = 0;
  for (std::size_t t = 1; t < T; ++t)
    s_sum += spike_entropy(m.next_distribution(std::span(seq).subspan(0, t)), s);
  const auto bound = green_count_bound(p, gc.scored, s_sum / static_cast<double>(gc.scored));
  EXPECT_GE(static_cast<double>(gc.green), bound.mean_lower - 3 * std::sqrt(bound.variance_upper));
}

TEST(CountGreen, TooShortScoresNothing) {
  const PartitionParams p{0.25, 4.0, 2, 1};
  Vocabulary v({"a", "b", "c"});
  const TokenSequence seq{0, 1};
  EXPECT_EQ(count_green(seq, p, v), (GreenCount{0, 0}));
}

TEST(CountGreen, AllGreenByConstruction) {
  const PartitionParams p{0.25, 4.0, 1, 17};
  const std::size_t V = 40;
  GreenPartition part(p, V, 39);
  TokenSequence seq{5};
  for (int t = 0; t < 100; ++t) seq.push_back(part.mask(seq).members().front());
  EXPECT_EQ(count_green(seq, part), (GreenCount{100, 100}));
}

TEST(CountGreen, NullFractionNearGamma) {
  const PartitionParams p{0.25, 4.0, 1, 23};
  const std::size_t V = 500, T = 20000;
  GreenPartition part(p, V, V - 1);
  Rng rng(6);
  TokenSequence seq(T);
  for (auto& x : seq) x = static_cast<TokenId>(rng.below(V - 1));
  const auto gc = count_green(seq, part);
  EXPECT_NEAR(gc.fraction(), 0.25, 3 * std::sqrt(0.25 * 0.75 / static_cast<double>(gc.scored)));
}

TEST(GreenCounter, DedupCountsPairsOnce) {
  const PartitionParams p{0.25, 4.0, 1, 23};
  GreenPartition part(p, 50, 49);
  const TokenSequence seq{1, 2, 1, 2, 1, 2};
  GreenCounter dedup(part, true), raw(part, false);
  EXPECT_EQ(dedup.count(seq).scored, 2u);
  EXPECT_EQ(dedup.count(seq).scored, 0u);
  EXPECT_EQ(raw.count(seq).scored, 5u);
}

TEST(Regenerate, AnchoredAndZeroFreedomCopy) {
  const auto m = near_uniform_model(30, 2);
  GreenPartition part(PartitionParams{0.25, 4.0, 1, 3}, m.vocab_size(), m.bos());
  const TokenSequence orig{1, 2, 3, 4, 5, 6};
  Rng rng(1);
  EXPECT_EQ(regenerate_watermarked(m, part, orig, {}, 0.0, rng), orig);
  const std::vector<std::uint8_t> all(orig.size(), 1);
  EXPECT_EQ(regenerate_watermarked(m, part, orig, all, 1.0, rng), orig);
  EXPECT_THROW(regenerate_watermarked(m, part, orig, {}, 1.5, rng), Error);
}

TEST(Regenerate, RaisesGreenFraction) {
  const auto m = near_uniform_model(100, 2);
  GreenPartition part(PartitionParams{0.25, 4.0, 1, 3}, m.vocab_size(), m.bos());
  Rng src(5);
  TokenSequence orig(4000);
  for (auto& x : orig) x = static_cast<TokenId>(src.below(99));
  Rng rng(2);
  const auto out = regenerate_watermarked(m, part, orig, {}, 0.5, rng);
  EXPECT_GT(count_green(out, part).fraction(), count_green(orig, part).fraction() + 0.1);
}

}  // namespace
}  // namespace ragmark
