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

#include "ragmark/knowledge.hpp"
#include "oracles.hpp"

namespace ragmark {
namespace {

Fact unit_fact(std::string id, Embedding e, FactKind kind = FactKind::kWatermark) {
  l2_normalize(e);
  return Fact{std::move(id), "text", std::move(e), kind, "src"};
}

// Fact whose cosine with e0 = (1, 0, 0) is exactly s.
Fact at_sim(std::string id, double s) {
  return unit_fact(std::move(id), {s, std::sqrt(1 - s * s), 0.0});
}

TEST(CosineSim, HandValues) {
  const auto a = unit_fact("a", {1, 0});
  const auto b = unit_fact("b", {std::sqrt(2.0) / 2, std::sqrt(2.0) / 2});
  const auto c = unit_fact("c", {0, 1});
  EXPECT_NEAR(cosine_sim(a, a), 1.0, 1e-12);
  EXPECT_NEAR(cosine_sim(a, c), 0.0, 1e-12);
  EXPECT_NEAR(cosine_sim(a, b), 0.7071, 1e-4);
}

TEST(KnowledgeBase, RejectsBadFacts) {
  KnowledgeBase kb;
  kb.add_fact(unit_fact("a", {1, 0}));
  EXPECT_THROW(kb.add_fact(unit_fact("a", {0, 1})), Error);
  EXPECT_THROW(kb.add_fact(Fact{"n", "t", {2.0, 0.0}, FactKind::kCore, "s"}), Error);
  EXPECT_THROW(kb.add_fact(unit_fact("d", {1, 0, 0})), Error);
  EXPECT_THROW(kb.add_relation({"a", "a", RelationKind::kCausal}), Error);
  EXPECT_THROW(kb.add_relation({"a", "zz", RelationKind::kCausal}), Error);
}

class Neighbors : public ::testing::Test {
 protected:
  void SetUp() override {
    kb.add_fact(unit_fact("f", {1, 0, 0}, FactKind::kCore));
    for (auto [id, s] : std::vector<std::pair<std::string, double>>{
             {"c1", 0.80}, {"c2", 0.78}, {"c3", 0.76}, {"c4", 0.74}, {"c5", 0.60}})
      kb.add_fact(at_sim(id, s));
  }
  KnowledgeBase kb;
};

TEST_F(Neighbors, TopKAboveThreshold) {
  const auto n = candidate_neighbors(kb.at("f"), kb, {"f"}, 0.75, 0.95, 3);
  ASSERT_EQ(n.size(), 3u);
  EXPECT_EQ(n[0].fact->id, "c1");
  EXPECT_EQ(n[1].fact->id, "c2");
  EXPECT_EQ(n[2].fact->id, "c3");
}

TEST_F(Neighbors, ThresholdIsStrict) {
  const double s = cosine_sim(kb.at("f"), kb.at("c2"));
  const auto n = candidate_neighbors(kb.at("f"), kb, {"f"}, s, 0.95, 10);
  ASSERT_EQ(n.size(), 1u);
  EXPECT_EQ(n[0].fact->id, "c1");
}

TEST_F(Neighbors, NearIdenticalExcluded) {
  kb.add_fact(at_sim("dup", 0.99));
  const auto n = candidate_neighbors(kb.at("f"), kb, {"f"}, 0.75, 0.95, 10);
  for (const auto& x : n) EXPECT_NE(x.fact->id, "dup");
  EXPECT_EQ(n.size(), 3u);
}

TEST_F(Neighbors, DocumentFactsExcluded) {
  const auto n = candidate_neighbors(kb.at("f"), kb, {"f", "c1"}, 0.75, 0.95, 10);
  ASSERT_EQ(n.size(), 2u);
  EXPECT_EQ(n[0].fact->id, "c2");
  EXPECT_THROW(candidate_neighbors(kb.at("f"), kb, {}, 0.9, 0.8, 3), Error);
}

TEST(SelectWatermarks, ForcedAndEmpty) {
  std::vector<Fact> fs{unit_fact("a", {1, 0.1}), unit_fact("b", {0.2, 1}), unit_fact("c", {1, 1})};
  std::vector<const Fact*> cands;
  for (auto& f : fs) cands.push_back(&f);
  const Embedding c{1, 0};
  const CentroidScorer scorer;
  const auto all = select_watermarks("d", c, cands, 3, scorer);
  EXPECT_EQ(all.chosen, (std::vector<std::string>{"a", "b", "c"}));
  const auto none = select_watermarks("d", c, cands, 0, scorer);
  EXPECT_TRUE(none.chosen.empty());
  EXPECT_EQ(none.coherence, 0.0);
  EXPECT_EQ(none.distinctiveness, 0.0);
  EXPECT_THROW(select_watermarks("d", c, cands, 4, scorer), Error);
}

TEST(SelectWatermarks, NearDuplicatesNotChosenTogether) {
  std::vector<Fact> fs{unit_fact("a", {1, 0.05, 0}), unit_fact("b", {1, 0.06, 0}),
                       unit_fact("c", {0.6, 0, 0.8})};
  std::vector<const Fact*> cands;
  for (auto& f : fs) cands.push_back(&f);
  const Embedding c{1, 0, 0};
  const auto sel = select_watermarks("d", c, cands, 2, CentroidScorer());
  const bool both = std::count(sel.chosen.begin(), sel.chosen.end(), "a") &&
                    std::count(sel.chosen.begin(), sel.chosen.end(), "b");
  EXPECT_FALSE(both);
}

TEST(SelectWatermarks, MatchesExhaustiveOracle) {
  EXPECT_EQ(oracle::selection_mismatches(2026, 100), 0u);
}

TEST(Splice, EmptySelectionLeavesTextUnchanged) {
  Document d{"d", "s", "a", "b", "One sentence here.\n\nAnother one.", {}, {}, std::nullopt};
  const auto out = splice_offline(d, {}, HashingEmbedder());
  EXPECT_EQ(out.text, d.text);
  ASSERT_TRUE(out.watermark);
  EXPECT_TRUE(out.watermark->spans.empty());
}

TEST(Splice, FactsRecoverableFromRecord) {
  const HashingEmbedder emb;
  Document d{"d", "s", "a", "b",
             "The river flooded the valley in spring.\n\nThe council met to plan repairs.",
             {}, {}, std::nullopt};
  std::vector<Fact> fs{make_fact("w1", "The valley river reached record heights", FactKind::kWatermark, "x", emb),
                       make_fact("w2", "The council approved a repair budget", FactKind::kWatermark, "x", emb),
                       make_fact("w3", "Spring rains fell for nine days", FactKind::kWatermark, "x", emb)};
  for (std::size_t k = 1; k <= fs.size(); ++k) {
    std::vector<const Fact*> ptrs;
    for (std::size_t i = 0; i < k; ++i) ptrs.push_back(&fs[i]);
    const auto out = splice_offline(d, ptrs, emb);
    ASSERT_EQ(out.watermark->spans.size(), k);
    for (const auto& s : out.watermark->spans) {
      const auto it = std::find_if(fs.begin(), fs.end(), [&](const Fact& f) { return f.id == s.fact_id; });
      ASSERT_NE(it, fs.end());
      const std::string sentence = as_sentence(it->text);
      EXPECT_EQ(out.text.substr(s.begin, s.end - s.begin), sentence);
      EXPECT_EQ(out.text.find(sentence), out.text.rfind(sentence));
    }
  }
}

TEST(KnowledgeBase, JsonlRoundTrip) {
  const HashingEmbedder emb;
  KnowledgeBase kb;
  kb.add_fact(make_fact("a", "Alpha fact about rivers", FactKind::kCore, "s1", emb));
  kb.add_fact(make_fact("b", "Beta fact about councils", FactKind::kExtended, "s1", emb));
  kb.add_relation({"b", "a", RelationKind::kElaborative});
  std::vector<nlohmann::json> lines;
  for (const auto& j : to_jsonl(kb)) lines.push_back(nlohmann::json::parse(j.dump()));
  const auto back = knowledge_base_from_jsonl(lines);
  EXPECT_EQ(back.facts(), kb.facts());
  EXPECT_EQ(back.relations(), kb.relations());
}

}  // namespace
}  // namespace ragmark
