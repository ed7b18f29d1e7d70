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

#include <set>

#include "ragmark/demo.hpp"
#include "ragmark/io.hpp"

namespace ragmark {
namespace {

const fs::path kData = RAGMARK_DATA_DIR;

std::string sentence_block(int p, int n) {
  std::string s;
  for (int i = 0; i < n; ++i) {
    if (i) s += ' ';
    s += "Paragraph " + std::to_string(p) + " sentence " + std::to_string(i) + " says a thing.";
  }
  return s;
}

SourceDocument six_paragraphs() {
  std::string text;
  for (int p = 0; p < 6; ++p) {
    if (p) text += "\n\n";
    text += sentence_block(p, 3);
  }
  return {"s", text};
}

class FailingBackend final : public TextBackend {
 public:
  std::string id() const override { return "flaky"; }
  bool offline() const override { return false; }
  std::string complete(const std::string&) override { throw Error("connection refused"); }
  Embedding embed(std::string_view) override { throw Error("connection refused"); }
};

TEST(ExtractFacts, OneCoreFactPerParagraph) {
  OfflineBackend b;
  const auto r = extract_facts(six_paragraphs(), b);
  ASSERT_EQ(r.core.size(), 6u);
  EXPECT_EQ(r.extended.size(), 12u);
  for (std::size_t i = 0; i < 6; ++i)
    EXPECT_EQ(r.core[i].text, "Paragraph " + std::to_string(i) + " sentence 0 says a thing.");
}

TEST(ExtractFacts, RelationEndpointsNameFacts) {
  OfflineBackend b;
  const auto r = extract_facts(six_paragraphs(), b);
  std::set<std::string> ids;
  for (const auto& f : r.core) ids.insert(f.id);
  for (const auto& f : r.extended) ids.insert(f.id);
  ASSERT_FALSE(r.relations.empty());
  for (const auto& rel : r.relations) {
    EXPECT_TRUE(ids.count(rel.from)) << rel.from;
    EXPECT_TRUE(ids.count(rel.to)) << rel.to;
  }
  for (const auto& f : r.extended) EXPECT_TRUE(r.parent_of(f.id).has_value());
}

TEST(ExtractFacts, RejectsEmptyAndUnderfilledSources) {
  OfflineBackend b;
  EXPECT_THROW(extract_facts({"e", "   "}, b), Error);
  EXPECT_THROW(extract_facts({"tiny", "One. Two. Three."}, b), Error);
}

TEST(ExtractFacts, MatchesGoldenRecords) {
  OfflineBackend b;
  const auto sources = load_sources(kData / "sources.jsonl");
  const auto golden = read_jsonl(kData / "golden" / "records.jsonl");
  ASSERT_EQ(sources.size(), golden.size());
  for (std::size_t i = 0; i < sources.size(); ++i) {
    const auto r = extract_facts(sources[i], b);
    EXPECT_EQ(nlohmann::json::parse(to_json(r).dump()), golden[i]) << sources[i].id;
  }
}

TEST(Demo, BundledFilesMatchGenerator) {
  const auto d = make_demo();
  EXPECT_EQ(load_sources(kData / "sources.jsonl"), d.sources);
  EXPECT_EQ(load_authors(kData / "authors.jsonl"), d.authors);
  // The offline extractor recovers the generator's ground truth.
  OfflineBackend b;
  for (std::size_t i = 0; i < d.sources.size(); ++i) {
    const auto r = extract_facts(d.sources[i], b);
    EXPECT_EQ(r.core, d.records[i].core);
    EXPECT_EQ(r.extended, d.records[i].extended);
  }
}

TEST(PlanCorpus, OnePlanPerSourceAndBackend) {
  SourceRecord proto;
  for (int i = 0; i < 5; ++i) proto.core.push_back({"c" + std::to_string(i), "core"});
  for (int i = 0; i < 8; ++i) proto.extended.push_back({"e" + std::to_string(i), "ext"});
  std::vector<SourceRecord> sources(3000, proto);
  for (std::size_t i = 0; i < sources.size(); ++i) sources[i].source_id = "s" + std::to_string(i);
  Rng rng(1);
  const auto authors = demo_detail::make_authors(100, rng);
  const std::vector<std::string> backends{"a", "b", "c", "d"};
  const auto plans = plan_corpus(sources, authors, backends, 5);
  EXPECT_EQ(plans.size(), 12000u);
  for (std::size_t i = 0; i < plans.size(); i += 4) {
    std::set<std::string> used;
    for (std::size_t j = 0; j < 4; ++j) {
      used.insert(plans[i + j].author_id);
      EXPECT_EQ(plans[i + j].extended_fact_ids.size(), kExtendedPerArticle);
    }
    EXPECT_EQ(used.size(), 4u) << "authors repeat within a source";
  }
}

class BuildCorpus : public ::testing::Test {
 protected:
  void SetUp() override {
    demo = make_demo();
    for (const auto& id : demo_backends()) owned.push_back(std::make_unique<OfflineBackend>(id));
    for (auto& b : owned) backends.push_back(b.get());
  }
  DemoData demo;
  std::vector<std::unique_ptr<TextBackend>> owned;
  std::vector<TextBackend*> backends;
};

TEST_F(BuildCorpus, SingleArticleContainsEveryCoreFact) {
  const std::vector<SourceRecord> one{demo.records.front()};
  const std::vector<TextBackend*> b{backends.front()};
  const auto c = build_corpus(one, demo.authors, b, 3);
  ASSERT_EQ(c.documents.size(), 1u);
  for (const auto& f : one.front().core)
    EXPECT_NE(c.documents.front().text.find(f.text), std::string::npos) << f.id;
}

TEST_F(BuildCorpus, DeterministicAndComplete) {
  const auto a = build_corpus(demo.records, demo.authors, backends, 11);
  const auto b = build_corpus(demo.records, demo.authors, backends, 11);
  EXPECT_EQ(to_jsonl_string(a.documents), to_jsonl_string(b.documents));
  EXPECT_EQ(a.documents.size(), demo.records.size() * backends.size());
  EXPECT_TRUE(a.errors.empty());
  std::set<std::string> ids;
  for (const auto& d : a.documents) ids.insert(d.id);
  EXPECT_EQ(ids.size(), a.documents.size());
}

TEST_F(BuildCorpus, BackendFailureIsRecordedAndRunContinues) {
  FailingBackend flaky;
  std::vector<TextBackend*> mixed{backends[0], &flaky};
  const std::vector<SourceRecord> two{demo.records[0], demo.records[1]};
  const auto c = build_corpus(two, demo.authors, mixed, 3);
  EXPECT_EQ(c.documents.size(), 2u);
  ASSERT_EQ(c.errors.size(), 2u);
  EXPECT_EQ(c.errors[0].plan.backend, "flaky");
  EXPECT_NE(c.errors[0].message.find("connection refused"), std::string::npos);
}

TEST_F(BuildCorpus, RejectsDuplicateBackends) {
  std::vector<TextBackend*> dup{backends[0], backends[0]};
  EXPECT_THROW(build_corpus(demo.records, demo.authors, dup, 1), Error);
}

TEST(Formats, SourceRecordAndAuthorRoundTrip) {
  const auto d = make_demo();
  for (const auto& r : d.records)
    EXPECT_EQ(source_record_from_json(nlohmann::json::parse(to_json(r).dump())), r);
  for (const auto& a : d.authors)
    EXPECT_EQ(author_from_json(nlohmann::json::parse(to_json(a).dump())), a);
}

}  // namespace
}  // namespace ragmark
