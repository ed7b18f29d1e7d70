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

#include <cstdlib>
#include <filesystem>

#include <sys/wait.h>

#include "ragmark/io.hpp"
#include "ragmark/stats.hpp"

namespace ragmark {
namespace {

namespace fs = std::filesystem;

const WatermarkConfig kWm;

fs::path scratch(const std::string& name) {
  const auto p = fs::temp_directory_path() / ("ragmark_cli_io_" + name);
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

class DemoWorld : public ::testing::Test {
 protected:
  static void SetUpTestSuite() { world_ = new World(build_demo_world()); }
  static void TearDownTestSuite() {
    delete world_;
    world_ = nullptr;
  }
  static const World& world() { return *world_; }
  static World* world_;
};
World* DemoWorld::world_ = nullptr;

// ---------------------------------------------------------------------------
// Configuration

TEST(RunConfig, DefaultsRoundTrip) {
  const RunConfig c;
  const auto back = run_config_from_json(nlohmann::json::parse(to_json(c).dump()));
  EXPECT_EQ(to_json(back).dump(), to_json(c).dump());
  EXPECT_TRUE(back.calibrate_p0);
}

TEST(RunConfig, FixedP0AndOverrides) {
  const auto c = run_config_from_json(nlohmann::json::parse(
      R"({"detection": {"p0": 0.1, "z_override": 4.0}, "seed": 9, "rag": {"rho": 0.3}})"));
  EXPECT_FALSE(c.calibrate_p0);
  EXPECT_DOUBLE_EQ(c.detection.p0, 0.1);
  ASSERT_TRUE(c.detection.z_override);
  EXPECT_DOUBLE_EQ(*c.detection.z_override, 4.0);
  EXPECT_EQ(c.seed, 9u);
  EXPECT_DOUBLE_EQ(c.rag.rho, 0.3);
  const auto back = run_config_from_json(nlohmann::json::parse(to_json(c).dump()));
  EXPECT_EQ(to_json(back).dump(), to_json(c).dump());
}

TEST(RunConfig, RejectsOutOfRange) {
  auto bad = [](const char* s) { return run_config_from_json(nlohmann::json::parse(s)); };
  EXPECT_THROW(bad(R"({"detection": {"alpha": 0.9}})"), Error);
  EXPECT_THROW(bad(R"({"detection": {"p0": 1.5}})"), Error);
  EXPECT_THROW(bad(R"({"detection": {"p0": "guess"}})"), Error);
  EXPECT_THROW(bad(R"({"watermark": {"partition": {"gamma": 1.0}}})"), Error);
  EXPECT_THROW(bad(R"({"rag": {"k": 0}})"), Error);
  EXPECT_THROW(bad(R"({"backend": "carrier-pigeon"})"), Error);
}

TEST(RunConfig, MissingInputNamesThePath) {
  RunConfig c;
  c.paths.corpus = "/nonexistent/corpus.jsonl";
  try {
    c.check_inputs({&c.paths.corpus});
    FAIL() << "expected an error";
  } catch (const Error& e) {
    EXPECT_NE(std::string(e.what()).find("/nonexistent/corpus.jsonl"), std::string::npos);
  }
}

// ---------------------------------------------------------------------------
// File formats: load(save(x)) == x

TEST(Formats, JsonlReportsLineNumbers) {
  const auto dir = scratch("jsonl");
  write_file(dir / "bad.jsonl", "{\"id\": 1}\n\n{broken\n");
  try {
    read_jsonl(dir / "bad.jsonl");
    FAIL() << "expected an error";
  } catch (const Error& e) {
    EXPECT_NE(std::string(e.what()).find(":3:"), std::string::npos) << e.what();
  }
  EXPECT_THROW(read_file(dir / "absent.jsonl"), Error);
}

TEST(Formats, DemoInputsRoundTrip) {
  const auto demo = make_demo();
  const auto dir = scratch("demo");
  write_file(dir / "sources.jsonl", to_jsonl_string(demo.sources));
  write_file(dir / "authors.jsonl", to_jsonl_string(demo.authors));
  write_file(dir / "records.jsonl", to_jsonl_string(demo.records));
  EXPECT_EQ(load_sources(dir / "sources.jsonl"), demo.sources);
  EXPECT_EQ(load_authors(dir / "authors.jsonl"), demo.authors);
  EXPECT_EQ(load_records(dir / "records.jsonl"), demo.records);
}

TEST_F(DemoWorld, CorpusKnowledgeBaseAndModelRoundTrip) {
  const auto& w = world();
  const auto dir = scratch("world");
  const auto params = deployment_partition(kWm.partition, 3);
  const auto docs = token_watermark_corpus(w.marked.documents, w.lm, params, kWm.rewrite_rate,
                                           kWm.flatten, 3);
  write_file(dir / "corpus.jsonl", to_jsonl_string(docs));
  write_file(dir / "kb.jsonl", jsonl_string(to_jsonl(w.kb)));
  write_file(dir / "model.json", to_json(w.lm).dump());
  write_file(dir / "selections.jsonl", to_jsonl_string(w.marked.selections));
  write_file(dir / "queries.jsonl", to_jsonl_string(w.query_pool));
  EXPECT_EQ(load_corpus(dir / "corpus.jsonl"), docs);
  EXPECT_EQ(load_knowledge_base(dir / "kb.jsonl"), w.kb);
  const auto lm = load_language_model(dir / "model.json");
  EXPECT_EQ(lm.vocab, w.lm.vocab);
  EXPECT_EQ(lm.model, w.lm.model);
  EXPECT_EQ(load_jsonl<WatermarkSelection>(dir / "selections.jsonl", selection_from_json),
            w.marked.selections);
  EXPECT_EQ(load_queries(dir / "queries.jsonl"), w.query_pool);
}

TEST_F(DemoWorld, ResponsesAndReportRoundTrip) {
  ExperimentConfig cfg;
  cfg.n_queries = 20;
  const auto r = run_experiment(world(), cfg, Variant::kWatermarked, 5);
  const auto dir = scratch("responses");
  write_file(dir / "responses.jsonl", to_jsonl_string(r.responses));
  EXPECT_EQ(load_responses(dir / "responses.jsonl"), r.responses);
  const auto report =
      detection_report_from_json(nlohmann::json::parse(dump_json(to_json(r.report))));
  EXPECT_EQ(report, r.report);
}

TEST(Prompts, EveryRoleLoadsWithoutLicenseBlock) {
  const PromptLibrary prompts;
  for (const char* role : {"extract_facts", "write_article", "splice", "interrogate",
                           "rag_answer", "knowledge_evasion", "token_evasion", "coherence"}) {
    const auto t = prompts.get(role);
    EXPECT_FALSE(t.empty()) << role;
    EXPECT_NE(t.front(), '#') << role;
    EXPECT_EQ(t.find("License"), std::string::npos) << role;
  }
  EXPECT_THROW(prompts.get("no_such_role"), Error);
  const auto q = prompts.render("interrogate", {{"fact", "The dock opened in 1901."}});
  EXPECT_NE(q.find("The dock opened in 1901."), std::string::npos);
  EXPECT_EQ(q.find("{fact}"), std::string::npos);
}

TEST(Prompts, StripHeaderKeepsUnmarkedText) {
  EXPECT_EQ(PromptLibrary::strip_header("# a\n#\n\nBody {x}\n"), "Body {x}\n");
  EXPECT_EQ(PromptLibrary::strip_header("Body\n# not a header\n"), "Body\n# not a header\n");
}

// ---------------------------------------------------------------------------
// Watermarking as the watermark verb runs it

TEST_F(DemoWorld, EveryDocumentCarriesBothLayers) {
  const auto& w = world();
  const auto params = deployment_partition(kWm.partition, 1);
  const auto docs = token_watermark_corpus(w.marked.documents, w.lm, params, kWm.rewrite_rate,
                                           kWm.flatten, derive_seed(1, "regenerate"));
  GreenPartition partition(params, w.lm.vocab);
  const double z_crit = stats::normal_quantile(1.0 - 0.005);
  std::size_t weakest = 0;
  double weakest_z = 1e300;
  for (std::size_t i = 0; i < docs.size(); ++i) {
    ASSERT_TRUE(docs[i].watermark);
    std::size_t located = 0;
    for (const auto& s : docs[i].watermark->spans) located += s.end > s.begin;
    EXPECT_GE(located, 1u) << docs[i].id;
    const auto gc = count_green(tokenize(docs[i].text, w.lm.vocab), partition);
    const double z = token_z(gc.green, gc.scored, params.gamma);
    if (z < weakest_z) {
      weakest_z = z;
      weakest = i;
    }
  }
  EXPECT_GT(weakest_z, z_crit) << "weakest document " << docs[weakest].id;
}

TEST_F(DemoWorld, NoOpConfigLeavesTextUnchanged) {
  const auto& w = world();
  WatermarkConfig cfg;
  cfg.m = 0;
  cfg.partition.delta = 0.0;
  OfflineBackend backend("offline", w.embedder);
  const auto marked = knowledge_watermark(w.clean, w.kb, cfg, backend, w.embedder);
  const auto docs = token_watermark_corpus(marked.documents, w.lm, cfg.partition,
                                           cfg.rewrite_rate, cfg.flatten, 1);
  ASSERT_EQ(docs.size(), w.clean.size());
  for (std::size_t i = 0; i < docs.size(); ++i) EXPECT_EQ(docs[i].text, w.clean[i].text);
}

TEST_F(DemoWorld, SameSeedSameBytes) {
  const auto& w = world();
  const auto params = deployment_partition(kWm.partition, 4);
  const auto a =
      token_watermark_corpus(w.marked.documents, w.lm, params, kWm.rewrite_rate, kWm.flatten, 4);
  const auto b =
      token_watermark_corpus(w.marked.documents, w.lm, params, kWm.rewrite_rate, kWm.flatten, 4);
  EXPECT_EQ(to_jsonl_string(a), to_jsonl_string(b));
  const auto c =
      token_watermark_corpus(w.marked.documents, w.lm, params, kWm.rewrite_rate, kWm.flatten, 5);
  EXPECT_NE(to_jsonl_string(a), to_jsonl_string(c));
}

// ---------------------------------------------------------------------------
// Experiment driver

TEST_F(DemoWorld, CurveRowsIncreaseInN) {
  ExperimentConfig cfg;
  cfg.n_queries = 30;
  const auto r = run_experiment(world(), cfg, Variant::kClean, 2);
  ASSERT_EQ(r.curve.size(), 30u);
  for (std::size_t i = 0; i < r.curve.size(); ++i) EXPECT_EQ(r.curve[i].n, i + 1);
  const auto csv = curve_csv(r.curve);
  EXPECT_EQ(csv.rfind("n,s_fact,z_token\n", 0), 0u);
  EXPECT_EQ(static_cast<std::size_t>(std::count(csv.begin(), csv.end(), '\n')), 31u);
}

TEST_F(DemoWorld, TooFewQueriesIsAnError) {
  ExperimentConfig cfg;
  cfg.n_queries = 9;
  EXPECT_THROW(run_experiment(world(), cfg, Variant::kWatermarked, 1), Error);
}

TEST_F(DemoWorld, SweepNeedsTwoDeltas) {
  EXPECT_THROW(sweep_delta(world(), ExperimentConfig{}, {4.0}, 10, 1), Error);
}

TEST_F(DemoWorld, SweepZeroVersusFour) {
  ExperimentConfig cfg;
  cfg.detection.p0 = 0.05;
  const auto rows = sweep_delta(world(), cfg, {0.0, 4.0}, 10, 1);
  ASSERT_EQ(rows.size(), 2u);
  EXPECT_LE(rows[0].accuracy, 0.1);
  EXPECT_EQ(rows[1].accuracy, 1.0);
  EXPECT_EQ(rows[0].trials, 10u);
}

// ---------------------------------------------------------------------------
// The command-line tool

int run_cli(const std::string& args, const fs::path& cwd) {
  const std::string cmd = "cd '" + cwd.string() + "' && '" RAGMARK_CLI "' " + args +
                          " > stdout.txt 2> stderr.txt";
  const int rc = std::system(cmd.c_str());
  return WIFEXITED(rc) ? WEXITSTATUS(rc) : -1;
}

TEST(Cli, MissingInputExitsOneAndNamesPath) {
  const auto dir = scratch("cli_missing");
  EXPECT_EQ(run_cli("watermark --corpus nowhere.jsonl --kb kb.jsonl", dir), 1);
  EXPECT_NE(read_file(dir / "stderr.txt").find("nowhere.jsonl"), std::string::npos);
}

TEST(Cli, UnknownVerbIsAnError) {
  const auto dir = scratch("cli_verb");
  EXPECT_EQ(run_cli("frobnicate", dir), 1);
}

TEST(Cli, ExitCodesFollowVerdicts) {
  const auto dir = scratch("cli_verdict");
  EXPECT_EQ(run_cli("run-experiment --variant watermarked --n-queries 60 --seed 3", dir), 2);
  EXPECT_EQ(read_file(dir / "stdout.txt"), "theft\n");
  EXPECT_EQ(run_cli("run-experiment --variant clean --n-queries 60 --seed 3", dir), 0);
  EXPECT_EQ(read_file(dir / "stdout.txt"), "innocent\n");
  EXPECT_EQ(run_cli("run-experiment --n-queries 5", dir), 1);
}

}  // namespace
}  // namespace ragmark
