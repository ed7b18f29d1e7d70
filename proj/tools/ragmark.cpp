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

// ragmark command-line tool. Exit codes: 0 success or innocent verdict,
// 2 theft verdict, 1 error.

#include <iostream>
#include <memory>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "ragmark/http_backend.hpp"
#include "ragmark/ragmark.hpp"

namespace {

using namespace ragmark;

constexpr int kExitInnocent = 0;
constexpr int kExitTheft = 2;
constexpr int kExitError = 1;

// Options shared by most verbs; flags override the config file.
struct Common {
  std::string config;
  std::optional<std::uint64_t> seed;
  std::optional<double> delta;
  std::optional<double> gamma;
  std::optional<std::size_t> context_width;
  std::optional<double> z_override;
  std::optional<double> p0;
  bool paper_compat = false;
  std::string backend;

  void add(CLI::App* app) {
    app->add_option("--config", config, "RunConfig JSON file");
    app->add_option("--seed", seed, "root seed");
    app->add_option("--delta", delta, "green-list bias delta")->check(CLI::NonNegativeNumber);
    app->add_option("--gamma", gamma, "green-list fraction gamma")->check(CLI::Range(0.0, 1.0));
    app->add_option("--context-width", context_width, "tokens hashed into the partition key")
        ->check(CLI::PositiveNumber);
    app->add_option("--z-override", z_override, "fixed token-layer critical value");
    app->add_option("--p0", p0, "fact-layer null rate (skips calibration)")
        ->check(CLI::Range(0.0, 1.0));
    app->add_flag("--paper-compat", paper_compat,
                  "score the token layer against gamma_null = 0.5");
    app->add_option("--backend", backend, "offline | http");
  }

  RunConfig resolve() const {
    RunConfig c = config.empty() ? RunConfig{} : load_run_config(config);
    if (seed) c.seed = *seed;
    if (delta) c.watermark.partition.delta = *delta;
    if (gamma) {
      c.watermark.partition.gamma = *gamma;
      c.detection.gamma_null = *gamma;
    }
    if (context_width) c.watermark.partition.context_width = *context_width;
    if (z_override) c.detection.z_override = *z_override;
    if (p0) {
      c.detection.p0 = *p0;
      c.calibrate_p0 = false;
    }
    if (paper_compat) c.detection.gamma_null = 0.5;
    if (!backend.empty()) c.backend = backend;
    c.validate();
    return c;
  }
};

std::unique_ptr<TextBackend> make_backend(const std::string& kind, const std::string& id) {
  if (kind == "http") return std::make_unique<HttpBackend>(HttpSettings::from_env(), id);
  return std::make_unique<OfflineBackend>(id);
}

void require(const std::string& path, const char* what) {
  if (path.empty()) throw Error(std::string("missing required path: ") + what);
  if (!fs::exists(path)) throw Error(std::string("missing input ") + what + ": " + path);
}

std::vector<std::string> split_list(const std::string& s) {
  std::vector<std::string> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ','))
    if (!item.empty()) out.push_back(item);
  return out;
}

std::vector<FactText> load_fact_texts(const std::string& path,
                                      std::map<std::string, std::string>& source_of) {
  std::vector<FactText> out;
  for (const auto& j : read_jsonl(path)) {
    FactText f{j.at("id").get<std::string>(), j.at("text").get<std::string>()};
    source_of[f.id] = j.value("source_id", "");
    out.push_back(std::move(f));
  }
  return out;
}

// World from files when given, else the bundled demo universe.
World world_from(const RunConfig& c) {
  if (c.paths.corpus.empty()) return build_demo_world(c.watermark);
  require(c.paths.corpus, "corpus");
  require(c.paths.knowledge_base, "knowledge base");
  return build_world(load_corpus(c.paths.corpus), load_knowledge_base(c.paths.knowledge_base),
                     c.watermark);
}

// --------------------------------------------------------------------------

int cmd_make_demo(const std::string& out_dir, std::uint64_t seed) {
  DemoConfig dc;
  dc.seed = seed;
  const auto d = make_demo(dc);
  const fs::path dir(out_dir);
  write_file(dir / "sources.jsonl", to_jsonl_string(d.sources));
  write_file(dir / "authors.jsonl", to_jsonl_string(d.authors));
  std::string facts;
  for (const auto& f : d.candidates) {
    nlohmann::ordered_json j;
    j["id"] = f.id;
    j["text"] = f.text;
    j["source_id"] = d.candidate_source.at(f.id);
    facts += j.dump() + "\n";
  }
  write_file(dir / "watermark_facts.jsonl", facts);
  std::cerr << "wrote " << d.sources.size() << " sources, " << d.authors.size()
            << " authors, " << d.candidates.size() << " watermark facts to " << out_dir << "\n";
  return 0;
}

struct BuildArgs {
  std::string sources, authors, backends = "offline-a,offline-b,offline-c,offline-d";
  std::string facts, out = "corpus.jsonl", records_out, kb_out, errors_out;
};

int cmd_build_corpus(const BuildArgs& a, const RunConfig& c) {
  require(a.sources, "--sources");
  require(a.authors, "--authors");
  const auto sources = load_sources(a.sources);
  const auto authors = load_authors(a.authors);
  std::vector<std::unique_ptr<TextBackend>> owned;
  std::vector<TextBackend*> backends;
  for (const auto& id : split_list(a.backends)) {
    owned.push_back(make_backend(c.backend, id));
    backends.push_back(owned.back().get());
  }
  if (backends.empty()) throw Error("--backends lists no backend");
  std::vector<SourceRecord> records;
  for (const auto& s : sources) records.push_back(extract_facts(s, *backends.front()));
  const auto corpus = build_corpus(records, authors, backends, c.seed);
  write_file(a.out, to_jsonl_string(corpus.documents));
  if (!a.records_out.empty()) write_file(a.records_out, to_jsonl_string(records));
  if (!a.kb_out.empty()) {
    std::vector<FactText> extra;
    std::map<std::string, std::string> source_of;
    if (!a.facts.empty()) {
      require(a.facts, "--facts");
      extra = load_fact_texts(a.facts, source_of);
    }
    const auto kb = knowledge_from_records(records, extra, source_of, HashingEmbedder());
    write_file(a.kb_out, jsonl_string(to_jsonl(kb)));
  }
  std::string errs;
  for (const auto& e : corpus.errors) {
    nlohmann::ordered_json j;
    j["plan"] = to_json(e.plan);
    j["error"] = e.message;
    errs += j.dump() + "\n";
    std::cerr << "plan " << e.plan.source_id << "/" << e.plan.backend << " failed: " << e.message
              << "\n";
  }
  if (!a.errors_out.empty()) write_file(a.errors_out, errs);
  std::cerr << "built " << corpus.documents.size() << " articles, " << corpus.errors.size()
            << " failed plans\n";
  return 0;
}

struct WatermarkArgs {
  std::string corpus, kb, out = "watermarked.jsonl", model_out, selections_out;
  std::optional<std::size_t> m;
};

int cmd_watermark(const WatermarkArgs& a, const RunConfig& c) {
  require(a.corpus, "--corpus");
  require(a.kb, "--kb");
  WatermarkConfig wc = c.watermark;
  if (a.m) wc.m = *a.m;
  const auto corpus = load_corpus(a.corpus);
  const auto kb = load_knowledge_base(a.kb);
  auto backend = make_backend(c.backend, c.backend);
  const HashingEmbedder embedder;
  const auto marked = knowledge_watermark(corpus, kb, wc, *backend, embedder);
  const auto lm = build_language_model(model_texts(corpus, kb));
  const auto params = deployment_partition(wc.partition, c.seed);
  const auto docs = token_watermark_corpus(marked.documents, lm, params, wc.rewrite_rate,
                                           wc.flatten, derive_seed(c.seed, "regenerate"));
  write_file(a.out, to_jsonl_string(docs));
  if (!a.model_out.empty()) write_file(a.model_out, to_json(lm).dump() + "\n");
  if (!a.selections_out.empty()) write_file(a.selections_out, to_jsonl_string(marked.selections));
  std::cerr << "watermarked " << docs.size() << " documents (key seed " << params.seed << ")\n";
  return 0;
}

struct InterrogateArgs {
  std::string corpus, kb, out = "queries.jsonl";
  std::size_t n_per_doc = kQueriesPerDoc;
};

int cmd_interrogate(const InterrogateArgs& a, const RunConfig& c) {
  require(a.corpus, "--corpus");
  require(a.kb, "--kb");
  const auto corpus = load_corpus(a.corpus);
  const auto kb = load_knowledge_base(a.kb);
  auto backend = make_backend(c.backend, c.backend);
  std::vector<Query> queries;
  for (const auto& d : corpus) {
    if (!d.watermark || d.watermark->spans.empty()) continue;
    WatermarkSelection sel{d.id, d.watermark->fact_ids(), 0.0, 0.0};
    auto qs = make_queries(d, sel, kb, a.n_per_doc, *backend);
    queries.insert(queries.end(), qs.begin(), qs.end());
  }
  write_file(a.out, to_jsonl_string(queries));
  std::cerr << "wrote " << queries.size() << " queries\n";
  return 0;
}

struct SimulateArgs {
  std::string corpus, queries, model, out = "responses.jsonl";
  std::optional<double> rho;
  std::optional<std::size_t> k, max_tokens, n;
  std::string adversary, policy;
};

int cmd_simulate(const SimulateArgs& a, RunConfig c) {
  require(a.corpus, "--corpus");
  require(a.queries, "--queries");
  require(a.model, "--model");
  if (a.rho) c.rag.rho = *a.rho;
  if (a.k) c.rag.k = *a.k;
  if (a.max_tokens) c.rag.max_tokens = *a.max_tokens;
  if (!a.adversary.empty()) c.rag.adversary = parse_adversary(a.adversary);
  if (!a.policy.empty()) c.rag.policy = parse_answer_policy(a.policy);
  c.rag.validate();
  const auto corpus = load_corpus(a.corpus);
  auto queries = load_queries(a.queries);
  const auto lm = load_language_model(a.model);
  const HashingEmbedder embedder = retrieval_embedder();
  const auto index = index_corpus(corpus, embedder);
  const auto docs = document_map(corpus);
  const RagContext ctx{index, docs, lm.model, lm.vocab, embedder};
  const std::size_t n = a.n ? std::min(*a.n, queries.size()) : queries.size();
  std::string out;
  for (std::size_t i = 0; i < n; ++i) {
    auto r = respond(c.rag, ctx, queries[i], derive_seed(c.seed, "respond:" + std::to_string(i)));
    r.answered = score_answerability(queries[i], r.text);
    out += to_json(r).dump() + "\n";
  }
  write_file(a.out, out);
  std::cerr << "answered " << n << " queries\n";
  return 0;
}

struct DetectArgs {
  std::string responses, queries, model, watermarked, clean_responses, report = "report.json";
  bool no_dedup = false;
};

EvidenceLedger ledger_from(const std::vector<ProbeResponse>& responses,
                           const std::map<std::string, const Query*>& queries,
                           const LanguageModel& lm, GreenPartition& partition, bool dedup) {
  EvidenceLedger ledger;
  GreenCounter counter(partition, dedup);
  for (const auto& r : responses) {
    auto it = queries.find(r.query_id);
    if (it == queries.end()) throw Error("response for unknown query " + r.query_id);
    const bool answered = score_answerability(*it->second, r.text);
    const auto gc = counter.count(tokenize(r.text, lm.vocab));
    ledger.append({answered, gc.green, gc.scored});
  }
  return ledger;
}

int cmd_detect(const DetectArgs& a, RunConfig c) {
  require(a.responses, "--responses");
  require(a.queries, "--queries");
  require(a.model, "--model");
  require(a.watermarked, "--watermarked");
  const auto responses = load_responses(a.responses);
  const auto queries = load_queries(a.queries);
  std::map<std::string, const Query*> by_id;
  for (const auto& q : queries) by_id[q.id] = &q;
  const auto lm = load_language_model(a.model);
  std::optional<PartitionParams> params;
  for (const auto& d : load_corpus(a.watermarked))
    if (d.watermark && d.watermark->partition) {
      params = d.watermark->partition;
      break;
    }
  if (!params) throw Error("no partition parameters recorded in " + a.watermarked);
  if (c.calibrate_p0) {
    if (a.clean_responses.empty()) {
      c.detection.p0 = 0.05;  // calibration floor
    } else {
      GreenPartition cp(*params, lm.vocab);
      const auto clean = ledger_from(load_responses(a.clean_responses), by_id, lm, cp, !a.no_dedup);
      c.detection.p0 = calibrate_p0(std::span<const EvidenceLedger>(&clean, 1));
    }
  }
  GreenPartition partition(*params, lm.vocab);
  const auto ledger = ledger_from(responses, by_id, lm, partition, !a.no_dedup);
  auto report = decide(ledger, c.detection);
  write_file(a.report, dump_json(to_json(report)));
  std::cout << to_string(report.verdict) << "\n";
  return report.verdict == Verdict::kTheft ? kExitTheft : kExitInnocent;
}

struct ExperimentArgs {
  std::string variant = "watermarked", report = "report.json", curve = "curve.csv";
  std::optional<std::size_t> n_queries;
  std::string adversary;
  std::optional<double> rho;
};

int cmd_run_experiment(const ExperimentArgs& a, RunConfig c) {
  if (a.n_queries) c.n_queries = *a.n_queries;
  if (c.n_queries < kMinQueries)
    throw Error("--n-queries must be >= " + std::to_string(kMinQueries));
  if (!a.adversary.empty()) c.rag.adversary = parse_adversary(a.adversary);
  if (a.rho) c.rag.rho = *a.rho;
  const auto variant = parse_variant(a.variant);
  const World w = world_from(c);
  auto ec = experiment_config(c);
  if (c.calibrate_p0) ec.detection.p0 = calibrate_p0(w, ec, c.calibration_runs);
  const auto r = run_experiment(w, ec, variant, c.seed);
  nlohmann::ordered_json j;
  j["variant"] = to_string(variant);
  j["seed"] = c.seed;
  j["rag"] = to_json(c.rag);
  j["watermark"] = to_json(c.watermark);
  j["report"] = to_json(r.report);
  write_file(a.report, dump_json(j));
  write_file(a.curve, curve_csv(r.curve));
  std::cout << to_string(r.report.verdict) << "\n";
  return r.report.verdict == Verdict::kTheft ? kExitTheft : kExitInnocent;
}

struct SweepArgs {
  std::string deltas = "1,2,3,4,5", out = "sweep.csv";
  std::size_t seeds = 20;
};

int cmd_sweep(const SweepArgs& a, RunConfig c) {
  std::vector<double> deltas;
  for (const auto& s : split_list(a.deltas)) deltas.push_back(std::stod(s));
  if (deltas.size() < 2) throw Error("--deltas needs at least two values");
  if (a.seeds < 10) throw Error("--seeds must be >= 10");
  const World w = world_from(c);
  auto ec = experiment_config(c);
  if (c.calibrate_p0) ec.detection.p0 = calibrate_p0(w, ec, c.calibration_runs);
  const auto rows = sweep_delta(w, ec, deltas, a.seeds, c.seed);
  write_file(a.out, sweep_csv(rows));
  for (std::size_t i = 1; i < rows.size(); ++i)
    if (rows[i].accuracy < rows[i - 1].accuracy)
      std::cerr << "note: accuracy decreases from delta " << rows[i - 1].delta << " to "
                << rows[i].delta << "\n";
  std::cout << sweep_csv(rows);
  return 0;
}

struct BoundsArgs {
  std::string check = "all", out = "bounds.json", model;
  std::size_t T = 2000, sequences = 10000, trials = 200, adversarial_trials = 500;
  std::string ms = "10,50,200";
};

int cmd_bounds(const BoundsArgs& a, const RunConfig& c) {
  LanguageModel lm = a.model.empty() ? build_demo_world(c.watermark).lm
                                     : load_language_model(a.model);
  PartitionParams params = c.watermark.partition;
  params.seed = derive_seed(c.seed, "partition-key");
  nlohmann::ordered_json j;
  j["partition"] = to_json(params);
  bool pass = true;
  if (a.check == "all" || a.check == "green-count") {
    const auto g = verify_green_count(lm.model, params, a.T, a.sequences, c.seed);
    j["green_count"] = {{"mean", to_json(g.mean_check)},
                        {"variance", to_json(g.variance_check)},
                        {"s_star", g.s_star}};
    pass = pass && g.mean_check.pass && g.variance_check.pass;
  }
  if (a.check == "all" || a.check == "perplexity") {
    const auto p = verify_perplexity(lm.model, params, a.T, a.trials, c.seed);
    j["perplexity"] = to_json(p.check);
    pass = pass && p.check.pass;
  }
  if (a.check == "all" || a.check == "adversarial") {
    auto& arr = j["adversarial"] = nlohmann::ordered_json::array();
    for (const auto& m : split_list(a.ms)) {
      const auto r = verify_adversarial_drop(lm.model, params, a.T, std::stoul(m),
                                             a.adversarial_trials, c.seed);
      nlohmann::ordered_json e = to_json(r.check);
      e["normalized_bound"] = r.normalized_bound;
      e["normalized_violations"] = r.normalized_violations;
      e["mean_drop"] = r.mean_drop;
      arr.push_back(e);
      pass = pass && r.check.pass;
    }
  }
  j["pass"] = pass;
  write_file(a.out, dump_json(j));
  std::cout << (pass ? "pass" : "fail") << "\n";
  return pass ? 0 : kExitError;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"ragmark: dual-layer corpus watermarking and RAG misuse detection"};
  app.require_subcommand(1);
  Common common;

  std::string demo_dir = "data";
  std::uint64_t demo_seed = DemoConfig{}.seed;
  auto* demo = app.add_subcommand("make-demo", "write the synthetic demo sources and authors");
  demo->add_option("--out-dir", demo_dir, "output directory");
  demo->add_option("--demo-seed", demo_seed, "demo generator seed");

  BuildArgs build;
  auto* bc = app.add_subcommand("build-corpus", "extract facts and assemble articles");
  common.add(bc);
  bc->add_option("--sources", build.sources, "source documents JSONL")->required();
  bc->add_option("--authors", build.authors, "author pool JSONL")->required();
  bc->add_option("--backends", build.backends, "comma-separated backend ids");
  bc->add_option("--facts", build.facts, "extra watermark facts JSONL for the knowledge base");
  bc->add_option("--out", build.out, "corpus JSONL");
  bc->add_option("--records-out", build.records_out, "extracted source records JSONL");
  bc->add_option("--kb-out", build.kb_out, "knowledge base JSONL");
  bc->add_option("--errors-out", build.errors_out, "failed plans JSONL");

  WatermarkArgs wm;
  auto* wmc = app.add_subcommand("watermark", "apply knowledge and token watermarks");
  common.add(wmc);
  wmc->add_option("--corpus", wm.corpus, "corpus JSONL")->required();
  wmc->add_option("--kb", wm.kb, "knowledge base JSONL")->required();
  wmc->add_option("--out", wm.out, "watermarked corpus JSONL");
  wmc->add_option("--model-out", wm.model_out, "language model JSON");
  wmc->add_option("--selections-out", wm.selections_out, "watermark selections JSONL");
  wmc->add_option("-m,--facts-per-doc", wm.m, "watermark facts per document");

  InterrogateArgs inter;
  auto* ic = app.add_subcommand("interrogate", "generate probe queries");
  common.add(ic);
  ic->add_option("--corpus", inter.corpus, "watermarked corpus JSONL")->required();
  ic->add_option("--kb", inter.kb, "knowledge base JSONL")->required();
  ic->add_option("--out", inter.out, "queries JSONL");
  ic->add_option("--n-per-doc", inter.n_per_doc, "queries per document");

  SimulateArgs sim;
  auto* sc = app.add_subcommand("simulate", "answer queries with the simulated suspect system");
  common.add(sc);
  sc->add_option("--corpus", sim.corpus, "suspect's corpus JSONL")->required();
  sc->add_option("--queries", sim.queries, "queries JSONL")->required();
  sc->add_option("--model", sim.model, "language model JSON")->required();
  sc->add_option("--out", sim.out, "responses JSONL");
  sc->add_option("--rho", sim.rho, "attenuation")->check(CLI::Range(0.0, 1.0));
  sc->add_option("--k", sim.k, "retrieved documents per query");
  sc->add_option("--max-tokens", sim.max_tokens, "response length cap (0 = none)");
  sc->add_option("--n", sim.n, "answer only the first n queries");
  sc->add_option("--adversary", sim.adversary, "none | knowledge_evasion | token_evasion");
  sc->add_option("--policy", sim.policy, "answer-from-context | refuse-if-absent");

  DetectArgs det;
  auto* dc = app.add_subcommand("detect", "test responses for watermark evidence");
  common.add(dc);
  dc->add_option("--responses", det.responses, "responses JSONL")->required();
  dc->add_option("--queries", det.queries, "queries JSONL")->required();
  dc->add_option("--model", det.model, "language model JSON")->required();
  dc->add_option("--watermarked", det.watermarked, "owner's watermarked corpus JSONL")
      ->required();
  dc->add_option("--clean-responses", det.clean_responses,
                 "responses from a clean deployment, used to calibrate p0");
  dc->add_option("--report", det.report, "report JSON");
  dc->add_flag("--no-dedup", det.no_dedup, "count repeated (context, token) pairs");

  ExperimentArgs exp;
  auto* ec = app.add_subcommand("run-experiment", "end-to-end simulated detection run");
  common.add(ec);
  ec->add_option("--variant", exp.variant, "watermarked | clean");
  ec->add_option("--n-queries", exp.n_queries, "number of probe queries");
  ec->add_option("--report", exp.report, "report JSON");
  ec->add_option("--curve", exp.curve, "per-query curve CSV");
  ec->add_option("--adversary", exp.adversary, "none | knowledge_evasion | token_evasion");
  ec->add_option("--rho", exp.rho, "attenuation")->check(CLI::Range(0.0, 1.0));

  SweepArgs sw;
  auto* swc = app.add_subcommand("sweep-delta", "detection accuracy across delta values");
  common.add(swc);
  swc->add_option("--deltas", sw.deltas, "comma-separated delta values");
  swc->add_option("--seeds", sw.seeds, "seeded trials per delta");
  swc->add_option("--out", sw.out, "CSV output");

  BoundsArgs bd;
  auto* bdc = app.add_subcommand("bounds", "Monte-Carlo checks of the analytic bounds");
  common.add(bdc);
  bdc->add_option("--check", bd.check, "all | green-count | perplexity | adversarial");
  bdc->add_option("--model", bd.model, "language model JSON (default: demo model)");
  bdc->add_option("--T", bd.T, "sequence length");
  bdc->add_option("--sequences", bd.sequences, "sequences for the green-count check");
  bdc->add_option("--trials", bd.trials, "trials for the perplexity check");
  bdc->add_option("--adversarial-trials", bd.adversarial_trials, "trials per m");
  bdc->add_option("--m", bd.ms, "comma-separated edit counts");
  bdc->add_option("--out", bd.out, "JSON output");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitError;
  }

  try {
    if (*demo) return cmd_make_demo(demo_dir, demo_seed);
    const RunConfig cfg = common.resolve();
    if (*bc) return cmd_build_corpus(build, cfg);
    if (*wmc) return cmd_watermark(wm, cfg);
    if (*ic) return cmd_interrogate(inter, cfg);
    if (*sc) return cmd_simulate(sim, cfg);
    if (*dc) return cmd_detect(det, cfg);
    if (*ec) return cmd_run_experiment(exp, cfg);
    if (*swc) return cmd_sweep(sw, cfg);
    if (*bdc) return cmd_bounds(bd, cfg);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitError;
  }
  return kExitError;
}
