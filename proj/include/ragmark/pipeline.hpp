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

// End-to-end flow: knowledge splice, token-layer regeneration, probing a
// simulated suspect and accumulating evidence.

#include <algorithm>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "json.hpp"
#include "ragmark/corpus.hpp"
#include "ragmark/demo.hpp"
#include "ragmark/detective.hpp"
#include "ragmark/document.hpp"
#include "ragmark/embed.hpp"
#include "ragmark/green_red.hpp"
#include "ragmark/interrogator.hpp"
#include "ragmark/knowledge.hpp"
#include "ragmark/rag_sim.hpp"
#include "ragmark/token_model.hpp"

namespace ragmark {

struct WatermarkConfig {
  std::size_t m = 3;
  double tau_sim = 0.75;
  double tau_ident = 0.95;
  std::size_t neighbors = 8;
  // Only facts of kind `watermark` may be spliced; off lets any out-of-doc
  // fact from the knowledge base qualify.
  bool watermark_kind_only = true;
  PartitionParams partition;
  // Share of each free (function-word) position handed to the model before
  // the green bias is applied.
  double rewrite_rate = 0.1;
  // Weight of the uniform component in the function-word proposal.
  double flatten = 1.0;
  bool operator==(const WatermarkConfig&) const = default;
};

inline nlohmann::ordered_json to_json(const WatermarkConfig& c) {
  nlohmann::ordered_json j;
  j["m"] = c.m;
  j["tau_sim"] = c.tau_sim;
  j["tau_ident"] = c.tau_ident;
  j["neighbors"] = c.neighbors;
  j["watermark_kind_only"] = c.watermark_kind_only;
  j["partition"] = to_json(c.partition);
  j["rewrite_rate"] = c.rewrite_rate;
  j["flatten"] = c.flatten;
  return j;
}

inline WatermarkConfig watermark_config_from_json(const nlohmann::json& j) {
  WatermarkConfig c;
  c.m = j.value("m", c.m);
  c.tau_sim = j.value("tau_sim", c.tau_sim);
  c.tau_ident = j.value("tau_ident", c.tau_ident);
  c.neighbors = j.value("neighbors", c.neighbors);
  c.watermark_kind_only = j.value("watermark_kind_only", c.watermark_kind_only);
  if (j.contains("partition")) c.partition = partition_params_from_json(j.at("partition"));
  c.rewrite_rate = j.value("rewrite_rate", c.rewrite_rate);
  c.flatten = j.value("flatten", c.flatten);
  if (!(c.rewrite_rate >= 0.0 && c.rewrite_rate <= 1.0))
    throw Error("rewrite_rate must lie in [0, 1]");
  return c;
}

// ---------------------------------------------------------------------------
// Language model shared by the watermarker, the simulator and the detective.

struct LanguageModel {
  Vocabulary vocab;
  NGramModel model;
  std::vector<TokenId> support;  // function-word ids, ascending
};

inline constexpr std::size_t kModelOrder = 1;
inline constexpr double kModelSmoothing = 0.01;

inline LanguageModel build_language_model(const std::vector<std::string>& texts,
                                          std::size_t order = kModelOrder,
                                          double smoothing = kModelSmoothing) {
  if (texts.empty()) throw Error("build_language_model: no texts");
  LanguageModel lm;
  std::vector<TokenSequence> seqs;
  for (const auto& t : texts) seqs.push_back(tokenize(t, lm.vocab, true));
  lm.model = train_ngram(seqs, order, smoothing, lm.vocab);
  for (TokenId v = 0; v < lm.vocab.size(); ++v)
    if (stopwords().count(lm.vocab.token(v))) lm.support.push_back(v);
  return lm;
}

inline LanguageModel language_model_from(Vocabulary vocab, NGramModel model) {
  LanguageModel lm{std::move(vocab), std::move(model), {}};
  if (lm.model.vocab_size() != lm.vocab.size())
    throw Error("model vocabulary size differs from vocabulary file");
  for (TokenId v = 0; v < lm.vocab.size(); ++v)
    if (stopwords().count(lm.vocab.token(v))) lm.support.push_back(v);
  return lm;
}

// ---------------------------------------------------------------------------
// Watermarking

struct KnowledgeMarked {
  std::vector<Document> documents;
  std::vector<WatermarkSelection> selections;
};

// Each candidate fact is spliced into at most one document.
inline KnowledgeMarked knowledge_watermark(const std::vector<Document>& corpus,
                                           const KnowledgeBase& kb, const WatermarkConfig& cfg,
                                           TextBackend& backend, const HashingEmbedder& embedder,
                                           const PromptLibrary& prompts = PromptLibrary()) {
  KnowledgeMarked out;
  std::set<std::string> used;
  const CentroidScorer scorer;
  const std::string live_prompt = backend.offline() ? std::string() : prompts.get("splice");
  for (const auto& doc : corpus) {
    std::vector<std::string> own = doc.core_fact_ids;
    own.insert(own.end(), doc.extended_fact_ids.begin(), doc.extended_fact_ids.end());
    std::vector<const Fact*> cands;
    if (cfg.m > 0)
      for (const Fact* f :
           candidate_union(kb, own, cfg.tau_sim, cfg.tau_ident, cfg.neighbors))
        if (!used.count(f->id) && (!cfg.watermark_kind_only || f->kind == FactKind::kWatermark))
          cands.push_back(f);
    auto sel = select_watermarks(doc.id, document_centroid(doc, kb), cands, cfg.m, scorer);
    used.insert(sel.chosen.begin(), sel.chosen.end());
    out.documents.push_back(splice_watermarks(doc, sel, kb, backend, embedder, live_prompt));
    out.selections.push_back(std::move(sel));
  }
  return out;
}

// Regenerates the function words of a document under the green bias; every
// other token is anchored. Spans are re-derived from the sentence indices.
inline Document token_watermark(const Document& doc, const LanguageModel& lm,
                                GreenPartition& partition, double rewrite_rate,
                                double flatten, std::uint64_t seed) {
  auto paragraphs = segment(doc.text);
  TokenSequence ids;
  std::vector<std::uint8_t> anchored;
  for (const auto& p : paragraphs)
    for (const auto& s : p)
      for (const auto& w : s) {
        ids.push_back(lm.vocab.id_or_unk(w));
        anchored.push_back(stopwords().count(w) ? 0 : 1);
      }
  Rng rng(seed);
  const auto regen =
      regenerate_watermarked(lm.model, partition, ids, anchored, rewrite_rate, rng, lm.support,
                             flatten);
  std::size_t t = 0;
  for (auto& p : paragraphs)
    for (auto& s : p)
      for (auto& w : s) {
        if (!anchored[t]) w = lm.vocab.token(regen[t]);
        ++t;
      }
  const auto rendered = render(paragraphs);
  Document out = doc;
  out.text = rendered.text;
  WatermarkRecord rec = doc.watermark.value_or(WatermarkRecord{});
  for (auto& span : rec.spans) {
    if (span.end <= span.begin) continue;
    if (span.paragraph < rendered.spans.size() &&
        span.sentence < rendered.spans[span.paragraph].size()) {
      std::tie(span.begin, span.end) = rendered.spans[span.paragraph][span.sentence];
    } else {
      span.begin = span.end = 0;
    }
  }
  rec.partition = partition.params();
  rec.rewrite_rate = rewrite_rate;
  out.watermark = std::move(rec);
  return out;
}

inline std::vector<Document> token_watermark_corpus(const std::vector<Document>& docs,
                                                    const LanguageModel& lm,
                                                    const PartitionParams& params,
                                                    double rewrite_rate, double flatten,
                                                    std::uint64_t seed) {
  GreenPartition partition(params, lm.vocab);
  std::vector<Document> out;
  out.reserve(docs.size());
  for (const auto& d : docs) {
    if (params.delta == 0.0 || rewrite_rate == 0.0) {
      Document copy = d;
      WatermarkRecord rec = d.watermark.value_or(WatermarkRecord{});
      rec.partition = params;
      rec.rewrite_rate = rewrite_rate;
      copy.watermark = rec;
      out.push_back(std::move(copy));
      continue;
    }
    out.push_back(
        token_watermark(d, lm, partition, rewrite_rate, flatten, derive_seed(seed, "regen:" + d.id)));
  }
  return out;
}

// ---------------------------------------------------------------------------
// Offline experiment world

struct World {
  std::vector<Document> clean;
  KnowledgeBase kb;
  KnowledgeMarked marked;  // knowledge layer only
  std::vector<Query> query_pool;
  LanguageModel lm;
  HashingEmbedder embedder;                         // facts
  HashingEmbedder retriever = retrieval_embedder();  // documents and queries
};

inline constexpr std::size_t kQueriesPerDoc = 3;

inline std::vector<Query> make_query_pool(const KnowledgeMarked& marked, const KnowledgeBase& kb,
                                          std::size_t n_per_doc, TextBackend& backend) {
  std::vector<Query> pool;
  for (std::size_t i = 0; i < marked.documents.size(); ++i) {
    if (marked.selections[i].chosen.empty()) continue;
    auto qs = make_queries(marked.documents[i], marked.selections[i], kb, n_per_doc, backend);
    pool.insert(pool.end(), qs.begin(), qs.end());
  }
  return pool;
}

// Texts the language model is trained on: everything the owner has.
inline std::vector<std::string> model_texts(const std::vector<Document>& corpus,
                                            const KnowledgeBase& kb) {
  std::vector<std::string> texts;
  for (const auto& d : corpus) texts.push_back(d.text);
  for (const auto& f : kb.facts()) texts.push_back(f.text);
  return texts;
}

inline World build_world(std::vector<Document> clean, KnowledgeBase kb,
                         const WatermarkConfig& cfg, const HashingEmbedder& embedder = HashingEmbedder()) {
  World w;
  w.embedder = embedder;
  w.clean = std::move(clean);
  w.kb = std::move(kb);
  OfflineBackend backend("offline", embedder);
  w.marked = knowledge_watermark(w.clean, w.kb, cfg, backend, embedder);
  w.query_pool = make_query_pool(w.marked, w.kb, kQueriesPerDoc, backend);
  w.lm = build_language_model(model_texts(w.clean, w.kb));
  return w;
}

struct DemoCorpus {
  DemoData demo;
  std::vector<SourceRecord> records;
  Corpus corpus;
  KnowledgeBase kb;
};

inline DemoCorpus build_demo_corpus(const DemoConfig& dc, std::uint64_t corpus_seed,
                                    const HashingEmbedder& embedder = HashingEmbedder()) {
  DemoCorpus out;
  out.demo = make_demo(dc);
  OfflineBackend extractor("offline", embedder);
  for (const auto& s : out.demo.sources) out.records.push_back(extract_facts(s, extractor));
  std::vector<OfflineBackend> backends;
  for (const auto& id : demo_backends()) backends.emplace_back(id, embedder);
  std::vector<TextBackend*> ptrs;
  for (auto& b : backends) ptrs.push_back(&b);
  out.corpus = build_corpus(out.records, out.demo.authors, ptrs, corpus_seed);
  out.kb = knowledge_from_records(out.records, out.demo.candidates, out.demo.candidate_source,
                                  embedder);
  return out;
}

inline World build_demo_world(const WatermarkConfig& cfg = {}, const DemoConfig& dc = {},
                              std::uint64_t corpus_seed = 1) {
  auto dcorp = build_demo_corpus(dc, corpus_seed);
  if (!dcorp.corpus.errors.empty())
    throw Error("demo corpus build failed: " + dcorp.corpus.errors.front().message);
  return build_world(std::move(dcorp.corpus.documents), std::move(dcorp.kb), cfg);
}

// ---------------------------------------------------------------------------
// Experiments

enum class Variant { kWatermarked, kClean };

inline Variant parse_variant(std::string_view s) {
  if (s == "watermarked") return Variant::kWatermarked;
  if (s == "clean") return Variant::kClean;
  throw Error("unknown variant: " + std::string(s));
}

inline const char* to_string(Variant v) {
  return v == Variant::kWatermarked ? "watermarked" : "clean";
}

struct ExperimentConfig {
  RagConfig rag;
  DetectionParams detection;
  WatermarkConfig watermark;
  std::size_t n_queries = 200;
  bool dedup = true;
};

struct CurvePoint {
  std::size_t n = 0;
  double s_fact = 0.0;
  std::optional<double> z_token;
};

struct ExperimentResult {
  DetectionReport report;
  std::vector<CurvePoint> curve;
  EvidenceLedger ledger;
  std::vector<ProbeResponse> responses;
};

// Key for a deployment: each root seed stands for an independent owner key.
inline PartitionParams deployment_partition(const PartitionParams& base, std::uint64_t root) {
  PartitionParams p = base;
  p.seed = derive_seed(root, "partition-key");
  return p;
}

inline std::vector<Document> suspect_corpus(const World& w, const ExperimentConfig& cfg,
                                            Variant variant, const PartitionParams& params,
                                            std::uint64_t root) {
  if (variant == Variant::kClean) return w.clean;
  return token_watermark_corpus(w.marked.documents, w.lm, params, cfg.watermark.rewrite_rate,
                                cfg.watermark.flatten,
                                derive_seed(root, "regenerate"));
}

inline ExperimentResult probe(const World& w, const ExperimentConfig& cfg,
                              const std::vector<Document>& suspect, const PartitionParams& params,
                              std::uint64_t root) {
  if (cfg.n_queries < kMinQueries)
    throw Error("n_queries must be >= " + std::to_string(kMinQueries));
  if (cfg.n_queries > w.query_pool.size())
    throw Error("n_queries exceeds the query pool (" + std::to_string(w.query_pool.size()) + ")");
  const auto index = index_corpus(suspect, w.retriever);
  const auto docs = document_map(suspect);
  const RagContext ctx{index, docs, w.lm.model, w.lm.vocab, w.retriever};

  // Query order: a seeded draw without replacement from the pool.
  std::vector<std::size_t> order(w.query_pool.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  Rng qrng(derive_seed(root, "queries"));
  for (std::size_t i = 0; i < cfg.n_queries; ++i)
    std::swap(order[i], order[i + qrng.below(order.size() - i)]);

  GreenPartition partition(params, w.lm.vocab);
  GreenCounter counter(partition, cfg.dedup);
  ExperimentResult r;
  for (std::size_t i = 0; i < cfg.n_queries; ++i) {
    const Query& q = w.query_pool[order[i]];
    auto resp = respond(cfg.rag, ctx, q, derive_seed(root, "respond:" + std::to_string(i)));
    resp.answered = score_answerability(q, resp.text);
    const auto gc = counter.count(tokenize(resp.text, w.lm.vocab));
    r.ledger.append({resp.answered, gc.green, gc.scored});
    CurvePoint pt;
    pt.n = r.ledger.n();
    pt.s_fact = fact_score(r.ledger);
    if (r.ledger.scored() >= kMinScoredTokens) pt.z_token = token_z(r.ledger, cfg.detection.gamma_null);
    r.curve.push_back(pt);
    r.responses.push_back(std::move(resp));
  }
  r.report = decide(r.ledger, cfg.detection);
  r.report.attenuation = cfg.rag.rho;
  return r;
}

inline ExperimentResult run_experiment(const World& w, const ExperimentConfig& cfg,
                                       Variant variant, std::uint64_t root) {
  const auto params = deployment_partition(cfg.watermark.partition, root);
  const auto suspect = suspect_corpus(w, cfg, variant, params, root);
  return probe(w, cfg, suspect, params, root);
}

// Fact-layer null rate from clean deployments on seeds disjoint from the
// experiment seeds.
inline double calibrate_p0(const World& w, const ExperimentConfig& cfg,
                           std::size_t runs = 3, std::uint64_t tag = 0xca11b) {
  std::vector<EvidenceLedger> ledgers;
  for (std::size_t i = 0; i < runs; ++i)
    ledgers.push_back(
        run_experiment(w, cfg, Variant::kClean, derive_seed(tag, static_cast<std::uint64_t>(i)))
            .ledger);
  return calibrate_p0(std::span<const EvidenceLedger>(ledgers));
}

struct SweepRow {
  double delta = 0.0;
  double accuracy = 0.0;
  double green_fraction = 0.0;
  double mean_z = 0.0;
  std::size_t trials = 0;
};

// Detection accuracy of the token layer alone: the fact layer does not depend
// on delta and would mask the shape.
inline std::vector<SweepRow> sweep_delta(const World& w, const ExperimentConfig& cfg,
                                         const std::vector<double>& deltas, std::size_t seeds,
                                         std::uint64_t root) {
  if (deltas.size() < 2) throw Error("sweep-delta needs at least two delta values");
  if (seeds < 1) throw Error("sweep-delta needs at least one seed");
  std::vector<SweepRow> rows;
  for (double delta : deltas) {
    ExperimentConfig c = cfg;
    c.watermark.partition.delta = delta;
    SweepRow row;
    row.delta = delta;
    row.trials = seeds;
    for (std::size_t s = 0; s < seeds; ++s) {
      const auto r = run_experiment(w, c, Variant::kWatermarked, derive_seed(root, s));
      row.accuracy += r.report.token_reject ? 1.0 : 0.0;
      row.green_fraction += r.report.s_token.value_or(0.0);
      row.mean_z += r.report.z_token.value_or(0.0);
    }
    const double n = static_cast<double>(seeds);
    row.accuracy /= n;
    row.green_fraction /= n;
    row.mean_z /= n;
    rows.push_back(row);
  }
  return rows;
}

}  // namespace ragmark
