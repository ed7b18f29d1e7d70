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

// Simulated suspect system: exact cosine k-NN retrieval, a responder that
// paraphrases retrieved sentences token by token, and two evasion transforms.

#include <algorithm>
#include <map>
#include <set>
#include <string>
#include <vector>

#include "json.hpp"
#include "ragmark/document.hpp"
#include "ragmark/embed.hpp"
#include "ragmark/green_red.hpp"
#include "ragmark/interrogator.hpp"
#include "ragmark/text.hpp"
#include "ragmark/token_model.hpp"

namespace ragmark {

class RetrievalIndex {
 public:
  struct Hit {
    std::string id;
    double score = 0.0;
    bool operator==(const Hit&) const = default;
  };

  void add(std::string id, Embedding e) {
    if (!ids_.insert(id).second) throw Error("duplicate document id in index: " + id);
    if (!entries_.empty() && e.size() != entries_.front().second.size())
      throw Error("embedding dimension mismatch in index for " + id);
    double n = 0.0;
    for (double x : e) n += x * x;
    if (n > 0.0 && std::abs(n - 1.0) > 1e-6) throw Error("index embedding not unit-norm: " + id);
    entries_.emplace_back(std::move(id), std::move(e));
  }

  std::size_t size() const { return entries_.size(); }
  const std::vector<std::pair<std::string, Embedding>>& entries() const { return entries_; }

  std::vector<Hit> retrieve(std::span<const double> query, std::size_t k) const {
    if (k == 0) throw Error("retrieve: K must be >= 1");
    if (k > entries_.size())
      throw Error("retrieve: K=" + std::to_string(k) + " exceeds index size " +
                  std::to_string(entries_.size()));
    std::vector<Hit> hits;
    hits.reserve(entries_.size());
    for (const auto& [id, e] : entries_) hits.push_back({id, dot(query, e)});
    auto better = [](const Hit& a, const Hit& b) {
      return a.score != b.score ? a.score > b.score : a.id < b.id;
    };
    std::partial_sort(hits.begin(), hits.begin() + static_cast<std::ptrdiff_t>(k), hits.end(),
                      better);
    hits.resize(k);
    return hits;
  }

 private:
  std::vector<std::pair<std::string, Embedding>> entries_;
  std::set<std::string> ids_;
};

// Retrieval hashes whole documents, so it uses more buckets than the fact
// embedder to keep unrelated concepts from colliding.
inline constexpr std::size_t kRetrievalEmbeddingDim = 2048;

inline HashingEmbedder retrieval_embedder() { return HashingEmbedder(kRetrievalEmbeddingDim); }

inline RetrievalIndex index_corpus(const std::vector<Document>& corpus,
                                   const HashingEmbedder& embedder) {
  if (corpus.empty()) throw Error("index_corpus: empty corpus");
  RetrievalIndex index;
  for (const auto& d : corpus) index.add(d.id, embedder.embed(d.text));
  return index;
}

enum class AnswerPolicy { kAnswerFromContext, kRefuseIfAbsent };
enum class Adversary { kNone, kKnowledgeEvasion, kTokenEvasion };

inline const char* to_string(AnswerPolicy p) {
  return p == AnswerPolicy::kRefuseIfAbsent ? "refuse-if-absent" : "answer-from-context";
}

inline AnswerPolicy parse_answer_policy(std::string_view s) {
  if (s == "answer-from-context") return AnswerPolicy::kAnswerFromContext;
  if (s == "refuse-if-absent") return AnswerPolicy::kRefuseIfAbsent;
  throw Error("unknown answer policy: " + std::string(s));
}

inline const char* to_string(Adversary a) {
  switch (a) {
    case Adversary::kKnowledgeEvasion: return "knowledge_evasion";
    case Adversary::kTokenEvasion: return "token_evasion";
    default: return "none";
  }
}

inline Adversary parse_adversary(std::string_view s) {
  if (s == "none") return Adversary::kNone;
  if (s == "knowledge_evasion") return Adversary::kKnowledgeEvasion;
  if (s == "token_evasion") return Adversary::kTokenEvasion;
  throw Error("unknown adversary: " + std::string(s));
}

struct RagConfig {
  std::size_t k = 3;
  double rho = 0.6;
  // Response length cap in tokens; 0 keeps every retrieved sentence.
  std::size_t max_tokens = 48;
  AnswerPolicy policy = AnswerPolicy::kAnswerFromContext;
  Adversary adversary = Adversary::kNone;
  double theta_susp = 0.2;
  bool operator==(const RagConfig&) const = default;

  void validate() const {
    if (k < 1) throw Error("RagConfig: K must be >= 1");
    if (!(rho >= 0.0 && rho <= 1.0)) throw Error("RagConfig: rho must lie in [0, 1]");
    if (!(theta_susp >= 0.0 && theta_susp <= 1.0))
      throw Error("RagConfig: theta_susp must lie in [0, 1]");
  }
};

inline nlohmann::ordered_json to_json(const RagConfig& c) {
  nlohmann::ordered_json j;
  j["k"] = c.k;
  j["rho"] = c.rho;
  j["max_tokens"] = c.max_tokens;
  j["policy"] = to_string(c.policy);
  j["adversary"] = to_string(c.adversary);
  j["theta_susp"] = c.theta_susp;
  return j;
}

inline RagConfig rag_config_from_json(const nlohmann::json& j) {
  RagConfig c;
  c.k = j.value("k", c.k);
  c.rho = j.value("rho", c.rho);
  c.max_tokens = j.value("max_tokens", c.max_tokens);
  c.policy = parse_answer_policy(j.value("policy", std::string(to_string(c.policy))));
  c.adversary = parse_adversary(j.value("adversary", std::string(to_string(c.adversary))));
  c.theta_susp = j.value("theta_susp", c.theta_susp);
  c.validate();
  return c;
}

// ---------------------------------------------------------------------------
// Evasion transforms

// Sentences whose content stems overlap the rest of their paragraph by less
// than theta. Single-sentence paragraphs are never flagged.
inline std::vector<std::pair<std::size_t, std::size_t>> suspicious_sentences(
    const std::vector<ParagraphTokens>& paragraphs, double theta) {
  std::vector<std::pair<std::size_t, std::size_t>> out;
  for (std::size_t p = 0; p < paragraphs.size(); ++p) {
    const auto& para = paragraphs[p];
    if (para.size() < 2) continue;
    std::vector<std::set<std::string>> stems(para.size());
    for (std::size_t s = 0; s < para.size(); ++s)
      for (const auto& w : para[s])
        if (is_content_word(w)) stems[s].insert(stem(w));
    for (std::size_t s = 0; s < para.size(); ++s) {
      if (stems[s].empty()) continue;
      std::size_t shared = 0;
      for (const auto& w : stems[s]) {
        for (std::size_t o = 0; o < para.size(); ++o)
          if (o != s && stems[o].count(w)) {
            ++shared;
            break;
          }
      }
      if (static_cast<double>(shared) < theta * static_cast<double>(stems[s].size()))
        out.emplace_back(p, s);
    }
  }
  return out;
}

inline std::string knowledge_evasion(std::string_view text, double theta) {
  auto paragraphs = segment(text);
  const auto flagged = suspicious_sentences(paragraphs, theta);
  if (flagged.empty()) return std::string(text);
  const std::set<std::pair<std::size_t, std::size_t>> drop(flagged.begin(), flagged.end());
  std::vector<ParagraphTokens> kept;
  for (std::size_t p = 0; p < paragraphs.size(); ++p) {
    ParagraphTokens para;
    for (std::size_t s = 0; s < paragraphs[p].size(); ++s)
      if (!drop.count({p, s})) para.push_back(std::move(paragraphs[p][s]));
    if (!para.empty()) kept.push_back(std::move(para));
  }
  return render(kept).text;
}

// Unbiased draw that never yields the reserved <unk>/<bos> entries.
inline TokenId sample_plain(const NGramModel& model, const Vocabulary& vocab,
                            std::span<const TokenId> ctx, Rng& rng) {
  for (int tries = 0; tries < 64; ++tries) {
    const TokenId v = sample_next(model, ctx, nullptr, 1.0, rng);
    if (v != vocab.unk() && v != vocab.bos()) return v;
  }
  throw Error("model keeps producing reserved tokens");
}

// Content words stay; every other token is redrawn from the unwatermarked
// model given the rewritten prefix, never reproducing the original token and
// never completing a 4-gram that occurs in the input.
inline std::string token_evasion(std::string_view text, const NGramModel& model,
                                 const Vocabulary& vocab, Rng& rng) {
  constexpr std::size_t kGram = 4;
  auto paragraphs = segment(text);
  std::vector<std::string*> words;
  for (auto& para : paragraphs)
    for (auto& sent : para)
      for (auto& w : sent) words.push_back(&w);
  const std::size_t n = words.size();
  std::vector<std::uint8_t> fixed(n);
  for (std::size_t i = 0; i < n; ++i) fixed[i] = is_content_word(*words[i]);

  std::set<std::vector<std::string>> input_grams;
  for (std::size_t i = 0; i + kGram <= n; ++i) {
    std::vector<std::string> g;
    for (std::size_t j = i; j < i + kGram; ++j) g.push_back(*words[j]);
    input_grams.insert(std::move(g));
  }
  // A window is checked once every other position in it is final: earlier
  // ones are already rewritten and later content words never change.
  auto recreates_gram = [&](std::size_t pos, const std::string& cand) {
    const std::size_t lo = pos + 1 >= kGram ? pos + 1 - kGram : 0;
    for (std::size_t s = lo; s <= pos && s + kGram <= n; ++s) {
      std::vector<std::string> g;
      bool settled = true;
      for (std::size_t j = s; j < s + kGram; ++j) {
        if (j > pos && !fixed[j]) settled = false;
        g.push_back(j == pos ? cand : *words[j]);
      }
      if (settled && input_grams.count(g)) return true;
    }
    return false;
  };

  TokenSequence ctx;
  for (std::size_t i = 0; i < n; ++i) {
    std::string& w = *words[i];
    const TokenId orig = vocab.id_or_unk(w);
    if (fixed[i]) {
      ctx.push_back(orig);
      continue;
    }
    TokenId v = orig;
    for (int tries = 0; v == orig || vocab.token(v) == w || recreates_gram(i, vocab.token(v));
         ++tries) {
      if (tries < 32) {
        v = sample_plain(model, vocab, ctx, rng);
      } else {
        do v = static_cast<TokenId>(rng.below(vocab.size()));
        while (v == vocab.unk() || v == vocab.bos());
      }
      if (tries > 10000) throw Error("token_evasion: no admissible replacement");
    }
    w = vocab.token(v);
    ctx.push_back(v);
  }
  return render(paragraphs).text;
}

// ---------------------------------------------------------------------------
// Responder

struct RagContext {
  const RetrievalIndex& index;
  const std::map<std::string, const Document*>& docs;
  const NGramModel& model;
  const Vocabulary& vocab;
  const HashingEmbedder& embedder;
};

inline std::map<std::string, const Document*> document_map(const std::vector<Document>& corpus) {
  std::map<std::string, const Document*> m;
  for (const auto& d : corpus) m[d.id] = &d;
  return m;
}

namespace rag_detail {

inline bool contains_fact(const Query& q, std::string_view text) {
  const auto have = content_stems(text);
  return std::all_of(q.key_phrases.begin(), q.key_phrases.end(),
                     [&](const std::string& k) { return have.count(k) > 0; });
}

}  // namespace rag_detail

// Retrieved texts after the configured adversary.
inline std::vector<std::string> retrieved_texts(const RagConfig& cfg, const RagContext& ctx,
                                                const Query& query, Rng& rng) {
  const auto hits = ctx.index.retrieve(ctx.embedder.embed(query.text), cfg.k);
  std::vector<std::string> texts;
  for (const auto& h : hits) {
    const auto it = ctx.docs.find(h.id);
    if (it == ctx.docs.end()) throw Error("indexed document missing from corpus: " + h.id);
    std::string t = it->second->text;
    if (cfg.adversary == Adversary::kKnowledgeEvasion) t = knowledge_evasion(t, cfg.theta_susp);
    if (cfg.adversary == Adversary::kTokenEvasion) t = token_evasion(t, ctx.model, ctx.vocab, rng);
    texts.push_back(std::move(t));
  }
  return texts;
}

inline ProbeResponse respond(const RagConfig& cfg, const RagContext& ctx, const Query& query,
                             std::uint64_t rng_seed) {
  cfg.validate();
  Rng rng(rng_seed);
  ProbeResponse r;
  r.query_id = query.id;
  r.backend = "simulated";
  const auto texts = retrieved_texts(cfg, ctx, query, rng);

  if (cfg.policy == AnswerPolicy::kRefuseIfAbsent &&
      std::none_of(texts.begin(), texts.end(),
                   [&](const std::string& t) { return rag_detail::contains_fact(query, t); })) {
    r.text = std::string(kRefusal);
    return r;
  }

  // Sentences ranked by relevance to the query, filled up to the budget.
  struct Candidate {
    double score;
    std::size_t order;
    const std::vector<std::string>* tokens;
  };
  std::vector<std::vector<std::string>> sentences;
  for (const auto& t : texts)
    for (auto& para : segment(t))
      for (auto& s : para) sentences.push_back(std::move(s));
  std::vector<Candidate> cands;
  const Embedding qe = ctx.embedder.embed(query.text);
  for (std::size_t i = 0; i < sentences.size(); ++i)
    cands.push_back({cfg.max_tokens ? dot(qe, ctx.embedder.embed(join(sentences[i]))) : 0.0, i,
                     &sentences[i]});
  if (cfg.max_tokens)
    std::stable_sort(cands.begin(), cands.end(),
                     [](const Candidate& a, const Candidate& b) { return a.score > b.score; });
  std::vector<std::string> words;
  for (const auto& c : cands) {
    if (cfg.max_tokens && !words.empty() && words.size() + c.tokens->size() > cfg.max_tokens)
      break;
    words.insert(words.end(), c.tokens->begin(), c.tokens->end());
  }

  // Attenuation: each token survives with probability rho, otherwise the
  // unwatermarked model supplies a replacement given the response so far.
  TokenSequence ids;
  ids.reserve(words.size());
  for (auto& w : words) {
    if (rng.bernoulli(cfg.rho)) {
      ids.push_back(ctx.vocab.id_or_unk(w));
    } else {
      ids.push_back(sample_plain(ctx.model, ctx.vocab, ids, rng));
      w = ctx.vocab.token(ids.back());
    }
  }
  r.text = join(words);
  return r;
}

}  // namespace ragmark
