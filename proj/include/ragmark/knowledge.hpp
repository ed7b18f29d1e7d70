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

// Knowledge-level watermark: facts with embeddings, neighbor search inside a
// similarity band, subset selection and splicing into documents.

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <memory>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <tuple>
#include <unordered_map>
#include <vector>

#include "json.hpp"
#include "ragmark/core.hpp"
#include "ragmark/document.hpp"
#include "ragmark/embed.hpp"
#include "ragmark/prompts.hpp"
#include "ragmark/text.hpp"

namespace ragmark {

enum class FactKind { kCore, kExtended, kWatermark };

inline const char* to_string(FactKind k) {
  switch (k) {
    case FactKind::kCore: return "core";
    case FactKind::kExtended: return "extended";
    case FactKind::kWatermark: return "watermark";
  }
  return "?";
}

inline FactKind parse_fact_kind(std::string_view s) {
  if (s == "core") return FactKind::kCore;
  if (s == "extended") return FactKind::kExtended;
  if (s == "watermark") return FactKind::kWatermark;
  throw Error("unknown fact kind: " + std::string(s));
}

enum class RelationKind { kCausal, kTemporal, kSupportive, kContradictory, kElaborative };

inline const char* to_string(RelationKind k) {
  switch (k) {
    case RelationKind::kCausal: return "causal";
    case RelationKind::kTemporal: return "temporal";
    case RelationKind::kSupportive: return "supportive";
    case RelationKind::kContradictory: return "contradictory";
    case RelationKind::kElaborative: return "elaborative";
  }
  return "?";
}

inline RelationKind parse_relation_kind(std::string_view s) {
  if (s == "causal") return RelationKind::kCausal;
  if (s == "temporal") return RelationKind::kTemporal;
  if (s == "supportive") return RelationKind::kSupportive;
  if (s == "contradictory") return RelationKind::kContradictory;
  if (s == "elaborative") return RelationKind::kElaborative;
  throw Error("unknown relation kind: " + std::string(s));
}

struct Fact {
  std::string id;
  std::string text;
  Embedding embedding;
  FactKind kind = FactKind::kCore;
  std::string source_id;
  bool operator==(const Fact&) const = default;
};

struct Relation {
  std::string from;
  std::string to;
  RelationKind kind = RelationKind::kElaborative;
  bool operator==(const Relation&) const = default;
};

inline void check_unit_norm(const Fact& f) {
  double n = 0.0;
  for (double x : f.embedding) n += x * x;
  if (std::abs(std::sqrt(n) - 1.0) > 1e-6)
    throw Error("fact " + f.id + " embedding is not unit-norm (norm " +
                std::to_string(std::sqrt(n)) + ")");
}

class KnowledgeBase {
 public:
  void add_fact(Fact f) {
    check_unit_norm(f);
    if (index_.count(f.id)) throw Error("duplicate fact id: " + f.id);
    if (!facts_.empty() && f.embedding.size() != facts_.front().embedding.size())
      throw Error("fact " + f.id + " has embedding dimension " +
                  std::to_string(f.embedding.size()) + ", expected " +
                  std::to_string(facts_.front().embedding.size()));
    index_.emplace(f.id, facts_.size());
    facts_.push_back(std::move(f));
  }

  void add_relation(Relation r) {
    if (r.from == r.to) throw Error("self-loop relation on fact " + r.from);
    if (!index_.count(r.from)) throw Error("relation endpoint missing: " + r.from);
    if (!index_.count(r.to)) throw Error("relation endpoint missing: " + r.to);
    relations_.push_back(std::move(r));
  }

  const Fact* find(std::string_view id) const {
    auto it = index_.find(std::string(id));
    return it == index_.end() ? nullptr : &facts_[it->second];
  }

  const Fact& at(std::string_view id) const {
    const Fact* f = find(id);
    if (!f) throw Error("unknown fact id: " + std::string(id));
    return *f;
  }

  const std::vector<Fact>& facts() const { return facts_; }
  const std::vector<Relation>& relations() const { return relations_; }
  std::size_t size() const { return facts_.size(); }
  // Relation order is not part of the value.
  bool operator==(const KnowledgeBase& o) const {
    if (facts_ != o.facts_ || relations_.size() != o.relations_.size()) return false;
    auto key = [](const Relation& r) { return std::tie(r.from, r.to, r.kind); };
    auto sorted = [&](std::vector<Relation> v) {
      std::sort(v.begin(), v.end(), [&](const Relation& a, const Relation& b) {
        return key(a) < key(b);
      });
      return v;
    };
    return sorted(relations_) == sorted(o.relations_);
  }

 private:
  std::vector<Fact> facts_;
  std::vector<Relation> relations_;
  std::unordered_map<std::string, std::size_t> index_;
};

inline double cosine_sim(std::span<const double> a, std::span<const double> b) {
  return std::clamp(dot(a, b), -1.0, 1.0);
}

inline double cosine_sim(const Fact& a, const Fact& b) {
  return cosine_sim(a.embedding, b.embedding);
}

struct Neighbor {
  const Fact* fact = nullptr;
  double sim = 0.0;
};

// Facts outside the document with tau_sim < sim < tau_ident, top-k by
// similarity; ties by id ascending.
inline std::vector<Neighbor> candidate_neighbors(const Fact& f, const KnowledgeBase& kb,
                                                 const std::set<std::string>& doc_facts,
                                                 double tau_sim, double tau_ident,
                                                 std::size_t k) {
  if (!(tau_sim > 0.0 && tau_sim < tau_ident && tau_ident <= 1.0))
    throw Error("need 0 < tau_sim < tau_ident <= 1");
  std::vector<Neighbor> out;
  for (const auto& g : kb.facts()) {
    if (g.id == f.id || doc_facts.count(g.id)) continue;
    const double s = cosine_sim(f, g);
    if (s > tau_sim && s < tau_ident) out.push_back({&g, s});
  }
  std::sort(out.begin(), out.end(), [](const Neighbor& a, const Neighbor& b) {
    if (a.sim != b.sim) return a.sim > b.sim;
    return a.fact->id < b.fact->id;
  });
  if (out.size() > k) out.resize(k);
  return out;
}

// Union of neighbor lists over the document's facts, in id order.
inline std::vector<const Fact*> candidate_union(const KnowledgeBase& kb,
                                                const std::vector<std::string>& doc_fact_ids,
                                                double tau_sim, double tau_ident,
                                                std::size_t k) {
  const std::set<std::string> doc(doc_fact_ids.begin(), doc_fact_ids.end());
  std::map<std::string, const Fact*> pool;
  for (const auto& id : doc_fact_ids)
    for (const auto& n : candidate_neighbors(kb.at(id), kb, doc, tau_sim, tau_ident, k))
      pool.emplace(n.fact->id, n.fact);
  std::vector<const Fact*> out;
  for (auto& [id, f] : pool) out.push_back(f);
  return out;
}

// ---------------------------------------------------------------------------
// Selection

class CoherenceScorer {
 public:
  virtual ~CoherenceScorer() = default;
  virtual double coherence(std::span<const Fact* const> chosen,
                           std::span<const double> doc_centroid) const = 0;
  virtual double distinctiveness(std::span<const Fact* const> chosen) const = 0;
};

// Coherence: mean cosine to the document centroid. Distinctiveness:
// 1 - max pairwise cosine inside the chosen set (1 for fewer than two).
class CentroidScorer final : public CoherenceScorer {
 public:
  double coherence(std::span<const Fact* const> chosen,
                   std::span<const double> doc_centroid) const override {
    if (chosen.empty()) return 0.0;
    double s = 0.0;
    for (const Fact* f : chosen) s += cosine_sim(f->embedding, doc_centroid);
    return s / static_cast<double>(chosen.size());
  }
  double distinctiveness(std::span<const Fact* const> chosen) const override {
    if (chosen.empty()) return 0.0;
    double mx = -1.0;
    for (std::size_t i = 0; i < chosen.size(); ++i)
      for (std::size_t j = i + 1; j < chosen.size(); ++j)
        mx = std::max(mx, cosine_sim(*chosen[i], *chosen[j]));
    return chosen.size() < 2 ? 1.0 : 1.0 - mx;
  }
};

struct WatermarkSelection {
  std::string document_id;
  std::vector<std::string> chosen;
  double coherence = 0.0;
  double distinctiveness = 0.0;
  double objective() const { return coherence + distinctiveness; }
  bool operator==(const WatermarkSelection&) const = default;
};

// Normalized mean of the given embeddings.
inline Embedding centroid(std::span<const Embedding> vs) {
  if (vs.empty()) throw Error("centroid of an empty set");
  Embedding c(vs.front().size(), 0.0);
  for (const auto& v : vs) {
    if (v.size() != c.size()) throw Error("embedding dimension mismatch in centroid");
    for (std::size_t i = 0; i < c.size(); ++i) c[i] += v[i];
  }
  l2_normalize(c);
  return c;
}

inline Embedding document_centroid(const Document& doc, const KnowledgeBase& kb) {
  std::vector<Embedding> es;
  for (const auto& id : doc.core_fact_ids) es.push_back(kb.at(id).embedding);
  for (const auto& id : doc.extended_fact_ids) es.push_back(kb.at(id).embedding);
  if (es.empty()) throw Error("document " + doc.id + " lists no facts");
  return centroid(es);
}

namespace knowledge_detail {

inline double objective(const std::vector<const Fact*>& w, std::span<const double> c,
                        const CoherenceScorer& scorer) {
  return scorer.coherence(w, c) + scorer.distinctiveness(w);
}

// Enumerates size-m subsets in lexicographic index order; keeps the first
// maximum.
inline std::vector<std::size_t> exhaustive(const std::vector<const Fact*>& cands,
                                           std::size_t m, std::span<const double> c,
                                           const CoherenceScorer& scorer) {
  std::vector<std::size_t> idx(m), best;
  for (std::size_t i = 0; i < m; ++i) idx[i] = i;
  double best_val = -std::numeric_limits<double>::infinity();
  std::vector<const Fact*> w(m);
  const std::size_t n = cands.size();
  while (true) {
    for (std::size_t i = 0; i < m; ++i) w[i] = cands[idx[i]];
    const double v = objective(w, c, scorer);
    if (v > best_val) {
      best_val = v;
      best = idx;
    }
    std::size_t i = m;
    while (i > 0 && idx[i - 1] == n - m + (i - 1)) --i;
    if (i == 0) break;
    ++idx[i - 1];
    for (std::size_t j = i; j < m; ++j) idx[j] = idx[j - 1] + 1;
  }
  return best;
}

inline double binomial(std::size_t n, std::size_t k) {
  double r = 1.0;
  for (std::size_t i = 1; i <= k; ++i)
    r = r * static_cast<double>(n - k + i) / static_cast<double>(i);
  return r;
}

}  // namespace knowledge_detail

inline constexpr double kExhaustiveSubsetLimit = 20000.0;

// Maximizes coherence + distinctiveness over size-m subsets. Small instances
// are searched exhaustively; larger ones use greedy forward selection.
// Candidates are considered in id order.
inline WatermarkSelection select_watermarks(std::string document_id,
                                            std::span<const double> doc_centroid,
                                            std::vector<const Fact*> candidates,
                                            std::size_t m,
                                            const CoherenceScorer& scorer) {
  WatermarkSelection sel;
  sel.document_id = std::move(document_id);
  if (m == 0) return sel;
  if (candidates.size() < m)
    throw Error("too few watermark candidates for document " + sel.document_id +
                ": need " + std::to_string(m) + ", have " +
                std::to_string(candidates.size()) + " (short by " +
                std::to_string(m - candidates.size()) + ")");
  std::sort(candidates.begin(), candidates.end(),
            [](const Fact* a, const Fact* b) { return a->id < b->id; });

  std::vector<const Fact*> chosen;
  if (knowledge_detail::binomial(candidates.size(), m) <= kExhaustiveSubsetLimit) {
    for (std::size_t i : knowledge_detail::exhaustive(candidates, m, doc_centroid, scorer))
      chosen.push_back(candidates[i]);
  } else {
    std::vector<bool> used(candidates.size(), false);
    while (chosen.size() < m) {
      double best = -std::numeric_limits<double>::infinity();
      std::size_t pick = candidates.size();
      for (std::size_t i = 0; i < candidates.size(); ++i) {
        if (used[i]) continue;
        chosen.push_back(candidates[i]);
        const double v = knowledge_detail::objective(chosen, doc_centroid, scorer);
        chosen.pop_back();
        if (v > best) {
          best = v;
          pick = i;
        }
      }
      used[pick] = true;
      chosen.push_back(candidates[pick]);
    }
  }
  for (const Fact* f : chosen) sel.chosen.push_back(f->id);
  sel.coherence = scorer.coherence(chosen, doc_centroid);
  sel.distinctiveness = scorer.distinctiveness(chosen);
  return sel;
}

// ---------------------------------------------------------------------------
// Splicing

inline std::string as_sentence(std::string_view text) {
  std::string s(text);
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.pop_back();
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.erase(s.begin());
  if (s.empty()) throw Error("cannot splice an empty fact");
  if (!is_sentence_end(std::string_view(&s.back(), 1))) s += '.';
  return s;
}

// Offline splice: each fact becomes its own sentence at the end of the
// paragraph whose sentence centroid is closest to the fact.
inline Document splice_offline(const Document& doc, std::span<const Fact* const> facts,
                               const HashingEmbedder& embedder) {
  Document out = doc;
  WatermarkRecord record = doc.watermark.value_or(WatermarkRecord{});
  if (facts.empty()) {
    out.watermark = record;
    return out;
  }
  auto paragraphs = split_paragraphs(doc.text);
  if (paragraphs.empty()) throw Error("document " + doc.id + " has no paragraphs");
  std::vector<Embedding> cents;
  std::vector<std::size_t> sentence_count;
  for (const auto& p : paragraphs) {
    std::vector<Embedding> es;
    for (const auto& s : split_sentences(split_words(p))) es.push_back(embedder.embed(join(s)));
    cents.push_back(centroid(es));
    sentence_count.push_back(es.size());
  }
  struct Pending {
    std::string fact_id;
    std::size_t paragraph;
    std::size_t sentence;
    std::string text;
  };
  std::vector<std::vector<Pending>> inserts(paragraphs.size());
  for (const Fact* f : facts) {
    std::size_t best = 0;
    double best_sim = -2.0;
    for (std::size_t p = 0; p < cents.size(); ++p) {
      const double s = cosine_sim(f->embedding, cents[p]);
      if (s > best_sim) {
        best_sim = s;
        best = p;
      }
    }
    const std::string sentence = as_sentence(f->text);
    inserts[best].push_back({f->id, best, sentence_count[best], sentence});
    sentence_count[best] += split_sentences(split_words(sentence)).size();
  }
  std::string text;
  for (std::size_t p = 0; p < paragraphs.size(); ++p) {
    if (p) text += "\n\n";
    text += paragraphs[p];
    for (const auto& ins : inserts[p]) {
      text += ' ';
      const std::size_t b = text.size();
      text += ins.text;
      record.spans.push_back({ins.fact_id, ins.paragraph, ins.sentence, b, text.size()});
    }
  }
  out.text = std::move(text);
  out.watermark = std::move(record);
  return out;
}

// Live splice through a completion endpoint. Spans are recorded for facts the
// model kept verbatim; paraphrased ones carry an empty span.
inline Document splice_live(const Document& doc, std::span<const Fact* const> facts,
                            TextBackend& backend, const std::string& prompt_template);

inline Document splice_watermarks(const Document& doc, const WatermarkSelection& selection,
                                  const KnowledgeBase& kb, TextBackend& backend,
                                  const HashingEmbedder& embedder,
                                  const std::string& live_prompt = {}) {
  if (selection.document_id != doc.id)
    throw Error("selection for " + selection.document_id + " applied to " + doc.id);
  std::vector<const Fact*> facts;
  for (const auto& id : selection.chosen) facts.push_back(&kb.at(id));
  if (backend.offline()) return splice_offline(doc, facts, embedder);
  return splice_live(doc, facts, backend, live_prompt);
}

inline Document splice_live(const Document& doc, std::span<const Fact* const> facts,
                            TextBackend& backend, const std::string& prompt_template) {
  if (facts.empty()) return doc;
  std::string list;
  for (const Fact* f : facts) list += "- " + f->text + "\n";
  const std::string prompt =
      PromptLibrary::fill(prompt_template, {{"document", doc.text}, {"facts", list}});
  std::string text;
  try {
    text = backend.complete(prompt);
  } catch (const std::exception& e) {
    throw Error("splice via backend '" + backend.id() + "' failed: " + e.what());
  }
  Document out = doc;
  out.text = text;
  WatermarkRecord record = doc.watermark.value_or(WatermarkRecord{});
  for (const Fact* f : facts) {
    const auto pos = text.find(f->text);
    if (pos == std::string::npos)
      record.spans.push_back({f->id, 0, 0, 0, 0});
    else
      record.spans.push_back({f->id, 0, 0, pos, pos + f->text.size()});
  }
  out.watermark = std::move(record);
  return out;
}

// ---------------------------------------------------------------------------
// JSONL: one fact per line with its outgoing relations.

inline nlohmann::ordered_json to_json(const Fact& f, const std::vector<Relation>& out_edges) {
  nlohmann::ordered_json j;
  j["id"] = f.id;
  j["text"] = f.text;
  j["kind"] = to_string(f.kind);
  j["source_id"] = f.source_id;
  j["embedding"] = f.embedding;
  auto& rel = j["relations"] = nlohmann::ordered_json::array();
  for (const auto& r : out_edges) rel.push_back({{"to", r.to}, {"kind", to_string(r.kind)}});
  return j;
}

inline std::vector<nlohmann::ordered_json> to_jsonl(const KnowledgeBase& kb) {
  std::map<std::string, std::vector<Relation>> edges;
  for (const auto& r : kb.relations()) edges[r.from].push_back(r);
  std::vector<nlohmann::ordered_json> out;
  for (const auto& f : kb.facts()) out.push_back(to_json(f, edges[f.id]));
  return out;
}

inline KnowledgeBase knowledge_base_from_jsonl(const std::vector<nlohmann::json>& lines) {
  KnowledgeBase kb;
  for (const auto& j : lines)
    kb.add_fact({j.at("id").get<std::string>(), j.at("text").get<std::string>(),
                 j.at("embedding").get<Embedding>(),
                 parse_fact_kind(j.at("kind").get<std::string>()),
                 j.value("source_id", "")});
  for (const auto& j : lines)
    if (j.contains("relations"))
      for (const auto& r : j.at("relations"))
        kb.add_relation({j.at("id").get<std::string>(), r.at("to").get<std::string>(),
                         parse_relation_kind(r.at("kind").get<std::string>())});
  return kb;
}

inline Fact make_fact(std::string id, std::string text, FactKind kind, std::string source_id,
                      const HashingEmbedder& embedder) {
  Fact f{std::move(id), std::move(text), {}, kind, std::move(source_id)};
  f.embedding = embedder.embed(f.text);
  return f;
}

}  // namespace ragmark
