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

// Redundant-corpus construction: facts are pulled out of each source document,
// then every (source, backend) pair is rendered as an article by a sampled
// author. All articles of a source carry the same core facts.

#include <algorithm>
#include <cctype>
#include <map>
#include <numeric>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"
#include "ragmark/core.hpp"
#include "ragmark/document.hpp"
#include "ragmark/embed.hpp"
#include "ragmark/knowledge.hpp"
#include "ragmark/prompts.hpp"
#include "ragmark/text.hpp"

namespace ragmark {

inline constexpr std::size_t kMinCoreFacts = 5;
inline constexpr std::size_t kMaxCoreFacts = 7;
inline constexpr std::size_t kMinExtendedFacts = 8;
inline constexpr std::size_t kMaxExtendedFacts = 12;
inline constexpr std::size_t kExtendedPerArticle = 2;

struct SourceDocument {
  std::string id;
  std::string text;
  bool operator==(const SourceDocument&) const = default;
};

struct FactText {
  std::string id;
  std::string text;
  bool operator==(const FactText&) const = default;
};

struct SourceRecord {
  std::string source_id;
  std::vector<FactText> core;
  std::vector<FactText> extended;
  std::vector<Relation> relations;
  bool operator==(const SourceRecord&) const = default;

  void validate() const {
    if (core.size() < kMinCoreFacts || core.size() > kMaxCoreFacts ||
        extended.size() < kMinExtendedFacts || extended.size() > kMaxExtendedFacts)
      throw Error("source " + source_id + ": fact counts out of range (core " +
                  std::to_string(core.size()) + ", extended " +
                  std::to_string(extended.size()) + "; need core 5-7, extended 8-12)");
    std::set<std::string> ids;
    for (const auto& f : core) ids.insert(f.id);
    for (const auto& f : extended) ids.insert(f.id);
    if (ids.size() != core.size() + extended.size())
      throw Error("source " + source_id + ": duplicate fact ids");
    for (const auto& r : relations) {
      if (!ids.count(r.from) || !ids.count(r.to))
        throw Error("source " + source_id + ": relation " + r.from + " -> " + r.to +
                    " references an unlisted fact");
      if (r.from == r.to) throw Error("source " + source_id + ": self-loop on " + r.from);
    }
  }

  // Core fact an extended fact elaborates, if any.
  std::optional<std::size_t> parent_of(std::string_view ext_id) const {
    for (const auto& r : relations)
      if (r.from == ext_id && r.kind == RelationKind::kElaborative)
        for (std::size_t i = 0; i < core.size(); ++i)
          if (core[i].id == r.to) return i;
    return std::nullopt;
  }
};

struct AuthorProfile {
  std::string id;
  std::vector<std::string> expertise;
  std::string formality;            // formal | neutral | conversational
  std::string technical_density;    // low | medium | high
  std::string narrative;            // chronological | analytical | anecdotal | summary
  std::string sentence_structure;   // short | varied | complex
  std::string vocabulary;           // plain | elevated
  std::string organization;         // source-order | reverse-order | interleaved | rotated
  std::vector<std::string> perspective;
  bool operator==(const AuthorProfile&) const = default;

  void validate() const {
    auto bad = [&](const std::string& field) {
      throw Error("author " + id + ": empty descriptor '" + field + "'");
    };
    if (id.empty()) throw Error("author with empty id");
    if (expertise.empty()) bad("expertise");
    if (formality.empty()) bad("formality");
    if (technical_density.empty()) bad("technical_density");
    if (narrative.empty()) bad("narrative");
    if (sentence_structure.empty()) bad("sentence_structure");
    if (vocabulary.empty()) bad("vocabulary");
    if (organization.empty()) bad("organization");
    if (perspective.empty()) bad("perspective");
  }
};

struct GenerationPlan {
  std::string source_id;
  std::string author_id;
  std::string backend;
  std::vector<std::string> extended_fact_ids;
  std::uint64_t rng_seed = 0;
  bool operator==(const GenerationPlan&) const = default;
};

// ---------------------------------------------------------------------------
// Serialization

inline nlohmann::ordered_json to_json(const SourceDocument& s) {
  return {{"id", s.id}, {"text", s.text}};
}

inline SourceDocument source_from_json(const nlohmann::json& j) {
  return {j.at("id").get<std::string>(), j.at("text").get<std::string>()};
}

inline nlohmann::ordered_json to_json(const SourceRecord& r) {
  nlohmann::ordered_json j;
  j["source_id"] = r.source_id;
  auto facts = [](const std::vector<FactText>& v) {
    auto a = nlohmann::ordered_json::array();
    for (const auto& f : v) a.push_back({{"id", f.id}, {"text", f.text}});
    return a;
  };
  j["core_facts"] = facts(r.core);
  j["extended_facts"] = facts(r.extended);
  auto& rel = j["relations"] = nlohmann::ordered_json::array();
  for (const auto& e : r.relations)
    rel.push_back({{"from", e.from}, {"to", e.to}, {"kind", to_string(e.kind)}});
  return j;
}

inline SourceRecord source_record_from_json(const nlohmann::json& j) {
  SourceRecord r;
  r.source_id = j.at("source_id").get<std::string>();
  for (const auto& f : j.at("core_facts"))
    r.core.push_back({f.at("id").get<std::string>(), f.at("text").get<std::string>()});
  for (const auto& f : j.at("extended_facts"))
    r.extended.push_back({f.at("id").get<std::string>(), f.at("text").get<std::string>()});
  for (const auto& e : j.at("relations"))
    r.relations.push_back({e.at("from").get<std::string>(), e.at("to").get<std::string>(),
                           parse_relation_kind(e.at("kind").get<std::string>())});
  return r;
}

inline nlohmann::ordered_json to_json(const AuthorProfile& a) {
  nlohmann::ordered_json j;
  j["id"] = a.id;
  j["expertise"] = a.expertise;
  j["style"] = {{"formality", a.formality},
                {"technical_density", a.technical_density},
                {"narrative", a.narrative},
                {"sentence_structure", a.sentence_structure},
                {"vocabulary", a.vocabulary}};
  j["organization"] = a.organization;
  j["perspective"] = a.perspective;
  return j;
}

inline AuthorProfile author_from_json(const nlohmann::json& j) {
  AuthorProfile a;
  a.id = j.at("id").get<std::string>();
  a.expertise = j.at("expertise").get<std::vector<std::string>>();
  const auto& s = j.at("style");
  a.formality = s.at("formality").get<std::string>();
  a.technical_density = s.at("technical_density").get<std::string>();
  a.narrative = s.at("narrative").get<std::string>();
  a.sentence_structure = s.at("sentence_structure").get<std::string>();
  a.vocabulary = s.at("vocabulary").get<std::string>();
  a.organization = j.at("organization").get<std::string>();
  a.perspective = j.at("perspective").get<std::vector<std::string>>();
  a.validate();
  return a;
}

inline nlohmann::ordered_json to_json(const GenerationPlan& p) {
  nlohmann::ordered_json j;
  j["source_id"] = p.source_id;
  j["author_id"] = p.author_id;
  j["backend"] = p.backend;
  j["extended_fact_ids"] = p.extended_fact_ids;
  j["rng_seed"] = p.rng_seed;
  return j;
}

// ---------------------------------------------------------------------------
// Fact extraction

namespace corpus_detail {

inline std::string trim(std::string_view s) {
  std::size_t b = 0, e = s.size();
  while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
  while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
  return std::string(s.substr(b, e - b));
}

inline SourceRecord extract_offline(const SourceDocument& source) {
  struct Sentence {
    std::string text;
    std::size_t paragraph;
    bool lead;
  };
  std::vector<Sentence> sents;
  const auto paragraphs = split_paragraphs(source.text);
  for (std::size_t p = 0; p < paragraphs.size(); ++p) {
    bool first = true;
    for (auto& s : split_sentences_raw(paragraphs[p])) {
      auto t = trim(s);
      if (t.empty()) continue;
      sents.push_back({std::move(t), p, first});
      first = false;
    }
  }
  // Lead sentences are core facts; promote the earliest followers when short,
  // demote trailing leads when long.
  std::vector<std::size_t> core, ext;
  for (std::size_t i = 0; i < sents.size(); ++i) (sents[i].lead ? core : ext).push_back(i);
  while (core.size() > kMaxCoreFacts) {
    ext.push_back(core.back());
    core.pop_back();
  }
  std::sort(ext.begin(), ext.end());
  while (core.size() < kMinCoreFacts && !ext.empty()) {
    core.push_back(ext.front());
    ext.erase(ext.begin());
  }
  std::sort(core.begin(), core.end());
  if (ext.size() > kMaxExtendedFacts) ext.resize(kMaxExtendedFacts);

  SourceRecord r;
  r.source_id = source.id;
  std::map<std::size_t, std::string> core_of_paragraph;
  for (std::size_t i = 0; i < core.size(); ++i) {
    const auto id = source.id + "-c" + std::to_string(i);
    r.core.push_back({id, sents[core[i]].text});
    core_of_paragraph.emplace(sents[core[i]].paragraph, id);
  }
  for (std::size_t i = 0; i < ext.size(); ++i) {
    const auto id = source.id + "-e" + std::to_string(i);
    r.extended.push_back({id, sents[ext[i]].text});
    // Parent: the core fact of the same paragraph, else the nearest earlier one.
    auto it = core_of_paragraph.upper_bound(sents[ext[i]].paragraph);
    if (it != core_of_paragraph.begin()) r.relations.push_back({id, std::prev(it)->second,
                                                                RelationKind::kElaborative});
  }
  for (std::size_t i = 0; i + 1 < r.core.size(); ++i)
    r.relations.push_back({r.core[i].id, r.core[i + 1].id, RelationKind::kTemporal});
  return r;
}

inline SourceRecord extract_live(const SourceDocument& source, TextBackend& backend,
                                 const PromptLibrary& prompts) {
  const auto reply =
      backend.complete(prompts.render("extract_facts", {{"document", source.text}}));
  nlohmann::json j;
  try {
    const auto b = reply.find('{'), e = reply.rfind('}');
    if (b == std::string::npos || e == std::string::npos || e < b) throw Error("no JSON object");
    j = nlohmann::json::parse(reply.substr(b, e - b + 1));
  } catch (const std::exception& ex) {
    throw Error("backend '" + backend.id() + "' returned unparsable facts for " + source.id +
                ": " + ex.what());
  }
  SourceRecord r;
  r.source_id = source.id;
  const auto core = j.at("core_facts").get<std::vector<std::string>>();
  const auto ext = j.at("extended_facts").get<std::vector<std::string>>();
  for (std::size_t i = 0; i < core.size(); ++i)
    r.core.push_back({source.id + "-c" + std::to_string(i), core[i]});
  for (std::size_t i = 0; i < ext.size(); ++i)
    r.extended.push_back({source.id + "-e" + std::to_string(i), ext[i]});
  if (j.contains("relations"))
    for (const auto& e : j.at("relations")) {
      auto ref = [&](const nlohmann::json& x) -> std::string {
        const auto s = x.get<std::string>();
        return source.id + "-" + s;
      };
      r.relations.push_back({ref(e.at("from")), ref(e.at("to")),
                             parse_relation_kind(e.at("kind").get<std::string>())});
    }
  return r;
}

}  // namespace corpus_detail

inline SourceRecord extract_facts(const SourceDocument& source, TextBackend& backend,
                                  const PromptLibrary& prompts = PromptLibrary()) {
  if (corpus_detail::trim(source.text).empty())
    throw Error("source " + source.id + " is empty");
  SourceRecord r = backend.offline() ? corpus_detail::extract_offline(source)
                                     : corpus_detail::extract_live(source, backend, prompts);
  r.validate();
  return r;
}

// ---------------------------------------------------------------------------
// Planning

inline std::vector<GenerationPlan> plan_corpus(const std::vector<SourceRecord>& sources,
                                               const std::vector<AuthorProfile>& authors,
                                               const std::vector<std::string>& backends,
                                               std::uint64_t seed) {
  if (sources.empty()) throw Error("build_corpus: no sources");
  if (authors.empty()) throw Error("build_corpus: no authors");
  if (backends.empty()) throw Error("build_corpus: no backends");
  std::vector<GenerationPlan> plans;
  for (const auto& src : sources) {
    if (src.extended.size() < kExtendedPerArticle)
      throw Error("source " + src.source_id + " has fewer than 2 extended facts");
    Rng rng(derive_seed(seed, "plan:" + src.source_id));
    // Authors without replacement within a source; the pool refills when the
    // source needs more articles than there are authors.
    std::vector<std::size_t> pool;
    for (const auto& backend : backends) {
      if (pool.empty()) {
        pool.resize(authors.size());
        std::iota(pool.begin(), pool.end(), 0);
      }
      const std::size_t pick = rng.below(pool.size());
      const std::size_t author = pool[pick];
      pool.erase(pool.begin() + static_cast<std::ptrdiff_t>(pick));

      std::vector<std::size_t> ext(src.extended.size());
      std::iota(ext.begin(), ext.end(), 0);
      GenerationPlan plan;
      plan.source_id = src.source_id;
      plan.author_id = authors[author].id;
      plan.backend = backend;
      for (std::size_t i = 0; i < kExtendedPerArticle; ++i) {
        const std::size_t j = i + rng.below(ext.size() - i);
        std::swap(ext[i], ext[j]);
      }
      std::sort(ext.begin(), ext.begin() + kExtendedPerArticle);
      for (std::size_t i = 0; i < kExtendedPerArticle; ++i)
        plan.extended_fact_ids.push_back(src.extended[ext[i]].id);
      plan.rng_seed = derive_seed(seed, "article:" + src.source_id + ":" + backend);
      plans.push_back(std::move(plan));
    }
  }
  return plans;
}

// ---------------------------------------------------------------------------
// Offline article assembly: core-fact sentences are kept verbatim; authors and
// backends vary the framing sentences and paragraph order.

namespace corpus_detail {

inline std::string capitalize(std::string s) {
  if (!s.empty()) s[0] = static_cast<char>(std::toupper(static_cast<unsigned char>(s[0])));
  return s;
}

inline const std::vector<std::string>& lead_templates(std::string_view formality) {
  static const std::vector<std::string> kFormal = {
      "regarding the {a} {b}, consider the {c} {d} record.",
      "concerning the {a} {b}: the {c} {d} details.",
      "here, the record of the {a} {b} and the {c} {d}."};
  static const std::vector<std::string> kConversational = {
      "now for the {a} {b} and the {c} {d} story.",
      "here is the {a} {b} and its {c} {d}.",
      "let us look at the {a} {b} and the {c} {d}."};
  static const std::vector<std::string> kNeutral = {
      "turning to the {a} {b} and the {c} {d}.",
      "next, the {a} {b} and its {c} {d}.",
      "on the {a} {b} and the {c} {d}, briefly."};
  if (formality == "formal") return kFormal;
  if (formality == "conversational") return kConversational;
  return kNeutral;
}

inline std::string perspective_prefix(const AuthorProfile& a) {
  static const std::map<std::string, std::string> kPrefix = {
      {"optimistic", "happily, "},         {"skeptical", "curiously, "},
      {"community-focused", "for residents, "}, {"technical", "importantly, "},
      {"historical", "historians note that "}};
  for (const auto& p : a.perspective)
    if (auto it = kPrefix.find(p); it != kPrefix.end()) return it->second;
  return "";
}

inline std::vector<std::size_t> paragraph_order(std::size_t n, std::string_view organization,
                                                Rng& rng) {
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  if (organization == "reverse-order") {
    std::reverse(order.begin(), order.end());
  } else if (organization == "interleaved") {
    std::vector<std::size_t> o;
    for (std::size_t i = 0; i < n; i += 2) o.push_back(i);
    for (std::size_t i = 1; i < n; i += 2) o.push_back(i);
    order = o;
  } else if (organization == "rotated" && n > 1) {
    std::rotate(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(1 + rng.below(n - 1)),
                order.end());
  }
  return order;
}

}  // namespace corpus_detail

inline std::string assemble_article(const SourceRecord& src, const AuthorProfile& author,
                                    const GenerationPlan& plan, std::size_t backend_index) {
  using namespace corpus_detail;
  Rng rng(plan.rng_seed);
  const auto& leads = lead_templates(author.formality);
  std::map<std::size_t, std::vector<std::string>> attached;
  for (const auto& id : plan.extended_fact_ids) {
    auto it = std::find_if(src.extended.begin(), src.extended.end(),
                           [&](const FactText& f) { return f.id == id; });
    if (it == src.extended.end()) throw Error("plan references unknown fact " + id);
    attached[src.parent_of(id).value_or(src.core.size() - 1)].push_back(it->text);
  }
  const auto order = paragraph_order(src.core.size(), author.organization, rng);
  std::string text;
  for (std::size_t n = 0; n < order.size(); ++n) {
    const std::size_t i = order[n];
    auto words = content_words(src.core[i].text);
    while (words.size() < 4) words.push_back(words.empty() ? "topic" : words.back());
    std::string lead = leads[(backend_index + n + rng.below(leads.size())) % leads.size()];
    lead = PromptLibrary::fill(lead, {{"a", words[0]}, {"b", words[1]}, {"c", words[2]},
                                      {"d", words[3]}});
    if (n == 0) lead = perspective_prefix(author) + lead;
    if (author.vocabulary == "elevated" && n % 2 == 1) lead = "notably, " + lead;
    if (n) text += "\n\n";
    text += capitalize(lead) + " " + src.core[i].text;
    for (const auto& e : attached[i]) text += " " + e;
    if (n + 1 == order.size() &&
        (author.narrative == "anecdotal" || author.narrative == "summary"))
      text += " That concludes the " + words[0] + " " + words[1] + " story.";
  }
  return text;
}

struct PlanError {
  GenerationPlan plan;
  std::string message;
};

struct Corpus {
  std::vector<Document> documents;
  std::vector<PlanError> errors;
};

inline Document article_document(const SourceRecord& src, const GenerationPlan& plan,
                                 std::string text) {
  Document d;
  d.id = plan.source_id + "-" + plan.backend;
  d.source_id = plan.source_id;
  d.author_id = plan.author_id;
  d.backend = plan.backend;
  d.text = std::move(text);
  for (const auto& f : src.core) d.core_fact_ids.push_back(f.id);
  d.extended_fact_ids = plan.extended_fact_ids;
  return d;
}

// One article per (source, backend). Backend failures are recorded per plan
// and the run continues.
inline Corpus build_corpus(const std::vector<SourceRecord>& sources,
                           const std::vector<AuthorProfile>& authors,
                           const std::vector<TextBackend*>& backends, std::uint64_t seed,
                           const PromptLibrary& prompts = PromptLibrary()) {
  std::vector<std::string> ids;
  for (auto* b : backends) ids.push_back(b->id());
  if (std::set<std::string>(ids.begin(), ids.end()).size() != ids.size())
    throw Error("build_corpus: duplicate backend ids");
  for (const auto& a : authors) a.validate();
  for (const auto& s : sources) s.validate();
  std::map<std::string, const AuthorProfile*> by_author;
  for (const auto& a : authors) by_author[a.id] = &a;
  std::map<std::string, const SourceRecord*> by_source;
  for (const auto& s : sources) by_source[s.source_id] = &s;

  Corpus corpus;
  const auto plans = plan_corpus(sources, authors, ids, seed);
  for (std::size_t i = 0; i < plans.size(); ++i) {
    const auto& plan = plans[i];
    const std::size_t b = i % backends.size();
    const auto& src = *by_source.at(plan.source_id);
    const auto& author = *by_author.at(plan.author_id);
    try {
      std::string text;
      if (backends[b]->offline()) {
        text = assemble_article(src, author, plan, b);
      } else {
        std::string facts;
        for (const auto& f : src.core) facts += "- " + f.text + "\n";
        for (const auto& id : plan.extended_fact_ids)
          for (const auto& f : src.extended)
            if (f.id == id) facts += "- " + f.text + "\n";
        text = backends[b]->complete(prompts.render(
            "write_article", {{"facts", facts},
                              {"author", to_json(author).dump()},
                              {"source_id", plan.source_id}}));
      }
      corpus.documents.push_back(article_document(src, plan, std::move(text)));
    } catch (const std::exception& e) {
      corpus.errors.push_back({plan, e.what()});
    }
  }
  return corpus;
}

// Knowledge base from extracted records (core and extended facts) plus any
// extra facts such as watermark candidates.
inline KnowledgeBase knowledge_from_records(const std::vector<SourceRecord>& records,
                                            const std::vector<FactText>& extra,
                                            const std::map<std::string, std::string>& extra_source,
                                            const HashingEmbedder& embedder) {
  KnowledgeBase kb;
  for (const auto& r : records) {
    for (const auto& f : r.core)
      kb.add_fact(make_fact(f.id, f.text, FactKind::kCore, r.source_id, embedder));
    for (const auto& f : r.extended)
      kb.add_fact(make_fact(f.id, f.text, FactKind::kExtended, r.source_id, embedder));
  }
  for (const auto& f : extra) {
    auto it = extra_source.find(f.id);
    kb.add_fact(make_fact(f.id, f.text, FactKind::kWatermark,
                          it == extra_source.end() ? "" : it->second, embedder));
  }
  for (const auto& r : records)
    for (const auto& rel : r.relations) kb.add_relation(rel);
  return kb;
}

}  // namespace ragmark
