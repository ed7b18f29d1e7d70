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

// Probe queries keyed to watermark facts, and the answerability judgement.

#include <algorithm>
#include <array>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"
#include "ragmark/document.hpp"
#include "ragmark/embed.hpp"
#include "ragmark/knowledge.hpp"
#include "ragmark/lexicon.hpp"
#include "ragmark/prompts.hpp"
#include "ragmark/text.hpp"

namespace ragmark {

inline constexpr std::string_view kRefusal = "Unanswerable";

struct Query {
  std::string id;
  std::string text;
  std::string target_doc;
  std::vector<std::string> target_facts;
  std::vector<std::string> key_phrases;  // stems
  bool operator==(const Query&) const = default;
};

struct ProbeResponse {
  std::string query_id;
  std::string text;
  bool answered = false;
  double latency_ms = 0.0;
  std::string backend;
  bool operator==(const ProbeResponse&) const = default;
};

inline nlohmann::ordered_json to_json(const Query& q) {
  nlohmann::ordered_json j;
  j["id"] = q.id;
  j["text"] = q.text;
  j["target_doc"] = q.target_doc;
  j["target_facts"] = q.target_facts;
  j["key_phrases"] = q.key_phrases;
  return j;
}

inline Query query_from_json(const nlohmann::json& j) {
  Query q;
  q.id = j.at("id").get<std::string>();
  q.text = j.at("text").get<std::string>();
  q.target_doc = j.at("target_doc").get<std::string>();
  q.target_facts = j.at("target_facts").get<std::vector<std::string>>();
  q.key_phrases = j.at("key_phrases").get<std::vector<std::string>>();
  if (q.key_phrases.empty()) throw Error("query " + q.id + " has no key phrases");
  return q;
}

inline nlohmann::ordered_json to_json(const ProbeResponse& r) {
  nlohmann::ordered_json j;
  j["query_id"] = r.query_id;
  j["text"] = r.text;
  j["answered"] = r.answered;
  j["latency_ms"] = r.latency_ms;
  j["backend"] = r.backend;
  return j;
}

inline ProbeResponse probe_response_from_json(const nlohmann::json& j) {
  return {j.at("query_id").get<std::string>(), j.at("text").get<std::string>(),
          j.value("answered", false), j.value("latency_ms", 0.0),
          j.value("backend", std::string())};
}

inline std::set<std::string> content_stems(std::string_view text) {
  std::set<std::string> out;
  for (const auto& w : content_words(text)) out.insert(stem(w));
  return out;
}

namespace interrogator_detail {

// Proper-name words of a fact: content words that are neither numbers nor
// known vocabulary, in their original casing and order.
inline std::vector<std::string> subject_words(std::string_view fact_text) {
  const auto& lex = Lexicon::instance();
  std::vector<std::string> out;
  std::string cur;
  auto flush = [&] {
    if (cur.empty()) return;
    std::string lower(cur);
    for (auto& c : lower) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
    const bool numeric = std::all_of(lower.begin(), lower.end(),
                                     [](unsigned char c) { return std::isdigit(c); });
    if (is_content_word(lower) && !numeric && !lex.contains_surface(lower) &&
        lex.concept_of(lower) == stem(lower) &&
        std::find(out.begin(), out.end(), cur) == out.end())
      out.push_back(cur);
    cur.clear();
  };
  for (char c : fact_text) {
    if (std::isalnum(static_cast<unsigned char>(c)) || c == '-' || c == '\'')
      cur += c;
    else
      flush();
  }
  flush();
  return out;
}

inline constexpr std::array<std::string_view, 5> kTemplates = {
    "What did the record say about {subject}?", "What is known about {subject}?",
    "Tell me about {subject}.", "What happened involving {subject}?",
    "What do reports mention about {subject}?"};

// Stems of the document outside its watermark sentences.
inline std::set<std::string> host_stems(const Document& doc) {
  std::set<std::pair<std::size_t, std::size_t>> skip;
  if (doc.watermark)
    for (const auto& s : doc.watermark->spans)
      if (s.end > s.begin) skip.emplace(s.paragraph, s.sentence);
  std::set<std::string> out;
  const auto paragraphs = segment(doc.text);
  for (std::size_t p = 0; p < paragraphs.size(); ++p)
    for (std::size_t s = 0; s < paragraphs[p].size(); ++s) {
      if (skip.count({p, s})) continue;
      for (const auto& w : paragraphs[p][s])
        if (is_content_word(w)) out.insert(stem(w));
    }
  return out;
}

}  // namespace interrogator_detail

// Key phrases: the fact's content stems that the host text does not already
// contain and the question does not give away.
inline std::vector<std::string> key_phrases_for(const Fact& fact, const Document& doc,
                                                std::string_view query_text) {
  const auto host = interrogator_detail::host_stems(doc);
  const auto asked = content_stems(query_text);
  std::vector<std::string> out;
  for (const auto& s : content_stems(fact.text))
    if (!host.count(s) && !asked.count(s)) out.push_back(s);
  if (out.empty())
    for (const auto& s : content_stems(fact.text))
      if (!asked.count(s)) out.push_back(s);
  return out;
}

inline std::vector<Query> make_queries(const Document& doc, const WatermarkSelection& selection,
                                       const KnowledgeBase& kb, std::size_t n_per_doc,
                                       TextBackend& backend,
                                       const PromptLibrary& prompts = PromptLibrary()) {
  if (selection.chosen.empty()) throw Error("make_queries: empty selection for " + doc.id);
  if (selection.document_id != doc.id)
    throw Error("selection for " + selection.document_id + " used with " + doc.id);
  std::vector<Query> out;
  for (std::size_t i = 0; i < n_per_doc; ++i) {
    const Fact& fact = kb.at(selection.chosen[i % selection.chosen.size()]);
    Query q;
    q.id = doc.id + "-q" + std::to_string(i);
    q.target_doc = doc.id;
    q.target_facts = {fact.id};
    if (backend.offline()) {
      auto subject = interrogator_detail::subject_words(fact.text);
      if (subject.empty()) subject = content_words(fact.text);
      const auto& tmpl = interrogator_detail::kTemplates[hash_string(q.id) %
                                                         interrogator_detail::kTemplates.size()];
      q.text = PromptLibrary::fill(std::string(tmpl), {{"subject", join(subject)}});
    } else {
      q.text = backend.complete(prompts.render("interrogate", {{"fact", fact.text}}));
    }
    q.key_phrases = key_phrases_for(fact, doc, q.text);
    if (q.key_phrases.empty()) throw Error("fact " + fact.id + " yields no key phrases");
    out.push_back(std::move(q));
  }
  return out;
}

inline bool is_refusal(std::string_view response) {
  std::string lower;
  for (char c : response) lower += static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return lower.find("unanswerable") != std::string::npos;
}

inline bool score_answerability(const Query& query, std::string_view response) {
  if (is_refusal(response) || query.key_phrases.empty()) return false;
  const auto have = content_stems(response);
  std::size_t hits = 0;
  for (const auto& k : query.key_phrases) hits += have.count(k);
  return 2 * hits >= query.key_phrases.size();
}

}  // namespace ragmark
