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

// Corpus unit and its watermark record. One JSON object per line.

#include <optional>
#include <string>
#include <vector>

#include "json.hpp"
#include "ragmark/core.hpp"
#include "ragmark/green_red.hpp"
#include "ragmark/text.hpp"

namespace ragmark {

// Location of a spliced fact. `paragraph` and `sentence` index the token-level
// segmentation (blank-line paragraphs, sentence-final punctuation); begin/end
// are byte offsets into the document text.
struct WatermarkSpan {
  std::string fact_id;
  std::size_t paragraph = 0;
  std::size_t sentence = 0;
  std::size_t begin = 0;
  std::size_t end = 0;
  bool operator==(const WatermarkSpan&) const = default;
};

struct WatermarkRecord {
  std::vector<WatermarkSpan> spans;
  std::optional<PartitionParams> partition;  // token layer, when applied
  double rewrite_rate = 0.0;
  bool operator==(const WatermarkRecord&) const = default;

  std::vector<std::string> fact_ids() const {
    std::vector<std::string> out;
    for (const auto& s : spans) out.push_back(s.fact_id);
    return out;
  }
};

struct Document {
  std::string id;
  std::string source_id;
  std::string author_id;
  std::string backend;
  std::string text;
  std::vector<std::string> core_fact_ids;
  std::vector<std::string> extended_fact_ids;
  std::optional<WatermarkRecord> watermark;
  bool operator==(const Document&) const = default;
};

inline nlohmann::ordered_json to_json(const WatermarkRecord& r) {
  nlohmann::ordered_json j;
  auto& spans = j["spans"] = nlohmann::ordered_json::array();
  for (const auto& s : r.spans) {
    nlohmann::ordered_json e;
    e["fact_id"] = s.fact_id;
    e["paragraph"] = s.paragraph;
    e["sentence"] = s.sentence;
    e["begin"] = s.begin;
    e["end"] = s.end;
    spans.push_back(std::move(e));
  }
  j["partition"] = r.partition ? to_json(*r.partition) : nlohmann::ordered_json(nullptr);
  j["rewrite_rate"] = r.rewrite_rate;
  return j;
}

inline WatermarkRecord watermark_record_from_json(const nlohmann::json& j) {
  WatermarkRecord r;
  for (const auto& e : j.at("spans"))
    r.spans.push_back({e.at("fact_id").get<std::string>(), e.at("paragraph").get<std::size_t>(),
                       e.at("sentence").get<std::size_t>(), e.at("begin").get<std::size_t>(),
                       e.at("end").get<std::size_t>()});
  if (j.contains("partition") && !j.at("partition").is_null())
    r.partition = partition_params_from_json(j.at("partition"));
  r.rewrite_rate = j.value("rewrite_rate", 0.0);
  return r;
}

inline nlohmann::ordered_json to_json(const Document& d) {
  nlohmann::ordered_json j;
  j["id"] = d.id;
  j["source_id"] = d.source_id;
  j["author_id"] = d.author_id;
  j["backend"] = d.backend;
  j["text"] = d.text;
  j["core_fact_ids"] = d.core_fact_ids;
  j["extended_fact_ids"] = d.extended_fact_ids;
  if (d.watermark) j["watermark"] = to_json(*d.watermark);
  return j;
}

inline Document document_from_json(const nlohmann::json& j) {
  Document d;
  d.id = j.at("id").get<std::string>();
  d.source_id = j.value("source_id", "");
  d.author_id = j.value("author_id", "");
  d.backend = j.value("backend", "");
  d.text = j.at("text").get<std::string>();
  if (j.contains("core_fact_ids"))
    d.core_fact_ids = j.at("core_fact_ids").get<std::vector<std::string>>();
  if (j.contains("extended_fact_ids"))
    d.extended_fact_ids = j.at("extended_fact_ids").get<std::vector<std::string>>();
  if (j.contains("watermark") && !j.at("watermark").is_null())
    d.watermark = watermark_record_from_json(j.at("watermark"));
  return d;
}

// ---------------------------------------------------------------------------
// Token-level segmentation shared by splicing, evasion and span bookkeeping.

using ParagraphTokens = std::vector<std::vector<std::string>>;  // sentences

inline std::vector<ParagraphTokens> segment(std::string_view text) {
  std::vector<ParagraphTokens> out;
  for (const auto& p : split_paragraphs(text)) {
    auto sents = split_sentences(split_words(p));
    if (!sents.empty()) out.push_back(std::move(sents));
  }
  return out;
}

// Inverse of segment() up to normalization: tokens joined by single spaces,
// paragraphs by a blank line. Also reports the byte span of every sentence.
struct RenderedText {
  std::string text;
  std::vector<std::vector<std::pair<std::size_t, std::size_t>>> spans;
};

inline RenderedText render(const std::vector<ParagraphTokens>& paragraphs) {
  RenderedText r;
  for (std::size_t p = 0; p < paragraphs.size(); ++p) {
    if (p) r.text += "\n\n";
    r.spans.emplace_back();
    bool first = true;
    for (const auto& sent : paragraphs[p]) {
      if (!first) r.text += ' ';
      first = false;
      const std::size_t b = r.text.size();
      for (std::size_t i = 0; i < sent.size(); ++i) {
        if (i) r.text += ' ';
        r.text += sent[i];
      }
      r.spans.back().emplace_back(b, r.text.size());
    }
  }
  return r;
}

}  // namespace ragmark
