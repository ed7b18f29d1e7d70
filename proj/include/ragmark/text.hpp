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

// Text normalization, word/sentence/paragraph splitting and the small
// amount of morphology the offline backends need. Everything here is ASCII
// oriented; bytes >= 0x80 are kept inside words untouched.

#include <algorithm>
#include <cctype>
#include <cstdint>
#include <string>
#include <string_view>
#include <unordered_set>
#include <vector>

namespace ragmark {

namespace text_detail {

inline bool is_word_char(unsigned char c) {
  return std::isalnum(c) || c == '\'' || c == '-' || c >= 0x80;
}

}  // namespace text_detail

// Splits into lowercase word tokens and single-character punctuation tokens.
inline std::vector<std::string> split_words(std::string_view text) {
  std::vector<std::string> out;
  std::string cur;
  auto flush = [&] {
    if (!cur.empty()) {
      // Leading/trailing apostrophes and hyphens are quote marks, not word
      // internals.
      std::size_t b = 0, e = cur.size();
      while (b < e && (cur[b] == '\'' || cur[b] == '-')) ++b;
      while (e > b && (cur[e - 1] == '\'' || cur[e - 1] == '-')) --e;
      if (e > b) out.push_back(cur.substr(b, e - b));
      cur.clear();
    }
  };
  for (unsigned char c : text) {
    if (text_detail::is_word_char(c)) {
      cur.push_back(static_cast<char>(std::tolower(c)));
    } else {
      flush();
      if (!std::isspace(c)) out.emplace_back(1, static_cast<char>(c));
    }
  }
  flush();
  return out;
}

inline std::string join(const std::vector<std::string>& parts,
                        std::string_view sep = " ") {
  std::string out;
  for (std::size_t i = 0; i < parts.size(); ++i) {
    if (i) out += sep;
    out += parts[i];
  }
  return out;
}

// Canonical form: lowercase tokens separated by one space.
inline std::string normalize(std::string_view text) {
  return join(split_words(text));
}

// Paragraphs are separated by one or more blank lines.
inline std::vector<std::string> split_paragraphs(std::string_view text) {
  std::vector<std::string> out;
  std::string cur;
  std::size_t i = 0;
  while (i < text.size()) {
    std::size_t nl = text.find('\n', i);
    std::string_view line =
        text.substr(i, nl == std::string_view::npos ? text.size() - i : nl - i);
    bool blank = std::all_of(line.begin(), line.end(),
                             [](unsigned char c) { return std::isspace(c); });
    if (blank) {
      if (!cur.empty()) out.push_back(std::move(cur));
      cur.clear();
    } else {
      if (!cur.empty()) cur += ' ';
      cur += line;
    }
    if (nl == std::string_view::npos) break;
    i = nl + 1;
  }
  if (!cur.empty()) out.push_back(std::move(cur));
  return out;
}

inline bool is_sentence_end(std::string_view tok) {
  return tok == "." || tok == "!" || tok == "?";
}

// Sentences of a token stream; the terminator stays with its sentence.
inline std::vector<std::vector<std::string>> split_sentences(
    const std::vector<std::string>& words) {
  std::vector<std::vector<std::string>> out;
  std::vector<std::string> cur;
  for (const auto& w : words) {
    cur.push_back(w);
    if (is_sentence_end(w)) {
      out.push_back(std::move(cur));
      cur.clear();
    }
  }
  if (!cur.empty()) out.push_back(std::move(cur));
  return out;
}

// Raw-text sentence split that keeps original casing and punctuation.
inline std::vector<std::string> split_sentences_raw(std::string_view text) {
  std::vector<std::string> out;
  std::string cur;
  for (std::size_t i = 0; i < text.size(); ++i) {
    char c = text[i];
    cur.push_back(c);
    bool end = (c == '.' || c == '!' || c == '?') &&
               (i + 1 == text.size() || std::isspace(static_cast<unsigned char>(text[i + 1])));
    if (end) {
      auto b = cur.find_first_not_of(" \t\n");
      if (b != std::string::npos) out.push_back(cur.substr(b));
      cur.clear();
    }
  }
  auto b = cur.find_first_not_of(" \t\n");
  if (b != std::string::npos) out.push_back(cur.substr(b));
  return out;
}

inline const std::unordered_set<std::string>& stopwords() {
  static const std::unordered_set<std::string> kStop = {
      "a",       "about",  "above",   "after",   "again",  "against", "all",
      "also",    "am",     "an",      "and",     "any",    "are",     "as",
      "at",      "be",     "because", "been",    "before", "being",   "below",
      "between", "both",   "but",     "by",      "can",    "could",   "did",
      "do",      "does",   "doing",   "down",    "during", "each",    "few",
      "for",     "from",   "further", "had",     "has",    "have",    "having",
      "he",      "her",    "here",    "hers",    "him",    "his",     "how",
      "i",       "if",     "in",      "into",    "is",     "it",      "its",
      "itself",  "just",   "me",      "more",    "most",   "my",      "no",
      "nor",     "not",    "now",     "of",      "off",    "on",      "once",
      "only",    "or",     "other",   "our",     "ours",   "out",     "over",
      "own",     "same",   "she",     "should",  "so",     "some",    "such",
      "than",    "that",   "the",     "their",   "theirs", "them",    "then",
      "there",   "these",  "they",    "this",    "those",  "through", "to",
      "too",     "under",  "until",   "up",      "very",   "was",     "we",
      "were",    "what",   "when",    "where",   "which",  "while",   "who",
      "whom",    "why",    "will",    "with",    "would",  "you",     "your",
      "according", "indeed", "notably", "meanwhile", "moreover", "furthermore",
      "however", "reportedly", "overall", "said", "says", "note", "noted",
      "worth", "observers", "readers", "report", "reports", "reported",
      "regarding", "consider", "turning", "next", "let", "us", "look", "story",
      "details", "detail", "brief", "briefly", "summary", "recap", "perhaps",
      "still", "yet", "likewise", "similarly", "thus", "hence", "therefore",
      "accordingly", "instead", "concerning", "account", "accounts", "turn",
      "concludes", "ends", "closes", "section", "part", "matters", "matter",
      "know", "known", "say", "tell", "tells", "told", "record", "records",
      "happened", "happen", "involved", "involving", "role", "mention",
      "mentions", "mentioned", "describe", "describes", "described", "one",
      "many", "much", "well", "really", "quite", "rather", "clearly",
      "plainly", "simply", "certainly", "surely", "evidently", "frankly",
      "honestly", "curiously", "interestingly", "importantly", "fittingly",
      "hopefully", "sadly", "happily", "encouragingly", "skeptics", "critics",
      "supporters", "residents", "neighbors", "insiders", "historians",
      "specialists", "experts", "fans", "enthusiasts", "point", "points"};
  return kStop;
}

inline bool is_content_word(std::string_view w) {
  if (w.size() < 2) return false;
  if (!std::any_of(w.begin(), w.end(),
                   [](unsigned char c) { return std::isalnum(c); }))
    return false;
  return !stopwords().count(std::string(w));
}

inline std::vector<std::string> content_words(std::string_view text) {
  std::vector<std::string> out;
  for (auto& w : split_words(text))
    if (is_content_word(w)) out.push_back(std::move(w));
  return out;
}

// Light suffix stripping; enough to match "approves"/"approved" offline.
inline std::string stem(std::string_view word) {
  std::string w(word);
  auto strip = [&](std::string_view suf, std::size_t min_rest) {
    if (w.size() >= suf.size() + min_rest &&
        w.compare(w.size() - suf.size(), suf.size(), suf) == 0) {
      w.resize(w.size() - suf.size());
      return true;
    }
    return false;
  };
  if (strip("ing", 3) || strip("ed", 3) || strip("ly", 3) || strip("es", 3) ||
      strip("s", 3)) {
  }
  return w;
}

// splitmix64 finalizer; the mixing primitive behind every keyed hash here.
inline constexpr std::uint64_t mix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

// FNV-1a over bytes, then mixed. Used for feature hashing of words.
inline std::uint64_t hash_string(std::string_view s, std::uint64_t seed = 0) {
  std::uint64_t h = 0xcbf29ce484222325ULL ^ mix64(seed);
  for (unsigned char c : s) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return mix64(h);
}

}  // namespace ragmark
