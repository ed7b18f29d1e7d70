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

// Synthetic demo world: sources about invented places, an author pool, and a
// pool of watermark candidate facts. Everything is a pure function of a seed.
//
// Template syntax: {name} {type} {person} {year} {num} {topic} are per-fact
// values; [key] is a synonym class rendered in the fact's register; [dir],
// [adj] and [adj2] draw a class from a small group per fact. Words outside
// slots are function words only.

#include <array>
#include <map>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "ragmark/core.hpp"
#include "ragmark/corpus.hpp"
#include "ragmark/lexicon.hpp"
#include "ragmark/text.hpp"

namespace ragmark {

struct DemoConfig {
  std::size_t sources = 50;
  std::size_t authors = 100;
  std::size_t candidates_per_core = 4;
  std::uint64_t seed = 7;
};

struct DemoData {
  std::vector<SourceDocument> sources;
  std::vector<SourceRecord> records;  // ground truth behind each source text
  std::vector<AuthorProfile> authors;
  std::vector<FactText> candidates;
  std::map<std::string, std::string> candidate_source;
};

namespace demo_detail {

struct CoreTemplate {
  std::string_view text;
  std::string_view topic;
};

inline const std::vector<CoreTemplate>& core_templates() {
  static const std::vector<CoreTemplate> k = {
      {"In {year} the {name} {type} [open] a [dir] [wing] with [steel] [tower] and [glass] "
       "[window] that [architect] {person} [design] for [visitor].",
       "wing"},
      {"The {name} {type} [repair] its [adj] [roof] in {year} after a [storm] [damage] the "
       "[stone] [floor] and [lighting], so [worker] with [engineer] {person} [complete] the "
       "[survey].",
       "roof"},
      {"In {year} [architect] {person} [design] a [adj] [entrance] for the {name} {type} with "
       "[timber] [seating], a [bell] and [map] for [student] and [volunteer].",
       "entrance"},
      {"The {name} {type} [host] an [exhibit] of [painting] and [sculpture] in {year}, [fund] "
       "by [donor] and [approve] by [mayor] {person} for [local] [student].",
       "exhibit"},
      {"In {year} the {name} {type} [install] a [adj] [clock] on its [dir] [tower], [donate] "
       "by {person} and [celebrate] with [music] for [visitor].",
       "clock"},
      {"The {name} {type} [build] a [adj] [courtyard] in {year} with [tree], [path] and "
       "[seating] that [volunteer] with [architect] {person} [design].",
       "courtyard"},
      {"In {year} {person} [donate] a [collection] of [book] and [map] to the {name} {type}, "
       "which [add] [adj] [room] for [student] and [teacher].",
       "collection"},
      {"The {name} {type} [expand] its [dir] [dock] in {year}, [add] [crane] for [cargo] and "
       "[ship] under [engineer] {person} with [budget] from the [council].",
       "dock"},
      {"{person} [discover] {num} [adj] [book] in the [dir] [hall] of the {name} {type} during "
       "a [survey] [fund] by [donor].",
       "book"},
      {"In {year} the {name} {type} [open] a [adj] [ward] for [patient] with [doctor] and "
       "[nurse] [hire] by {person} and [support] from the [council].",
       "ward"},
      {"The {name} {type} [build] a [adj] [stage] in {year} where [actor] and [music] "
       "[attract] [visitor] during a [season] [lead] by {person}.",
       "stage"},
      {"In {year} the {name} {type} [host] a [adj] [market] of [product] and [painting] on the "
       "[dir] [road], [approve] by [mayor] {person} with [ticket] at a [free] [price].",
       "market"},
      {"The {name} {type} [replace] its [adj] [dome] in {year} with [glass] and [steel] "
       "[design] by [architect] {person}, and [visitor] [welcome] the [lighting].",
       "dome"},
      {"In {year} the {name} {type} [install] [track] across the [dir] [river] for [carriage] "
       "to the [adj] [station], [approve] by the [council] and [engineer] {person}.",
       "track"},
  };
  return k;
}

inline const std::vector<std::string_view>& ext_templates() {
  static const std::vector<std::string_view> k = {
      "The {name} {type} {topic} [attract] {num} [visitor] in its [first] [season].",
      "The {name} {type} {topic} [measure] {num} [meter] across the [adj] [floor].",
      "The {name} {type} {topic} [budget] was {num} [dollar] from [local] [donor].",
      "The {name} {type} {topic} [hire] {num} [worker] and [volunteer].",
      "The {name} {type} {topic} [welcome] {num} [student] on [free] [ticket].",
      "The {name} {type} {topic} [add] {num} [window] and [adj] [lighting].",
      "The {name} {type} {topic} [survive] a [flood] of {num} [meter] in an [annual] [storm].",
      "The {name} {type} {topic} [increase] [attendance] by {num} [visitor].",
      "The {name} {type} {topic} [celebrate] an [award] after {num} [visitor] with [support].",
      "The {name} {type} {topic} [reduce] the [price] to {num} [dollar] for [student].",
      "The {name} {type} {topic} [move] {num} [ton] of [stone] to the [dir] [path].",
      "The {name} {type} {topic} [fund] {num} [course] for [teacher].",
      "The {name} {type} {topic} [close] {num} [room] during a [fire].",
      "The {name} {type} {topic} [train] {num} [volunteer] with [machine].",
      "The {name} {type} {topic} [host] {num} [celebration] with [music] and [lighting].",
      "The {name} {type} {topic} [install] {num} [bell] in the [main] [hall].",
      "The {name} {type} {topic} [complete] a [study] of {num} [tree] along the [river].",
      "The {name} {type} {topic} [measure] {num} [star] with a [telescope].",
      "The {name} {type} {topic} [replace] {num} [floor] with [timber].",
      "The {name} {type} {topic} [approve] a [plan] for {num} [painting].",
  };
  return k;
}

inline constexpr std::array<std::string_view, 12> kEntityTypes = {
    "bridge", "library", "museum",   "observatory", "festival", "hospital",
    "harbor", "school",  "factory",  "park",        "railway",  "theater"};
inline constexpr std::array<std::string_view, 4> kDirections = {"north", "south", "east", "west"};
inline constexpr std::array<std::string_view, 10> kAdjectives = {
    "new", "old", "large", "small", "main", "public", "local", "annual", "free", "first"};

// Per-fact slot values; rendering in any register reuses them.
struct Slots {
  std::string name;
  std::string type;
  std::string person;
  std::string number;
  std::string topic;
  std::string dir;
  std::string adj;
  std::string adj2;
};

// Picks "a" or "an" from the first letter of the following word.
inline std::string fix_articles(const std::string& text) {
  auto is_alpha = [](char c) { return std::isalpha(static_cast<unsigned char>(c)) != 0; };
  std::string out;
  for (std::size_t i = 0; i < text.size();) {
    const bool word_start = is_alpha(text[i]) && (i == 0 || !is_alpha(text[i - 1]));
    std::size_t len = 0;
    if (word_start && (text[i] == 'a' || text[i] == 'A')) {
      if (i + 1 < text.size() && text[i + 1] == ' ') len = 1;
      else if (i + 2 < text.size() && text[i + 1] == 'n' && text[i + 2] == ' ') len = 2;
    }
    if (len == 0) {
      out += text[i++];
      continue;
    }
    const std::size_t next = i + len + 1;
    const char c = next < text.size() ? static_cast<char>(std::tolower(
                                            static_cast<unsigned char>(text[next])))
                                      : 'x';
    out += text[i];
    if (std::string_view("aeiou").find(c) != std::string_view::npos) out += 'n';
    out += ' ';
    i = next;
  }
  return out;
}

inline std::string render_template(std::string_view tmpl, const Slots& s, Register reg) {
  const auto& lex = Lexicon::instance();
  std::string out;
  for (std::size_t i = 0; i < tmpl.size();) {
    const char open = tmpl[i];
    if (open != '{' && open != '[') {
      out += tmpl[i++];
      continue;
    }
    const std::size_t close = tmpl.find(open == '{' ? '}' : ']', i);
    if (close == std::string_view::npos) throw Error("unterminated slot in demo template");
    const std::string key(tmpl.substr(i + 1, close - i - 1));
    i = close + 1;
    if (open == '{') {
      if (key == "name") out += s.name;
      else if (key == "type") out += lex.require_form(s.type, reg);
      else if (key == "person") out += s.person;
      else if (key == "year" || key == "num") out += s.number;
      else if (key == "topic") out += lex.require_form(s.topic, Register::kCommon);
      else throw Error("unknown demo slot {" + key + "}");
    } else {
      const std::string& cls = key == "dir" ? s.dir : key == "adj" ? s.adj
                             : key == "adj2" ? s.adj2 : key;
      out += lex.require_form(cls, reg);
    }
  }
  out = fix_articles(out);
  if (!out.empty()) out[0] = static_cast<char>(std::toupper(static_cast<unsigned char>(out[0])));
  return out;
}

// Pronounceable invented words that collide with nothing in the lexicon or
// the function-word list.
class NameForge {
 public:
  explicit NameForge(std::uint64_t seed) : rng_(seed) {}

  std::string word() {
    static constexpr std::array<std::string_view, 20> kOnset = {
        "b", "d", "f", "g", "k", "l", "m", "n", "p", "r",
        "s", "t", "v", "z", "br", "dr", "gr", "kl", "tr", "st"};
    static constexpr std::array<std::string_view, 8> kVowel = {"a", "e", "i", "o",
                                                               "u", "ai", "ei", "ou"};
    static constexpr std::array<std::string_view, 7> kCoda = {"", "n", "r", "l", "s", "k", "th"};
    const auto& lex = Lexicon::instance();
    for (;;) {
      std::string w;
      const std::size_t syllables = 2 + rng_.below(2);
      for (std::size_t i = 0; i < syllables; ++i) {
        w += kOnset[rng_.below(kOnset.size())];
        w += kVowel[rng_.below(kVowel.size())];
        if (i + 1 == syllables) w += kCoda[rng_.below(kCoda.size())];
      }
      if (w.size() < 4 || stopwords().count(w) || lex.contains_surface(w) ||
          lex.concept_of(w) != stem(w) || !used_.insert(stem(w)).second)
        continue;
      return w;
    }
  }

  std::string person() { return capitalized(word()) + " " + capitalized(word()); }

  static std::string capitalized(std::string w) {
    w[0] = static_cast<char>(std::toupper(static_cast<unsigned char>(w[0])));
    return w;
  }

 private:
  Rng rng_;
  std::set<std::string> used_;
};

template <std::size_t N>
std::string pick(const std::array<std::string_view, N>& a, Rng& rng) {
  return std::string(a[rng.below(N)]);
}

inline std::vector<std::size_t> sample_distinct(std::size_t n, std::size_t k, Rng& rng) {
  std::vector<std::size_t> idx(n);
  for (std::size_t i = 0; i < n; ++i) idx[i] = i;
  for (std::size_t i = 0; i < k; ++i) std::swap(idx[i], idx[i + rng.below(n - i)]);
  idx.resize(k);
  return idx;
}

inline std::vector<AuthorProfile> make_authors(std::size_t n, Rng& rng) {
  static constexpr std::array<std::string_view, 12> kExpertise = {
      "architecture", "civic history", "engineering",  "visual arts",
      "transport",    "medicine",      "education",    "maritime trade",
      "urban planning", "astronomy",   "performing arts", "economics"};
  static constexpr std::array<std::string_view, 3> kFormality = {"formal", "neutral",
                                                                 "conversational"};
  static constexpr std::array<std::string_view, 3> kDensity = {"low", "medium", "high"};
  static constexpr std::array<std::string_view, 4> kNarrative = {"chronological", "analytical",
                                                                 "anecdotal", "summary"};
  static constexpr std::array<std::string_view, 3> kStructure = {"short", "varied", "complex"};
  static constexpr std::array<std::string_view, 2> kVocabulary = {"plain", "elevated"};
  static constexpr std::array<std::string_view, 4> kOrganization = {
      "source-order", "reverse-order", "interleaved", "rotated"};
  static constexpr std::array<std::string_view, 6> kPerspective = {
      "optimistic", "skeptical", "community-focused", "technical", "historical", "neutral"};
  std::vector<AuthorProfile> out;
  for (std::size_t i = 0; i < n; ++i) {
    AuthorProfile a;
    char id[32];
    std::snprintf(id, sizeof id, "author-%03zu", i);
    a.id = id;
    for (auto j : sample_distinct(kExpertise.size(), 2, rng))
      a.expertise.emplace_back(kExpertise[j]);
    a.formality = pick(kFormality, rng);
    a.technical_density = pick(kDensity, rng);
    a.narrative = pick(kNarrative, rng);
    a.sentence_structure = pick(kStructure, rng);
    a.vocabulary = pick(kVocabulary, rng);
    a.organization = pick(kOrganization, rng);
    for (auto j : sample_distinct(kPerspective.size(), 1 + rng.below(2), rng))
      a.perspective.emplace_back(kPerspective[j]);
    out.push_back(std::move(a));
  }
  return out;
}

}  // namespace demo_detail

inline DemoData make_demo(const DemoConfig& cfg = {}) {
  using namespace demo_detail;
  if (cfg.sources == 0 || cfg.authors == 0) throw Error("demo needs sources and authors");
  DemoData d;
  Rng rng(derive_seed(cfg.seed, "demo"));
  NameForge forge(derive_seed(cfg.seed, "names"));
  const auto& cores = core_templates();
  const auto& exts = ext_templates();

  for (std::size_t s = 0; s < cfg.sources; ++s) {
    char sid[32];
    std::snprintf(sid, sizeof sid, "src-%02zu", s);
    SourceRecord rec;
    rec.source_id = sid;
    const std::string name = NameForge::capitalized(forge.word());
    const std::string type(kEntityTypes[rng.below(kEntityTypes.size())]);
    auto fresh = [&](std::string number, std::string topic) {
      Slots sl{name, type, forge.person(), std::move(number), std::move(topic),
               pick(kDirections, rng), pick(kAdjectives, rng), ""};
      do sl.adj2 = pick(kAdjectives, rng); while (sl.adj2 == sl.adj);
      return sl;
    };

    const std::size_t n_core = kMinCoreFacts + rng.below(kMaxCoreFacts - kMinCoreFacts + 1);
    const std::size_t n_ext =
        kMinExtendedFacts + rng.below(kMaxExtendedFacts - kMinExtendedFacts + 1);
    const auto core_idx = sample_distinct(cores.size(), n_core, rng);
    std::vector<Slots> core_slots;
    for (std::size_t c = 0; c < n_core; ++c) {
      const auto& t = cores[core_idx[c]];
      const bool year = t.text.find("{year}") != std::string_view::npos;
      auto sl = fresh(std::to_string(year ? 1850 + rng.below(171) : 2 + rng.below(989)),
                      std::string(t.topic));
      rec.core.push_back({std::string(sid) + "-c" + std::to_string(c),
                          render_template(t.text, sl, Register::kCommon)});
      core_slots.push_back(std::move(sl));
    }

    // Extended facts grouped by the core fact they elaborate.
    const auto ext_idx = sample_distinct(exts.size(), n_ext, rng);
    std::vector<std::pair<std::size_t, std::string>> ext;
    for (std::size_t e = 0; e < n_ext; ++e) {
      const std::size_t parent = rng.below(n_core);
      auto sl = fresh(std::to_string(2 + rng.below(989)), std::string(cores[core_idx[parent]].topic));
      ext.emplace_back(parent, render_template(exts[ext_idx[e]], sl, Register::kCommon));
    }
    std::stable_sort(ext.begin(), ext.end(),
                     [](const auto& a, const auto& b) { return a.first < b.first; });

    std::vector<std::string> paragraphs(n_core);
    for (std::size_t c = 0; c < n_core; ++c) paragraphs[c] = rec.core[c].text;
    for (std::size_t e = 0; e < ext.size(); ++e) {
      const auto id = std::string(sid) + "-e" + std::to_string(e);
      rec.extended.push_back({id, ext[e].second});
      rec.relations.push_back({id, rec.core[ext[e].first].id, RelationKind::kElaborative});
      paragraphs[ext[e].first] += " " + ext[e].second;
    }
    for (std::size_t c = 0; c + 1 < n_core; ++c)
      rec.relations.push_back({rec.core[c].id, rec.core[c + 1].id, RelationKind::kTemporal});

    // Watermark candidates: a core fact restated in rare register and
    // attributed to a new person.
    for (std::size_t c = 0; c < n_core; ++c)
      for (std::size_t k = 0; k < cfg.candidates_per_core; ++k) {
        Slots sl = core_slots[c];
        sl.person = forge.person();
        FactText f{rec.core[c].id + "-w" + std::to_string(k),
                   render_template(cores[core_idx[c]].text, sl, Register::kRare)};
        d.candidate_source[f.id] = sid;
        d.candidates.push_back(std::move(f));
      }

    std::string text;
    for (std::size_t c = 0; c < n_core; ++c) text += (c ? "\n\n" : "") + paragraphs[c];
    d.sources.push_back({sid, text + "\n"});
    d.records.push_back(std::move(rec));
  }
  Rng author_rng(derive_seed(cfg.seed, "authors"));
  d.authors = make_authors(cfg.authors, author_rng);
  return d;
}

inline const std::vector<std::string>& demo_backends() {
  static const std::vector<std::string> k = {"offline-a", "offline-b", "offline-c",
                                             "offline-d"};
  return k;
}

}  // namespace ragmark
