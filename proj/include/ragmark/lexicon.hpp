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

// Synonym classes. Every surface form of a class maps to the class's first
// form, so paraphrases land on the same embedding features. Forms are listed
// as {common, variant, rare}.

#include <array>
#include <optional>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "ragmark/core.hpp"
#include "ragmark/text.hpp"

namespace ragmark {

struct SynonymClass {
  std::string_view key;
  std::array<std::string_view, 3> forms;
};

enum class Register { kCommon = 0, kVariant = 1, kRare = 2 };

inline const std::vector<SynonymClass>& synonym_classes() {
  static const std::vector<SynonymClass> kClasses = {
      // entity kinds
      {"bridge", {"bridge", "span", "viaduct"}},
      {"library", {"library", "archive", "bibliotheca"}},
      {"museum", {"museum", "gallery", "exhibitory"}},
      {"observatory", {"observatory", "skywatch", "stargazery"}},
      {"festival", {"festival", "fair", "jamboree"}},
      {"hospital", {"hospital", "clinic", "infirmary"}},
      {"harbor", {"harbor", "port", "haven"}},
      {"school", {"school", "academy", "lyceum"}},
      {"factory", {"factory", "plant", "manufactory"}},
      {"park", {"park", "garden", "greensward"}},
      {"railway", {"railway", "rail-line", "tramway"}},
      {"theater", {"theater", "playhouse", "auditorium"}},
      // actions
      {"open", {"opened", "launched", "inaugurated"}},
      {"build", {"built", "constructed", "erected"}},
      {"expand", {"expanded", "enlarged", "broadened"}},
      {"repair", {"repaired", "restored", "refurbished"}},
      {"fund", {"funded", "financed", "bankrolled"}},
      {"close", {"closed", "shut", "suspended"}},
      {"host", {"hosted", "held", "convened"}},
      {"hire", {"hired", "recruited", "enlisted"}},
      {"approve", {"approved", "authorized", "sanctioned"}},
      {"complete", {"completed", "finished", "concluded"}},
      {"install", {"installed", "fitted", "emplaced"}},
      {"replace", {"replaced", "substituted", "supplanted"}},
      {"donate", {"donated", "gifted", "bequeathed"}},
      {"attract", {"attracted", "drew", "lured"}},
      {"celebrate", {"celebrated", "marked", "commemorated"}},
      {"damage", {"damaged", "harmed", "impaired"}},
      {"survive", {"survived", "endured", "weathered"}},
      {"design", {"designed", "drafted", "conceived"}},
      {"lead", {"led", "headed", "spearheaded"}},
      {"discover", {"discovered", "found", "unearthed"}},
      {"measure", {"measured", "gauged", "quantified"}},
      {"move", {"moved", "relocated", "transplanted"}},
      {"add", {"added", "included", "appended"}},
      {"reduce", {"reduced", "cut", "curtailed"}},
      {"increase", {"increased", "raised", "augmented"}},
      {"welcome", {"welcomed", "greeted", "received"}},
      {"train", {"trained", "coached", "tutored"}},
      // qualities
      {"north", {"northern", "north-side", "boreal"}},
      {"south", {"southern", "south-side", "austral"}},
      {"east", {"eastern", "east-side", "easterly"}},
      {"west", {"western", "west-side", "occidental"}},
      {"new", {"new", "modern", "newfangled"}},
      {"old", {"old", "historic", "venerable"}},
      {"large", {"large", "big", "sizable"}},
      {"small", {"small", "modest", "diminutive"}},
      {"local", {"local", "regional", "parochial"}},
      {"annual", {"annual", "yearly", "perennial"}},
      {"main", {"main", "central", "principal"}},
      {"public", {"public", "civic", "communal"}},
      {"free", {"free", "complimentary", "gratis"}},
      {"first", {"first", "initial", "maiden"}},
      // things
      {"wing", {"wing", "annex", "extension"}},
      {"roof", {"roof", "rooftop", "overhang"}},
      {"entrance", {"entrance", "gateway", "portal"}},
      {"hall", {"hall", "chamber", "salon"}},
      {"budget", {"budget", "funding", "allocation"}},
      {"visitor", {"visitors", "guests", "sightseers"}},
      {"worker", {"workers", "staff", "laborers"}},
      {"council", {"council", "board", "assembly"}},
      {"mayor", {"mayor", "governor", "magistrate"}},
      {"engineer", {"engineer", "builder", "artificer"}},
      {"architect", {"architect", "designer", "draftsman"}},
      {"committee", {"committee", "panel", "commission"}},
      {"storm", {"storm", "tempest", "gale"}},
      {"flood", {"flood", "inundation", "deluge"}},
      {"fire", {"fire", "blaze", "conflagration"}},
      {"celebration", {"celebration", "ceremony", "gala"}},
      {"exhibit", {"exhibit", "display", "showcase"}},
      {"collection", {"collection", "holdings", "trove"}},
      {"telescope", {"telescope", "lens", "spyglass"}},
      {"lighting", {"lighting", "lamps", "luminaires"}},
      {"seating", {"benches", "seating", "pews"}},
      {"tower", {"tower", "spire", "turret"}},
      {"courtyard", {"courtyard", "patio", "quadrangle"}},
      {"stone", {"stone", "masonry", "ashlar"}},
      {"steel", {"steel", "iron", "alloy"}},
      {"timber", {"timber", "wood", "joinery"}},
      {"glass", {"glass", "glazing", "crystal"}},
      {"student", {"students", "pupils", "scholars"}},
      {"volunteer", {"volunteers", "helpers", "auxiliaries"}},
      {"donor", {"donors", "benefactors", "philanthropists"}},
      {"support", {"support", "backing", "patronage"}},
      {"attendance", {"attendance", "turnout", "footfall"}},
      {"award", {"award", "prize", "accolade"}},
      {"survey", {"survey", "inspection", "audit"}},
      {"study", {"study", "review", "appraisal"}},
      {"plan", {"plan", "scheme", "blueprint"}},
      {"road", {"road", "street", "thoroughfare"}},
      {"river", {"river", "stream", "watercourse"}},
      {"lake", {"lake", "reservoir", "mere"}},
      {"ticket", {"tickets", "passes", "admissions"}},
      {"price", {"price", "fee", "tariff"}},
      {"market", {"market", "bazaar", "emporium"}},
      {"music", {"music", "melodies", "minstrelsy"}},
      {"painting", {"paintings", "pictures", "canvases"}},
      {"sculpture", {"sculptures", "statues", "figurines"}},
      {"carriage", {"trains", "carriages", "locomotives"}},
      {"station", {"station", "depot", "terminus"}},
      {"track", {"tracks", "rails", "trackage"}},
      {"patient", {"patients", "sufferers", "convalescents"}},
      {"doctor", {"doctors", "physicians", "clinicians"}},
      {"nurse", {"nurses", "caregivers", "attendants"}},
      {"ward", {"ward", "unit", "pavilion"}},
      {"ship", {"ships", "vessels", "schooners"}},
      {"dock", {"dock", "pier", "quay"}},
      {"crane", {"cranes", "hoists", "derricks"}},
      {"cargo", {"cargo", "freight", "lading"}},
      {"teacher", {"teachers", "instructors", "tutors"}},
      {"course", {"courses", "classes", "curricula"}},
      {"lab", {"laboratory", "lab", "workroom"}},
      {"machine", {"machines", "equipment", "apparatus"}},
      {"product", {"products", "goods", "wares"}},
      {"path", {"paths", "trails", "walkways"}},
      {"tree", {"trees", "groves", "arbors"}},
      {"stage", {"stage", "platform", "proscenium"}},
      {"actor", {"actors", "performers", "thespians"}},
      {"season", {"season", "series", "repertory"}},
      {"star", {"stars", "constellations", "luminaries"}},
      {"dome", {"dome", "cupola", "vault"}},
      {"ton", {"tons", "tonnes", "hundredweights"}},
      {"meter", {"meters", "metres", "yards"}},
      {"dollar", {"dollars", "bucks", "greenbacks"}},
      {"book", {"books", "volumes", "tomes"}},
      {"map", {"maps", "charts", "atlases"}},
      {"bell", {"bell", "chime", "carillon"}},
      {"clock", {"clock", "timepiece", "horologe"}},
      {"window", {"windows", "panes", "casements"}},
      {"floor", {"floors", "storeys", "levels"}},
      {"room", {"rooms", "spaces", "quarters"}},
  };
  return kClasses;
}

// Surface form (and its stem) -> class key.
class Lexicon {
 public:
  Lexicon() {
    const auto& classes = synonym_classes();
    for (std::size_t i = 0; i < classes.size(); ++i) {
      if (!by_key_.emplace(std::string(classes[i].key), i).second)
        continue;  // a key may be reused by a second class; the first wins
      for (auto f : classes[i].forms) {
        surface_.emplace(std::string(f), std::string(classes[i].key));
        stemmed_.emplace(stem(f), std::string(classes[i].key));
      }
    }
  }

  static const Lexicon& instance() {
    static const Lexicon kLexicon;
    return kLexicon;
  }

  // Canonical concept for a lowercase word: its class key when listed,
  // otherwise the stem.
  std::string concept_of(std::string_view word) const {
    if (auto it = surface_.find(std::string(word)); it != surface_.end()) return it->second;
    std::string s = stem(word);
    if (auto it = stemmed_.find(s); it != stemmed_.end()) return it->second;
    return s;
  }

  std::optional<std::string_view> form(std::string_view key, Register r) const {
    auto it = by_key_.find(std::string(key));
    if (it == by_key_.end()) return std::nullopt;
    return synonym_classes()[it->second].forms[static_cast<std::size_t>(r)];
  }

  std::string_view require_form(std::string_view key, Register r) const {
    auto f = form(key, r);
    if (!f) throw Error("unknown synonym class: " + std::string(key));
    return *f;
  }

  bool contains_surface(std::string_view word) const {
    return surface_.count(std::string(word)) > 0;
  }

 private:
  std::unordered_map<std::string, std::size_t> by_key_;
  std::unordered_map<std::string, std::string> surface_;
  std::unordered_map<std::string, std::string> stemmed_;
};

}  // namespace ragmark
