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

// Brute-force reference implementations shared by the unit tests and the
// acceptance runner. Each returns the number of mismatching instances.

#include <algorithm>
#include <bit>
#include <cmath>
#include <string>
#include <utility>
#include <vector>

#include "ragmark/knowledge.hpp"
#include "ragmark/rag_sim.hpp"

namespace ragmark::oracle {

inline Embedding random_unit(std::size_t dim, Rng& rng) {
  Embedding e(dim);
  for (auto& x : e) x = rng.uniform() * 2 - 1;
  l2_normalize(e);
  return e;
}

// Cosine ranking by full sort, ties broken by id.
inline std::size_t retrieval_mismatches(std::uint64_t seed, int instances,
                                        std::size_t max_docs = 1000) {
  Rng rng(seed);
  std::size_t bad = 0;
  for (int inst = 0; inst < instances; ++inst) {
    const std::size_t n = 1 + rng.below(max_docs), dim = 2 + rng.below(30);
    const std::size_t k = 1 + rng.below(std::min<std::size_t>(n, 20));
    RetrievalIndex idx;
    std::vector<std::pair<std::string, Embedding>> docs;
    for (std::size_t i = 0; i < n; ++i) {
      // Coarse coordinates force exact score ties now and then.
      Embedding e(dim);
      for (auto& x : e) x = static_cast<double>(rng.below(3)) - 1.0;
      if (std::all_of(e.begin(), e.end(), [](double x) { return x == 0.0; })) e[0] = 1.0;
      l2_normalize(e);
      docs.emplace_back("doc" + std::to_string(rng.below(1u << 30)) + "-" + std::to_string(i), e);
      idx.add(docs.back().first, docs.back().second);
    }
    const auto q = random_unit(dim, rng);
    std::vector<std::pair<double, std::string>> all;
    for (const auto& [id, e] : docs) {
      double s = 0, na = 0, nb = 0;
      for (std::size_t j = 0; j < dim; ++j) {
        s += e[j] * q[j];
        na += e[j] * e[j];
        nb += q[j] * q[j];
      }
      all.emplace_back(s / std::sqrt(na * nb), id);
    }
    std::sort(all.begin(), all.end(), [](const auto& a, const auto& b) {
      return std::abs(a.first - b.first) > 1e-12 ? a.first > b.first : a.second < b.second;
    });
    const auto hits = idx.retrieve(q, k);
    bool ok = hits.size() == k;
    for (std::size_t i = 0; ok && i < k; ++i)
      ok = hits[i].id == all[i].second && std::abs(hits[i].score - all[i].first) <= 1e-12;
    bad += ok ? 0 : 1;
  }
  return bad;
}

// Selection objective written out independently of the library scorer.
inline double selection_objective(const std::vector<const Fact*>& w, const Embedding& c) {
  double coh = 0;
  for (const Fact* f : w) coh += dot(f->embedding, c);
  coh /= static_cast<double>(w.size());
  double mx = -1;
  for (std::size_t i = 0; i < w.size(); ++i)
    for (std::size_t j = i + 1; j < w.size(); ++j)
      mx = std::max(mx, dot(w[i]->embedding, w[j]->embedding));
  return coh + (w.size() < 2 ? 1.0 : 1.0 - mx);
}

// Every m-subset of up to 12 candidates, enumerated by bitmask.
inline std::size_t selection_mismatches(std::uint64_t seed, int instances) {
  Rng rng(seed);
  const CentroidScorer scorer;
  std::size_t bad = 0;
  for (int inst = 0; inst < instances; ++inst) {
    const std::size_t n = 3 + rng.below(10), dim = 2 + rng.below(7);
    const std::size_t m = 1 + rng.below(std::min<std::size_t>(3, n));
    std::vector<Fact> fs;
    for (std::size_t i = 0; i < n; ++i) {
      Embedding e(dim);
      for (auto& x : e) x = rng.uniform() * 2 - 1;
      l2_normalize(e);
      fs.push_back(Fact{"f" + std::to_string(100 + i), "text", std::move(e),
                        FactKind::kWatermark, "src"});
    }
    Embedding c(dim);
    for (auto& x : c) x = rng.uniform() * 2 - 1;
    l2_normalize(c);
    std::vector<const Fact*> cands;
    for (auto& f : fs) cands.push_back(&f);
    std::reverse(cands.begin(), cands.end());  // input order must not matter

    double best = -1e300;
    for (std::uint32_t mask = 0; mask < (1u << n); ++mask) {
      if (static_cast<std::size_t>(std::popcount(mask)) != m) continue;
      std::vector<const Fact*> w;
      for (std::size_t i = 0; i < n; ++i)
        if (mask >> i & 1u) w.push_back(&fs[i]);
      best = std::max(best, selection_objective(w, c));
    }
    const auto sel = select_watermarks("d", c, cands, m, scorer);
    const bool ok = sel.chosen.size() == m && std::abs(sel.objective() - best) <= 1e-12;
    bad += ok ? 0 : 1;
  }
  return bad;
}

}  // namespace ragmark::oracle
