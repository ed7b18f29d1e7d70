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

// Evidence accumulation and the two one-sided tests. The fact layer tests the
// answered-rate against a binomial null with rate p0; the token layer tests
// the green fraction against gamma_null. Theft is declared when either test
// rejects.

#include <algorithm>
#include <cmath>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "json.hpp"
#include "ragmark/core.hpp"
#include "ragmark/stats.hpp"

namespace ragmark {

struct EvidenceRecord {
  bool answered = false;
  std::size_t green = 0;
  std::size_t scored = 0;
  bool operator==(const EvidenceRecord&) const = default;
};

// Append-only; single writer. Totals are re-verified on every append.
class EvidenceLedger {
 public:
  void append(const EvidenceRecord& r) {
    if (r.green > r.scored) throw Error("evidence record has green > scored");
    records_.push_back(r);
    answered_ += r.answered ? 1 : 0;
    green_ += r.green;
    scored_ += r.scored;
    check_totals();
  }

  std::size_t n() const { return records_.size(); }
  std::size_t answered() const { return answered_; }
  std::size_t green() const { return green_; }
  std::size_t scored() const { return scored_; }
  const std::vector<EvidenceRecord>& records() const { return records_; }

 private:
  void check_totals() const {
    // Cheap incremental check: the last append must be reflected exactly.
    std::size_t a = 0, g = 0, s = 0;
    if (records_.size() <= 64 || records_.size() % 64 == 0) {
      for (const auto& r : records_) {
        a += r.answered ? 1 : 0;
        g += r.green;
        s += r.scored;
      }
      if (a != answered_ || g != green_ || s != scored_)
        throw Error("evidence ledger totals diverged from records");
    }
  }

  std::vector<EvidenceRecord> records_;
  std::size_t answered_ = 0;
  std::size_t green_ = 0;
  std::size_t scored_ = 0;
};

inline double fact_score(const EvidenceLedger& ledger) {
  if (ledger.n() == 0) throw Error("no evidence");
  return static_cast<double>(ledger.answered()) / static_cast<double>(ledger.n());
}

inline double fact_threshold(double p0, std::size_t n, double alpha) {
  if (!(p0 > 0.0 && p0 < 1.0)) throw Error("p0 must lie in (0, 1)");
  if (n < 1) throw Error("n must be >= 1");
  const double z = stats::z_alpha(alpha);
  return p0 + z * std::sqrt(p0 * (1.0 - p0) / static_cast<double>(n));
}

inline constexpr std::size_t kMinScoredTokens = 30;
inline constexpr std::size_t kMinQueries = 10;

inline double token_z(std::size_t green, std::size_t scored, double gamma_null) {
  if (scored < kMinScoredTokens) throw Error("insufficient evidence");
  if (!(gamma_null > 0.0 && gamma_null < 1.0))
    throw Error("gamma_null must lie in (0, 1)");
  const double t = static_cast<double>(scored);
  const double s = static_cast<double>(green) / t;
  return (s - gamma_null) / std::sqrt(gamma_null * (1.0 - gamma_null) / t);
}

inline double token_z(const EvidenceLedger& ledger, double gamma_null) {
  return token_z(ledger.green(), ledger.scored(), gamma_null);
}

// Pooled answered-rate over clean runs, clamped to [0.05, 0.95].
inline double calibrate_p0(std::span<const EvidenceLedger> clean_runs) {
  std::size_t a = 0, n = 0;
  for (const auto& l : clean_runs) {
    a += l.answered();
    n += l.n();
  }
  const double p = n ? static_cast<double>(a) / static_cast<double>(n) : 0.0;
  return std::clamp(p, 0.05, 0.95);
}

struct DetectionParams {
  double alpha = 0.005;
  double p0 = 0.5;
  double gamma_null = 0.25;
  std::optional<double> z_override;
  std::size_t min_queries = kMinQueries;
  std::size_t min_tokens = kMinScoredTokens;
};

enum class Verdict { kInnocent, kTheft };

inline const char* to_string(Verdict v) {
  return v == Verdict::kTheft ? "theft" : "innocent";
}

struct DetectionReport {
  std::optional<double> s_fact;
  double tau_fact = 0.0;
  std::optional<double> s_token;
  std::optional<double> z_token;
  double z_alpha = 0.0;
  double alpha = 0.0;
  double p0 = 0.0;
  double gamma_null = 0.0;
  std::size_t n = 0;
  std::size_t answered = 0;
  std::size_t green_tokens = 0;
  std::size_t total_tokens = 0;
  bool fact_sufficient = false;
  bool token_sufficient = false;
  bool fact_reject = false;
  bool token_reject = false;
  bool low_confidence = false;
  Verdict verdict = Verdict::kInnocent;
  // Simulator context echoed for reproducibility; absent for live runs.
  std::optional<double> attenuation;

  bool operator==(const DetectionReport&) const = default;
};

// Either layer may be short of evidence; a short layer never rejects.
inline DetectionReport decide(const EvidenceLedger& ledger,
                              const DetectionParams& params) {
  DetectionReport r;
  r.alpha = params.alpha;
  r.p0 = params.p0;
  r.gamma_null = params.gamma_null;
  r.z_alpha = params.z_override ? *params.z_override : stats::z_alpha(params.alpha);
  r.n = ledger.n();
  r.answered = ledger.answered();
  r.green_tokens = ledger.green();
  r.total_tokens = ledger.scored();

  r.fact_sufficient = ledger.n() >= std::max<std::size_t>(params.min_queries, 1);
  if (ledger.n() > 0) {
    r.s_fact = fact_score(ledger);
    const double z = r.z_alpha;
    r.tau_fact = params.p0 + z * std::sqrt(params.p0 * (1.0 - params.p0) /
                                           static_cast<double>(ledger.n()));
  } else {
    r.tau_fact = params.p0;
  }
  r.fact_reject = r.fact_sufficient && *r.s_fact > r.tau_fact;

  r.token_sufficient =
      ledger.scored() >= std::max(params.min_tokens, kMinScoredTokens) &&
      ledger.n() >= params.min_queries;
  if (ledger.scored() > 0)
    r.s_token = static_cast<double>(ledger.green()) / static_cast<double>(ledger.scored());
  if (ledger.scored() >= kMinScoredTokens)
    r.z_token = token_z(ledger, params.gamma_null);
  r.token_reject = r.token_sufficient && *r.z_token > r.z_alpha;

  r.low_confidence = !r.fact_sufficient && !r.token_sufficient;
  r.verdict = (r.fact_reject || r.token_reject) ? Verdict::kTheft : Verdict::kInnocent;
  return r;
}

inline nlohmann::ordered_json to_json(const DetectionReport& r) {
  auto opt = [](const std::optional<double>& x) -> nlohmann::ordered_json {
    return x ? nlohmann::ordered_json(*x) : nlohmann::ordered_json(nullptr);
  };
  nlohmann::ordered_json j;
  j["verdict"] = to_string(r.verdict);
  j["s_fact"] = opt(r.s_fact);
  j["tau_fact"] = r.tau_fact;
  j["s_token"] = opt(r.s_token);
  j["z_token"] = opt(r.z_token);
  j["z_alpha"] = r.z_alpha;
  j["alpha"] = r.alpha;
  j["p0"] = r.p0;
  j["gamma_null"] = r.gamma_null;
  j["n"] = r.n;
  j["answered"] = r.answered;
  j["green_tokens"] = r.green_tokens;
  j["total_tokens"] = r.total_tokens;
  j["fact_verdict"] = r.fact_reject ? "theft" : "innocent";
  j["token_verdict"] = r.token_reject ? "theft" : "innocent";
  j["fact_sufficient"] = r.fact_sufficient;
  j["token_sufficient"] = r.token_sufficient;
  j["low_confidence"] = r.low_confidence;
  j["attenuation"] = opt(r.attenuation);
  return j;
}

inline DetectionReport detection_report_from_json(const nlohmann::json& j) {
  auto opt = [&](const char* k) -> std::optional<double> {
    if (!j.contains(k) || j.at(k).is_null()) return std::nullopt;
    return j.at(k).get<double>();
  };
  DetectionReport r;
  r.verdict = j.at("verdict").get<std::string>() == "theft" ? Verdict::kTheft
                                                            : Verdict::kInnocent;
  r.s_fact = opt("s_fact");
  r.tau_fact = j.at("tau_fact").get<double>();
  r.s_token = opt("s_token");
  r.z_token = opt("z_token");
  r.z_alpha = j.at("z_alpha").get<double>();
  r.alpha = j.at("alpha").get<double>();
  r.p0 = j.at("p0").get<double>();
  r.gamma_null = j.at("gamma_null").get<double>();
  r.n = j.at("n").get<std::size_t>();
  r.answered = j.at("answered").get<std::size_t>();
  r.green_tokens = j.at("green_tokens").get<std::size_t>();
  r.total_tokens = j.at("total_tokens").get<std::size_t>();
  r.fact_reject = j.at("fact_verdict").get<std::string>() == "theft";
  r.token_reject = j.at("token_verdict").get<std::string>() == "theft";
  r.fact_sufficient = j.at("fact_sufficient").get<bool>();
  r.token_sufficient = j.at("token_sufficient").get<bool>();
  r.low_confidence = j.at("low_confidence").get<bool>();
  r.attenuation = opt("attenuation");
  return r;
}

}  // namespace ragmark
