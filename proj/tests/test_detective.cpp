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

#include <gtest/gtest.h>

#include <cmath>

#include "ragmark/detective.hpp"
#include "ragmark/stats.hpp"

namespace ragmark {
namespace {

EvidenceLedger ledger_of(std::size_t n, std::size_t answered, std::size_t green = 0,
                         std::size_t scored = 0) {
  EvidenceLedger l;
  for (std::size_t i = 0; i < n; ++i)
    l.append({i < answered, i == 0 ? green : 0, i == 0 ? scored : 0});
  return l;
}

TEST(Stats, NormalQuantileInvertsCdf) {
  for (double p : {1e-6, 0.005, 0.025, 0.3, 0.5, 0.8, 0.995}) {
    EXPECT_NEAR(stats::normal_cdf(stats::normal_quantile(p)), p, 1e-12 + 1e-9 * p);
  }
  EXPECT_NEAR(stats::z_alpha(0.005), 2.5758293035489, 1e-9);
  EXPECT_NEAR(stats::z_alpha(0.05), 1.6448536269515, 1e-9);
}

TEST(FactScore, Ratio) {
  EXPECT_DOUBLE_EQ(fact_score(ledger_of(10, 9)), 0.9);
  EXPECT_DOUBLE_EQ(fact_score(ledger_of(7, 0)), 0.0);
  EXPECT_THROW(fact_score(EvidenceLedger{}), Error);
}

TEST(FactThreshold, InverseNormalOracle) {
  EXPECT_NEAR(fact_threshold(0.5, 100, 0.005), 0.6288, 1e-3);
  EXPECT_NEAR(fact_threshold(0.3, 100000000, 0.005), 0.3, 1e-3);
  EXPECT_NEAR(fact_threshold(0.4, 50, 0.5), 0.4, 1e-12);
  EXPECT_THROW(fact_threshold(0.0, 10, 0.005), Error);
  EXPECT_THROW(fact_threshold(0.5, 0, 0.005), Error);
}

TEST(TokenZ, ArithmeticOracle) {
  EXPECT_NEAR(token_z(600, 1000, 0.5), 6.325, 1e-2);
  EXPECT_DOUBLE_EQ(token_z(250, 1000, 0.25), 0.0);
  EXPECT_THROW(token_z(3, 10, 0.25), Error);
  EXPECT_THROW(token_z(300, 1000, 1.0), Error);
}

TEST(Decide, FactLayerAloneSuffices) {
  DetectionParams p;
  p.p0 = 0.5;
  p.z_override = 3.48;
  p.gamma_null = 0.5;
  // 90 of 100 answered; 1050 green of 2000 gives Z ~ 2.2 < 3.48.
  const auto l = ledger_of(100, 90, 1050, 2000);
  const auto r = decide(l, p);
  EXPECT_GT(*r.s_fact, r.tau_fact);
  EXPECT_NEAR(r.tau_fact, 0.5 + 3.48 * 0.05, 1e-12);
  EXPECT_LT(*r.z_token, 3.48);
  EXPECT_TRUE(r.fact_reject);
  EXPECT_FALSE(r.token_reject);
  EXPECT_EQ(r.verdict, Verdict::kTheft);
}

TEST(Decide, TokenLayerAloneSuffices) {
  DetectionParams p;
  p.p0 = 0.5;
  const auto r = decide(ledger_of(100, 40, 600, 1000), p);
  EXPECT_FALSE(r.fact_reject);
  EXPECT_TRUE(r.token_reject);
  EXPECT_EQ(r.verdict, Verdict::kTheft);
}

TEST(Decide, BothBelowIsInnocent) {
  DetectionParams p;
  p.p0 = 0.5;
  const auto r = decide(ledger_of(100, 50, 260, 1000), p);
  EXPECT_EQ(r.verdict, Verdict::kInnocent);
  EXPECT_FALSE(r.low_confidence);
}

TEST(Decide, InsufficientEvidenceIsLowConfidenceInnocent) {
  DetectionParams p;
  p.p0 = 0.1;
  const auto r = decide(ledger_of(5, 5, 20, 20), p);
  EXPECT_FALSE(r.fact_sufficient);
  EXPECT_FALSE(r.token_sufficient);
  EXPECT_TRUE(r.low_confidence);
  EXPECT_EQ(r.verdict, Verdict::kInnocent);
}

TEST(Decide, ReportRoundTrips) {
  DetectionParams p;
  p.p0 = 0.3;
  const auto r = decide(ledger_of(40, 30, 400, 900), p);
  const auto back = detection_report_from_json(nlohmann::json::parse(to_json(r).dump()));
  EXPECT_EQ(back, r);
}

TEST(CalibrateP0, PoolsAndClamps) {
  const auto a = ledger_of(100, 53);
  EXPECT_DOUBLE_EQ(calibrate_p0(std::span(&a, 1)), 0.53);
  const auto z = ledger_of(100, 0);
  EXPECT_DOUBLE_EQ(calibrate_p0(std::span(&z, 1)), 0.05);
  const std::vector<EvidenceLedger> two{ledger_of(100, 50), ledger_of(100, 60)};
  EXPECT_DOUBLE_EQ(calibrate_p0(two), 0.55);
}

TEST(Ledger, RejectsInconsistentRecord) {
  EvidenceLedger l;
  EXPECT_THROW(l.append({true, 5, 4}), Error);
}

}  // namespace
}  // namespace ragmark
