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

// File formats: JSONL collections, JSON reports, CSV curves and the run
// configuration.

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "json.hpp"
#include "ragmark/corpus.hpp"
#include "ragmark/detective.hpp"
#include "ragmark/document.hpp"
#include "ragmark/interrogator.hpp"
#include "ragmark/knowledge.hpp"
#include "ragmark/pipeline.hpp"
#include "ragmark/rag_sim.hpp"
#include "ragmark/token_model.hpp"

namespace ragmark {

namespace fs = std::filesystem;

inline std::string read_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

inline void write_file(const fs::path& path, std::string_view content) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write " + path.string());
  out << content;
  if (!out) throw Error("write failed for " + path.string());
}

inline std::vector<nlohmann::json> read_jsonl(const fs::path& path) {
  std::vector<nlohmann::json> out;
  std::istringstream in(read_file(path));
  std::string line;
  std::size_t n = 0;
  while (std::getline(in, line)) {
    ++n;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    try {
      out.push_back(nlohmann::json::parse(line));
    } catch (const std::exception& e) {
      throw Error(path.string() + ":" + std::to_string(n) + ": " + e.what());
    }
  }
  return out;
}

template <class T>
std::string to_jsonl_string(const std::vector<T>& items) {
  std::string s;
  for (const auto& x : items) s += to_json(x).dump() + "\n";
  return s;
}

inline std::string jsonl_string(const std::vector<nlohmann::ordered_json>& lines) {
  std::string s;
  for (const auto& j : lines) s += j.dump() + "\n";
  return s;
}

template <class T, class F>
std::vector<T> load_jsonl(const fs::path& path, F&& parse) {
  std::vector<T> out;
  for (const auto& j : read_jsonl(path)) out.push_back(parse(j));
  return out;
}

inline std::vector<Document> load_corpus(const fs::path& p) {
  return load_jsonl<Document>(p, document_from_json);
}
inline std::vector<SourceDocument> load_sources(const fs::path& p) {
  return load_jsonl<SourceDocument>(p, source_from_json);
}
inline std::vector<SourceRecord> load_records(const fs::path& p) {
  return load_jsonl<SourceRecord>(p, source_record_from_json);
}
inline std::vector<AuthorProfile> load_authors(const fs::path& p) {
  return load_jsonl<AuthorProfile>(p, author_from_json);
}
inline std::vector<Query> load_queries(const fs::path& p) {
  return load_jsonl<Query>(p, query_from_json);
}
inline std::vector<ProbeResponse> load_responses(const fs::path& p) {
  return load_jsonl<ProbeResponse>(p, probe_response_from_json);
}
inline KnowledgeBase load_knowledge_base(const fs::path& p) {
  return knowledge_base_from_jsonl(read_jsonl(p));
}

inline nlohmann::ordered_json to_json(const WatermarkSelection& s) {
  nlohmann::ordered_json j;
  j["document_id"] = s.document_id;
  j["chosen"] = s.chosen;
  j["coherence"] = s.coherence;
  j["distinctiveness"] = s.distinctiveness;
  return j;
}

inline WatermarkSelection selection_from_json(const nlohmann::json& j) {
  return {j.at("document_id").get<std::string>(), j.at("chosen").get<std::vector<std::string>>(),
          j.value("coherence", 0.0), j.value("distinctiveness", 0.0)};
}

inline std::string dump_json(const nlohmann::ordered_json& j) { return j.dump(2) + "\n"; }

// Fixed-precision numbers keep CSV output byte-stable.
inline std::string fmt(double x, int digits = 6) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", digits, x);
  return buf;
}

inline std::string curve_csv(const std::vector<CurvePoint>& curve) {
  std::string s = "n,s_fact,z_token\n";
  for (const auto& p : curve)
    s += std::to_string(p.n) + "," + fmt(p.s_fact) + "," +
         (p.z_token ? fmt(*p.z_token) : std::string()) + "\n";
  return s;
}

inline std::string sweep_csv(const std::vector<SweepRow>& rows) {
  std::string s = "delta,accuracy,green_fraction,mean_z,trials\n";
  for (const auto& r : rows)
    s += fmt(r.delta, 3) + "," + fmt(r.accuracy) + "," + fmt(r.green_fraction) + "," +
         fmt(r.mean_z) + "," + std::to_string(r.trials) + "\n";
  return s;
}

inline nlohmann::ordered_json to_json(const LanguageModel& lm) {
  return {{"vocab", to_json(lm.vocab)}, {"model", to_json(lm.model)}};
}

inline LanguageModel language_model_from_json(const nlohmann::json& j) {
  return language_model_from(vocabulary_from_json(j.at("vocab")), ngram_from_json(j.at("model")));
}

inline LanguageModel load_language_model(const fs::path& p) {
  return language_model_from_json(nlohmann::json::parse(read_file(p)));
}

// ---------------------------------------------------------------------------
// Run configuration

struct RunPaths {
  std::string corpus;
  std::string knowledge_base;
  std::string queries;
  std::string report;
  std::string model;  // language model JSON (vocabulary + n-gram counts)
  std::string curve;
};

struct RunConfig {
  RunPaths paths;
  WatermarkConfig watermark;
  RagConfig rag;
  DetectionParams detection;
  bool calibrate_p0 = true;  // ignore detection.p0 and measure it
  std::size_t calibration_runs = 3;
  std::string backend = "offline";
  std::uint64_t seed = 1;
  std::size_t n_queries = 200;

  void validate() const {
    watermark.partition.validate();
    rag.validate();
    if (!(detection.alpha > 0.0 && detection.alpha <= 0.5))
      throw Error("alpha must lie in (0, 0.5]");
    if (!(detection.gamma_null > 0.0 && detection.gamma_null < 1.0))
      throw Error("gamma_null must lie in (0, 1)");
    if (!calibrate_p0 && !(detection.p0 > 0.0 && detection.p0 < 1.0))
      throw Error("p0 must lie in (0, 1)");
    if (backend != "offline" && backend != "http")
      throw Error("backend must be 'offline' or 'http', got '" + backend + "'");
  }

  // Input paths that are set must exist.
  void check_inputs(std::initializer_list<const std::string*> inputs) const {
    for (const auto* p : inputs)
      if (p && !p->empty() && !fs::exists(*p)) throw Error("missing input: " + *p);
  }
};

inline nlohmann::ordered_json to_json(const RunConfig& c) {
  nlohmann::ordered_json j;
  j["paths"] = {{"corpus", c.paths.corpus},   {"knowledge_base", c.paths.knowledge_base},
                {"queries", c.paths.queries}, {"report", c.paths.report},
                {"model", c.paths.model},     {"curve", c.paths.curve}};
  j["watermark"] = to_json(c.watermark);
  j["rag"] = to_json(c.rag);
  nlohmann::ordered_json d;
  d["alpha"] = c.detection.alpha;
  d["p0"] = c.calibrate_p0 ? nlohmann::ordered_json("calibrate")
                           : nlohmann::ordered_json(c.detection.p0);
  d["calibration_runs"] = c.calibration_runs;
  d["gamma_null"] = c.detection.gamma_null;
  d["z_override"] = c.detection.z_override ? nlohmann::ordered_json(*c.detection.z_override)
                                           : nlohmann::ordered_json(nullptr);
  d["min_queries"] = c.detection.min_queries;
  d["min_tokens"] = c.detection.min_tokens;
  j["detection"] = d;
  j["backend"] = c.backend;
  j["seed"] = c.seed;
  j["n_queries"] = c.n_queries;
  return j;
}

inline RunConfig run_config_from_json(const nlohmann::json& j) {
  RunConfig c;
  if (j.contains("paths")) {
    const auto& p = j.at("paths");
    c.paths.corpus = p.value("corpus", "");
    c.paths.knowledge_base = p.value("knowledge_base", "");
    c.paths.queries = p.value("queries", "");
    c.paths.report = p.value("report", "");
    c.paths.model = p.value("model", "");
    c.paths.curve = p.value("curve", "");
  }
  if (j.contains("watermark")) c.watermark = watermark_config_from_json(j.at("watermark"));
  if (j.contains("rag")) c.rag = rag_config_from_json(j.at("rag"));
  if (j.contains("detection")) {
    const auto& d = j.at("detection");
    c.detection.alpha = d.value("alpha", c.detection.alpha);
    if (d.contains("p0")) {
      if (d.at("p0").is_string()) {
        if (d.at("p0").get<std::string>() != "calibrate")
          throw Error("detection.p0 must be a number or \"calibrate\"");
        c.calibrate_p0 = true;
      } else {
        c.calibrate_p0 = false;
        c.detection.p0 = d.at("p0").get<double>();
      }
    }
    c.calibration_runs = d.value("calibration_runs", c.calibration_runs);
    c.detection.gamma_null = d.value("gamma_null", c.detection.gamma_null);
    if (d.contains("z_override") && !d.at("z_override").is_null())
      c.detection.z_override = d.at("z_override").get<double>();
    c.detection.min_queries = d.value("min_queries", c.detection.min_queries);
    c.detection.min_tokens = d.value("min_tokens", c.detection.min_tokens);
  }
  c.backend = j.value("backend", c.backend);
  c.seed = j.value("seed", c.seed);
  c.n_queries = j.value("n_queries", c.n_queries);
  c.validate();
  return c;
}

inline RunConfig load_run_config(const fs::path& path) {
  try {
    return run_config_from_json(nlohmann::json::parse(read_file(path)));
  } catch (const nlohmann::json::exception& e) {
    throw Error(path.string() + ": " + e.what());
  }
}

inline ExperimentConfig experiment_config(const RunConfig& c) {
  ExperimentConfig e;
  e.rag = c.rag;
  e.detection = c.detection;
  e.watermark = c.watermark;
  e.n_queries = c.n_queries;
  return e;
}

}  // namespace ragmark
