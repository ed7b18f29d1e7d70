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

// Chat-completion and embedding client for an OpenAI-style HTTP endpoint.
// Endpoint and key come from RAGMARK_API_URL / RAGMARK_API_KEY. HTTPS needs
// httplib built with CPPHTTPLIB_OPENSSL_SUPPORT.

#include <cstdlib>
#include <string>
#include <string_view>

#include "httplib.h"
#include "json.hpp"
#include "ragmark/core.hpp"
#include "ragmark/embed.hpp"

namespace ragmark {

struct HttpSettings {
  std::string base_url;  // scheme://host[:port][/prefix]
  std::string api_key;
  std::string chat_model = "gpt-4o-mini";
  std::string embedding_model = "text-embedding-3-small";
  int timeout_s = 60;

  static HttpSettings from_env() {
    HttpSettings s;
    const char* url = std::getenv("RAGMARK_API_URL");
    const char* key = std::getenv("RAGMARK_API_KEY");
    if (!url || !*url) throw Error("RAGMARK_API_URL is not set");
    s.base_url = url;
    if (key) s.api_key = key;
    if (const char* m = std::getenv("RAGMARK_CHAT_MODEL"); m && *m) s.chat_model = m;
    if (const char* m = std::getenv("RAGMARK_EMBEDDING_MODEL"); m && *m) s.embedding_model = m;
    return s;
  }
};

class HttpBackend final : public TextBackend {
 public:
  explicit HttpBackend(HttpSettings settings, std::string id = "http")
      : settings_(std::move(settings)), id_(std::move(id)) {
    const auto& url = settings_.base_url;
    const auto scheme_end = url.find("://");
    if (scheme_end == std::string::npos) throw Error("API URL lacks a scheme: " + url);
    const auto path_begin = url.find('/', scheme_end + 3);
    host_ = url.substr(0, path_begin);
    prefix_ = path_begin == std::string::npos ? "" : url.substr(path_begin);
    while (!prefix_.empty() && prefix_.back() == '/') prefix_.pop_back();
  }

  std::string id() const override { return id_; }
  bool offline() const override { return false; }

  std::string complete(const std::string& prompt) override {
    nlohmann::json body = {{"model", settings_.chat_model},
                           {"temperature", 0},
                           {"messages", {{{"role", "user"}, {"content", prompt}}}}};
    const auto j = post("/chat/completions", body);
    try {
      return j.at("choices").at(0).at("message").at("content").get<std::string>();
    } catch (const std::exception& e) {
      throw Error("backend '" + id_ + "': unexpected chat response: " + e.what());
    }
  }

  Embedding embed(std::string_view text) override {
    nlohmann::json body = {{"model", settings_.embedding_model}, {"input", std::string(text)}};
    const auto j = post("/embeddings", body);
    Embedding v;
    try {
      v = j.at("data").at(0).at("embedding").get<Embedding>();
    } catch (const std::exception& e) {
      throw Error("backend '" + id_ + "': unexpected embedding response: " + e.what());
    }
    l2_normalize(v);
    return v;
  }

 private:
  nlohmann::json post(const std::string& path, const nlohmann::json& body) {
    httplib::Client client(host_);
    client.set_read_timeout(settings_.timeout_s, 0);
    client.set_connection_timeout(settings_.timeout_s, 0);
    httplib::Headers headers;
    if (!settings_.api_key.empty())
      headers.emplace("Authorization", "Bearer " + settings_.api_key);
    const auto res = client.Post(prefix_ + path, headers, body.dump(), "application/json");
    if (!res)
      throw Error("backend '" + id_ + "': request to " + host_ + prefix_ + path +
                  " failed: " + httplib::to_string(res.error()));
    if (res->status < 200 || res->status >= 300)
      throw Error("backend '" + id_ + "': HTTP " + std::to_string(res->status) + ": " +
                  res->body.substr(0, 512));
    try {
      return nlohmann::json::parse(res->body);
    } catch (const std::exception& e) {
      throw Error("backend '" + id_ + "': invalid JSON: " + e.what());
    }
  }

  HttpSettings settings_;
  std::string id_;
  std::string host_;
  std::string prefix_;
};

}  // namespace ragmark
