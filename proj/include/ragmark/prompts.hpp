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

// Prompt templates live as text files under a prompts directory, one file per
// role (`<role>.txt`), with `{placeholder}` fields.

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>
#include <string>
#include <string_view>

#include "ragmark/core.hpp"

#ifndef RAGMARK_PROMPTS_DIR
#define RAGMARK_PROMPTS_DIR "prompts"
#endif

namespace ragmark {

class PromptLibrary {
 public:
  explicit PromptLibrary(std::filesystem::path dir = default_dir()) : dir_(std::move(dir)) {}

  static std::filesystem::path default_dir() {
    if (const char* env = std::getenv("RAGMARK_PROMPTS_DIR"); env && *env) return env;
    return RAGMARK_PROMPTS_DIR;
  }

  const std::filesystem::path& dir() const { return dir_; }

  std::string get(std::string_view role) const {
    const auto path = dir_ / (std::string(role) + ".txt");
    std::ifstream in(path);
    if (!in) throw Error("prompt template not found: " + path.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    return strip_header(ss.str());
  }

  // Leading '#' lines (the license block) and the blank lines after them.
  static std::string strip_header(const std::string& text) {
    std::size_t pos = 0;
    while (pos < text.size() && text[pos] == '#') {
      const auto nl = text.find('\n', pos);
      pos = nl == std::string::npos ? text.size() : nl + 1;
    }
    if (pos == 0) return text;
    while (pos < text.size() && (text[pos] == '\n' || text[pos] == '\r')) ++pos;
    return text.substr(pos);
  }

  std::string render(std::string_view role,
                     const std::map<std::string, std::string>& fields) const {
    return fill(get(role), fields);
  }

  static std::string fill(std::string tmpl, const std::map<std::string, std::string>& fields) {
    for (const auto& [k, v] : fields) {
      const std::string key = "{" + k + "}";
      for (std::size_t pos = 0; (pos = tmpl.find(key, pos)) != std::string::npos;) {
        tmpl.replace(pos, key.size(), v);
        pos += v.size();
      }
    }
    return tmpl;
  }

 private:
  std::filesystem::path dir_;
};

}  // namespace ragmark
