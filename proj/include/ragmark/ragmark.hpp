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

// Umbrella header. The HTTP client is separate (http_backend.hpp) so offline
// users need no socket library.

#include "ragmark/bounds.hpp"
#include "ragmark/core.hpp"
#include "ragmark/corpus.hpp"
#include "ragmark/demo.hpp"
#include "ragmark/detective.hpp"
#include "ragmark/document.hpp"
#include "ragmark/embed.hpp"
#include "ragmark/green_red.hpp"
#include "ragmark/interrogator.hpp"
#include "ragmark/io.hpp"
#include "ragmark/knowledge.hpp"
#include "ragmark/lexicon.hpp"
#include "ragmark/pipeline.hpp"
#include "ragmark/prompts.hpp"
#include "ragmark/rag_sim.hpp"
#include "ragmark/stats.hpp"
#include "ragmark/text.hpp"
#include "ragmark/token_model.hpp"
