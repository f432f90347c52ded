// Copyright 2026 The btsimp Authors.
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

#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

// Settings shared by the C API and CLI tests: a tiny toy language and a
// model small enough to train in well under a second.
namespace btsimp_it {

namespace fs = std::filesystem;

inline constexpr const char* kMicroGrammar[][2] = {
    {"n_simple", "120"},       {"n_complex", "120"},         {"n_pairs", "12"},
    {"n_parallel", "40"},      {"nouns_paired", "6"},        {"nouns_shared", "3"},
    {"verbs_paired", "3"},     {"verbs_shared", "2"},        {"adjectives_paired", "3"},
    {"adjectives_shared", "2"}, {"filler_clauses", "2"},     {"filler_clause_tokens", "2"},
    {"n_embedding", "60"},
};

inline constexpr const char* kMicroTrainer[][2] = {
    {"embed_dim", "8"},          {"hidden_dim", "8"},          {"pretrain_steps", "6"},
    {"batch_size", "4"},         {"bt_epochs", "2"},           {"bt_steps_per_epoch", "3"},
    {"frequent_threshold", "30"}, {"reward_embedding_dim", "4"},
};

inline fs::path scratch(const std::string& name) {
  fs::path dir = fs::path(BTSIMP_TEST_SCRATCH_DIR) / name;
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

inline std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

inline void spit(const fs::path& p, const std::string& content) {
  std::ofstream out(p, std::ios::binary);
  out << content;
}

}  // namespace btsimp_it
