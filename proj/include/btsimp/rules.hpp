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

#include <cstddef>
#include <filesystem>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "btsimp/text.hpp"

namespace btsimp {

// One scored rewrite "complex phrase -> simple phrase".
struct SimplificationRule {
  double score = 0.0;
  Sentence complex_phrase;
  Sentence simple_phrase;

  friend bool operator==(const SimplificationRule&, const SimplificationRule&) = default;
};

struct Candidate {
  Sentence phrase;
  double score = 0.0;

  friend bool operator==(const Candidate&, const Candidate&) = default;
};

// forward: complex -> simple (used to noise complex sentences).
// reverse: simple -> complex (used to noise simple sentences).
enum class Direction { forward, reverse };

inline constexpr std::size_t kMaxPhraseTokens = 5;

// Parses "score<TAB>complex<TAB>simple" lines. Blank lines and lines starting
// with '#' are ignored.
std::vector<SimplificationRule> parse_rules(std::string_view tsv_content);
std::vector<SimplificationRule> load_rules(const std::filesystem::path& path);
std::string serialize_rules(std::span<const SimplificationRule> rules);

class RuleTable {
 public:
  static constexpr double kDefaultMinScore = 0.5;
  static constexpr std::size_t kDefaultTopK = 5;

  RuleTable() = default;

  // Candidate list for the phrase, empty when the phrase is not a key.
  const std::vector<Candidate>& lookup(std::span<const Token> phrase, Direction direction) const;
  const std::vector<Candidate>& lookup(const Sentence& phrase, Direction direction) const {
    return lookup(std::span<const Token>(phrase.tokens()), direction);
  }

  // Longest key length in tokens for the direction; 0 for an empty index.
  std::size_t max_key_tokens(Direction direction) const;
  std::size_t key_count(Direction direction) const;
  bool empty() const noexcept { return forward_.empty() && reverse_.empty(); }

  double min_score() const noexcept { return min_score_; }
  std::size_t top_k() const noexcept { return top_k_; }

  // Rules still reachable from the forward index, then any only reachable
  // from the reverse index; sorted by complex phrase, then simple phrase.
  std::vector<SimplificationRule> rules() const;

 private:
  friend RuleTable build_rule_table(std::span<const SimplificationRule>, double, std::size_t);

  StringMap<std::vector<Candidate>> forward_;
  StringMap<std::vector<Candidate>> reverse_;
  std::size_t forward_max_ = 0;
  std::size_t reverse_max_ = 0;
  double min_score_ = kDefaultMinScore;
  std::size_t top_k_ = kDefaultTopK;
};

// Drops rules scoring below min_score, then keeps the top_k candidates per key
// in each direction independently. Candidates are ordered by descending score,
// ties by ascending phrase.
RuleTable build_rule_table(std::span<const SimplificationRule> rules,
                           double min_score = RuleTable::kDefaultMinScore,
                           std::size_t top_k = RuleTable::kDefaultTopK);

const std::vector<Candidate>& lookup(const RuleTable& table, const Sentence& phrase, Direction direction);

}  // namespace btsimp
