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
#include <string_view>
#include <vector>

#include "btsimp/random.hpp"
#include "btsimp/rules.hpp"
#include "btsimp/text.hpp"

namespace btsimp {

// Which noise stages run. `original` is the machine-translation style noise
// (word drop and local shuffle on both sides); `additive` adds donor bigrams
// and complete bigram shuffling on the simple side; `full` also enables rule
// substitution on both sides.
enum class NoisePreset { original, additive, full };

std::string_view preset_name(NoisePreset preset);
NoisePreset parse_preset(std::string_view name);

struct NoiseConfig {
  double p_rep = 0.9;
  double p_del = 0.6;
  double additive_frac_lo = 0.25;
  double additive_frac_hi = 0.35;
  std::size_t shuffle_k = 3;
  NoisePreset preset = NoisePreset::full;

  // Throws ConfigError when a field is out of range.
  void validate() const;
};

// Longest-match-first, left-to-right, non-overlapping phrase replacement. Each
// matched occurrence is replaced with probability p_rep by a candidate drawn
// uniformly from its list.
Sentence substitute(const Sentence& s, const RuleTable& table, Direction direction, double p_rep,
                    RandomSource& rng);

// Donor tokens grouped into consecutive bigram units (trailing unigram for odd
// lengths); units are drawn without replacement and kept while they fit in
// n_tokens. May return fewer tokens when the donor runs out.
std::vector<Token> sample_additive_bigrams(const Sentence& donor, std::size_t n_tokens, RandomSource& rng);

// Uniform permutation of consecutive bigram units.
std::vector<Token> shuffle_complete_bigrams(const std::vector<Token>& tokens, RandomSource& rng);

// Removes each frequent token with probability p_del; keeps one uniformly
// chosen token if everything would be removed.
Sentence drop_frequent(const Sentence& s, const Vocabulary& vocab, double p_del, RandomSource& rng);

// Stable sort by i + U[0, k+1); no token moves more than k positions.
Sentence shuffle_bounded(const Sentence& s, std::size_t k, RandomSource& rng);

// Number of donor tokens to append to an n-token sentence so that the donor
// share is f: nearest even integer to f*n/(1-f).
std::size_t additive_token_count(std::size_t n, double f);

// N_s: noising for simple sentences.
Sentence noise_simple(const Sentence& s, const Sentence& donor, const RuleTable& table,
                      const NoiseConfig& config, const Vocabulary& vocab, RandomSource& rng);

// N_c: noising for complex sentences.
Sentence noise_complex(const Sentence& s, const RuleTable& table, const NoiseConfig& config,
                       const Vocabulary& vocab, RandomSource& rng);

}  // namespace btsimp
