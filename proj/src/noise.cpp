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

#include "btsimp/noise.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "btsimp/error.hpp"

namespace btsimp {

namespace {

using Unit = std::pair<std::size_t, std::size_t>;  // [begin, end)

std::vector<Unit> bigram_units(std::size_t n) {
  std::vector<Unit> units;
  units.reserve((n + 1) / 2);
  for (std::size_t i = 0; i < n; i += 2) units.emplace_back(i, std::min(i + 2, n));
  return units;
}

}  // namespace

std::string_view preset_name(NoisePreset preset) {
  switch (preset) {
    case NoisePreset::original: return "original";
    case NoisePreset::additive: return "additive";
    case NoisePreset::full: return "full";
  }
  return "full";
}

NoisePreset parse_preset(std::string_view name) {
  if (name == "original") return NoisePreset::original;
  if (name == "additive") return NoisePreset::additive;
  if (name == "full") return NoisePreset::full;
  fail(ErrorCode::config, "unknown noise preset '" + std::string(name) + "'");
}

void NoiseConfig::validate() const {
  if (!(p_rep >= 0.0 && p_rep <= 1.0)) fail(ErrorCode::config, "p_rep outside [0,1]");
  if (!(p_del >= 0.0 && p_del <= 1.0)) fail(ErrorCode::config, "p_del outside [0,1]");
  if (!(additive_frac_lo > 0.0 && additive_frac_lo <= additive_frac_hi && additive_frac_hi < 1.0)) {
    fail(ErrorCode::config, "additive fraction range must satisfy 0 < lo <= hi < 1");
  }
}

Sentence substitute(const Sentence& s, const RuleTable& table, Direction direction, double p_rep,
                    RandomSource& rng) {
  const std::size_t max_key = table.max_key_tokens(direction);
  if (max_key == 0) return s;
  const auto& tokens = s.tokens();
  std::vector<Token> out;
  out.reserve(tokens.size() + 4);
  std::size_t i = 0;
  while (i < tokens.size()) {
    const std::size_t longest = std::min(max_key, tokens.size() - i);
    const std::vector<Candidate>* match = nullptr;
    std::size_t match_len = 0;
    for (std::size_t len = longest; len >= 1; --len) {
      const auto& candidates = table.lookup(std::span<const Token>(tokens).subspan(i, len), direction);
      if (!candidates.empty()) {
        match = &candidates;
        match_len = len;
        break;
      }
    }
    if (!match) {
      out.push_back(tokens[i]);
      ++i;
      continue;
    }
    if (rng.bernoulli(p_rep)) {
      const Candidate& pick = (*match)[rng.uniform_index(match->size())];
      out.insert(out.end(), pick.phrase.begin(), pick.phrase.end());
    } else {
      out.insert(out.end(), tokens.begin() + static_cast<std::ptrdiff_t>(i),
                 tokens.begin() + static_cast<std::ptrdiff_t>(i + match_len));
    }
    i += match_len;
  }
  return Sentence(std::move(out));
}

std::vector<Token> sample_additive_bigrams(const Sentence& donor, std::size_t n_tokens, RandomSource& rng) {
  std::vector<Token> out;
  if (n_tokens == 0 || donor.empty()) return out;
  auto units = bigram_units(donor.size());
  rng.shuffle(units);
  for (const auto& [b, e] : units) {
    if (out.size() == n_tokens) break;
    if (out.size() + (e - b) > n_tokens) continue;
    for (std::size_t i = b; i < e; ++i) out.push_back(donor[i]);
  }
  return out;
}

std::vector<Token> shuffle_complete_bigrams(const std::vector<Token>& tokens, RandomSource& rng) {
  auto units = bigram_units(tokens.size());
  rng.shuffle(units);
  std::vector<Token> out;
  out.reserve(tokens.size());
  for (const auto& [b, e] : units) {
    for (std::size_t i = b; i < e; ++i) out.push_back(tokens[i]);
  }
  return out;
}

Sentence drop_frequent(const Sentence& s, const Vocabulary& vocab, double p_del, RandomSource& rng) {
  std::vector<Token> kept;
  kept.reserve(s.size());
  for (const auto& t : s) {
    if (vocab.is_frequent(t) && rng.bernoulli(p_del)) continue;
    kept.push_back(t);
  }
  if (kept.empty() && !s.empty()) kept.push_back(s[rng.uniform_index(s.size())]);
  return Sentence(std::move(kept));
}

Sentence shuffle_bounded(const Sentence& s, std::size_t k, RandomSource& rng) {
  if (k == 0 || s.size() < 2) return s;
  std::vector<std::pair<double, std::size_t>> keyed(s.size());
  for (std::size_t i = 0; i < s.size(); ++i) {
    keyed[i] = {static_cast<double>(i) + rng.uniform(0.0, static_cast<double>(k + 1)), i};
  }
  std::stable_sort(keyed.begin(), keyed.end(),
                   [](const auto& a, const auto& b) { return a.first < b.first; });
  std::vector<Token> out;
  out.reserve(s.size());
  for (const auto& [key, i] : keyed) out.push_back(s[i]);
  return Sentence(std::move(out));
}

std::size_t additive_token_count(std::size_t n, double f) {
  const double exact = f * static_cast<double>(n) / (1.0 - f);
  return static_cast<std::size_t>(2.0 * std::round(exact / 2.0));
}

Sentence noise_simple(const Sentence& s, const Sentence& donor, const RuleTable& table,
                      const NoiseConfig& config, const Vocabulary& vocab, RandomSource& rng) {
  if (config.preset == NoisePreset::original) {
    return shuffle_bounded(drop_frequent(s, vocab, config.p_del, rng), config.shuffle_k, rng);
  }
  Sentence base = config.preset == NoisePreset::full
                      ? substitute(s, table, Direction::reverse, config.p_rep, rng)
                      : s;
  const double f = rng.uniform(config.additive_frac_lo, config.additive_frac_hi);
  std::size_t want = additive_token_count(base.size(), f);
  // Clamp to what the donor can supply in whole bigrams.
  want = std::min(want, donor.size() - donor.size() % 2);
  std::vector<Token> tokens = base.tokens();
  std::vector<Token> extra = sample_additive_bigrams(donor, want, rng);
  tokens.insert(tokens.end(), extra.begin(), extra.end());
  return Sentence(shuffle_complete_bigrams(tokens, rng));
}

Sentence noise_complex(const Sentence& s, const RuleTable& table, const NoiseConfig& config,
                       const Vocabulary& vocab, RandomSource& rng) {
  Sentence base = config.preset == NoisePreset::full
                      ? substitute(s, table, Direction::forward, config.p_rep, rng)
                      : s;
  return shuffle_bounded(drop_frequent(base, vocab, config.p_del, rng), config.shuffle_k, rng);
}

}  // namespace btsimp
