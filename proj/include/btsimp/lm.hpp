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
#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "btsimp/text.hpp"

namespace btsimp {

inline constexpr std::string_view kEndOfSentence = "</s>";
inline constexpr std::string_view kUnknownToken = "<unk>";

// Anything that can supply per-token conditional log-probabilities can back
// the fluency reward.
class FluencyModel {
 public:
  virtual ~FluencyModel() = default;
  // log P(token | history). `token` may be kEndOfSentence; history holds the
  // preceding sentence tokens (sentence-start padding is implicit).
  virtual double log_prob(std::span<const Token> history, std::string_view token) const = 0;
};

// Interpolated n-gram model. Order k contributes weight[k-1] times its
// maximum-likelihood estimate; when a context was never observed the next
// lower order's estimate is used in its place. The unigram level is add-one
// smoothed over the vocabulary (training types plus </s> and <unk>), so every
// vocabulary token has positive probability under any history.
class NGramLM : public FluencyModel {
 public:
  static constexpr std::uint32_t kFormatVersion = 1;

  double log_prob(std::span<const Token> history, std::string_view token) const override;
  double prob(std::span<const Token> history, std::string_view token) const;

  std::size_t order() const noexcept { return order_; }
  const std::vector<double>& weights() const noexcept { return weights_; }
  // Prediction vocabulary: </s>, <unk>, then training types in byte order.
  const std::vector<Token>& vocabulary() const noexcept { return vocab_; }

  std::string serialize() const;
  static NGramLM deserialize(std::string_view bytes);
  void save(const std::filesystem::path& path) const;
  static NGramLM load(const std::filesystem::path& path);

  friend NGramLM train_lm(std::span<const Sentence>, std::size_t, std::vector<double>);
  friend bool operator==(const NGramLM&, const NGramLM&);

 private:
  static constexpr std::uint32_t kStart = 0xFFFFFFFFu;
  static constexpr std::uint32_t kEos = 0;
  static constexpr std::uint32_t kUnk = 1;

  std::uint32_t id_of(std::string_view token) const;
  static std::string pack(std::span<const std::uint32_t> ids);
  void rebuild_context_totals();

  std::size_t order_ = 3;
  std::vector<double> weights_;
  std::vector<Token> vocab_;
  StringMap<std::uint32_t> ids_;
  std::vector<std::uint64_t> unigram_;
  std::uint64_t unigram_total_ = 0;
  // ngram_[k] holds counts for order k+2, keyed by packed (context..., word).
  std::vector<std::unordered_map<std::string, std::uint64_t>> ngram_;
  std::vector<std::unordered_map<std::string, std::uint64_t>> context_total_;
};

std::vector<double> default_lm_weights(std::size_t order);

// Throws EmptyCorpus for an empty corpus, ConfigError for bad weights.
NGramLM train_lm(std::span<const Sentence> corpus, std::size_t order = 3, std::vector<double> weights = {});

// exp of the mean per-token log-probability, including the end-of-sentence
// transition. Throws DegenerateInput for an empty sentence.
double fluency_reward(const FluencyModel& lm, const Sentence& s);

// Sum of log P over the sentence tokens and the end-of-sentence transition.
double sentence_log_prob(const FluencyModel& lm, const Sentence& s);

}  // namespace btsimp
