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
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

#include "btsimp/text.hpp"

namespace btsimp {

class EmbeddingTable {
 public:
  EmbeddingTable() = default;
  // Rows of `vectors` align with `tokens`. Throws ShapeError on mismatch and
  // NumericError on non-finite entries.
  EmbeddingTable(std::vector<Token> tokens, Eigen::MatrixXd vectors);

  std::size_t dim() const noexcept { return static_cast<std::size_t>(vectors_.cols()); }
  std::size_t size() const noexcept { return tokens_.size(); }
  const std::vector<Token>& tokens() const noexcept { return tokens_; }
  const Eigen::MatrixXd& matrix() const noexcept { return vectors_; }

  std::optional<Eigen::VectorXd> find(std::string_view token) const;

  // "word v1 ... vd" per line.
  std::string to_text() const;
  static EmbeddingTable from_text(std::string_view text);
  void save(const std::filesystem::path& path) const;
  static EmbeddingTable load(const std::filesystem::path& path);

  friend bool operator==(const EmbeddingTable& a, const EmbeddingTable& b) {
    return a.tokens_ == b.tokens_ && a.vectors_.rows() == b.vectors_.rows() &&
           a.vectors_.cols() == b.vectors_.cols() && a.vectors_ == b.vectors_;
  }

 private:
  std::vector<Token> tokens_;
  StringMap<std::size_t> index_;
  Eigen::MatrixXd vectors_;
};

inline constexpr std::size_t kEmbeddingWindow = 5;

// PPMI co-occurrence matrix (symmetric window of kEmbeddingWindow tokens)
// factorized by a symmetric eigendecomposition: each token's vector is its row
// of U_d * sqrt(max(lambda_d, 0)) for the d largest eigenvalues. Every basis
// vector is sign-normalized so its first nonzero component is positive.
// Throws ConfigError when dim < 2, the vocabulary is smaller than dim, or the
// corpus has fewer than dim tokens.
EmbeddingTable train_embeddings(std::span<const Corpus> corpora, std::size_t dim);

inline constexpr double kDefaultSifWeight = 1e-3;

// sum_w a/(a + p(w)) * vec(w) / |s| with unigram relative frequencies p(w)
// from `vocab`; unknown tokens contribute zero.
Eigen::VectorXd sentence_vector(const EmbeddingTable& emb, const Sentence& s, const Vocabulary& vocab,
                                double a = kDefaultSifWeight);

// Cosine similarity clamped below at 0; 0 when either vector is zero. Throws
// ShapeError on dimension mismatch.
double relevance_reward(const Eigen::VectorXd& v1, const Eigen::VectorXd& v2);

}  // namespace btsimp
