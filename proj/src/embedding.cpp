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

#include "btsimp/embedding.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <set>

#include <Eigen/Eigenvalues>

#include "btsimp/error.hpp"

namespace btsimp {

EmbeddingTable::EmbeddingTable(std::vector<Token> tokens, Eigen::MatrixXd vectors)
    : tokens_(std::move(tokens)), vectors_(std::move(vectors)) {
  if (static_cast<std::size_t>(vectors_.rows()) != tokens_.size()) {
    fail(ErrorCode::shape, "embedding rows do not match token count");
  }
  if (!vectors_.allFinite()) fail(ErrorCode::numeric, "embedding table has non-finite entries");
  for (std::size_t i = 0; i < tokens_.size(); ++i) {
    if (!index_.emplace(tokens_[i], i).second) fail(ErrorCode::parse, "duplicate embedding for " + tokens_[i]);
  }
}

std::optional<Eigen::VectorXd> EmbeddingTable::find(std::string_view token) const {
  auto it = index_.find(token);
  if (it == index_.end()) return std::nullopt;
  return Eigen::VectorXd(vectors_.row(static_cast<Eigen::Index>(it->second)).transpose());
}

std::string EmbeddingTable::to_text() const {
  std::string out;
  char buf[64];
  for (std::size_t i = 0; i < tokens_.size(); ++i) {
    out += tokens_[i];
    for (Eigen::Index j = 0; j < vectors_.cols(); ++j) {
      auto [end, ec] = std::to_chars(buf, buf + sizeof(buf), vectors_(static_cast<Eigen::Index>(i), j));
      out.push_back(' ');
      out.append(buf, end);
    }
    out.push_back('\n');
  }
  return out;
}

EmbeddingTable EmbeddingTable::from_text(std::string_view text) {
  std::vector<Token> tokens;
  std::vector<std::vector<double>> rows;
  std::size_t line_no = 0;
  std::size_t pos = 0;
  while (pos < text.size()) {
    std::size_t eol = text.find('\n', pos);
    if (eol == std::string_view::npos) eol = text.size();
    std::string_view line = text.substr(pos, eol - pos);
    pos = eol + 1;
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string_view::npos) continue;
    Sentence fields = tokenize(line);
    if (fields.size() < 2) fail(ErrorCode::parse, "embedding line " + std::to_string(line_no) + " has no values");
    std::vector<double> row;
    for (std::size_t i = 1; i < fields.size(); ++i) {
      const auto& f = fields[i];
      double v = 0.0;
      auto [ptr, ec] = std::from_chars(f.data(), f.data() + f.size(), v);
      if (ec != std::errc() || ptr != f.data() + f.size()) {
        fail(ErrorCode::parse, "embedding line " + std::to_string(line_no) + ": bad value '" + f + "'");
      }
      row.push_back(v);
    }
    if (!rows.empty() && row.size() != rows.front().size()) {
      fail(ErrorCode::shape, "embedding line " + std::to_string(line_no) + " has a different dimension");
    }
    tokens.push_back(fields[0]);
    rows.push_back(std::move(row));
  }
  Eigen::MatrixXd m(static_cast<Eigen::Index>(rows.size()),
                    rows.empty() ? 0 : static_cast<Eigen::Index>(rows.front().size()));
  for (std::size_t i = 0; i < rows.size(); ++i) {
    for (std::size_t j = 0; j < rows[i].size(); ++j) {
      m(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = rows[i][j];
    }
  }
  return EmbeddingTable(std::move(tokens), std::move(m));
}

void EmbeddingTable::save(const std::filesystem::path& path) const { write_file(path, to_text()); }

EmbeddingTable EmbeddingTable::load(const std::filesystem::path& path) { return from_text(read_file(path)); }

EmbeddingTable train_embeddings(std::span<const Corpus> corpora, std::size_t dim) {
  if (dim < 2) fail(ErrorCode::config, "embedding dimension must be at least 2");
  std::set<Token> types;
  std::size_t n_tokens = 0;
  for (const auto& c : corpora) {
    for (const auto& s : c.sentences()) {
      types.insert(s.begin(), s.end());
      n_tokens += s.size();
    }
  }
  if (types.size() < dim) {
    fail(ErrorCode::config, "vocabulary of " + std::to_string(types.size()) + " is smaller than dimension " +
                                std::to_string(dim));
  }
  if (n_tokens < dim) fail(ErrorCode::config, "corpus has fewer tokens than the embedding dimension");

  std::vector<Token> tokens(types.begin(), types.end());
  StringMap<Eigen::Index> index;
  for (std::size_t i = 0; i < tokens.size(); ++i) index.emplace(tokens[i], static_cast<Eigen::Index>(i));
  const auto v = static_cast<Eigen::Index>(tokens.size());

  Eigen::MatrixXd cooc = Eigen::MatrixXd::Zero(v, v);
  std::vector<Eigen::Index> ids;
  for (const auto& c : corpora) {
    for (const auto& s : c.sentences()) {
      ids.clear();
      for (const auto& t : s) ids.push_back(index.find(t)->second);
      for (std::size_t i = 0; i < ids.size(); ++i) {
        for (std::size_t d = 1; d <= kEmbeddingWindow && i + d < ids.size(); ++d) {
          cooc(ids[i], ids[i + d]) += 1.0;
          cooc(ids[i + d], ids[i]) += 1.0;
        }
      }
    }
  }
  const Eigen::VectorXd row_sum = cooc.rowwise().sum();
  const double total = row_sum.sum();
  Eigen::MatrixXd ppmi = Eigen::MatrixXd::Zero(v, v);
  if (total > 0.0) {
    for (Eigen::Index i = 0; i < v; ++i) {
      for (Eigen::Index j = 0; j < v; ++j) {
        const double c = cooc(i, j);
        if (c <= 0.0) continue;
        ppmi(i, j) = std::max(0.0, std::log(c * total / (row_sum(i) * row_sum(j))));
      }
    }
  }

  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(ppmi);
  if (solver.info() != Eigen::Success) fail(ErrorCode::numeric, "eigendecomposition failed");
  // Eigenvalues come back in ascending order.
  Eigen::MatrixXd vectors(v, static_cast<Eigen::Index>(dim));
  for (std::size_t d = 0; d < dim; ++d) {
    const Eigen::Index col = v - 1 - static_cast<Eigen::Index>(d);
    Eigen::VectorXd basis = solver.eigenvectors().col(col);
    for (Eigen::Index i = 0; i < v; ++i) {
      if (std::abs(basis(i)) > 1e-12) {
        if (basis(i) < 0.0) basis = -basis;
        break;
      }
    }
    vectors.col(static_cast<Eigen::Index>(d)) = basis * std::sqrt(std::max(solver.eigenvalues()(col), 0.0));
  }
  return EmbeddingTable(std::move(tokens), std::move(vectors));
}

Eigen::VectorXd sentence_vector(const EmbeddingTable& emb, const Sentence& s, const Vocabulary& vocab, double a) {
  if (!(a > 0.0)) fail(ErrorCode::invalid_argument, "SIF weight must be positive");
  Eigen::VectorXd out = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(emb.dim()));
  if (s.empty()) return out;
  for (const auto& t : s) {
    auto v = emb.find(t);
    if (!v) continue;
    out += (a / (a + vocab.relative_frequency(t))) * *v;
  }
  return out / static_cast<double>(s.size());
}

double relevance_reward(const Eigen::VectorXd& v1, const Eigen::VectorXd& v2) {
  if (v1.size() != v2.size()) fail(ErrorCode::shape, "relevance vectors differ in dimension");
  const double n1 = v1.norm();
  const double n2 = v2.norm();
  if (n1 == 0.0 || n2 == 0.0) return 0.0;
  return std::clamp(v1.dot(v2) / (n1 * n2), 0.0, 1.0);
}

}  // namespace btsimp
