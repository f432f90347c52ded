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

#include "btsimp/lm.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>
#include <set>

#include "binary_io.hpp"
#include "btsimp/error.hpp"

namespace btsimp {

namespace {

constexpr char kMagic[8] = {'B', 'T', 'S', 'L', 'M', '\0', '\0', '\0'};

}  // namespace

std::vector<double> default_lm_weights(std::size_t order) {
  std::vector<double> w(order);
  double total = 0.0;
  for (std::size_t k = 0; k < order; ++k) {
    w[k] = std::ldexp(1.0, static_cast<int>(k));
    total += w[k];
  }
  for (auto& x : w) x /= total;
  return w;
}

std::string NGramLM::pack(std::span<const std::uint32_t> ids) {
  std::string key(ids.size() * sizeof(std::uint32_t), '\0');
  for (std::size_t i = 0; i < ids.size(); ++i) {
    const std::uint32_t le = detail::to_little(ids[i]);
    std::memcpy(key.data() + i * sizeof(std::uint32_t), &le, sizeof(le));
  }
  return key;
}

std::uint32_t NGramLM::id_of(std::string_view token) const {
  auto it = ids_.find(token);
  return it == ids_.end() ? kUnk : it->second;
}

void NGramLM::rebuild_context_totals() {
  context_total_.assign(ngram_.size(), {});
  for (std::size_t k = 0; k < ngram_.size(); ++k) {
    for (const auto& [key, c] : ngram_[k]) {
      context_total_[k][key.substr(0, key.size() - sizeof(std::uint32_t))] += c;
    }
  }
}

NGramLM train_lm(std::span<const Sentence> corpus, std::size_t order, std::vector<double> weights) {
  if (corpus.empty()) fail(ErrorCode::empty_corpus, "cannot train a language model on an empty corpus");
  if (order < 1) fail(ErrorCode::config, "LM order must be at least 1");
  if (weights.empty()) weights = default_lm_weights(order);
  if (weights.size() != order) fail(ErrorCode::config, "LM needs one interpolation weight per order");
  const double sum = std::accumulate(weights.begin(), weights.end(), 0.0);
  if (std::abs(sum - 1.0) > 1e-9 || std::any_of(weights.begin(), weights.end(), [](double w) { return !(w > 0.0); })) {
    fail(ErrorCode::config, "LM weights must be positive and sum to 1");
  }

  NGramLM lm;
  lm.order_ = order;
  lm.weights_ = std::move(weights);
  std::set<Token> types;
  for (const auto& s : corpus) types.insert(s.begin(), s.end());
  types.erase(std::string(kEndOfSentence));
  types.erase(std::string(kUnknownToken));
  lm.vocab_ = {std::string(kEndOfSentence), std::string(kUnknownToken)};
  lm.vocab_.insert(lm.vocab_.end(), types.begin(), types.end());
  for (std::uint32_t i = 0; i < lm.vocab_.size(); ++i) lm.ids_.emplace(lm.vocab_[i], i);

  lm.unigram_.assign(lm.vocab_.size(), 0);
  lm.ngram_.assign(order - 1, {});
  std::vector<std::uint32_t> seq;
  for (const auto& s : corpus) {
    seq.assign(order - 1, NGramLM::kStart);
    for (const auto& t : s) seq.push_back(lm.id_of(t));
    seq.push_back(NGramLM::kEos);
    for (std::size_t pos = order - 1; pos < seq.size(); ++pos) {
      ++lm.unigram_[seq[pos]];
      ++lm.unigram_total_;
      for (std::size_t k = 2; k <= order; ++k) {
        std::span<const std::uint32_t> gram(seq.data() + pos + 1 - k, k);
        ++lm.ngram_[k - 2][NGramLM::pack(gram)];
      }
    }
  }
  lm.rebuild_context_totals();
  return lm;
}

double NGramLM::prob(std::span<const Token> history, std::string_view token) const {
  const std::uint32_t w = id_of(token);
  const double vocab_size = static_cast<double>(vocab_.size());
  double q = (static_cast<double>(unigram_[w]) + 1.0) / (static_cast<double>(unigram_total_) + vocab_size);
  double p = weights_[0] * q;
  if (order_ > 1) {
    std::vector<std::uint32_t> ctx(order_ - 1, kStart);
    const std::size_t h = std::min(history.size(), order_ - 1);
    for (std::size_t i = 0; i < h; ++i) ctx[order_ - 1 - h + i] = id_of(history[history.size() - h + i]);
    for (std::size_t k = 2; k <= order_; ++k) {
      std::vector<std::uint32_t> gram(ctx.end() - static_cast<std::ptrdiff_t>(k - 1), ctx.end());
      const auto& totals = context_total_[k - 2];
      auto ct = totals.find(pack(gram));
      if (ct != totals.end() && ct->second > 0) {
        gram.push_back(w);
        const auto& counts = ngram_[k - 2];
        auto c = counts.find(pack(gram));
        q = c == counts.end() ? 0.0 : static_cast<double>(c->second) / static_cast<double>(ct->second);
      }
      p += weights_[k - 1] * q;
    }
  }
  return p;
}

double NGramLM::log_prob(std::span<const Token> history, std::string_view token) const {
  return std::log(prob(history, token));
}

std::string NGramLM::serialize() const {
  detail::ByteWriter out;
  out.put_raw(std::string_view(kMagic, sizeof(kMagic)));
  out.put<std::uint32_t>(kFormatVersion);
  out.put<std::uint32_t>(static_cast<std::uint32_t>(order_));
  out.put_doubles(weights_.data(), weights_.size());
  out.put<std::uint32_t>(static_cast<std::uint32_t>(vocab_.size()));
  for (const auto& t : vocab_) out.put_string(t);
  for (auto c : unigram_) out.put<std::uint64_t>(c);
  for (std::size_t k = 0; k < ngram_.size(); ++k) {
    std::map<std::string, std::uint64_t> sorted(ngram_[k].begin(), ngram_[k].end());
    out.put<std::uint64_t>(sorted.size());
    for (const auto& [key, c] : sorted) {
      out.put_raw(key);
      out.put<std::uint64_t>(c);
    }
  }
  return out.bytes();
}

NGramLM NGramLM::deserialize(std::string_view bytes) {
  detail::ByteReader in(bytes, ErrorCode::parse, "language model");
  if (in.get_raw(sizeof(kMagic)) != std::string_view(kMagic, sizeof(kMagic))) in.corrupt("bad magic");
  const auto version = in.get<std::uint32_t>();
  if (version != kFormatVersion) in.corrupt("unsupported version " + std::to_string(version));
  NGramLM lm;
  lm.order_ = in.get<std::uint32_t>();
  if (lm.order_ < 1 || lm.order_ > 16) in.corrupt("bad order");
  lm.weights_.resize(lm.order_);
  in.get_doubles(lm.weights_.data(), lm.order_);
  const auto v = in.get<std::uint32_t>();
  for (std::uint32_t i = 0; i < v; ++i) {
    lm.vocab_.push_back(in.get_string());
    lm.ids_.emplace(lm.vocab_.back(), i);
  }
  lm.unigram_.resize(v);
  for (auto& c : lm.unigram_) {
    c = in.get<std::uint64_t>();
    lm.unigram_total_ += c;
  }
  lm.ngram_.assign(lm.order_ - 1, {});
  for (std::size_t k = 0; k + 1 < lm.order_; ++k) {
    const auto n = in.get<std::uint64_t>();
    const std::size_t key_bytes = (k + 2) * sizeof(std::uint32_t);
    for (std::uint64_t i = 0; i < n; ++i) {
      std::string key(in.get_raw(key_bytes));
      lm.ngram_[k][key] = in.get<std::uint64_t>();
    }
  }
  if (in.remaining() != 0) in.corrupt("trailing bytes");
  lm.rebuild_context_totals();
  return lm;
}

void NGramLM::save(const std::filesystem::path& path) const { write_file(path, serialize()); }

NGramLM NGramLM::load(const std::filesystem::path& path) { return deserialize(read_file(path)); }

bool operator==(const NGramLM& a, const NGramLM& b) {
  return a.order_ == b.order_ && a.weights_ == b.weights_ && a.vocab_ == b.vocab_ &&
         a.unigram_ == b.unigram_ && a.ngram_ == b.ngram_;
}

double sentence_log_prob(const FluencyModel& lm, const Sentence& s) {
  const auto& tokens = s.tokens();
  double total = 0.0;
  for (std::size_t i = 0; i < tokens.size(); ++i) {
    total += lm.log_prob(std::span<const Token>(tokens.data(), i), tokens[i]);
  }
  total += lm.log_prob(std::span<const Token>(tokens), kEndOfSentence);
  return total;
}

double fluency_reward(const FluencyModel& lm, const Sentence& s) {
  if (s.empty()) fail(ErrorCode::degenerate_input, "fluency of an empty sentence");
  return std::exp(sentence_log_prob(lm, s) / static_cast<double>(s.size() + 1));
}

}  // namespace btsimp
