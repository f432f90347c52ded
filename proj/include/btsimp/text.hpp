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

namespace btsimp {

// A single whitespace-free word unit.
using Token = std::string;

// Ordered token sequence. Joining with single spaces and re-tokenizing is the
// identity for any sentence whose tokens are non-empty and whitespace-free.
class Sentence {
 public:
  Sentence() = default;
  explicit Sentence(std::vector<Token> tokens) : tokens_(std::move(tokens)) {}
  Sentence(std::initializer_list<Token> tokens) : tokens_(tokens) {}

  const std::vector<Token>& tokens() const noexcept { return tokens_; }
  std::vector<Token>& tokens() noexcept { return tokens_; }
  std::size_t size() const noexcept { return tokens_.size(); }
  bool empty() const noexcept { return tokens_.empty(); }
  const Token& operator[](std::size_t i) const { return tokens_[i]; }

  auto begin() const noexcept { return tokens_.begin(); }
  auto end() const noexcept { return tokens_.end(); }

  std::string join() const;

  friend bool operator==(const Sentence&, const Sentence&) = default;
  friend auto operator<=>(const Sentence&, const Sentence&) = default;

 private:
  std::vector<Token> tokens_;
};

enum class ComplexityTag { simple, complex, unlabeled };

std::string_view tag_name(ComplexityTag tag);

// The two sentence spaces the system moves between.
enum class Side { simple, complex };

std::string_view side_name(Side side);
Side parse_side(std::string_view name);

class Corpus {
 public:
  Corpus(std::vector<Sentence> sentences, ComplexityTag tag)
      : sentences_(std::move(sentences)), tag_(tag) {}

  const std::vector<Sentence>& sentences() const noexcept { return sentences_; }
  ComplexityTag tag() const noexcept { return tag_; }
  std::size_t size() const noexcept { return sentences_.size(); }
  bool empty() const noexcept { return sentences_.empty(); }
  const Sentence& operator[](std::size_t i) const { return sentences_[i]; }

  // Number of blank lines skipped when the corpus was read from disk.
  std::size_t skipped_blank_lines() const noexcept { return skipped_blank_lines_; }
  void set_skipped_blank_lines(std::size_t n) { skipped_blank_lines_ = n; }

 private:
  std::vector<Sentence> sentences_;
  ComplexityTag tag_;
  std::size_t skipped_blank_lines_ = 0;
};

// Splits on maximal whitespace runs. Throws EmptyLine for blank input.
Sentence tokenize(std::string_view line);

bool is_valid_utf8(std::string_view bytes);

// One sentence per non-empty line. Blank lines are skipped and counted.
Corpus read_corpus(const std::filesystem::path& path, ComplexityTag tag);
void write_corpus(const std::filesystem::path& path, std::span<const Sentence> sentences);

// Reads a whole file; throws IoError when unreadable.
std::string read_file(const std::filesystem::path& path);
void write_file(const std::filesystem::path& path, std::string_view content);

// Heterogeneous string hashing so string_view lookups do not allocate.
struct StringHash {
  using is_transparent = void;
  std::size_t operator()(std::string_view s) const noexcept {
    return std::hash<std::string_view>{}(s);
  }
};

template <class V>
using StringMap = std::unordered_map<std::string, V, StringHash, std::equal_to<>>;

class Vocabulary {
 public:
  using CountMap = StringMap<std::uint64_t>;

  static constexpr std::uint64_t kDefaultFrequentThreshold = 100;

  Vocabulary() = default;
  Vocabulary(CountMap counts, std::uint64_t frequent_threshold);

  std::uint64_t count(std::string_view token) const;
  // Strict: count > threshold.
  bool is_frequent(std::string_view token) const { return count(token) > frequent_threshold_; }
  std::uint64_t frequent_threshold() const noexcept { return frequent_threshold_; }
  std::uint64_t total() const noexcept { return total_; }
  std::size_t size() const noexcept { return counts_.size(); }
  // Relative frequency count/total; 0 for unknown tokens.
  double relative_frequency(std::string_view token) const;

  const CountMap& counts() const noexcept { return counts_; }

  // (token, count) sorted by descending count, then lexicographically.
  std::vector<std::pair<Token, std::uint64_t>> sorted() const;
  // TSV "token<TAB>count" in sorted() order.
  std::string dump() const;

 private:
  CountMap counts_;
  std::uint64_t frequent_threshold_ = kDefaultFrequentThreshold;
  std::uint64_t total_ = 0;
};

// Counts are pooled over every corpus passed in. Throws EmptyCorpus when no
// corpus contributes a sentence.
Vocabulary build_vocabulary(std::span<const Corpus> corpora,
                            std::uint64_t frequent_threshold = Vocabulary::kDefaultFrequentThreshold);

bool is_frequent(const Vocabulary& vocab, std::string_view token);

}  // namespace btsimp
