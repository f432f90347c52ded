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

#include "btsimp/text.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>

#include "btsimp/error.hpp"

namespace btsimp {

namespace {

bool is_space(char c) {
  return c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\v' || c == '\f';
}

}  // namespace

std::string Sentence::join() const {
  std::string out;
  for (std::size_t i = 0; i < tokens_.size(); ++i) {
    if (i) out.push_back(' ');
    out += tokens_[i];
  }
  return out;
}

std::string_view tag_name(ComplexityTag tag) {
  switch (tag) {
    case ComplexityTag::simple: return "simple";
    case ComplexityTag::complex: return "complex";
    case ComplexityTag::unlabeled: return "unlabeled";
  }
  return "unlabeled";
}

std::string_view side_name(Side side) { return side == Side::simple ? "simple" : "complex"; }

Side parse_side(std::string_view name) {
  if (name == "simple") return Side::simple;
  if (name == "complex") return Side::complex;
  fail(ErrorCode::invalid_argument, "unknown side '" + std::string(name) + "'");
}

Sentence tokenize(std::string_view line) {
  std::vector<Token> tokens;
  std::size_t i = 0;
  while (i < line.size()) {
    while (i < line.size() && is_space(line[i])) ++i;
    std::size_t start = i;
    while (i < line.size() && !is_space(line[i])) ++i;
    if (i > start) tokens.emplace_back(line.substr(start, i - start));
  }
  if (tokens.empty()) fail(ErrorCode::empty_line, "line contains no tokens");
  return Sentence(std::move(tokens));
}

bool is_valid_utf8(std::string_view bytes) {
  std::size_t i = 0;
  const std::size_t n = bytes.size();
  while (i < n) {
    const auto c = static_cast<unsigned char>(bytes[i]);
    std::size_t extra;
    std::uint32_t cp;
    if (c < 0x80) {
      ++i;
      continue;
    } else if ((c & 0xE0) == 0xC0) {
      extra = 1;
      cp = c & 0x1F;
    } else if ((c & 0xF0) == 0xE0) {
      extra = 2;
      cp = c & 0x0F;
    } else if ((c & 0xF8) == 0xF0) {
      extra = 3;
      cp = c & 0x07;
    } else {
      return false;
    }
    for (std::size_t k = 1; k <= extra; ++k) {
      if (i + k >= n) return false;
      const auto cc = static_cast<unsigned char>(bytes[i + k]);
      if ((cc & 0xC0) != 0x80) return false;
      cp = (cp << 6) | (cc & 0x3F);
    }
    // Overlong encodings, surrogates and out-of-range code points.
    if ((extra == 1 && cp < 0x80) || (extra == 2 && cp < 0x800) || (extra == 3 && cp < 0x10000) ||
        cp > 0x10FFFF || (cp >= 0xD800 && cp <= 0xDFFF)) {
      return false;
    }
    i += extra + 1;
  }
  return true;
}

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(ErrorCode::io, "cannot open " + path.string());
  std::ostringstream buffer;
  buffer << in.rdbuf();
  if (in.bad()) fail(ErrorCode::io, "read failed for " + path.string());
  return buffer.str();
}

void write_file(const std::filesystem::path& path, std::string_view content) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) fail(ErrorCode::io, "cannot write " + path.string());
  out.write(content.data(), static_cast<std::streamsize>(content.size()));
  if (!out) fail(ErrorCode::io, "write failed for " + path.string());
}

Corpus read_corpus(const std::filesystem::path& path, ComplexityTag tag) {
  const std::string content = read_file(path);
  std::vector<Sentence> sentences;
  std::size_t blank = 0;
  std::size_t line_no = 0;
  std::size_t pos = 0;
  while (pos < content.size()) {
    std::size_t eol = content.find('\n', pos);
    if (eol == std::string::npos) eol = content.size();
    std::string_view line(content.data() + pos, eol - pos);
    ++line_no;
    pos = eol + 1;
    if (!is_valid_utf8(line)) {
      fail(ErrorCode::encoding, path.string() + ": invalid UTF-8 at line " + std::to_string(line_no));
    }
    if (std::all_of(line.begin(), line.end(), is_space)) {
      ++blank;
      continue;
    }
    sentences.push_back(tokenize(line));
  }
  Corpus corpus(std::move(sentences), tag);
  corpus.set_skipped_blank_lines(blank);
  return corpus;
}

void write_corpus(const std::filesystem::path& path, std::span<const Sentence> sentences) {
  std::string out;
  for (const auto& s : sentences) {
    out += s.join();
    out.push_back('\n');
  }
  write_file(path, out);
}

Vocabulary::Vocabulary(CountMap counts, std::uint64_t frequent_threshold)
    : counts_(std::move(counts)), frequent_threshold_(frequent_threshold) {
  for (const auto& [token, c] : counts_) total_ += c;
}

std::uint64_t Vocabulary::count(std::string_view token) const {
  auto it = counts_.find(token);
  return it == counts_.end() ? 0 : it->second;
}

double Vocabulary::relative_frequency(std::string_view token) const {
  if (total_ == 0) return 0.0;
  return static_cast<double>(count(token)) / static_cast<double>(total_);
}

std::vector<std::pair<Token, std::uint64_t>> Vocabulary::sorted() const {
  std::vector<std::pair<Token, std::uint64_t>> out(counts_.begin(), counts_.end());
  std::sort(out.begin(), out.end(), [](const auto& a, const auto& b) {
    if (a.second != b.second) return a.second > b.second;
    return a.first < b.first;
  });
  return out;
}

std::string Vocabulary::dump() const {
  std::string out;
  for (const auto& [token, c] : sorted()) {
    out += token;
    out.push_back('\t');
    out += std::to_string(c);
    out.push_back('\n');
  }
  return out;
}

Vocabulary build_vocabulary(std::span<const Corpus> corpora, std::uint64_t frequent_threshold) {
  Vocabulary::CountMap counts;
  bool any = false;
  for (const auto& corpus : corpora) {
    for (const auto& s : corpus.sentences()) {
      any = true;
      for (const auto& t : s) ++counts[t];
    }
  }
  if (!any) fail(ErrorCode::empty_corpus, "no sentences to build a vocabulary from");
  return Vocabulary(std::move(counts), frequent_threshold);
}

bool is_frequent(const Vocabulary& vocab, std::string_view token) { return vocab.is_frequent(token); }

}  // namespace btsimp
