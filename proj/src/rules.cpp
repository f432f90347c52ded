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

#include "btsimp/rules.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <map>

#include "btsimp/error.hpp"

namespace btsimp {

namespace {

std::string key_of(std::span<const Token> phrase) {
  std::string key;
  for (std::size_t i = 0; i < phrase.size(); ++i) {
    if (i) key.push_back(' ');
    key += phrase[i];
  }
  return key;
}

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\r')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\r')) s.remove_suffix(1);
  return s;
}

std::string format_score(double score) {
  char buf[64];
  auto [end, ec] = std::to_chars(buf, buf + sizeof(buf), score);
  return std::string(buf, end);
}

bool candidate_before(const Candidate& a, const Candidate& b) {
  if (a.score != b.score) return a.score > b.score;
  return a.phrase < b.phrase;
}

void add_candidate(StringMap<std::map<Sentence, double>>& index, const Sentence& key_phrase,
                   const Sentence& value_phrase, double score) {
  auto& slot = index[key_phrase.join()];
  auto [it, inserted] = slot.emplace(value_phrase, score);
  if (!inserted) it->second = std::max(it->second, score);
}

void finalize(StringMap<std::map<Sentence, double>>& staged, StringMap<std::vector<Candidate>>& out,
              std::size_t top_k, std::size_t& max_tokens) {
  for (auto& [key, entries] : staged) {
    std::vector<Candidate> candidates;
    candidates.reserve(entries.size());
    for (auto& [phrase, score] : entries) candidates.push_back({phrase, score});
    std::sort(candidates.begin(), candidates.end(), candidate_before);
    if (candidates.size() > top_k) candidates.resize(top_k);
    const std::size_t n_tokens = static_cast<std::size_t>(std::count(key.begin(), key.end(), ' ')) + 1;
    max_tokens = std::max(max_tokens, n_tokens);
    out.emplace(key, std::move(candidates));
  }
}

const std::vector<Candidate> kNoCandidates;

}  // namespace

std::vector<SimplificationRule> parse_rules(std::string_view content) {
  std::vector<SimplificationRule> rules;
  std::size_t pos = 0;
  std::size_t line_no = 0;
  while (pos < content.size()) {
    std::size_t eol = content.find('\n', pos);
    if (eol == std::string_view::npos) eol = content.size();
    std::string_view line = content.substr(pos, eol - pos);
    pos = eol + 1;
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    if (line.find_first_not_of(" \t") == std::string_view::npos) continue;
    if (line.front() == '#') continue;

    const std::string where = "line " + std::to_string(line_no);
    std::vector<std::string_view> fields;
    std::size_t start = 0;
    while (true) {
      std::size_t tab = line.find('\t', start);
      fields.push_back(line.substr(start, tab == std::string_view::npos ? std::string_view::npos : tab - start));
      if (tab == std::string_view::npos) break;
      start = tab + 1;
    }
    if (fields.size() != 3) {
      fail(ErrorCode::parse, where + ": expected 3 tab-separated fields, got " + std::to_string(fields.size()));
    }
    std::string_view score_text = trim(fields[0]);
    double score = 0.0;
    auto [ptr, ec] = std::from_chars(score_text.data(), score_text.data() + score_text.size(), score);
    if (ec != std::errc() || ptr != score_text.data() + score_text.size() || score_text.empty()) {
      fail(ErrorCode::parse, where + ": bad score '" + std::string(score_text) + "'");
    }
    if (!(score >= 0.0 && score <= 1.0)) {
      fail(ErrorCode::range, where + ": score " + std::string(score_text) + " outside [0,1]");
    }
    SimplificationRule rule;
    rule.score = score;
    try {
      rule.complex_phrase = tokenize(fields[1]);
      rule.simple_phrase = tokenize(fields[2]);
    } catch (const Error&) {
      fail(ErrorCode::parse, where + ": empty phrase");
    }
    if (rule.complex_phrase.size() > kMaxPhraseTokens || rule.simple_phrase.size() > kMaxPhraseTokens) {
      fail(ErrorCode::parse, where + ": phrase longer than " + std::to_string(kMaxPhraseTokens) + " tokens");
    }
    if (rule.complex_phrase == rule.simple_phrase) {
      fail(ErrorCode::parse, where + ": complex and simple phrases are identical");
    }
    rules.push_back(std::move(rule));
  }
  return rules;
}

std::vector<SimplificationRule> load_rules(const std::filesystem::path& path) {
  return parse_rules(read_file(path));
}

std::string serialize_rules(std::span<const SimplificationRule> rules) {
  std::string out;
  for (const auto& r : rules) {
    out += format_score(r.score);
    out.push_back('\t');
    out += r.complex_phrase.join();
    out.push_back('\t');
    out += r.simple_phrase.join();
    out.push_back('\n');
  }
  return out;
}

RuleTable build_rule_table(std::span<const SimplificationRule> rules, double min_score, std::size_t top_k) {
  if (top_k < 1) fail(ErrorCode::invalid_argument, "top_k must be at least 1");
  if (!(min_score >= 0.0 && min_score <= 1.0)) fail(ErrorCode::range, "min_score outside [0,1]");

  StringMap<std::map<Sentence, double>> forward;
  StringMap<std::map<Sentence, double>> reverse;
  for (const auto& r : rules) {
    if (r.score < min_score) continue;
    add_candidate(forward, r.complex_phrase, r.simple_phrase, r.score);
    add_candidate(reverse, r.simple_phrase, r.complex_phrase, r.score);
  }
  RuleTable table;
  table.min_score_ = min_score;
  table.top_k_ = top_k;
  finalize(forward, table.forward_, top_k, table.forward_max_);
  finalize(reverse, table.reverse_, top_k, table.reverse_max_);
  return table;
}

const std::vector<Candidate>& RuleTable::lookup(std::span<const Token> phrase, Direction direction) const {
  const auto& index = direction == Direction::forward ? forward_ : reverse_;
  if (phrase.empty() || index.empty()) return kNoCandidates;
  auto it = index.find(key_of(phrase));
  return it == index.end() ? kNoCandidates : it->second;
}

std::size_t RuleTable::max_key_tokens(Direction direction) const {
  return direction == Direction::forward ? forward_max_ : reverse_max_;
}

std::size_t RuleTable::key_count(Direction direction) const {
  return direction == Direction::forward ? forward_.size() : reverse_.size();
}

std::vector<SimplificationRule> RuleTable::rules() const {
  std::map<std::pair<Sentence, Sentence>, double> all;
  for (const auto& [key, candidates] : forward_) {
    Sentence complex_phrase = tokenize(key);
    for (const auto& c : candidates) all[{complex_phrase, c.phrase}] = c.score;
  }
  for (const auto& [key, candidates] : reverse_) {
    Sentence simple_phrase = tokenize(key);
    for (const auto& c : candidates) all.emplace(std::make_pair(c.phrase, simple_phrase), c.score);
  }
  std::vector<SimplificationRule> out;
  out.reserve(all.size());
  for (const auto& [phrases, score] : all) out.push_back({score, phrases.first, phrases.second});
  return out;
}

const std::vector<Candidate>& lookup(const RuleTable& table, const Sentence& phrase, Direction direction) {
  return table.lookup(phrase, direction);
}

}  // namespace btsimp
