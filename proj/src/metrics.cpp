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

#include "btsimp/metrics.hpp"

#include <algorithm>
#include <array>
#include <cctype>
#include <cmath>
#include <string>
#include <unordered_map>
#include <unordered_set>

#include "btsimp/error.hpp"

namespace btsimp {

namespace {

constexpr std::size_t kMaxOrder = 4;

bool is_vowel(char c) {
  return c == 'a' || c == 'e' || c == 'i' || c == 'o' || c == 'u' || c == 'y';
}

// N-grams are interned as strings joined by a separator that cannot occur in
// a token.
using NgramSet = std::unordered_set<std::string>;
using NgramCounts = std::unordered_map<std::string, std::size_t>;

NgramSet ngram_set(const Sentence& s, std::size_t n) {
  NgramSet out;
  if (s.size() < n) return out;
  for (std::size_t i = 0; i + n <= s.size(); ++i) {
    std::string key = s[i];
    for (std::size_t k = 1; k < n; ++k) {
      key.push_back('\x1f');
      key += s[i + k];
    }
    out.insert(std::move(key));
  }
  return out;
}

NgramCounts ngram_counts(const Sentence& s, std::size_t n) {
  NgramCounts out;
  if (s.size() < n) return out;
  for (std::size_t i = 0; i + n <= s.size(); ++i) {
    std::string key = s[i];
    for (std::size_t k = 1; k < n; ++k) {
      key.push_back('\x1f');
      key += s[i + k];
    }
    ++out[key];
  }
  return out;
}

// Accumulated counts for one operation at one order.
struct OpCounts {
  double candidate = 0.0;
  double target = 0.0;
  double correct = 0.0;
};

double f1_of(const OpCounts& c, EmptySetConvention convention, bool precision_only) {
  if (c.candidate == 0.0 && c.target == 0.0) {
    return convention == EmptySetConvention::vacuous_one ? 1.0 : 0.0;
  }
  const double precision = c.candidate > 0.0 ? c.correct / c.candidate : 0.0;
  if (precision_only) return precision;
  const double recall = c.target > 0.0 ? c.correct / c.target : 0.0;
  if (precision + recall == 0.0) return 0.0;
  return 2.0 * precision * recall / (precision + recall);
}

void check_shape(std::size_t a, std::size_t b, const char* what) {
  if (a != b) {
    fail(ErrorCode::shape, std::string(what) + ": " + std::to_string(a) + " vs " + std::to_string(b) + " rows");
  }
}

}  // namespace

bool is_word(std::string_view token) {
  return std::any_of(token.begin(), token.end(),
                     [](char c) { return std::isalnum(static_cast<unsigned char>(c)) != 0; });
}

std::size_t count_syllables(std::string_view word) {
  std::string letters;
  for (char c : word) {
    if (std::isalpha(static_cast<unsigned char>(c))) {
      letters.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(c))));
    }
  }
  if (letters.empty()) return 1;
  std::size_t groups = 0;
  bool in_group = false;
  for (char c : letters) {
    const bool v = is_vowel(c);
    if (v && !in_group) ++groups;
    in_group = v;
  }
  const std::size_t n = letters.size();
  // Silent final 'e' after a consonant, except consonant + "le" ("table").
  if (n >= 2 && letters[n - 1] == 'e' && !is_vowel(letters[n - 2])) {
    const bool consonant_le = n >= 3 && letters[n - 2] == 'l' && !is_vowel(letters[n - 3]);
    if (!consonant_le && groups > 0) --groups;
  }
  return std::max<std::size_t>(groups, 1);
}

double fkgl_formula(std::size_t words, std::size_t syllables, std::size_t sentences) {
  return 0.39 * (static_cast<double>(words) / static_cast<double>(sentences)) +
         11.8 * (static_cast<double>(syllables) / static_cast<double>(words)) - 15.59;
}

ReadabilityStats fkgl(std::span<const Sentence> corpus) {
  ReadabilityStats stats;
  stats.sentences = corpus.size();
  for (const auto& s : corpus) {
    for (const auto& t : s) {
      if (!is_word(t)) continue;
      ++stats.words;
      stats.syllables += count_syllables(t);
    }
  }
  if (stats.words == 0) fail(ErrorCode::degenerate_input, "FKGL needs at least one word");
  stats.fkgl = fkgl_formula(stats.words, stats.syllables, stats.sentences);
  return stats;
}

SariReport sari(std::span<const Sentence> inputs, std::span<const Sentence> outputs,
                const ReferenceSets& references, const SariOptions& options) {
  check_shape(inputs.size(), outputs.size(), "sari inputs/outputs");
  check_shape(inputs.size(), references.size(), "sari inputs/references");
  if (inputs.empty()) fail(ErrorCode::shape, "sari needs at least one row");

  std::array<OpCounts, kMaxOrder> keep{}, del{}, add{};
  for (std::size_t row = 0; row < inputs.size(); ++row) {
    const auto& refs = references[row];
    if (refs.empty()) fail(ErrorCode::shape, "empty reference set at row " + std::to_string(row));
    const double inv_refs = 1.0 / static_cast<double>(refs.size());
    for (std::size_t n = 1; n <= kMaxOrder; ++n) {
      const NgramSet in = ngram_set(inputs[row], n);
      const NgramSet out = ngram_set(outputs[row], n);
      std::size_t kept = 0, deleted = 0, added = 0;
      for (const auto& g : in) (out.count(g) ? kept : deleted) += 1;
      for (const auto& g : out) added += in.count(g) ? 0 : 1;

      double keep_target = 0, keep_correct = 0, del_target = 0, del_correct = 0, add_target = 0,
             add_correct = 0;
      for (const auto& ref : refs) {
        const NgramSet r = ngram_set(ref, n);
        for (const auto& g : in) {
          const bool in_ref = r.count(g) > 0;
          const bool in_out = out.count(g) > 0;
          if (in_ref) {
            keep_target += 1;
            if (in_out) keep_correct += 1;
          } else {
            del_target += 1;
            if (!in_out) del_correct += 1;
          }
        }
        for (const auto& g : r) {
          if (in.count(g)) continue;
          add_target += 1;
          if (out.count(g)) add_correct += 1;
        }
      }
      auto& k = keep[n - 1];
      k.candidate += static_cast<double>(kept);
      k.target += keep_target * inv_refs;
      k.correct += keep_correct * inv_refs;
      auto& d = del[n - 1];
      d.candidate += static_cast<double>(deleted);
      d.target += del_target * inv_refs;
      d.correct += del_correct * inv_refs;
      auto& a = add[n - 1];
      a.candidate += static_cast<double>(added);
      a.target += add_target * inv_refs;
      a.correct += add_correct * inv_refs;
    }
  }

  SariReport report;
  for (std::size_t n = 0; n < kMaxOrder; ++n) {
    report.f_keep += f1_of(keep[n], options.empty, false);
    report.f_del += f1_of(del[n], options.empty, options.deletion_precision_only);
    report.f_add += f1_of(add[n], options.empty, false);
  }
  report.f_keep *= 100.0 / kMaxOrder;
  report.f_del *= 100.0 / kMaxOrder;
  report.f_add *= 100.0 / kMaxOrder;
  report.sari = (report.f_keep + report.f_del + report.f_add) / 3.0;
  return report;
}

double bleu(std::span<const Sentence> outputs, const ReferenceSets& references) {
  check_shape(outputs.size(), references.size(), "bleu outputs/references");
  if (outputs.empty()) fail(ErrorCode::shape, "bleu needs at least one row");

  std::array<double, kMaxOrder> matches{}, totals{};
  double candidate_length = 0.0;
  double reference_length = 0.0;
  for (std::size_t row = 0; row < outputs.size(); ++row) {
    const auto& refs = references[row];
    if (refs.empty()) fail(ErrorCode::shape, "empty reference set at row " + std::to_string(row));
    const Sentence& out = outputs[row];
    candidate_length += static_cast<double>(out.size());
    // Closest reference length; ties go to the shorter reference.
    std::size_t best = refs.front().size();
    for (const auto& r : refs) {
      const auto diff = [&](std::size_t len) {
        return len > out.size() ? len - out.size() : out.size() - len;
      };
      if (diff(r.size()) < diff(best) || (diff(r.size()) == diff(best) && r.size() < best)) best = r.size();
    }
    reference_length += static_cast<double>(best);

    for (std::size_t n = 1; n <= kMaxOrder; ++n) {
      const NgramCounts cand = ngram_counts(out, n);
      NgramCounts max_ref;
      for (const auto& r : refs) {
        for (const auto& [g, c] : ngram_counts(r, n)) {
          auto& slot = max_ref[g];
          slot = std::max(slot, c);
        }
      }
      for (const auto& [g, c] : cand) {
        auto it = max_ref.find(g);
        if (it != max_ref.end()) matches[n - 1] += static_cast<double>(std::min(c, it->second));
        totals[n - 1] += static_cast<double>(c);
      }
    }
  }
  double log_precision = 0.0;
  for (std::size_t n = 0; n < kMaxOrder; ++n) {
    if (matches[n] == 0.0) return 0.0;
    log_precision += std::log(matches[n] / totals[n]);
  }
  log_precision /= static_cast<double>(kMaxOrder);
  const double brevity =
      candidate_length > reference_length ? 0.0 : 1.0 - reference_length / candidate_length;
  return 100.0 * std::exp(log_precision + brevity);
}

ReferenceSets single_references(std::span<const Sentence> references) {
  ReferenceSets out;
  out.reserve(references.size());
  for (const auto& r : references) out.push_back({r});
  return out;
}

}  // namespace btsimp
