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
#include <span>
#include <string_view>
#include <vector>

#include "btsimp/text.hpp"

namespace btsimp {

struct SariReport {
  double sari = 0.0;
  double f_keep = 0.0;
  double f_del = 0.0;
  double f_add = 0.0;
};

struct ReadabilityStats {
  std::size_t words = 0;
  std::size_t syllables = 0;
  std::size_t sentences = 0;
  double fkgl = 0.0;
};

// Vowel-group syllable heuristic. Tokens without letters count one syllable.
std::size_t count_syllables(std::string_view word);

// True when the token contains at least one ASCII letter or digit.
bool is_word(std::string_view token);

// 0.39 * words/sentences + 11.8 * syllables/words - 15.59.
double fkgl_formula(std::size_t words, std::size_t syllables, std::size_t sentences);

// Throws DegenerateInput when the corpus has no word tokens.
ReadabilityStats fkgl(std::span<const Sentence> corpus);

// References are one set per corpus row.
using ReferenceSets = std::vector<std::vector<Sentence>>;

// How 0/0 ratios are resolved. `vacuous_one`: precision, recall and F1 are 1
// when both the candidate set and the target set are empty; 0 otherwise.
// `always_zero`: every 0/0 is 0.
enum class EmptySetConvention { vacuous_one, always_zero };

struct SariOptions {
  EmptySetConvention empty = EmptySetConvention::vacuous_one;
  // Score the delete operation by precision instead of F1.
  bool deletion_precision_only = false;
};

// Corpus-level SARI over n-gram orders 1..4. Throws ShapeError on length
// mismatch or an empty reference set.
SariReport sari(std::span<const Sentence> inputs, std::span<const Sentence> outputs,
                const ReferenceSets& references, const SariOptions& options = {});

// Corpus-level BLEU-4, no smoothing, closest-length brevity penalty.
double bleu(std::span<const Sentence> outputs, const ReferenceSets& references);

// Wraps single references into one-element reference sets.
ReferenceSets single_references(std::span<const Sentence> references);

}  // namespace btsimp
