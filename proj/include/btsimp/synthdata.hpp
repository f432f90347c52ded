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
#include <set>
#include <span>
#include <utility>
#include <vector>

#include "btsimp/rules.hpp"
#include "btsimp/text.hpp"

namespace btsimp {

// Toy language: simple sentences follow "DET [ADJ] NOUN VERB DET [ADJ] NOUN ."
// built from one-syllable words. A complex counterpart swaps every paired
// word for its polysyllabic synonym and inserts filler clauses, so the gold
// simplification is word substitution plus filler deletion.
struct ToyGrammarConfig {
  std::uint64_t seed = 1;
  std::size_t nouns_paired = 40;
  std::size_t nouns_shared = 16;
  std::size_t verbs_paired = 20;
  std::size_t verbs_shared = 8;
  std::size_t adjectives_paired = 20;
  std::size_t adjectives_shared = 8;
  std::size_t filler_clauses = 6;
  std::size_t filler_clause_tokens = 3;
  double adjective_prob = 0.4;
  std::size_t min_fillers = 1;  // filler clauses per complex sentence
  std::size_t max_fillers = 2;
  std::size_t n_parallel = 1000;  // aligned training pool for semi-supervision
  double rule_score = 0.9;
  std::size_t n_embedding = 5000;  // mixed-register sentences for the reward embeddings
  double embedding_mix = 0.5;      // chance each paired word takes its complex form there

  // Throws ConfigError.
  void validate() const;
};

// (complex, simple)
using SentencePair = std::pair<Sentence, Sentence>;

struct SynthData {
  Corpus simple{{}, ComplexityTag::simple};
  Corpus complex{{}, ComplexityTag::complex};
  std::vector<SentencePair> dev_pairs;
  std::vector<SentencePair> test_pairs;
  std::vector<SentencePair> parallel_pool;
  // complex word -> simple word, score rule_score
  std::vector<SimplificationRule> rules;
  std::set<Token> filler_tokens;
  // Unlabeled sentences mixing simple and complex forms; embedding training only.
  Corpus embedding{{}, ComplexityTag::unlabeled};
};

// Unpaired corpora, held-out pairs and the parallel pool come from disjoint
// sets of underlying simple sentences. Every token in held-out pairs occurs in
// the training corpora.
SynthData generate(const ToyGrammarConfig& config, std::size_t n_simple, std::size_t n_complex,
                   std::size_t n_pairs);

// Files: simple.txt, complex.txt, dev.pairs, test.pairs, parallel.pairs,
// rules.tsv and, when non-empty, embedding.txt. Pair files hold "complex<TAB>simple" per line.
void write_synthdata(const SynthData& data, const std::filesystem::path& dir);

std::vector<SentencePair> read_pairs(const std::filesystem::path& path);
void write_pairs(const std::filesystem::path& path, std::span<const SentencePair> pairs);

}  // namespace btsimp
