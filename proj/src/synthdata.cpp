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

#include "btsimp/synthdata.hpp"

#include <algorithm>
#include <string>
#include <unordered_set>

#include "btsimp/error.hpp"
#include "btsimp/random.hpp"

namespace btsimp {

namespace {

constexpr std::size_t kEmbeddingVariants = 16;

constexpr std::string_view kOnsets[] = {"b", "d", "f", "g", "k", "l", "m", "n", "p", "r", "s", "t", "v", "z",
                                        "br", "dr", "gr", "pl", "st", "tr"};
constexpr std::string_view kVowels[] = {"a", "i", "o", "u"};
constexpr std::string_view kCodas[] = {"b", "d", "g", "k", "m", "n", "p", "t", "x", "st", "nd", "mp"};

template <std::size_t N>
std::string_view pick(const std::string_view (&arr)[N], RandomSource& rng) {
  return arr[rng.uniform_index(N)];
}

class WordMaker {
 public:
  explicit WordMaker(RandomSource& rng) : rng_(rng) {}

  // One vowel group, ending in a consonant.
  Token simple() {
    return fresh([this] {
      return std::string(pick(kOnsets, rng_)) + std::string(pick(kVowels, rng_)) + std::string(pick(kCodas, rng_));
    });
  }

  // `syllables` vowel groups, ending in a consonant.
  Token complex(std::size_t syllables) {
    return fresh([this, syllables] {
      std::string w;
      for (std::size_t i = 0; i < syllables; ++i) {
        w += pick(kOnsets, rng_);
        w += pick(kVowels, rng_);
      }
      w += pick(kCodas, rng_);
      return w;
    });
  }

 private:
  template <class F>
  Token fresh(F make) {
    for (int attempt = 0; attempt < 10000; ++attempt) {
      Token w = make();
      if (used_.insert(w).second) return w;
    }
    fail(ErrorCode::config, "toy lexicon exhausted");
  }

  RandomSource& rng_;
  std::set<Token> used_{"the", "a", "."};
};

struct Lexicon {
  std::vector<Token> nouns, verbs, adjectives;  // simple-side forms
  StringMap<Token> complex_of;                  // paired simple word -> complex synonym
  std::vector<std::vector<Token>> fillers;
};

Lexicon make_lexicon(const ToyGrammarConfig& c, RandomSource& rng) {
  WordMaker maker(rng);
  Lexicon lex;
  auto fill = [&](std::vector<Token>& out, std::size_t paired, std::size_t shared) {
    for (std::size_t i = 0; i < paired; ++i) {
      Token s = maker.simple();
      lex.complex_of.emplace(s, maker.complex(3 + rng.uniform_index(2)));
      out.push_back(std::move(s));
    }
    // Shared words are used verbatim on both sides.
    for (std::size_t i = 0; i < shared; ++i) out.push_back(maker.complex(2));
  };
  fill(lex.nouns, c.nouns_paired, c.nouns_shared);
  fill(lex.verbs, c.verbs_paired, c.verbs_shared);
  fill(lex.adjectives, c.adjectives_paired, c.adjectives_shared);
  for (std::size_t i = 0; i < c.filler_clauses; ++i) {
    std::vector<Token> clause;
    for (std::size_t k = 0; k < c.filler_clause_tokens; ++k) clause.push_back(maker.complex(3 + rng.uniform_index(2)));
    lex.fillers.push_back(std::move(clause));
  }
  return lex;
}

struct Skeleton {
  Sentence simple;
  std::size_t subject_end = 0;  // index just past the subject noun phrase
};

Skeleton draw_skeleton(const ToyGrammarConfig& c, const Lexicon& lex, RandomSource& rng) {
  std::vector<Token> t;
  auto noun_phrase = [&] {
    t.push_back(rng.bernoulli(0.5) ? "the" : "a");
    if (rng.bernoulli(c.adjective_prob)) t.push_back(lex.adjectives[rng.uniform_index(lex.adjectives.size())]);
    t.push_back(lex.nouns[rng.uniform_index(lex.nouns.size())]);
  };
  noun_phrase();
  const std::size_t subject_end = t.size();
  t.push_back(lex.verbs[rng.uniform_index(lex.verbs.size())]);
  noun_phrase();
  t.push_back(".");
  return {Sentence(std::move(t)), subject_end};
}

std::size_t filler_count(const ToyGrammarConfig& c, RandomSource& rng) {
  return c.min_fillers + rng.uniform_index(c.max_fillers - c.min_fillers + 1);
}

// Renders a skeleton, swapping each paired word for its complex synonym with
// probability p_sub and inserting n_fill filler clauses.
Sentence render(const Lexicon& lex, const Skeleton& sk, double p_sub, std::size_t n_fill, RandomSource& rng) {
  std::vector<Token> words;
  for (const auto& w : sk.simple) {
    auto it = lex.complex_of.find(w);
    const bool swap = it != lex.complex_of.end() && (p_sub >= 1.0 || rng.bernoulli(p_sub));
    words.push_back(swap ? it->second : w);
  }
  // Slot 0: after the subject; slot 1: before the final period.
  std::vector<std::size_t> slots{0, 1};
  rng.shuffle(slots);
  slots.resize(std::min<std::size_t>(n_fill, 2));
  std::sort(slots.begin(), slots.end());
  std::vector<Token> out;
  auto insert_filler = [&] {
    const auto& clause = lex.fillers[rng.uniform_index(lex.fillers.size())];
    out.insert(out.end(), clause.begin(), clause.end());
  };
  for (std::size_t i = 0; i < words.size(); ++i) {
    if (i == sk.subject_end && std::find(slots.begin(), slots.end(), 0) != slots.end()) insert_filler();
    if (i + 1 == words.size() && std::find(slots.begin(), slots.end(), 1) != slots.end()) insert_filler();
    out.push_back(words[i]);
  }
  return Sentence(std::move(out));
}

Sentence complexify(const ToyGrammarConfig& c, const Lexicon& lex, const Skeleton& sk, RandomSource& rng) {
  const std::size_t n_fill = filler_count(c, rng);
  return render(lex, sk, 1.0, n_fill, rng);
}

}  // namespace

void ToyGrammarConfig::validate() const {
  if (nouns_paired + nouns_shared == 0 || verbs_paired + verbs_shared == 0 ||
      adjectives_paired + adjectives_shared == 0) {
    fail(ErrorCode::config, "every word class needs at least one word");
  }
  if (filler_clauses == 0 || filler_clause_tokens == 0) fail(ErrorCode::config, "need at least one filler clause");
  if (min_fillers < 1 || min_fillers > max_fillers || max_fillers > 2) {
    fail(ErrorCode::config, "filler clause count must satisfy 1 <= min <= max <= 2");
  }
  if (!(adjective_prob >= 0.0 && adjective_prob <= 1.0)) fail(ErrorCode::config, "adjective_prob outside [0,1]");
  if (!(rule_score >= 0.0 && rule_score <= 1.0)) fail(ErrorCode::config, "rule_score outside [0,1]");
  if (!(embedding_mix >= 0.0 && embedding_mix <= 1.0)) fail(ErrorCode::config, "embedding_mix outside [0,1]");
}

SynthData generate(const ToyGrammarConfig& config, std::size_t n_simple, std::size_t n_complex, std::size_t n_pairs) {
  config.validate();
  if (n_simple < 1 || n_complex < 1 || n_pairs < 1) fail(ErrorCode::config, "corpus sizes must be positive");

  RandomSource lex_rng = make_rng(config.seed, stream_id(StreamKind::synthdata, 0));
  const Lexicon lex = make_lexicon(config, lex_rng);
  RandomSource rng = make_rng(config.seed, stream_id(StreamKind::synthdata, 1));

  std::unordered_set<std::string> used;
  const std::size_t max_attempts =
      200 * (n_simple + n_complex + 2 * n_pairs + config.n_parallel + config.n_embedding) + 10000;
  std::size_t attempts = 0;
  auto fresh_skeleton = [&] {
    while (true) {
      if (++attempts > max_attempts) fail(ErrorCode::config, "toy grammar too small for the requested corpus sizes");
      Skeleton sk = draw_skeleton(config, lex, rng);
      if (used.insert(sk.simple.join()).second) return sk;
    }
  };

  SynthData data;
  std::vector<Sentence> simple, complex;
  std::set<Token> seen;
  for (std::size_t i = 0; i < n_simple; ++i) {
    simple.push_back(fresh_skeleton().simple);
    seen.insert(simple.back().begin(), simple.back().end());
  }
  for (std::size_t i = 0; i < n_complex; ++i) {
    complex.push_back(complexify(config, lex, fresh_skeleton(), rng));
    seen.insert(complex.back().begin(), complex.back().end());
  }
  data.simple = Corpus(std::move(simple), ComplexityTag::simple);
  data.complex = Corpus(std::move(complex), ComplexityTag::complex);

  auto covered = [&seen](const Sentence& s) {
    return std::all_of(s.begin(), s.end(), [&seen](const Token& t) { return seen.count(t) > 0; });
  };
  auto make_pairs = [&](std::size_t n, bool require_coverage) {
    std::vector<SentencePair> pairs;
    while (pairs.size() < n) {
      const Skeleton sk = fresh_skeleton();
      Sentence c = complexify(config, lex, sk, rng);
      if (require_coverage && (!covered(c) || !covered(sk.simple))) continue;
      pairs.emplace_back(std::move(c), sk.simple);
    }
    return pairs;
  };
  data.dev_pairs = make_pairs(n_pairs, true);
  data.test_pairs = make_pairs(n_pairs, true);
  data.parallel_pool = make_pairs(config.n_parallel, true);

  // Mixed-register sentences on their own stream. Each skeleton is rendered
  // several times with independent register choices, so both members of a
  // synonym pair are seen in the same sentence frames.
  RandomSource mix_rng = make_rng(config.seed, stream_id(StreamKind::synthdata, 2));
  std::vector<Sentence> mixed;
  Skeleton sk;
  for (std::size_t i = 0; i < config.n_embedding; ++i) {
    if (i % kEmbeddingVariants == 0) {
      do {
        if (++attempts > max_attempts) fail(ErrorCode::config, "toy grammar too small for the requested corpus sizes");
        sk = draw_skeleton(config, lex, mix_rng);
      } while (!used.insert(sk.simple.join()).second);
    }
    const std::size_t n_fill = mix_rng.bernoulli(0.5) ? filler_count(config, mix_rng) : 0;
    mixed.push_back(render(lex, sk, config.embedding_mix, n_fill, mix_rng));
  }
  data.embedding = Corpus(std::move(mixed), ComplexityTag::unlabeled);

  for (const auto& [s, c] : lex.complex_of) data.rules.push_back({config.rule_score, Sentence{c}, Sentence{s}});
  std::sort(data.rules.begin(), data.rules.end(),
            [](const auto& a, const auto& b) { return a.complex_phrase < b.complex_phrase; });
  for (const auto& clause : lex.fillers) data.filler_tokens.insert(clause.begin(), clause.end());
  return data;
}

std::vector<SentencePair> read_pairs(const std::filesystem::path& path) {
  const std::string content = read_file(path);
  std::vector<SentencePair> pairs;
  std::size_t pos = 0, line_no = 0;
  while (pos < content.size()) {
    std::size_t eol = content.find('\n', pos);
    if (eol == std::string::npos) eol = content.size();
    std::string_view line(content.data() + pos, eol - pos);
    pos = eol + 1;
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string_view::npos) continue;
    if (!is_valid_utf8(line)) fail(ErrorCode::encoding, path.string() + ": invalid UTF-8 at line " + std::to_string(line_no));
    const auto tab = line.find('\t');
    if (tab == std::string_view::npos || line.find('\t', tab + 1) != std::string_view::npos) {
      fail(ErrorCode::parse, path.string() + ": line " + std::to_string(line_no) + " is not 'complex<TAB>simple'");
    }
    pairs.emplace_back(tokenize(line.substr(0, tab)), tokenize(line.substr(tab + 1)));
  }
  return pairs;
}

void write_pairs(const std::filesystem::path& path, std::span<const SentencePair> pairs) {
  std::string out;
  for (const auto& [c, s] : pairs) {
    out += c.join();
    out.push_back('\t');
    out += s.join();
    out.push_back('\n');
  }
  write_file(path, out);
}

void write_synthdata(const SynthData& data, const std::filesystem::path& dir) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) fail(ErrorCode::io, "cannot create " + dir.string() + ": " + ec.message());
  write_corpus(dir / "simple.txt", data.simple.sentences());
  write_corpus(dir / "complex.txt", data.complex.sentences());
  write_pairs(dir / "dev.pairs", data.dev_pairs);
  write_pairs(dir / "test.pairs", data.test_pairs);
  write_pairs(dir / "parallel.pairs", data.parallel_pool);
  if (!data.embedding.empty()) write_corpus(dir / "embedding.txt", data.embedding.sentences());
  write_file(dir / "rules.tsv", serialize_rules(data.rules));
}

}  // namespace btsimp
