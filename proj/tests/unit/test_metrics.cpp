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

#include <cmath>

#include "btsimp/metrics.hpp"
#include "doctest.h"
#include "test_support.hpp"

using namespace btsimp;
using btsimp::testing::code_of;
using btsimp::testing::load_golden;
using btsimp::testing::S;
using btsimp::testing::sentences;

namespace {

ReferenceSets refs_from(const nlohmann::json& j) {
  ReferenceSets out;
  for (const auto& row : j) out.push_back(sentences(row.get<std::vector<std::string>>()));
  return out;
}

}  // namespace

TEST_SUITE("metrics") {
  TEST_CASE("syllable counts") {
    CHECK(count_syllables("cat") == 1);
    CHECK(count_syllables("tired") == 2);
    CHECK(count_syllables("table") == 2);
    CHECK(count_syllables("make") == 1);
    CHECK(count_syllables("the") == 1);
    CHECK(count_syllables("42") == 1);
    CHECK(count_syllables(",") == 1);
    for (const auto& c : load_golden("fkgl.json")["syllables"]) {
      CAPTURE(c["word"].get<std::string>());
      CHECK(count_syllables(c["word"].get<std::string>()) == c["syllables"].get<std::size_t>());
    }
  }

  TEST_CASE("fkgl formula and hand cases") {
    CHECK(fkgl_formula(10, 15, 1) == doctest::Approx(6.01).epsilon(1e-12));
    const auto st = fkgl(std::vector<Sentence>{S("The cat sat on the mat .")});
    CHECK(st.words == 6);
    CHECK(st.syllables == 6);
    CHECK(st.sentences == 1);
    CHECK(std::abs(st.fkgl - (-1.45)) < 1e-12);
    CHECK(code_of([] { fkgl(std::vector<Sentence>{}); }) == ErrorCode::degenerate_input);
    CHECK(code_of([] { fkgl(std::vector<Sentence>{S(". , !")}); }) == ErrorCode::degenerate_input);
  }

  TEST_CASE("fkgl golden cases") {
    const auto cases = load_golden("fkgl.json")["cases"];
    REQUIRE(cases.size() >= 20);
    for (const auto& c : cases) {
      CAPTURE(c["name"].get<std::string>());
      const auto st = fkgl(sentences(c["corpus"].get<std::vector<std::string>>()));
      CHECK(st.words == c["words"].get<std::size_t>());
      CHECK(st.syllables == c["syllables"].get<std::size_t>());
      CHECK(st.sentences == c["sentences"].get<std::size_t>());
      CHECK(std::abs(st.fkgl - c["fkgl"].get<double>()) <= 1e-9);
    }
  }

  TEST_CASE("sari golden cases") {
    const auto cases = load_golden("sari.json")["cases"];
    REQUIRE(cases.size() >= 20);
    for (const auto& c : cases) {
      CAPTURE(c["name"].get<std::string>());
      const auto r = sari(sentences(c["inputs"].get<std::vector<std::string>>()),
                          sentences(c["outputs"].get<std::vector<std::string>>()), refs_from(c["references"]));
      CHECK(std::abs(r.sari - c["sari"].get<double>()) <= 1e-9);
      CHECK(std::abs(r.f_keep - c["f_keep"].get<double>()) <= 1e-9);
      CHECK(std::abs(r.f_del - c["f_del"].get<double>()) <= 1e-9);
      CHECK(std::abs(r.f_add - c["f_add"].get<double>()) <= 1e-9);
    }
  }

  TEST_CASE("sari identity and disjoint output") {
    const auto s = sentences({"a b c d", "the cat sat"});
    const auto id = sari(s, s, single_references(s));
    CHECK(id.sari == 100.0);
    CHECK(id.f_keep == 100.0);
    CHECK(id.f_del == 100.0);
    CHECK(id.f_add == 100.0);

    // Long enough that every n-gram order has a non-empty keep target and add candidate.
    const auto r = sari(sentences({"a b c d e"}), sentences({"v w x y z"}), single_references(sentences({"a b c d q"})));
    CHECK(r.f_keep == 0.0);
    CHECK(r.f_add == 0.0);
  }

  TEST_CASE("sari options") {
    const auto in = sentences({"a b c d"});
    const auto out = sentences({"a b c d"});
    const auto refs = single_references(sentences({"a b c d"}));
    SariOptions zero;
    zero.empty = EmptySetConvention::always_zero;
    const auto z = sari(in, out, refs, zero);
    CHECK(z.f_del == 0.0);
    CHECK(z.f_add == 0.0);
    CHECK(z.f_keep == 100.0);

    // Output deletes "c" where the reference deletes "b c": precision 1, recall 1/2 on unigrams.
    SariOptions prec;
    prec.deletion_precision_only = true;
    const auto p = sari(sentences({"a b c"}), sentences({"a b"}), single_references(sentences({"a"})), prec);
    const auto f = sari(sentences({"a b c"}), sentences({"a b"}), single_references(sentences({"a"})));
    CHECK(p.f_del > f.f_del);
  }

  TEST_CASE("sari shape errors") {
    const auto a = sentences({"a b"});
    const auto b = sentences({"a b", "c"});
    CHECK(code_of([&] { sari(a, b, single_references(a)); }) == ErrorCode::shape);
    CHECK(code_of([&] { sari(a, a, ReferenceSets{{}}); }) == ErrorCode::shape);
  }

  TEST_CASE("sari stays within bounds on random inputs") {
    RandomSource rng(21, 0);
    const std::vector<Token> vocab = {"a", "b", "c", "d", "e"};
    auto rand_sentence = [&] {
      std::vector<Token> t;
      const std::size_t n = rng.uniform_index(7);
      for (std::size_t i = 0; i < n; ++i) t.push_back(vocab[rng.uniform_index(vocab.size())]);
      return Sentence(t);
    };
    for (int trial = 0; trial < 300; ++trial) {
      std::vector<Sentence> in, out;
      ReferenceSets refs;
      for (int row = 0; row < 3; ++row) {
        in.push_back(rand_sentence());
        out.push_back(rand_sentence());
        refs.push_back({rand_sentence(), rand_sentence()});
      }
      const auto r = sari(in, out, refs);
      for (double v : {r.sari, r.f_keep, r.f_del, r.f_add}) CHECK((v >= 0.0 && v <= 100.0));
      CHECK(std::abs(r.sari - (r.f_keep + r.f_del + r.f_add) / 3.0) < 1e-9);
    }
  }

  TEST_CASE("bleu golden cases") {
    const auto cases = load_golden("bleu.json")["cases"];
    REQUIRE(cases.size() >= 20);
    for (const auto& c : cases) {
      CAPTURE(c["name"].get<std::string>());
      const double b = bleu(sentences(c["outputs"].get<std::vector<std::string>>()), refs_from(c["references"]));
      CHECK(std::abs(b - c["bleu"].get<double>()) <= 1e-9);
    }
  }

  TEST_CASE("bleu identity, disjoint and brevity") {
    const auto s = sentences({"a b c d e", "the quick brown fox jumps"});
    CHECK(bleu(s, single_references(s)) == 100.0);
    CHECK(bleu(sentences({"x y z w"}), single_references(sentences({"a b c d"}))) == 0.0);
    const double shorter = bleu(sentences({"a b c d"}), single_references(sentences({"a b c d e f"})));
    CHECK(std::abs(shorter - 100.0 * std::exp(1.0 - 6.0 / 4.0)) < 1e-9);
  }
}
