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

#include "btsimp/seqmodel.hpp"
#include "doctest.h"
#include "test_support.hpp"

using namespace btsimp;
using btsimp::testing::code_of;
using btsimp::testing::S;
using btsimp::testing::scratch_dir;

namespace {

ModelVocabulary micro_vocab() {
  std::vector<Token> words;
  for (int i = 0; i < 12; ++i) words.push_back("w" + std::to_string(i));
  return ModelVocabulary(words);
}

constexpr TranslationDirection kAll[] = {TranslationDirection::s2s, TranslationDirection::c2c,
                                         TranslationDirection::s2c, TranslationDirection::c2s};

// Max relative error of the analytic gradient against central differences.
// Components where both values are below `floor` in magnitude are compared
// on the floor scale instead.
double gradient_error(const DualDecoderModel& base, const std::function<double(const DualDecoderModel&)>& loss,
                      const Eigen::VectorXd& analytic, double h = 1e-4, double floor = 1e-6) {
  DualDecoderModel m = base;
  double worst = 0.0;
  for (Eigen::Index i = 0; i < m.params.size(); ++i) {
    const double orig = m.params[i];
    m.params[i] = orig + h;
    const double up = loss(m);
    m.params[i] = orig - h;
    const double down = loss(m);
    m.params[i] = orig;
    const double numeric = (up - down) / (2.0 * h);
    const double scale = std::max({std::abs(numeric), std::abs(analytic[i]), floor});
    worst = std::max(worst, std::abs(numeric - analytic[i]) / scale);
  }
  return worst;
}

}  // namespace

TEST_SUITE("seqmodel") {
  TEST_CASE("vocabulary") {
    const auto v = micro_vocab();
    CHECK(v.size() == 13);
    CHECK(v.bos() == 13);
    CHECK(v.id("w0") == 1);
    CHECK(v.word(1) == "w0");
    CHECK(v.decode(v.encode(S("w3 w1 w7"))) == S("w3 w1 w7"));
    CHECK(code_of([&] { v.id("nope"); }) == ErrorCode::unknown_token);
    std::vector<Corpus> corpora = {Corpus({S("b a"), S("c")}, ComplexityTag::simple)};
    CHECK(ModelVocabulary::from_corpora(corpora).words() == std::vector<Token>{"a", "b", "c"});
  }

  TEST_CASE("init is deterministic and bounded") {
    const auto v = micro_vocab();
    const auto a = init_model(v, {6, 8}, 1);
    const auto b = init_model(v, {6, 8}, 1);
    const auto c = init_model(v, {6, 8}, 2);
    CHECK(btsimp::testing::bitwise_equal(a.params, b.params));
    CHECK(a.params != c.params);
    CHECK(a.params.allFinite());
    for (const auto& blk : a.layout.blocks()) {
      for (std::size_t i = 0; i < blk.size(); ++i) {
        CHECK(std::abs(a.params[static_cast<Eigen::Index>(blk.offset + i)]) <= blk.init_bound);
      }
    }
    CHECK(a.layout.total() == a.param_count());
  }

  TEST_CASE("analytic nll gradients match finite differences in every direction") {
    const auto v = micro_vocab();
    const auto model = init_model(v, {6, 8}, 3);
    const Sentence src = S("w1 w4 w2 w9");
    const Sentence tgt = S("w4 w2 w11");
    for (auto d : kAll) {
      CAPTURE(direction_name(d));
      const auto r = nll_and_grad(model, src, tgt, d);
      const double err = gradient_error(model, [&](const DualDecoderModel& m) { return nll_and_grad(m, src, tgt, d).loss; },
                                        r.gradient);
      MESSAGE(direction_name(d) << " max relative error " << err);
      CHECK(err <= 1e-3);
    }
  }

  TEST_CASE("uniform output layer gives ln V per step") {
    const auto v = micro_vocab();
    auto model = init_model(v, {6, 8}, 4);
    model.layout.view(model.params, Block::out_w).setZero();
    model.layout.view(model.params, Block::out_b).setZero();
    const auto r = nll_and_grad(model, S("w1 w2"), S("w3 w4 w5"), TranslationDirection::c2s);
    CHECK(std::abs(r.loss - std::log(double(v.size()))) < 1e-12);
  }

  TEST_CASE("fitting a one-word vocabulary drives nll to zero") {
    const ModelVocabulary v({"only"});
    auto model = init_model(v, {4, 4}, 5);
    AdamState adam = AdamState::for_model(model);
    const Sentence s = S("only only");
    double loss = 0.0;
    for (int i = 0; i < 400; ++i) {
      const auto r = nll_and_grad(model, s, s, TranslationDirection::s2s);
      loss = r.loss;
      adam_step(model, r.gradient, adam, 0.05);
    }
    CHECK(loss < 1e-3);
  }

  TEST_CASE("greedy decoding respects length bounds and is repeatable") {
    const auto v = micro_vocab();
    const auto model = init_model(v, {6, 8}, 6);
    RandomSource rng(61, 0);
    for (int i = 0; i < 50; ++i) {
      std::vector<Token> toks;
      for (std::size_t k = 0, n = 1 + rng.uniform_index(6); k < n; ++k) toks.push_back(v.words()[rng.uniform_index(12)]);
      const Sentence src(toks);
      const std::size_t max_len = 1 + rng.uniform_index(8);
      const auto a = decode_greedy(model, src, TranslationDirection::c2s, max_len);
      const auto b = decode_greedy(model, src, TranslationDirection::c2s, max_len);
      CHECK(a.tokens == b.tokens);
      CHECK(a.tokens.size() <= max_len);
      CHECK(a.token_logprobs.size() == a.tokens.size() + (a.ended ? 1 : 0));
      const auto m = decode_greedy(model, src, TranslationDirection::c2s, max_len, 1);
      CHECK(m.tokens.size() >= 1);
    }
  }

  TEST_CASE("sampling is reproducible and self-consistent") {
    const auto v = micro_vocab();
    const auto model = init_model(v, {6, 8}, 7);
    const Sentence src = S("w2 w3 w5");
    for (std::uint64_t stream = 0; stream < 30; ++stream) {
      RandomSource r1(71, stream), r2(71, stream);
      const auto a = decode_sample(model, src, TranslationDirection::s2c, r1, 10);
      const auto b = decode_sample(model, src, TranslationDirection::s2c, r2, 10);
      CHECK(a.tokens == b.tokens);
      CHECK(a.tokens.size() <= 10);
      const double recomputed = sequence_log_prob(model, src, a.tokens, TranslationDirection::s2c, a.ended);
      CHECK(std::abs(recomputed - a.total_logprob()) <= 1e-9);
    }
  }

  TEST_CASE("policy gradient identity, zero advantage and finite differences") {
    const auto v = micro_vocab();
    const auto model = init_model(v, {6, 8}, 8);
    const Sentence src = S("w0 w6 w7");
    for (std::uint64_t stream = 0; stream < 10; ++stream) {
      RandomSource rng(81, stream);
      const auto d = TranslationDirection::c2s;
      const auto sample = decode_sample(model, src, d, rng, 6);
      CHECK(pg_grad(model, src, sample, 0.0, d).isZero(0.0));

      const double adv = 0.37;
      const auto g = pg_grad(model, src, sample, adv, d);
      Eigen::VectorXd expected = Eigen::VectorXd::Zero(g.size());
      const auto s_ids = model.vocab.encode(src);
      const auto t_ids = model.vocab.encode(sample.tokens);
      accumulate_sequence_gradient(model, s_ids, t_ids, sample.ended, Side::simple, adv, expected);
      CHECK((g - expected).cwiseAbs().maxCoeff() <= 1e-12);
      if (sample.ended && !sample.tokens.empty()) {
        const auto nll = nll_and_grad(model, src, sample.tokens, d);
        const double steps = double(sample.tokens.size() + 1);
        CHECK((g - adv * steps * nll.gradient).cwiseAbs().maxCoeff() <= 1e-12);
      }
      const double err = gradient_error(
          model,
          [&](const DualDecoderModel& m) { return -adv * sequence_log_prob(m, src, sample.tokens, d, sample.ended); },
          g);
      CHECK(err <= 1e-3);
    }
  }

  TEST_CASE("a positive-advantage step raises the sample's log-probability") {
    const auto v = micro_vocab();
    auto model = init_model(v, {6, 8}, 9);
    const Sentence src = S("w5 w1");
    RandomSource rng(91, 0);
    const auto d = TranslationDirection::s2c;
    const auto sample = decode_sample(model, src, d, rng, 6);
    const double before = sequence_log_prob(model, src, sample.tokens, d, sample.ended);
    AdamState adam = AdamState::for_model(model);
    adam_step(model, pg_grad(model, src, sample, 0.5, d), adam, 1e-3);
    CHECK(sequence_log_prob(model, src, sample.tokens, d, sample.ended) > before);
  }

  TEST_CASE("adam") {
    const auto v = micro_vocab();
    auto model = init_model(v, {4, 4}, 10);
    const Eigen::VectorXd before = model.params;
    AdamState st = AdamState::for_model(model);
    adam_step(model, Eigen::VectorXd::Zero(model.params.size()), st, 0.1);
    CHECK(btsimp::testing::bitwise_equal(model.params, before));

    Eigen::VectorXd g = Eigen::VectorXd::Zero(model.params.size());
    g[0] = 1.0;
    AdamState fresh = AdamState::for_model(model);
    const double p0 = model.params[0];
    adam_step(model, g, fresh, 0.1);
    CHECK(std::abs((model.params[0] - p0) - (-0.1 / (1.0 + AdamState::kEpsilon))) < 1e-15);

    Eigen::VectorXd bad = g;
    bad[1] = std::nan("");
    CHECK(code_of([&] { adam_step(model, bad, fresh, 0.1); }) == ErrorCode::numeric);
    CHECK(code_of([&] { adam_step(model, Eigen::VectorXd::Zero(3), fresh, 0.1); }) == ErrorCode::shape);

    auto m1 = init_model(v, {4, 4}, 11), m2 = m1;
    AdamState s1 = AdamState::for_model(m1), s2 = s1;
    for (int i = 0; i < 5; ++i) {
      const auto r1 = nll_and_grad(m1, S("w1 w2"), S("w2"), TranslationDirection::s2s);
      const auto r2 = nll_and_grad(m2, S("w1 w2"), S("w2"), TranslationDirection::s2s);
      adam_step(m1, r1.gradient, s1, 0.01);
      adam_step(m2, r2.gradient, s2, 0.01);
    }
    CHECK(btsimp::testing::bitwise_equal(m1.params, m2.params));
    CHECK(s1 == s2);
  }

  TEST_CASE("overfitting a copy task") {
    std::vector<Token> words;
    for (int i = 0; i < 10; ++i) words.push_back("t" + std::to_string(i));
    const ModelVocabulary v(words);
    auto model = init_model(v, {16, 16}, 12);
    AdamState adam = AdamState::for_model(model);
    RandomSource rng(121, 0);
    std::vector<Sentence> pairs;
    for (int i = 0; i < 50; ++i) {
      std::vector<Token> t;
      for (std::size_t k = 0, n = 2 + rng.uniform_index(3); k < n; ++k) t.push_back(words[rng.uniform_index(10)]);
      pairs.emplace_back(t);
    }
    for (int step = 0; step < 1500; ++step) {
      Eigen::VectorXd g = Eigen::VectorXd::Zero(model.params.size());
      for (int b = 0; b < 10; ++b) {
        const auto& s = pairs[(step * 10 + b) % pairs.size()];
        g += nll_and_grad(model, s, s, TranslationDirection::c2c).gradient / 10.0;
      }
      adam_step(model, g, adam, 5e-3);
    }
    int exact = 0;
    for (const auto& s : pairs) exact += decode_greedy(model, s, TranslationDirection::c2c, default_max_len(s.size())).tokens == s;
    MESSAGE("copy accuracy " << exact << "/50");
    CHECK(exact >= 48);

    int agree = 0;
    RandomSource srng(122, 0);
    const auto greedy = decode_greedy(model, pairs[0], TranslationDirection::c2c, 10);
    for (int i = 0; i < 200; ++i) agree += decode_sample(model, pairs[0], TranslationDirection::c2c, srng, 10).tokens == greedy.tokens;
    CHECK(agree >= 180);
  }

  TEST_CASE("checkpoint round trip and corruption") {
    const auto v = micro_vocab();
    auto model = init_model(v, {6, 8}, 13);
    AdamState adam = AdamState::for_model(model);
    adam_step(model, nll_and_grad(model, S("w1"), S("w2"), TranslationDirection::c2s).gradient, adam, 0.01);
    auto dir = scratch_dir("checkpoint");
    save_checkpoint(model, adam, dir / "m.ckpt", {3, 42});
    const Checkpoint back = load_checkpoint(dir / "m.ckpt");
    CHECK(btsimp::testing::bitwise_equal(back.model.params, model.params));
    CHECK(back.adam == adam);
    CHECK(back.progress.epoch == 3);
    CHECK(back.progress.global_step == 42);
    CHECK(back.model.vocab == model.vocab);
    RandomSource rng(131, 0);
    for (int i = 0; i < 20; ++i) {
      std::vector<Token> t;
      for (std::size_t k = 0, n = 1 + rng.uniform_index(5); k < n; ++k) t.push_back(v.words()[rng.uniform_index(12)]);
      const Sentence s(t);
      CHECK(decode_greedy(back.model, s, TranslationDirection::c2s, 12).tokens ==
            decode_greedy(model, s, TranslationDirection::c2s, 12).tokens);
    }

    const std::string bytes = read_file(dir / "m.ckpt");
    write_file(dir / "short.ckpt", bytes.substr(0, bytes.size() / 2));
    CHECK(code_of([&] { load_checkpoint(dir / "short.ckpt"); }) == ErrorCode::checkpoint);
    std::string bumped = bytes;
    // The version tag follows the 8-byte magic.
    bumped[8] = static_cast<char>(bumped[8] + 1);
    write_file(dir / "bumped.ckpt", bumped);
    CHECK(code_of([&] { load_checkpoint(dir / "bumped.ckpt"); }) == ErrorCode::checkpoint);
    CHECK(code_of([&] { load_checkpoint(dir / "absent.ckpt"); }) == ErrorCode::checkpoint);
  }
}
