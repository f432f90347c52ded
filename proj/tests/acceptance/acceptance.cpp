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

// End-to-end acceptance checks. Prints one PASS/FAIL line per criterion and
// exits non-zero when any criterion fails.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <functional>
#include <iostream>
#include <map>
#include <numeric>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "btsimp/complexity.hpp"
#include "btsimp/error.hpp"
#include "btsimp/lm.hpp"
#include "btsimp/metrics.hpp"
#include "btsimp/noise.hpp"
#include "btsimp/random.hpp"
#include "btsimp/reward.hpp"
#include "btsimp/rules.hpp"
#include "btsimp/seqmodel.hpp"
#include "btsimp/synthdata.hpp"
#include "btsimp/trainer.hpp"
#include "json.hpp"

namespace fs = std::filesystem;
using namespace btsimp;

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

struct Outcome {
  bool pass = false;
  std::string detail;
};

// Collects failed sub-checks so one line can explain the verdict.
class Checks {
 public:
  void expect(bool ok, const std::string& what) {
    if (!ok) failures_.push_back(what);
  }
  void note(const std::string& s) { notes_.push_back(s); }
  Outcome outcome() const {
    std::ostringstream out;
    for (std::size_t i = 0; i < notes_.size(); ++i) out << (i ? "; " : "") << notes_[i];
    for (const auto& f : failures_) out << "; failed: " << f;
    return {failures_.empty(), out.str()};
  }

 private:
  std::vector<std::string> failures_;
  std::vector<std::string> notes_;
};

std::string sci(double v) {
  std::ostringstream out;
  out.precision(2);
  out << std::scientific << v;
  return out.str();
}

std::string fmt(double v, int precision = 4) {
  std::ostringstream out;
  out.precision(precision);
  out << std::fixed << v;
  return out.str();
}

Sentence S(const std::string& line) { return line.empty() ? Sentence{} : tokenize(line); }

std::vector<Sentence> sentences(const std::vector<std::string>& lines) {
  std::vector<Sentence> out;
  for (const auto& l : lines) out.push_back(S(l));
  return out;
}

nlohmann::json golden(const std::string& name) {
  return nlohmann::json::parse(read_file(fs::path(BTSIMP_TEST_GOLDEN_DIR) / name));
}

ReferenceSets refs_from(const nlohmann::json& j) {
  ReferenceSets out;
  for (const auto& row : j) out.push_back(sentences(row.get<std::vector<std::string>>()));
  return out;
}

// --- 1: metric oracles ------------------------------------------------------

Outcome metric_oracles() {
  Checks c;
  const auto sari_cases = golden("sari.json")["cases"];
  const auto bleu_cases = golden("bleu.json")["cases"];
  const auto fkgl_cases = golden("fkgl.json")["cases"];
  c.expect(sari_cases.size() >= 20 && bleu_cases.size() >= 20 && fkgl_cases.size() >= 20, "at least 20 cases each");

  double worst_sari = 0.0, worst_bleu = 0.0, worst_fkgl = 0.0;
  for (const auto& k : sari_cases) {
    const auto r = sari(sentences(k["inputs"].get<std::vector<std::string>>()),
                        sentences(k["outputs"].get<std::vector<std::string>>()), refs_from(k["references"]));
    for (const auto& [field, value] : {std::pair{"sari", r.sari}, {"f_keep", r.f_keep}, {"f_del", r.f_del},
                                       {"f_add", r.f_add}}) {
      worst_sari = std::max(worst_sari, std::abs(value - k[field].get<double>()));
    }
  }
  for (const auto& k : bleu_cases) {
    const double b = bleu(sentences(k["outputs"].get<std::vector<std::string>>()), refs_from(k["references"]));
    worst_bleu = std::max(worst_bleu, std::abs(b - k["bleu"].get<double>()));
  }
  for (const auto& k : fkgl_cases) {
    const auto st = fkgl(sentences(k["corpus"].get<std::vector<std::string>>()));
    worst_fkgl = std::max(worst_fkgl, std::abs(st.fkgl - k["fkgl"].get<double>()));
  }
  c.note(std::to_string(sari_cases.size()) + "/" + std::to_string(bleu_cases.size()) + "/" +
         std::to_string(fkgl_cases.size()) + " SARI/BLEU/FKGL cases, max abs error " + sci(worst_sari) +
         "/" + sci(worst_bleu) + "/" + sci(worst_fkgl));
  c.expect(worst_sari <= 1e-9, "SARI agreement");
  c.expect(worst_bleu <= 1e-9, "BLEU agreement");
  c.expect(worst_fkgl <= 1e-9, "FKGL agreement");

  const auto corpus = sentences({"the quick brown fox jumps over the lazy dog", "a b c d e f",
                                 "completely exhausted people often feel weary by night"});
  const double id_sari = sari(corpus, corpus, single_references(corpus)).sari;
  const double id_bleu = bleu(corpus, single_references(corpus));
  c.note("identity SARI " + fmt(id_sari) + ", BLEU " + fmt(id_bleu));
  c.expect(id_sari == 100.0, "identity SARI is 100");
  c.expect(id_bleu == 100.0, "identity BLEU is 100");
  return c.outcome();
}

// --- 2: noise statistics ----------------------------------------------------

constexpr int kNoiseTrials = 10000;

std::map<Token, int> bag(std::span<const Token> tokens) {
  std::map<Token, int> out;
  for (const auto& t : tokens) ++out[t];
  return out;
}

Outcome noise_statistics() {
  Checks c;
  const NoiseConfig nc;  // p_rep 0.9, p_del 0.6, additive share [0.25, 0.35], k 3

  // Replacement: four matched single-word phrases per sentence, in each
  // direction. A replaced token is detectable because every candidate differs.
  {
    const std::vector<SimplificationRule> rules = {
        {0.9, S("weary"), S("tired")}, {0.9, S("fatigued"), S("tired")}, {0.9, S("canine"), S("dog")},
        {0.9, S("residence"), S("home")}, {0.9, S("commence"), S("start")}};
    const RuleTable table = build_rule_table(rules);
    struct Case {
      Direction dir;
      Sentence s;
      std::vector<std::size_t> matched;
    };
    const Case cases[] = {
        {Direction::reverse, S("the tired dog went home to start a nap"), {1, 2, 4, 6}},
        {Direction::forward, S("a weary canine will commence to leave its residence"), {1, 2, 4, 8}},
    };
    RandomSource rng(2001, 0);
    for (const auto& k : cases) {
      std::size_t replaced = 0, total = 0;
      for (int trial = 0; trial < kNoiseTrials; ++trial) {
        const Sentence out = substitute(k.s, table, k.dir, nc.p_rep, rng);
        if (out.size() != k.s.size()) {
          c.expect(false, "single-word substitution kept the length");
          break;
        }
        for (std::size_t i : k.matched) {
          ++total;
          replaced += out[i] != k.s[i];
        }
      }
      const double rate = double(replaced) / double(total);
      c.note(std::string(k.dir == Direction::forward ? "forward" : "reverse") + " replacement rate " + fmt(rate));
      c.expect(std::abs(rate - nc.p_rep) <= 0.02, "replacement rate within 0.02 of p_rep");
    }
  }

  // Deletion: five frequent and five rare tokens, so the keep-one fallback
  // never triggers.
  {
    Vocabulary::CountMap counts;
    for (int i = 0; i < 5; ++i) counts["f" + std::to_string(i)] = 1000;
    for (int i = 0; i < 5; ++i) counts["r" + std::to_string(i)] = 2;
    const Vocabulary vocab(counts, 100);
    const Sentence s = S("f0 r0 f1 r1 f2 r2 f3 r3 f4 r4");
    RandomSource rng(2002, 0);
    std::size_t deleted = 0, total = 0;
    bool rare_kept = true;
    for (int trial = 0; trial < kNoiseTrials; ++trial) {
      const Sentence out = drop_frequent(s, vocab, nc.p_del, rng);
      std::size_t frequent_left = 0, rare_left = 0;
      for (const auto& t : out) (t[0] == 'f' ? frequent_left : rare_left) += 1;
      rare_kept &= rare_left == 5;
      deleted += 5 - frequent_left;
      total += 5;
    }
    const double rate = double(deleted) / double(total);
    c.note("deletion rate " + fmt(rate));
    c.expect(std::abs(rate - nc.p_del) <= 0.02, "deletion rate within 0.02 of p_del");
    c.expect(rare_kept, "rare tokens are never deleted");
  }

  // Additive share through the simple-side pipeline without substitution.
  {
    NoiseConfig additive = nc;
    additive.preset = NoisePreset::additive;
    std::vector<Token> donor_tokens;
    for (int i = 0; i < 80; ++i) donor_tokens.push_back("d" + std::to_string(i));
    const Sentence donor(donor_tokens);
    const RuleTable empty_table;
    const Vocabulary vocab;
    RandomSource rng(2003, 0);
    std::size_t in_bounds = 0;
    double share_sum = 0.0;
    for (int trial = 0; trial < kNoiseTrials; ++trial) {
      const std::size_t n = 4 + rng.uniform_index(17);
      std::vector<Token> toks;
      for (std::size_t i = 0; i < n; ++i) toks.push_back("s" + std::to_string(i));
      const Sentence out = noise_simple(Sentence(toks), donor, empty_table, additive, vocab, rng);
      std::size_t m = 0;
      for (const auto& t : out) m += t[0] == 'd';
      const double share = double(m) / double(out.size());
      share_sum += share;
      // One token of rounding either way around the exact share bounds.
      const double x_lo = additive.additive_frac_lo * double(n) / (1.0 - additive.additive_frac_lo);
      const double x_hi = additive.additive_frac_hi * double(n) / (1.0 - additive.additive_frac_hi);
      const double lo = std::max(0.0, x_lo - 1.0) / (double(n) + std::max(0.0, x_lo - 1.0));
      const double hi = (x_hi + 1.0) / (double(n) + x_hi + 1.0);
      in_bounds += (share >= lo - 1e-12 && share <= hi + 1e-12 && out.size() == n + m);
    }
    const double mean_share = share_sum / kNoiseTrials;
    c.note("mean additive share " + fmt(mean_share) + ", " + std::to_string(in_bounds) + "/" +
           std::to_string(kNoiseTrials) + " within rounding bounds");
    c.expect(in_bounds == kNoiseTrials, "every additive share within one token of [lo, hi]");
    c.expect(mean_share >= additive.additive_frac_lo && mean_share <= additive.additive_frac_hi,
             "mean additive share in [lo, hi]");
  }

  // Bounded and complete shuffles.
  {
    std::vector<Token> toks;
    for (int i = 0; i < 20; ++i) toks.push_back("w" + std::to_string(i));
    const Sentence s(toks);
    const auto reference = bag(toks);
    RandomSource rng(2004, 0);
    std::size_t bounded_ok = 0, preserved = 0, complete_preserved = 0, max_disp = 0;
    for (int trial = 0; trial < kNoiseTrials; ++trial) {
      const Sentence out = shuffle_bounded(s, nc.shuffle_k, rng);
      preserved += bag(out.tokens()) == reference;
      std::size_t disp = 0;
      for (std::size_t j = 0; j < out.size(); ++j) {
        const std::size_t i = std::stoul(out[j].substr(1));
        disp = std::max(disp, i > j ? i - j : j - i);
      }
      max_disp = std::max(max_disp, disp);
      bounded_ok += disp <= nc.shuffle_k;
      complete_preserved += bag(shuffle_complete_bigrams(toks, rng)) == reference;
    }
    c.note("bounded shuffle max displacement " + std::to_string(max_disp) + " (k " + std::to_string(nc.shuffle_k) +
           "), multiset kept " + std::to_string(preserved) + "+" + std::to_string(complete_preserved) + "/" +
           std::to_string(2 * kNoiseTrials));
    c.expect(bounded_ok == kNoiseTrials, "displacement <= k in every trial");
    c.expect(preserved == kNoiseTrials && complete_preserved == kNoiseTrials, "multiset preserved in every trial");
  }
  return c.outcome();
}

// --- 3: gradients -------------------------------------------------------------

double gradient_error(const DualDecoderModel& base, const std::function<double(const DualDecoderModel&)>& loss,
                      const Eigen::VectorXd& analytic) {
  constexpr double h = 1e-4;
  constexpr double floor = 1e-6;
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

Outcome gradients() {
  Checks c;
  std::vector<Token> words;
  for (int i = 0; i < 12; ++i) words.push_back("w" + std::to_string(i));
  const ModelVocabulary vocab(words);
  const ModelShape shape{6, 8};
  const DualDecoderModel model = init_model(vocab, shape, 3);
  c.note("vocab " + std::to_string(vocab.size()) + ", hidden " + std::to_string(shape.hidden_dim) + ", " +
         std::to_string(model.param_count()) + " parameters");

  const Sentence src = S("w1 w4 w2 w9");
  const Sentence tgt = S("w4 w2 w11");
  double worst_nll = 0.0;
  for (auto d : {TranslationDirection::s2s, TranslationDirection::c2c, TranslationDirection::s2c,
                 TranslationDirection::c2s}) {
    const auto r = nll_and_grad(model, src, tgt, d);
    worst_nll = std::max(worst_nll, gradient_error(model, [&](const DualDecoderModel& m) {
      return nll_and_grad(m, src, tgt, d).loss;
    }, r.gradient));
  }
  c.note("nll max relative error " + sci(worst_nll));
  c.expect(worst_nll <= 1e-3, "nll gradients");

  // pg_grad equals the advantage-scaled gradient of the summed NLL, and the
  // finite-difference gradient of -A * log p(sample).
  double worst_identity = 0.0, worst_pg = 0.0;
  std::size_t identity_checked = 0;
  const double adv = 0.37;
  for (std::uint64_t stream = 0; stream < 8; ++stream) {
    RandomSource rng(3001, stream);
    const auto d = stream % 2 ? TranslationDirection::s2c : TranslationDirection::c2s;
    const auto sample = decode_sample(model, src, d, rng, 6);
    const auto g = pg_grad(model, src, sample, adv, d);
    if (sample.ended && !sample.tokens.empty()) {
      const auto nll = nll_and_grad(model, src, sample.tokens, d);
      const double steps = double(sample.tokens.size() + 1);
      worst_identity = std::max(worst_identity, (g - adv * steps * nll.gradient).cwiseAbs().maxCoeff());
      ++identity_checked;
    }
    worst_pg = std::max(worst_pg, gradient_error(model, [&](const DualDecoderModel& m) {
      return -adv * sequence_log_prob(m, src, sample.tokens, d, sample.ended);
    }, g));
  }
  c.note("pg identity max abs deviation " + sci(worst_identity) + " over " +
         std::to_string(identity_checked) + " samples, pg max relative error " + sci(worst_pg));
  c.expect(identity_checked > 0, "at least one complete sample for the identity");
  c.expect(worst_identity <= 1e-9, "pg scaled-NLL identity");
  c.expect(worst_pg <= 1e-3, "pg gradients");
  return c.outcome();
}

// --- 4: rewards -----------------------------------------------------------------

class UniformLM : public FluencyModel {
 public:
  explicit UniformLM(double v) : log_p_(-std::log(v)) {}
  double log_prob(std::span<const Token>, std::string_view) const override { return log_p_; }

 private:
  double log_p_;
};

Outcome rewards() {
  Checks c;
  RandomSource rng(4001, 0);
  double worst_hvvv = 0.0;
  bool below_mean = true;
  for (int i = 0; i < 10000; ++i) {
    const double v = rng.uniform(0.001, 1.0);
    worst_hvvv = std::max(worst_hvvv, std::abs(harmonic_mean(std::vector<double>{v, v, v}) - v));
    const std::vector<double> x = {rng.uniform(), rng.uniform(), rng.uniform()};
    below_mean &= harmonic_mean(x) <= (x[0] + x[1] + x[2]) / 3.0 + 1e-12;
  }
  c.expect(worst_hvvv <= 1e-9, "H(v,v,v) = v");
  c.expect(below_mean, "H <= arithmetic mean");
  c.expect(harmonic_mean(std::vector<double>{0.0, 0.8, 0.9}) == 0.0, "zero convention");

  const Sentence s = S("the cat sat on the mat");
  const double rf = fluency_reward(UniformLM(40.0), s);
  c.note("uniform-LM fluency " + fmt(rf, 6) + " for V=40");
  c.expect(std::abs(rf - 1.0 / 40.0) <= 1e-9, "r_f = 1/V under a uniform LM");

  const FkglStats stats{6.5, 2.25};
  c.expect(std::abs(complexity_reward(stats.mean, stats, Side::simple) - 0.5) <= 1e-9 &&
               std::abs(complexity_reward(stats.mean, stats, Side::complex) - 0.5) <= 1e-9,
           "complexity reward 0.5 at the corpus mean");
  double worst_sum = 0.0;
  for (int i = 0; i < 1000; ++i) {
    const double f = rng.uniform(-5.0, 20.0);
    worst_sum = std::max(worst_sum, std::abs(complexity_reward(f, stats, Side::simple) +
                                             complexity_reward(f, stats, Side::complex) - 1.0));
  }
  c.expect(worst_sum <= 1e-9, "complex and simple complexity rewards sum to 1");

  // Greedy against itself through the full bundle.
  Eigen::MatrixXd m(4, 2);
  m << 1.0, 0.2, 0.3, 1.0, -0.5, 0.7, 0.9, 0.9;
  const EmbeddingTable emb({"cat", "mat", "sat", "the"}, m);
  const Vocabulary vocab(Vocabulary::CountMap{{"the", 20}, {"cat", 3}, {"sat", 4}, {"mat", 2}}, 100);
  const UniformLM lm(40.0);
  RewardScorers scorers;
  scorers.simple_lm = &lm;
  scorers.complex_lm = &lm;
  scorers.embeddings = &emb;
  scorers.vocab = &vocab;
  scorers.fkgl_stats = stats;
  const auto greedy = total_reward(s, S("the cat sat"), Side::simple, scorers);
  const auto again = total_reward(s, S("the cat sat"), Side::simple, scorers);
  c.note("greedy-vs-greedy advantage " + sci(advantage(again, greedy)));
  c.expect(advantage(again, greedy) == 0.0, "greedy-vs-greedy advantage is 0");
  return c.outcome();
}

// --- 5 to 8, 10: toy training runs ---------------------------------------------

struct Run {
  RunResult result;
  double seconds = 0.0;
  fs::path dir;
};

class Runs {
 public:
  Runs() : synth_(generate(ToyGrammarConfig{}, 5000, 5000, 200)) {
    data_.simple = synth_.simple;
    data_.complex = synth_.complex;
    data_.rules = synth_.rules;
    data_.dev = synth_.dev_pairs;
    data_.test = synth_.test_pairs;
    data_.parallel = synth_.parallel_pool;
    data_.embedding = synth_.embedding;
    fs::remove_all(root());
    fs::create_directories(root());
  }

  const TrainingData& data() const { return data_; }
  static TrainerConfig base() { return TrainerConfig::toy_defaults(); }

  const Run& get(const std::string& name, const TrainerConfig& config) {
    auto it = runs_.find(name);
    if (it != runs_.end()) return it->second;
    Run r;
    r.dir = root() / name;
    const auto start = Clock::now();
    r.result = run(config, data_, r.dir);
    r.seconds = seconds_since(start);
    std::cerr << "  run " << name << ": " << fmt(r.seconds, 1) << " s, test SARI "
              << (r.result.test ? fmt(r.result.test->sari, 2) : std::string("n/a")) << "\n";
    return runs_.emplace(name, std::move(r)).first->second;
  }

  const Run& full() { return get("full", base()); }

 private:
  static fs::path root() { return fs::path(BTSIMP_ACCEPTANCE_DIR); }

  SynthData synth_;
  TrainingData data_;
  std::map<std::string, Run> runs_;
};

double test_sari(const Run& r) {
  if (!r.result.test) fail(ErrorCode::config, "run has no test evaluation");
  return r.result.test->sari;
}

Outcome end_to_end(Runs& runs) {
  Checks c;
  const auto& r = runs.full();
  const auto copy = evaluate_copy(runs.data().test);
  const auto& t = *r.result.test;
  c.note(std::to_string(r.result.epochs.size()) + " epochs, test SARI " + fmt(t.sari, 2) + " vs copy " +
         fmt(copy.sari, 2) + ", FKGL " + fmt(t.input_fkgl, 2) + " -> " + fmt(t.output_fkgl, 2) + ", " +
         fmt(r.seconds, 1) + " s");
  c.expect(r.result.epochs.size() >= 10, "at least 10 back-translation epochs");
  c.expect(t.sari >= copy.sari + 5.0, "SARI at least 5 above copy");
  c.expect(t.output_fkgl < t.input_fkgl, "output FKGL below input FKGL");
  c.expect(r.seconds <= 30 * 60, "runtime within 30 min");
  return c.outcome();
}

Outcome ablation(Runs& runs) {
  Checks c;
  TrainerConfig original = Runs::base(), additive = Runs::base();
  original.noise.preset = NoisePreset::original;
  additive.noise.preset = NoisePreset::additive;
  const double full = test_sari(runs.full());
  const auto& ro = runs.get("original", original);
  const auto& ra = runs.get("additive", additive);
  const double o = test_sari(ro), a = test_sari(ra);
  const double seconds = runs.full().seconds + ro.seconds + ra.seconds;
  c.note("test SARI original " + fmt(o, 2) + ", additive " + fmt(a, 2) + ", full " + fmt(full, 2) + ", " +
         fmt(seconds, 1) + " s");
  c.expect(o <= a, "original <= additive");
  c.expect(a <= full, "additive <= full");
  c.expect(full - o >= 2.0, "full - original >= 2");
  c.expect(seconds <= 90 * 60, "runtime within 90 min");
  return c.outcome();
}

Outcome semi_supervised(Runs& runs) {
  Checks c;
  const auto& unsup = runs.full();
  TrainerConfig semi = Runs::base();
  semi.supervision_fraction = 0.1;
  // Same pretraining as the unsupervised run, so only the back-translation
  // phase differs.
  semi.init_checkpoint = (unsup.dir / "pretrained.ckpt").string();
  const auto& rs = runs.get("semi", semi);
  c.note("test SARI semi " + fmt(test_sari(rs), 2) + " vs unsupervised " + fmt(test_sari(unsup), 2) + ", " +
         fmt(rs.seconds, 1) + " s");
  c.expect(test_sari(rs) >= test_sari(unsup), "semi-supervised >= unsupervised");
  c.expect(rs.seconds <= 30 * 60, "runtime within 30 min");
  return c.outcome();
}

Outcome reinforcement(Runs& runs) {
  Checks c;
  TrainerConfig rl = Runs::base();
  rl.rl_enabled = true;
  const auto& rr = runs.get("rl", rl);
  const auto& plain = runs.full();
  const auto& epochs = rr.result.epochs;
  if (epochs.empty()) return {false, "no epochs recorded"};
  const double first = epochs.front().mean_greedy_reward;
  const double last = epochs.back().mean_greedy_reward;
  c.note("greedy reward epoch 1 " + fmt(first, 6) + " -> epoch " + std::to_string(epochs.size()) + " " +
         fmt(last, 6) + ", test SARI rl " + fmt(test_sari(rr), 2) + " vs " + fmt(test_sari(plain), 2) + ", " +
         fmt(rr.seconds, 1) + " s");
  c.expect(last > first, "final greedy reward above first epoch");
  c.expect(test_sari(rr) >= test_sari(plain) - 1.0, "SARI within 1 of the rl-disabled run or above");
  c.expect(rr.seconds <= 30 * 60, "runtime within 30 min");
  return c.outcome();
}

// --- 9: model selection --------------------------------------------------------

EpochRecord record(std::size_t epoch, double sari, double bleu) {
  EpochRecord r;
  r.epoch = epoch;
  r.dev_sari = sari;
  r.dev_bleu = bleu;
  return r;
}

Outcome selection() {
  Checks c;
  const std::vector<EpochRecord> example = {record(1, 38, 15), record(2, 35, 25)};
  const auto s = select_model(example, {20.0});
  c.note("xi=20 example selects epoch " + std::to_string(s.record.epoch));
  c.expect(s.record.epoch == 2 && !s.no_qualifying_epoch, "xi=20 example picks the qualifying epoch");

  RandomSource rng(9001, 0);
  int violations = 0;
  const int trials = 20000;
  for (int trial = 0; trial < trials; ++trial) {
    std::vector<EpochRecord> recs;
    const std::size_t n = 1 + rng.uniform_index(12);
    for (std::size_t i = 0; i < n; ++i) {
      recs.push_back(record(i + 1, rng.uniform(0.0, 60.0), rng.uniform(0.0, 40.0)));
    }
    const double xi = rng.uniform(0.0, 40.0);
    const auto sel = select_model(recs, {xi});
    const bool any = std::any_of(recs.begin(), recs.end(), [&](const auto& r) { return r.dev_bleu >= xi; });
    violations += (any && sel.record.dev_bleu < xi) || sel.no_qualifying_epoch == any;
  }
  c.note(std::to_string(trials) + " random record lists, " + std::to_string(violations) + " violations");
  c.expect(violations == 0, "no sub-threshold selection when an epoch qualifies");
  return c.outcome();
}

// --- 10: determinism and persistence ----------------------------------------------

Outcome determinism(Runs& runs) {
  Checks c;
  const auto& a = runs.full();
  const auto& b = runs.get("full_repeat", Runs::base());
  const std::string report_a = read_file(a.dir / "report.json");
  const std::string report_b = read_file(b.dir / "report.json");
  c.expect(report_a == report_b, "report.json byte-identical across runs");
  c.expect(a.result.report_json == b.result.report_json, "returned reports identical");

  const auto start = Clock::now();
  const Checkpoint loaded = load_checkpoint(a.dir / "selected.ckpt");
  const fs::path copy_path = a.dir / "roundtrip.ckpt";
  save_checkpoint(loaded.model, loaded.adam, copy_path, loaded.progress);
  const Checkpoint again = load_checkpoint(copy_path);
  std::size_t identical = 0;
  const auto& test = runs.data().test;
  for (const auto& [complex, simple] : test) {
    const auto max_len = default_max_len(complex.size());
    const auto x = decode_greedy(loaded.model, complex, TranslationDirection::c2s, max_len);
    const auto y = decode_greedy(again.model, complex, TranslationDirection::c2s, max_len);
    identical += x.tokens == y.tokens && x.token_logprobs == y.token_logprobs;
  }
  // The reloaded selected model must reproduce the in-memory test evaluation.
  const auto reeval = evaluate_pairs(loaded.model, test);
  const double seconds = b.seconds + seconds_since(start);
  c.note("report " + std::to_string(report_a.size()) + " bytes identical=" + (report_a == report_b ? "yes" : "no") +
         ", " + std::to_string(identical) + "/" + std::to_string(test.size()) +
         " greedy decodes identical after round trip, reloaded test SARI " + fmt(reeval.sari, 6) + " vs " +
         fmt(test_sari(a), 6) + ", " + fmt(seconds, 1) + " s");
  c.expect(identical == test.size(), "greedy decodes identical after checkpoint round trip");
  c.expect(reeval.sari == test_sari(a) && reeval.bleu == a.result.test->bleu,
           "reloaded checkpoint reproduces the run's test scores");
  c.expect(seconds <= 2.0 * a.seconds + 1.0, "runtime within twice the end-to-end run");
  return c.outcome();
}

}  // namespace

int main() {
  std::optional<Runs> runs;
  auto shared_runs = [&]() -> Runs& {
    if (!runs) runs.emplace();
    return *runs;
  };
  struct Criterion {
    int id;
    const char* name;
    double limit_seconds;  // 0 when the check reports its own runtime bound
    std::function<Outcome()> check;
  };
  const std::vector<Criterion> criteria = {
      {1, "metric oracles", 10, metric_oracles},
      {2, "noise statistics", 60, noise_statistics},
      {3, "gradient correctness", 120, gradients},
      {4, "reward suite", 10, rewards},
      {5, "end-to-end unsupervised", 0, [&] { return end_to_end(shared_runs()); }},
      {6, "ablation direction", 0, [&] { return ablation(shared_runs()); }},
      {7, "semi-supervised direction", 0, [&] { return semi_supervised(shared_runs()); }},
      {8, "rl non-degradation and reward progress", 0, [&] { return reinforcement(shared_runs()); }},
      {9, "model selection", 1, selection},
      {10, "determinism and persistence", 0, [&] { return determinism(shared_runs()); }},
  };

  int failed = 0;
  for (const auto& k : criteria) {
    const auto start = Clock::now();
    Outcome o;
    try {
      o = k.check();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    const double seconds = seconds_since(start);
    if (k.limit_seconds > 0) {
      o.detail += "; " + fmt(seconds, 2) + " s";
      if (seconds >= k.limit_seconds) {
        o.pass = false;
        o.detail += " exceeds " + fmt(k.limit_seconds, 0) + " s";
      }
    }
    failed += !o.pass;
    std::cout << (o.pass ? "PASS" : "FAIL") << " criterion " << k.id << " (" << k.name << "): " << o.detail
              << std::endl;
  }
  std::cout << (failed ? std::to_string(failed) + " criteria failed" : std::string("all criteria passed"))
            << std::endl;
  return failed ? 1 : 0;
}
