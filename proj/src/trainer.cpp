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

#include "btsimp/trainer.hpp"

#include <algorithm>
#include <charconv>
#include <chrono>
#include <cmath>
#include <fstream>
#include <numeric>
#include <ostream>
#include <set>
#include <unordered_set>

#include "json.hpp"

#include "btsimp/error.hpp"
#include "btsimp/metrics.hpp"
#include "btsimp/random.hpp"

namespace btsimp {

using nlohmann::json;
namespace fs = std::filesystem;

namespace {

std::string format_double(double v) {
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, ptr);
}

const std::set<std::string, std::less<>> kConfigKeys = {
    "seed", "embed_dim", "hidden_dim", "pretrain_steps", "lr_pretrain", "lr_bt", "batch_size", "bt_epochs",
    "bt_steps_per_epoch", "gamma_max", "gamma_slope", "gamma_ramp_start_epochs", "gamma_ramp_epochs",
    "supervision_fraction", "alternation_supervised", "alternation_bt", "alternation_dae", "dae_interleave",
    "rl_enabled", "noise_preset", "p_rep", "p_del", "additive_frac_lo", "additive_frac_hi", "shuffle_k",
    "frequent_threshold", "rule_min_score", "rule_top_k", "lm_order", "reward_embedding_dim", "sif_a", "xi",
    "init_checkpoint", "resume", "stop_after_epoch"};

// Rethrows library errors with the stage and step that raised them.
[[noreturn]] void rethrow_in(const Error& e, std::string_view stage, std::uint64_t step) {
  throw Error(e.code(), "stage '" + std::string(stage) + "' step " + std::to_string(step) + ": " + e.what());
}

template <class F>
auto in_stage(std::string_view stage, std::uint64_t step, F&& f) {
  try {
    return f();
  } catch (const Error& e) {
    rethrow_in(e, stage, step);
  }
}

// Walks a shuffled permutation of [0, n), reshuffling at every wrap.
class BatchCursor {
 public:
  BatchCursor(std::size_t n, RandomSource rng) : order_(n), rng_(std::move(rng)) {
    std::iota(order_.begin(), order_.end(), std::size_t{0});
    rng_.shuffle(order_);
  }

  std::vector<std::size_t> next(std::size_t count) {
    std::vector<std::size_t> out;
    out.reserve(count);
    for (std::size_t i = 0; i < count; ++i) {
      if (pos_ == order_.size()) {
        rng_.shuffle(order_);
        pos_ = 0;
      }
      out.push_back(order_[pos_++]);
    }
    return out;
  }

 private:
  std::vector<std::size_t> order_;
  RandomSource rng_;
  std::size_t pos_ = 0;
};

// Adds weight * d(mean per-step NLL)/dTheta and returns the mean per-step NLL.
double add_nll(const DualDecoderModel& model, const TrainingExample& ex, double weight, Eigen::VectorXd& grad) {
  const auto src = model.vocab.encode(ex.source);
  const auto tgt = model.vocab.encode(ex.target);
  const double steps = static_cast<double>(tgt.size() + 1);
  const double sum =
      accumulate_sequence_gradient(model, src, tgt, true, target_side(ex.direction), weight / steps, grad);
  if (!std::isfinite(sum)) fail(ErrorCode::numeric, "non-finite loss");
  return sum / steps;
}

TranslationDirection autoencoder(Side side) {
  return side == Side::simple ? TranslationDirection::s2s : TranslationDirection::c2c;
}

// Direction trained by pairs whose target is on `side`, given a back-translated source.
TranslationDirection toward(Side side) {
  return side == Side::simple ? TranslationDirection::c2s : TranslationDirection::s2c;
}

std::vector<const Sentence*> pick(const Corpus& corpus, const std::vector<std::size_t>& idx) {
  std::vector<const Sentence*> out;
  for (auto i : idx) out.push_back(&corpus[i]);
  return out;
}

void notify(const TrainerHooks& hooks, UpdateKind kind, const TrainingExample& ex) {
  if (hooks.on_example) hooks.on_example(kind, ex);
}

void log_line(std::ostream* log, const json& j) {
  if (log) *log << j.dump() << '\n';
}

// One denoising update on `batch` for `side`. Returns the mean loss.
double denoising_update(TrainingState& state, const TrainingResources& res, std::span<const Sentence* const> batch,
                        Side side, RandomSource& noise_rng, double lr, UpdateKind kind, const TrainerHooks& hooks) {
  Eigen::VectorXd grad = Eigen::VectorXd::Zero(state.model.params.size());
  double loss = 0.0;
  const double w = 1.0 / static_cast<double>(batch.size());
  for (const Sentence* s : batch) {
    TrainingExample ex{res.noise(*s, side, noise_rng), *s, autoencoder(side)};
    notify(hooks, kind, ex);
    loss += w * add_nll(state.model, ex, w, grad);
  }
  adam_step(state.model, grad, state.adam, lr);
  ++state.progress.global_step;
  if (hooks.after_update) hooks.after_update(state.progress.global_step, state.model);
  return loss;
}

json eval_json(const EvalResult& e) {
  return {{"sari", e.sari},   {"f_keep", e.f_keep},         {"f_del", e.f_del},
          {"f_add", e.f_add}, {"bleu", e.bleu},             {"input_fkgl", e.input_fkgl},
          {"output_fkgl", e.output_fkgl}};
}

json side_rewards_json(const SideRewards& r) {
  return {{"sample_total", r.sample_total}, {"greedy_total", r.greedy_total}, {"r_f", r.r_f},
          {"r_s", r.r_s},                   {"r_c", r.r_c},                   {"advantage", r.advantage}};
}

SideRewards side_rewards_from(const json& j) {
  SideRewards r;
  r.sample_total = j.at("sample_total").get<double>();
  r.greedy_total = j.at("greedy_total").get<double>();
  r.r_f = j.at("r_f").get<double>();
  r.r_s = j.at("r_s").get<double>();
  r.r_c = j.at("r_c").get<double>();
  r.advantage = j.at("advantage").get<double>();
  return r;
}

json record_json(const EpochRecord& r) {
  json j = {{"epoch", r.epoch},
            {"dev_sari", r.dev_sari},
            {"dev_bleu", r.dev_bleu},
            {"checkpoint", r.checkpoint},
            {"loss_ce", r.loss_ce},
            {"loss_pg", r.loss_pg},
            {"loss_dae", r.loss_dae},
            {"loss_supervised", r.loss_supervised},
            {"gamma_end", r.gamma_end},
            {"supervised_batches", r.supervised_batches},
            {"bt_batches", r.bt_batches},
            {"dae_batches", r.dae_batches}};
  if (r.has_rewards) {
    j["rewards"] = {{"simple", side_rewards_json(r.simple_rewards)},
                    {"complex", side_rewards_json(r.complex_rewards)},
                    {"mean_greedy", r.mean_greedy_reward}};
  } else {
    j["rewards"] = nullptr;
  }
  return j;
}

EpochRecord record_from(const json& j) {
  EpochRecord r;
  r.epoch = j.at("epoch").get<std::size_t>();
  r.dev_sari = j.at("dev_sari").get<double>();
  r.dev_bleu = j.at("dev_bleu").get<double>();
  r.checkpoint = j.at("checkpoint").get<std::string>();
  r.loss_ce = j.at("loss_ce").get<double>();
  r.loss_pg = j.at("loss_pg").get<double>();
  r.loss_dae = j.at("loss_dae").get<double>();
  r.loss_supervised = j.at("loss_supervised").get<double>();
  r.gamma_end = j.at("gamma_end").get<double>();
  r.supervised_batches = j.at("supervised_batches").get<std::size_t>();
  r.bt_batches = j.at("bt_batches").get<std::size_t>();
  r.dae_batches = j.at("dae_batches").get<std::size_t>();
  const auto& rw = j.at("rewards");
  if (!rw.is_null()) {
    r.has_rewards = true;
    r.simple_rewards = side_rewards_from(rw.at("simple"));
    r.complex_rewards = side_rewards_from(rw.at("complex"));
    r.mean_greedy_reward = rw.at("mean_greedy").get<double>();
  }
  return r;
}

std::string epoch_checkpoint_name(std::size_t epoch) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "epoch_%03zu.ckpt", epoch);
  return std::string("checkpoints/") + buf;
}

void write_json(const fs::path& path, const json& j) { write_file(path, j.dump(2) + "\n"); }

json read_json(const fs::path& path) {
  try {
    return json::parse(read_file(path));
  } catch (const json::exception& e) {
    fail(ErrorCode::parse, path.string() + ": " + e.what());
  }
}

}  // namespace

// ---------------------------------------------------------------------------
// Configuration

TrainerConfig TrainerConfig::toy_defaults() {
  TrainerConfig c;
  c.shape = {48, 48};
  c.pretrain_steps = 5000;
  c.lr_pretrain = 2e-3;
  c.lr_bt = 5e-4;
  c.bt_epochs = 15;
  c.bt_steps_per_epoch = 100;
  c.frequent_threshold = 400;
  c.reward_embedding_dim = 16;
  c.xi = 0.0;
  return c;
}

TrainerConfig TrainerConfig::from_key_values(const KeyValueConfig& kv, const TrainerConfig& base) {
  kv.require_known(kConfigKeys);
  TrainerConfig c = base;
  c.seed = kv.get_uint("seed", c.seed);
  c.shape.embed_dim = kv.get_uint("embed_dim", c.shape.embed_dim);
  c.shape.hidden_dim = kv.get_uint("hidden_dim", c.shape.hidden_dim);
  c.pretrain_steps = kv.get_uint("pretrain_steps", c.pretrain_steps);
  c.lr_pretrain = kv.get_double("lr_pretrain", c.lr_pretrain);
  c.lr_bt = kv.get_double("lr_bt", c.lr_bt);
  c.batch_size = kv.get_uint("batch_size", c.batch_size);
  c.bt_epochs = kv.get_uint("bt_epochs", c.bt_epochs);
  c.bt_steps_per_epoch = kv.get_uint("bt_steps_per_epoch", c.bt_steps_per_epoch);
  c.gamma_max = kv.get_double("gamma_max", c.gamma_max);
  c.gamma_slope = kv.get_double("gamma_slope", c.gamma_slope);
  c.gamma_ramp_start_epochs = kv.get_uint("gamma_ramp_start_epochs", c.gamma_ramp_start_epochs);
  c.gamma_ramp_epochs = kv.get_uint("gamma_ramp_epochs", c.gamma_ramp_epochs);
  c.supervision_fraction = kv.get_double("supervision_fraction", c.supervision_fraction);
  c.alternation_supervised = kv.get_uint("alternation_supervised", c.alternation_supervised);
  c.alternation_bt = kv.get_uint("alternation_bt", c.alternation_bt);
  c.alternation_dae = kv.get_uint("alternation_dae", c.alternation_dae);
  c.dae_interleave = kv.get_bool("dae_interleave", c.dae_interleave);
  c.rl_enabled = kv.get_bool("rl_enabled", c.rl_enabled);
  if (auto p = kv.get("noise_preset")) c.noise.preset = parse_preset(*p);
  c.noise.p_rep = kv.get_double("p_rep", c.noise.p_rep);
  c.noise.p_del = kv.get_double("p_del", c.noise.p_del);
  c.noise.additive_frac_lo = kv.get_double("additive_frac_lo", c.noise.additive_frac_lo);
  c.noise.additive_frac_hi = kv.get_double("additive_frac_hi", c.noise.additive_frac_hi);
  c.noise.shuffle_k = kv.get_uint("shuffle_k", c.noise.shuffle_k);
  c.frequent_threshold = kv.get_uint("frequent_threshold", c.frequent_threshold);
  c.rule_min_score = kv.get_double("rule_min_score", c.rule_min_score);
  c.rule_top_k = kv.get_uint("rule_top_k", c.rule_top_k);
  c.lm_order = kv.get_uint("lm_order", c.lm_order);
  c.reward_embedding_dim = kv.get_uint("reward_embedding_dim", c.reward_embedding_dim);
  c.sif_a = kv.get_double("sif_a", c.sif_a);
  c.xi = kv.get_double("xi", c.xi);
  c.init_checkpoint = kv.get_string("init_checkpoint", c.init_checkpoint);
  c.resume = kv.get_bool("resume", c.resume);
  c.stop_after_epoch = kv.get_uint("stop_after_epoch", c.stop_after_epoch);
  return c;
}

KeyValueConfig TrainerConfig::to_key_values() const {
  KeyValueConfig kv;
  auto u = [&kv](const char* k, std::uint64_t v) { kv.set(k, std::to_string(v)); };
  auto d = [&kv](const char* k, double v) { kv.set(k, format_double(v)); };
  auto b = [&kv](const char* k, bool v) { kv.set(k, v ? "true" : "false"); };
  u("seed", seed);
  u("embed_dim", shape.embed_dim);
  u("hidden_dim", shape.hidden_dim);
  u("pretrain_steps", pretrain_steps);
  d("lr_pretrain", lr_pretrain);
  d("lr_bt", lr_bt);
  u("batch_size", batch_size);
  u("bt_epochs", bt_epochs);
  u("bt_steps_per_epoch", bt_steps_per_epoch);
  d("gamma_max", gamma_max);
  d("gamma_slope", gamma_slope);
  u("gamma_ramp_start_epochs", gamma_ramp_start_epochs);
  u("gamma_ramp_epochs", gamma_ramp_epochs);
  d("supervision_fraction", supervision_fraction);
  u("alternation_supervised", alternation_supervised);
  u("alternation_bt", alternation_bt);
  u("alternation_dae", alternation_dae);
  b("dae_interleave", dae_interleave);
  b("rl_enabled", rl_enabled);
  kv.set("noise_preset", std::string(preset_name(noise.preset)));
  d("p_rep", noise.p_rep);
  d("p_del", noise.p_del);
  d("additive_frac_lo", noise.additive_frac_lo);
  d("additive_frac_hi", noise.additive_frac_hi);
  u("shuffle_k", noise.shuffle_k);
  u("frequent_threshold", frequent_threshold);
  d("rule_min_score", rule_min_score);
  u("rule_top_k", rule_top_k);
  u("lm_order", lm_order);
  u("reward_embedding_dim", reward_embedding_dim);
  d("sif_a", sif_a);
  d("xi", xi);
  kv.set("init_checkpoint", init_checkpoint);
  b("resume", resume);
  u("stop_after_epoch", stop_after_epoch);
  return kv;
}

GammaSchedule TrainerConfig::gamma_schedule() const {
  GammaSchedule g;
  g.gamma_max = gamma_max;
  g.slope = gamma_slope;
  g.ramp_start = gamma_ramp_start_epochs * bt_steps_per_epoch;
  g.ramp_length = std::max<std::uint64_t>(1, gamma_ramp_epochs * bt_steps_per_epoch);
  return g;
}

void TrainerConfig::validate() const {
  auto require = [](bool ok, const char* what) {
    if (!ok) fail(ErrorCode::config, what);
  };
  require(lr_pretrain > 0.0 && std::isfinite(lr_pretrain), "lr_pretrain must be positive");
  require(lr_bt > 0.0 && std::isfinite(lr_bt), "lr_bt must be positive");
  require(batch_size >= 1, "batch_size must be at least 1");
  require(bt_steps_per_epoch >= 1, "bt_steps_per_epoch must be at least 1");
  require(supervision_fraction >= 0.0 && supervision_fraction <= 1.0, "supervision_fraction outside [0,1]");
  require(gamma_max >= 0.0 && gamma_max <= 1.0, "gamma_max outside [0,1]");
  require(gamma_slope > 0.0, "gamma_slope must be positive");
  require(alternation_bt >= 1, "alternation_bt must be at least 1");
  require(xi >= 0.0 && xi <= 100.0, "xi outside [0,100]");
  require(lm_order >= 1, "lm_order must be at least 1");
  require(sif_a > 0.0, "sif_a must be positive");
  require(rule_top_k >= 1, "rule_top_k must be at least 1");
  require(shape.embed_dim >= 1, "embed_dim must be at least 1");
  noise.validate();
}

std::string_view update_kind_name(UpdateKind kind) {
  switch (kind) {
    case UpdateKind::pretrain: return "pretrain";
    case UpdateKind::supervised: return "supervised";
    case UpdateKind::backtranslation: return "backtranslation";
    case UpdateKind::denoising: return "denoising";
  }
  return "unknown";
}

// ---------------------------------------------------------------------------
// Data and resources

TrainingData load_training_data(const fs::path& dir) {
  TrainingData d;
  d.simple = read_corpus(dir / "simple.txt", ComplexityTag::simple);
  d.complex = read_corpus(dir / "complex.txt", ComplexityTag::complex);
  d.rules = load_rules(dir / "rules.tsv");
  d.dev = read_pairs(dir / "dev.pairs");
  if (fs::exists(dir / "test.pairs")) d.test = read_pairs(dir / "test.pairs");
  if (fs::exists(dir / "parallel.pairs")) d.parallel = read_pairs(dir / "parallel.pairs");
  if (fs::exists(dir / "embedding.txt")) d.embedding = read_corpus(dir / "embedding.txt", ComplexityTag::unlabeled);
  return d;
}

TrainingResources::TrainingResources(TrainerConfig config, TrainingData data)
    : config_(std::move(config)), data_(std::move(data)) {
  config_.validate();
  if (data_.simple.empty() || data_.complex.empty()) fail(ErrorCode::empty_corpus, "training corpora must be non-empty");
  if (data_.dev.empty()) fail(ErrorCode::empty_corpus, "dev pairs must be non-empty");

  // Dev isolation: no dev sentence may occur in any training source.
  std::unordered_set<std::string> dev_hashes;
  for (const auto& [c, s] : data_.dev) {
    dev_hashes.insert(c.join());
    dev_hashes.insert(s.join());
  }
  auto check_isolated = [&dev_hashes](const Sentence& s, const char* where) {
    if (dev_hashes.count(s.join())) fail(ErrorCode::config, std::string("dev sentence found in ") + where + ": " + s.join());
  };
  for (const auto& s : data_.simple.sentences()) check_isolated(s, "simple corpus");
  for (const auto& s : data_.complex.sentences()) check_isolated(s, "complex corpus");
  for (const auto& s : data_.embedding.sentences()) check_isolated(s, "embedding corpus");
  for (const auto& [c, s] : data_.parallel) {
    check_isolated(c, "parallel pool");
    check_isolated(s, "parallel pool");
  }

  const Corpus both[] = {data_.simple, data_.complex};
  frequencies_ = build_vocabulary(both, config_.frequent_threshold);
  rules_ = build_rule_table(data_.rules, config_.rule_min_score, config_.rule_top_k);

  std::vector<Sentence> extra;
  for (const auto& r : rules_.rules()) {
    extra.push_back(r.complex_phrase);
    extra.push_back(r.simple_phrase);
  }
  for (const auto* pairs : {&data_.dev, &data_.test, &data_.parallel}) {
    for (const auto& [c, s] : *pairs) {
      extra.push_back(c);
      extra.push_back(s);
    }
  }
  const Corpus vocab_sources[] = {data_.simple, data_.complex, Corpus(std::move(extra), ComplexityTag::unlabeled)};
  model_vocab_ = ModelVocabulary::from_corpora(vocab_sources);

  simple_lm_ = train_lm(data_.simple.sentences(), config_.lm_order);
  complex_lm_ = train_lm(data_.complex.sentences(), config_.lm_order);
  const Corpus with_mixed[] = {data_.simple, data_.complex, data_.embedding};
  embeddings_ = train_embeddings(with_mixed, config_.reward_embedding_dim);
  std::vector<Sentence> all = data_.simple.sentences();
  all.insert(all.end(), data_.complex.sentences().begin(), data_.complex.sentences().end());
  fkgl_stats_ = corpus_fkgl_stats(all);

  if (config_.supervision_fraction > 0.0 && !data_.parallel.empty()) {
    const auto n = static_cast<std::size_t>(
        std::llround(config_.supervision_fraction * static_cast<double>(data_.parallel.size())));
    std::vector<std::size_t> idx(data_.parallel.size());
    std::iota(idx.begin(), idx.end(), std::size_t{0});
    RandomSource rng = make_rng(config_.seed, stream_id(StreamKind::supervision, 0));
    rng.shuffle(idx);
    idx.resize(std::max<std::size_t>(n, 1));
    std::sort(idx.begin(), idx.end());
    for (auto i : idx) supervised_.push_back(data_.parallel[i]);
  } else if (config_.supervision_fraction > 0.0) {
    fail(ErrorCode::config, "supervision_fraction > 0 needs a parallel pool");
  }
}

RewardScorers TrainingResources::scorers() const {
  RewardScorers s;
  s.simple_lm = &simple_lm_;
  s.complex_lm = &complex_lm_;
  s.embeddings = &embeddings_;
  s.vocab = &frequencies_;
  s.fkgl_stats = fkgl_stats_;
  s.sif_a = config_.sif_a;
  return s;
}

Sentence TrainingResources::noise(const Sentence& s, Side side, RandomSource& rng) const {
  if (side == Side::simple) {
    const Corpus& pool = data_.simple;
    const Sentence* donor = &pool[rng.uniform_index(pool.size())];
    for (int attempt = 0; *donor == s && pool.size() > 1 && attempt < 16; ++attempt) {
      donor = &pool[rng.uniform_index(pool.size())];
    }
    return noise_simple(s, *donor, rules_, config_.noise, frequencies_, rng);
  }
  return noise_complex(s, rules_, config_.noise, frequencies_, rng);
}

TrainingState initial_state(const TrainingResources& resources) {
  TrainingState st;
  st.model = init_model(resources.model_vocab(), resources.config().shape, resources.config().seed);
  st.adam = AdamState::for_model(st.model);
  return st;
}

// ---------------------------------------------------------------------------
// Training stages

std::vector<double> pretrain_dae(TrainingState& state, const TrainingResources& res, const TrainerHooks& hooks,
                                 std::ostream* log) {
  const auto& cfg = res.config();
  const std::uint64_t seed = cfg.seed;
  BatchCursor simple_cursor(res.data().simple.size(), make_rng(seed, stream_id(StreamKind::data_order, 0)));
  BatchCursor complex_cursor(res.data().complex.size(), make_rng(seed, stream_id(StreamKind::data_order, 1)));
  RandomSource noise_rng = make_rng(seed, stream_id(StreamKind::noise, 0));

  std::vector<double> losses;
  losses.reserve(cfg.pretrain_steps);
  for (std::uint64_t step = 0; step < cfg.pretrain_steps; ++step) {
    const Side side = step % 2 == 0 ? Side::simple : Side::complex;
    const double loss = in_stage("pretrain", step, [&] {
      const auto& corpus = side == Side::simple ? res.data().simple : res.data().complex;
      auto& cursor = side == Side::simple ? simple_cursor : complex_cursor;
      const auto batch = pick(corpus, cursor.next(cfg.batch_size));
      return denoising_update(state, res, batch, side, noise_rng, cfg.lr_pretrain, UpdateKind::pretrain, hooks);
    });
    losses.push_back(loss);
    log_line(log, {{"kind", "pretrain"}, {"step", step}, {"side", side_name(side)}, {"loss", loss}});
  }
  return losses;
}

std::vector<TrainingExample> backtranslate(const DualDecoderModel& model, std::span<const Sentence> batch,
                                           Side source_side) {
  const Side other = source_side == Side::simple ? Side::complex : Side::simple;
  const TranslationDirection forward = source_side == Side::simple ? TranslationDirection::s2c
                                                                   : TranslationDirection::c2s;
  std::vector<TrainingExample> out;
  out.reserve(batch.size());
  for (const auto& s : batch) {
    DecodeOutput d = decode_greedy(model, s, forward, default_max_len(s.size()), 1);
    out.push_back({std::move(d.tokens), s, toward(source_side)});
  }
  (void)other;
  return out;
}

namespace {

struct RewardAccumulator {
  SideRewards sum;
  std::size_t n = 0;

  void add(const RewardBundle& sample, const RewardBundle& greedy, double adv) {
    sum.sample_total += sample.total;
    sum.greedy_total += greedy.total;
    sum.r_f += sample.r_f;
    sum.r_s += sample.r_s;
    sum.r_c += sample.r_c;
    sum.advantage += adv;
    ++n;
  }

  SideRewards mean() const {
    SideRewards m = sum;
    const double d = n ? static_cast<double>(n) : 1.0;
    m.sample_total /= d;
    m.greedy_total /= d;
    m.r_f /= d;
    m.r_s /= d;
    m.r_c /= d;
    m.advantage /= d;
    return m;
  }
};

RewardBundle reward_or_zero(const Sentence& s, const Sentence& input, Side side, const RewardScorers& scorers) {
  if (s.empty()) return {};
  return total_reward(s, input, side, scorers);
}

json reward_log(std::uint64_t step, Side side, const SideRewards& r) {
  return {{"kind", "reward"}, {"step", step},           {"side", side_name(side)}, {"r_f", r.r_f},
          {"r_s", r.r_s},     {"r_c", r.r_c},           {"total", r.sample_total}, {"greedy_total", r.greedy_total},
          {"advantage", r.advantage}};
}

}  // namespace

EpochRecord train_iteration(TrainingState& state, const TrainingResources& res, std::size_t epoch,
                            const TrainerHooks& hooks, std::ostream* log) {
  if (epoch < 1) fail(ErrorCode::invalid_argument, "epochs are numbered from 1");
  const auto& cfg = res.config();
  const auto& data = res.data();
  const std::uint64_t seed = cfg.seed;
  const auto e32 = static_cast<std::uint32_t>(epoch);
  // Streams are re-derived per epoch so a resumed run matches an uninterrupted one.
  BatchCursor bt_simple(data.simple.size(), make_rng(seed, stream_id(StreamKind::data_order, 4 * e32)));
  BatchCursor bt_complex(data.complex.size(), make_rng(seed, stream_id(StreamKind::data_order, 4 * e32 + 1)));
  BatchCursor dae_simple(data.simple.size(), make_rng(seed, stream_id(StreamKind::data_order, 4 * e32 + 2)));
  BatchCursor dae_complex(data.complex.size(), make_rng(seed, stream_id(StreamKind::data_order, 4 * e32 + 3)));
  std::optional<BatchCursor> sup_cursor;
  if (!res.supervised_pairs().empty()) {
    sup_cursor.emplace(res.supervised_pairs().size(), make_rng(seed, stream_id(StreamKind::supervision, e32)));
  }
  RandomSource noise_rng = make_rng(seed, stream_id(StreamKind::noise, e32));
  RandomSource sample_rng = make_rng(seed, stream_id(StreamKind::sampling, e32));
  const GammaSchedule schedule = cfg.gamma_schedule();
  const RewardScorers scorers = res.scorers();
  const std::size_t P = static_cast<std::size_t>(state.model.params.size());
  const std::uint64_t bt_step0 = static_cast<std::uint64_t>(epoch - 1) * cfg.bt_steps_per_epoch * cfg.alternation_bt;

  EpochRecord rec;
  rec.epoch = epoch;
  RewardAccumulator simple_acc, complex_acc;
  double ce_sum = 0.0, pg_sum = 0.0, dae_sum = 0.0, sup_sum = 0.0;
  std::uint64_t bt_step = bt_step0;

  for (std::size_t cycle = 0; cycle < cfg.bt_steps_per_epoch; ++cycle) {
    // Supervised updates on real pairs, both directions.
    if (sup_cursor) {
      for (std::size_t k = 0; k < cfg.alternation_supervised; ++k) {
        const double loss = in_stage("supervised", state.progress.global_step, [&] {
          Eigen::VectorXd grad = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(P));
          const auto idx = sup_cursor->next(cfg.batch_size);
          const double w = 1.0 / static_cast<double>(2 * idx.size());
          double l = 0.0;
          for (auto i : idx) {
            const auto& [c, s] = res.supervised_pairs()[i];
            const TrainingExample to_simple{c, s, TranslationDirection::c2s};
            const TrainingExample to_complex{s, c, TranslationDirection::s2c};
            notify(hooks, UpdateKind::supervised, to_simple);
            notify(hooks, UpdateKind::supervised, to_complex);
            l += w * add_nll(state.model, to_simple, w, grad);
            l += w * add_nll(state.model, to_complex, w, grad);
          }
          adam_step(state.model, grad, state.adam, cfg.lr_bt);
          ++state.progress.global_step;
          if (hooks.after_update) hooks.after_update(state.progress.global_step, state.model);
          return l;
        });
        sup_sum += loss;
        ++rec.supervised_batches;
        log_line(log, {{"kind", "supervised"}, {"step", state.progress.global_step}, {"epoch", epoch}, {"loss", loss}});
      }
    }

    // Back-translation updates.
    for (std::size_t k = 0; k < cfg.alternation_bt; ++k) {
      in_stage("backtranslation", state.progress.global_step, [&] {
        const double gamma = cfg.rl_enabled ? gamma_at(schedule, bt_step) : 0.0;
        Eigen::VectorXd g_ce = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(P));
        Eigen::VectorXd g_pg = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(P));
        double l_ce = 0.0, l_pg = 0.0;
        RewardAccumulator step_acc[2];
        const double w = 1.0 / static_cast<double>(2 * cfg.batch_size);

        for (Side side : {Side::simple, Side::complex}) {
          const Corpus& corpus = side == Side::simple ? data.simple : data.complex;
          auto& cursor = side == Side::simple ? bt_simple : bt_complex;
          std::vector<Sentence> originals;
          for (auto i : cursor.next(cfg.batch_size)) originals.push_back(corpus[i]);
          const auto examples = backtranslate(state.model, originals, side);
          for (const auto& ex : examples) {
            if (ex.direction != toward(side) || target_side(ex.direction) != side) {
              fail(ErrorCode::invalid_argument, "synthetic pair routed to the wrong direction");
            }
            notify(hooks, UpdateKind::backtranslation, ex);
            l_ce += w * add_nll(state.model, ex, w, g_ce);
            if (!cfg.rl_enabled || hooks.skip_pg) continue;

            // Policy gradient on the same direction, conditioned on the synthetic source.
            const std::size_t max_len = default_max_len(ex.source.size());
            const DecodeOutput sample = decode_sample(state.model, ex.source, ex.direction, sample_rng, max_len);
            const DecodeOutput greedy = decode_greedy(state.model, ex.source, ex.direction, max_len);
            const RewardBundle rs = reward_or_zero(sample.tokens, ex.source, side, scorers);
            const RewardBundle rg = reward_or_zero(greedy.tokens, ex.source, side, scorers);
            const double adv = hooks.zero_advantage ? 0.0 : advantage(rs, rg);
            step_acc[side == Side::simple ? 0 : 1].add(rs, rg, adv);
            (side == Side::simple ? simple_acc : complex_acc).add(rs, rg, adv);
            l_pg += w * -adv * sample.total_logprob();
            if (adv != 0.0) {
              const auto src = state.model.vocab.encode(ex.source);
              const auto tgt = state.model.vocab.encode(sample.tokens);
              accumulate_sequence_gradient(state.model, src, tgt, sample.ended, side, w * adv, g_pg);
            }
          }
        }

        Eigen::VectorXd grad;
        if (!cfg.rl_enabled) {
          grad = std::move(g_ce);
        } else if (hooks.skip_pg) {
          grad = (1.0 - gamma) * g_ce;
        } else {
          grad = (1.0 - gamma) * g_ce + gamma * g_pg;
        }
        adam_step(state.model, grad, state.adam, cfg.lr_bt);
        ++state.progress.global_step;
        if (hooks.after_update) hooks.after_update(state.progress.global_step, state.model);

        ce_sum += l_ce;
        pg_sum += l_pg;
        rec.gamma_end = gamma;
        json line = {{"kind", "backtranslation"}, {"step", state.progress.global_step}, {"epoch", epoch},
                     {"loss_ce", l_ce},           {"gamma", gamma}};
        if (cfg.rl_enabled && !hooks.skip_pg) {
          line["loss_pg"] = l_pg;
          line["loss"] = combined_loss(l_ce, l_pg, gamma);
        }
        log_line(log, line);
        if (cfg.rl_enabled && !hooks.skip_pg) {
          log_line(log, reward_log(state.progress.global_step, Side::simple, step_acc[0].mean()));
          log_line(log, reward_log(state.progress.global_step, Side::complex, step_acc[1].mean()));
        }
        ++bt_step;
        ++rec.bt_batches;
      });
    }

    // Interleaved denoising updates.
    if (cfg.dae_interleave) {
      for (std::size_t k = 0; k < cfg.alternation_dae; ++k) {
        for (Side side : {Side::simple, Side::complex}) {
          const double loss = in_stage("denoising", state.progress.global_step, [&] {
            const auto& corpus = side == Side::simple ? data.simple : data.complex;
            auto& cursor = side == Side::simple ? dae_simple : dae_complex;
            const auto batch = pick(corpus, cursor.next(cfg.batch_size));
            return denoising_update(state, res, batch, side, noise_rng, cfg.lr_bt, UpdateKind::denoising, hooks);
          });
          dae_sum += loss;
          ++rec.dae_batches;
          log_line(log, {{"kind", "denoising"},
                         {"step", state.progress.global_step},
                         {"epoch", epoch},
                         {"side", side_name(side)},
                         {"loss", loss}});
        }
      }
    }
  }

  auto mean = [](double s, std::size_t n) { return n ? s / static_cast<double>(n) : 0.0; };
  rec.loss_ce = mean(ce_sum, rec.bt_batches);
  rec.loss_pg = mean(pg_sum, rec.bt_batches);
  rec.loss_dae = mean(dae_sum, rec.dae_batches);
  rec.loss_supervised = mean(sup_sum, rec.supervised_batches);
  if (cfg.rl_enabled && !hooks.skip_pg) {
    rec.has_rewards = true;
    rec.simple_rewards = simple_acc.mean();
    rec.complex_rewards = complex_acc.mean();
    rec.mean_greedy_reward = (rec.simple_rewards.greedy_total + rec.complex_rewards.greedy_total) / 2.0;
  }

  const EvalResult dev = in_stage("evaluate", state.progress.global_step,
                                  [&] { return evaluate_pairs(state.model, data.dev); });
  rec.dev_sari = dev.sari;
  rec.dev_bleu = dev.bleu;
  state.progress.epoch = epoch;
  return rec;
}

Selection select_model(std::span<const EpochRecord> records, const SelectionConfig& selection) {
  if (records.empty()) fail(ErrorCode::no_records, "no epoch records to select from");
  if (!(selection.xi >= 0.0 && selection.xi <= 100.0)) fail(ErrorCode::config, "xi outside [0,100]");
  std::optional<std::size_t> best;
  for (std::size_t i = 0; i < records.size(); ++i) {
    if (records[i].dev_bleu < selection.xi) continue;
    if (!best || records[i].dev_sari > records[*best].dev_sari) best = i;
  }
  Selection out;
  if (best) {
    out.index = *best;
  } else {
    out.no_qualifying_epoch = true;
    out.index = 0;
    for (std::size_t i = 1; i < records.size(); ++i) {
      if (records[i].dev_bleu > records[out.index].dev_bleu) out.index = i;
    }
  }
  out.record = records[out.index];
  return out;
}

namespace {

EvalResult score_outputs(std::span<const SentencePair> pairs, const std::vector<Sentence>& outputs) {
  std::vector<Sentence> inputs, refs;
  for (const auto& [c, s] : pairs) {
    inputs.push_back(c);
    refs.push_back(s);
  }
  const ReferenceSets ref_sets = single_references(refs);
  const SariReport sr = sari(inputs, outputs, ref_sets);
  EvalResult e;
  e.sari = sr.sari;
  e.f_keep = sr.f_keep;
  e.f_del = sr.f_del;
  e.f_add = sr.f_add;
  e.bleu = bleu(outputs, ref_sets);
  e.input_fkgl = fkgl(inputs).fkgl;
  const bool any_words = std::any_of(outputs.begin(), outputs.end(), [](const Sentence& s) {
    return std::any_of(s.begin(), s.end(), [](const Token& t) { return is_word(t); });
  });
  e.output_fkgl = any_words ? fkgl(outputs).fkgl : 0.0;
  return e;
}

}  // namespace

EvalResult evaluate_pairs(const DualDecoderModel& model, std::span<const SentencePair> pairs,
                          std::vector<Sentence>* outputs) {
  if (pairs.empty()) fail(ErrorCode::empty_corpus, "no pairs to evaluate");
  std::vector<Sentence> outs;
  outs.reserve(pairs.size());
  for (const auto& [c, s] : pairs) {
    outs.push_back(decode_greedy(model, c, TranslationDirection::c2s, default_max_len(c.size())).tokens);
  }
  EvalResult e = score_outputs(pairs, outs);
  if (outputs) *outputs = std::move(outs);
  return e;
}

EvalResult evaluate_copy(std::span<const SentencePair> pairs) {
  if (pairs.empty()) fail(ErrorCode::empty_corpus, "no pairs to evaluate");
  std::vector<Sentence> outs;
  for (const auto& p : pairs) outs.push_back(p.first);
  return score_outputs(pairs, outs);
}

// ---------------------------------------------------------------------------
// End to end

RunResult run(const TrainerConfig& config, const TrainingData& data, const fs::path& out_dir,
              const TrainerHooks& hooks) {
  using clock = std::chrono::steady_clock;
  auto seconds_since = [](clock::time_point t) { return std::chrono::duration<double>(clock::now() - t).count(); };
  json timings = json::object();

  std::error_code ec;
  fs::create_directories(out_dir / "checkpoints", ec);
  if (ec) fail(ErrorCode::io, "cannot create " + out_dir.string() + ": " + ec.message());
  write_file(out_dir / "config.txt", config.to_key_values().to_text());

  auto t0 = clock::now();
  const auto res = in_stage("resources", 0, [&] { return std::make_unique<TrainingResources>(config, data); });
  timings["resources"] = seconds_since(t0);

  const fs::path records_path = out_dir / "records.json";
  const fs::path pretrain_path = out_dir / "pretrain.json";
  const bool resuming = config.resume && fs::exists(records_path) && fs::exists(pretrain_path);
  std::ofstream log(out_dir / "train_log.jsonl", resuming ? std::ios::app : std::ios::trunc);
  if (!log) fail(ErrorCode::io, "cannot open training log in " + out_dir.string());

  TrainingState state;
  std::vector<EpochRecord> records;
  json pretrain_info;
  auto restore = [&](const fs::path& path) {
    Checkpoint ck = load_checkpoint(path);
    if (!(ck.model.vocab == res->model_vocab()) || ck.model.shape.embed_dim != config.shape.embed_dim ||
        ck.model.shape.hidden_dim != config.shape.hidden_dim) {
      fail(ErrorCode::checkpoint, path.string() + " does not match the configured model");
    }
    state.model = std::move(ck.model);
    state.adam = std::move(ck.adam);
    state.progress = ck.progress;
  };

  if (resuming) {
    for (const auto& j : read_json(records_path)) records.push_back(record_from(j));
    pretrain_info = read_json(pretrain_path);
    if (records.empty()) {
      restore(out_dir / "pretrained.ckpt");
    } else {
      restore(out_dir / records.back().checkpoint);
    }
  } else {
    t0 = clock::now();
    state = initial_state(*res);
    if (!config.init_checkpoint.empty()) {
      in_stage("init_checkpoint", 0, [&] { restore(config.init_checkpoint); });
      state.progress.epoch = 0;
      pretrain_info = {{"source", "init_checkpoint"}, {"path", config.init_checkpoint}};
    } else {
      std::vector<double> losses;
      try {
        losses = pretrain_dae(state, *res, hooks, &log);
      } catch (const Error&) {
        save_checkpoint(state.model, state.adam, out_dir / "last_good.ckpt", state.progress);
        throw;
      }
      const std::size_t w = std::min<std::size_t>(100, losses.size());
      auto avg = [](auto b, auto e) {
        return b == e ? 0.0 : std::accumulate(b, e, 0.0) / static_cast<double>(std::distance(b, e));
      };
      pretrain_info = {{"source", "trained"},
                       {"steps", losses.size()},
                       {"initial_loss", avg(losses.begin(), losses.begin() + static_cast<std::ptrdiff_t>(w))},
                       {"final_loss", avg(losses.end() - static_cast<std::ptrdiff_t>(w), losses.end())}};
    }
    save_checkpoint(state.model, state.adam, out_dir / "pretrained.ckpt", state.progress);
    pretrain_info["dev"] = eval_json(in_stage("evaluate", 0, [&] { return evaluate_pairs(state.model, data.dev); }));
    write_json(pretrain_path, pretrain_info);
    write_json(records_path, json::array());
    timings["pretrain"] = seconds_since(t0);
  }

  for (std::size_t epoch = records.size() + 1; epoch <= config.bt_epochs; ++epoch) {
    t0 = clock::now();
    EpochRecord rec;
    try {
      rec = train_iteration(state, *res, epoch, hooks, &log);
    } catch (const Error&) {
      save_checkpoint(state.model, state.adam, out_dir / "last_good.ckpt", state.progress);
      throw;
    }
    rec.checkpoint = epoch_checkpoint_name(epoch);
    save_checkpoint(state.model, state.adam, out_dir / rec.checkpoint, state.progress);
    records.push_back(rec);
    json arr = json::array();
    for (const auto& r : records) arr.push_back(record_json(r));
    write_json(records_path, arr);
    timings["epoch_" + std::to_string(epoch)] = seconds_since(t0);
    log.flush();
    if (config.stop_after_epoch != 0 && epoch == config.stop_after_epoch) break;
  }

  RunResult result;
  result.epochs = records;
  const bool completed = records.size() == config.bt_epochs;
  json report;
  report["config"] = config.to_key_values().values();
  report["seed"] = config.seed;
  report["completed"] = completed;
  report["data"] = {{"simple_sentences", data.simple.size()},
                    {"complex_sentences", data.complex.size()},
                    {"dev_pairs", data.dev.size()},
                    {"test_pairs", data.test.size()},
                    {"parallel_pool", data.parallel.size()},
                    {"embedding_sentences", data.embedding.size()},
                    {"supervised_pairs", res->supervised_pairs().size()},
                    {"model_vocabulary", res->model_vocab().size()},
                    {"parameters", state.model.param_count()},
                    {"rule_keys", res->rules().key_count(Direction::forward)}};
  report["pretrain"] = pretrain_info;
  report["baseline"] = {{"dev", eval_json(evaluate_copy(data.dev))}};
  if (!data.test.empty()) report["baseline"]["test"] = eval_json(evaluate_copy(data.test));

  json epochs = json::array(), sari_arr = json::array(), bleu_arr = json::array();
  std::size_t supervised_batches = 0;
  for (const auto& r : records) {
    epochs.push_back(record_json(r));
    sari_arr.push_back(r.dev_sari);
    bleu_arr.push_back(r.dev_bleu);
    supervised_batches += r.supervised_batches;
  }
  report["epochs"] = epochs;
  report["dev_sari"] = sari_arr;
  report["dev_bleu"] = bleu_arr;
  report["supervised_batches"] = supervised_batches;

  if (!records.empty()) {
    t0 = clock::now();
    result.selection = select_model(records, {config.xi});
    report["selection"] = {{"epoch", result.selection.record.epoch},
                           {"xi", config.xi},
                           {"no_qualifying_epoch", result.selection.no_qualifying_epoch},
                           {"checkpoint", result.selection.record.checkpoint}};
    const fs::path selected = out_dir / result.selection.record.checkpoint;
    fs::copy_file(selected, out_dir / "selected.ckpt", fs::copy_options::overwrite_existing, ec);
    if (ec) fail(ErrorCode::io, "cannot copy selected checkpoint: " + ec.message());
    if (!data.test.empty()) {
      const Checkpoint ck = load_checkpoint(selected);
      std::vector<Sentence> outputs;
      result.test = in_stage("test", 0, [&] { return evaluate_pairs(ck.model, data.test, &outputs); });
      report["test"] = eval_json(*result.test);
      write_corpus(out_dir / "test_outputs.txt", outputs);
    }
    timings["selection"] = seconds_since(t0);
  }

  result.report_json = report.dump(2) + "\n";
  write_file(out_dir / "report.json", result.report_json);
  write_json(out_dir / "timings.json", timings);
  return result;
}

}  // namespace btsimp
