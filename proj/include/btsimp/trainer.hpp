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
#include <functional>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "btsimp/complexity.hpp"
#include "btsimp/config.hpp"
#include "btsimp/embedding.hpp"
#include "btsimp/lm.hpp"
#include "btsimp/noise.hpp"
#include "btsimp/reward.hpp"
#include "btsimp/rules.hpp"
#include "btsimp/seqmodel.hpp"
#include "btsimp/synthdata.hpp"
#include "btsimp/text.hpp"

namespace btsimp {

// Defaults are the full-scale values; toy_defaults() rescales the step counts
// and learning rates for the synthetic language.
struct TrainerConfig {
  std::uint64_t seed = 1;
  ModelShape shape;

  std::uint64_t pretrain_steps = 200000;
  double lr_pretrain = 1e-4;
  double lr_bt = 5e-5;
  std::size_t batch_size = 16;
  std::size_t bt_epochs = 10;
  std::size_t bt_steps_per_epoch = 1000;

  double gamma_max = 0.9;
  double gamma_slope = 8.0;
  std::size_t gamma_ramp_start_epochs = 1;
  std::size_t gamma_ramp_epochs = 4;

  double supervision_fraction = 0.0;
  // Updates per round-robin cycle.
  std::size_t alternation_supervised = 1;
  std::size_t alternation_bt = 1;
  std::size_t alternation_dae = 1;
  bool dae_interleave = true;
  bool rl_enabled = false;

  NoiseConfig noise;
  std::uint64_t frequent_threshold = Vocabulary::kDefaultFrequentThreshold;
  double rule_min_score = RuleTable::kDefaultMinScore;
  std::size_t rule_top_k = RuleTable::kDefaultTopK;

  std::size_t lm_order = 3;
  std::size_t reward_embedding_dim = 32;
  double sif_a = kDefaultSifWeight;

  double xi = 0.0;  // BLEU threshold for model selection

  std::string init_checkpoint;    // skip pretraining and start from this file
  bool resume = false;            // continue from the newest epoch checkpoint
  std::size_t stop_after_epoch = 0;  // 0 runs every epoch

  static TrainerConfig toy_defaults();
  // Unknown keys throw ConfigError.
  static TrainerConfig from_key_values(const KeyValueConfig& kv, const TrainerConfig& base);
  static TrainerConfig from_key_values(const KeyValueConfig& kv) { return from_key_values(kv, TrainerConfig()); }
  KeyValueConfig to_key_values() const;

  GammaSchedule gamma_schedule() const;
  // Throws ConfigError.
  void validate() const;
};

struct TrainingData {
  Corpus simple{{}, ComplexityTag::simple};
  Corpus complex{{}, ComplexityTag::complex};
  std::vector<SimplificationRule> rules;
  std::vector<SentencePair> dev;
  std::vector<SentencePair> test;      // optional
  std::vector<SentencePair> parallel;  // optional pool for supervision
  Corpus embedding{{}, ComplexityTag::unlabeled};  // optional extra text for the reward embeddings
};

// Reads the files written by write_synthdata. test.pairs, parallel.pairs and
// embedding.txt may be absent.
TrainingData load_training_data(const std::filesystem::path& dir);

struct TrainingExample {
  Sentence source;
  Sentence target;
  TranslationDirection direction = TranslationDirection::c2s;
};

enum class UpdateKind { pretrain, supervised, backtranslation, denoising };

std::string_view update_kind_name(UpdateKind kind);

struct TrainerHooks {
  bool zero_advantage = false;  // force every advantage to 0
  bool skip_pg = false;         // drop the policy-gradient term but keep the (1 - gamma) weight
  std::function<void(UpdateKind, const TrainingExample&)> on_example;
  std::function<void(std::uint64_t global_step, const DualDecoderModel&)> after_update;
};

// Everything derived from the data before training starts.
class TrainingResources {
 public:
  TrainingResources(TrainerConfig config, TrainingData data);
  TrainingResources(const TrainingResources&) = delete;
  TrainingResources& operator=(const TrainingResources&) = delete;

  const TrainerConfig& config() const noexcept { return config_; }
  const TrainingData& data() const noexcept { return data_; }
  const Vocabulary& frequencies() const noexcept { return frequencies_; }
  const RuleTable& rules() const noexcept { return rules_; }
  const ModelVocabulary& model_vocab() const noexcept { return model_vocab_; }
  const NGramLM& lm(Side side) const { return side == Side::simple ? simple_lm_ : complex_lm_; }
  const EmbeddingTable& embeddings() const noexcept { return embeddings_; }
  const FkglStats& fkgl_stats() const noexcept { return fkgl_stats_; }
  // Parallel pairs available for supervision: a seeded subset of the pool.
  const std::vector<SentencePair>& supervised_pairs() const noexcept { return supervised_; }
  RewardScorers scorers() const;

  // N_s for simple sentences, with a different simple sentence as the
  // additive donor; N_c for complex ones.
  Sentence noise(const Sentence& s, Side side, RandomSource& rng) const;

 private:
  TrainerConfig config_;
  TrainingData data_;
  Vocabulary frequencies_;
  RuleTable rules_;
  ModelVocabulary model_vocab_;
  NGramLM simple_lm_;
  NGramLM complex_lm_;
  EmbeddingTable embeddings_;
  FkglStats fkgl_stats_;
  std::vector<SentencePair> supervised_;
};

struct TrainingState {
  DualDecoderModel model;
  AdamState adam;
  TrainingProgress progress;
};

TrainingState initial_state(const TrainingResources& resources);

// Denoising pretraining: alternating simple and complex batches, each batch
// reconstructing clean sentences from their noised versions through the
// matching decoder. Returns the per-step mean loss.
std::vector<double> pretrain_dae(TrainingState& state, const TrainingResources& resources,
                                 const TrainerHooks& hooks = {}, std::ostream* log = nullptr);

// Greedy translation of each sentence into the other side. Pairs keep the
// original as target and are tagged with the direction they train.
std::vector<TrainingExample> backtranslate(const DualDecoderModel& model, std::span<const Sentence> batch,
                                           Side source_side);

struct SideRewards {
  double sample_total = 0.0;
  double greedy_total = 0.0;
  double r_f = 0.0;
  double r_s = 0.0;
  double r_c = 0.0;
  double advantage = 0.0;
};

struct EpochRecord {
  std::size_t epoch = 0;  // 1-based
  double dev_sari = 0.0;
  double dev_bleu = 0.0;
  std::string checkpoint;
  bool has_rewards = false;
  SideRewards simple_rewards;   // rewards of c->s samples
  SideRewards complex_rewards;  // rewards of s->c samples
  double mean_greedy_reward = 0.0;
  double loss_ce = 0.0;
  double loss_pg = 0.0;
  double loss_dae = 0.0;
  double loss_supervised = 0.0;
  double gamma_end = 0.0;
  std::size_t supervised_batches = 0;
  std::size_t bt_batches = 0;
  std::size_t dae_batches = 0;
};

// One back-translation epoch followed by dev evaluation. The checkpoint field
// is left empty; run() fills it after saving.
EpochRecord train_iteration(TrainingState& state, const TrainingResources& resources, std::size_t epoch,
                            const TrainerHooks& hooks = {}, std::ostream* log = nullptr);

struct SelectionConfig {
  double xi = 0.0;
};

struct Selection {
  std::size_t index = 0;
  EpochRecord record;
  bool no_qualifying_epoch = false;
};

// Highest dev SARI among epochs with BLEU >= xi, earliest on ties; highest
// BLEU with the warning flag when nothing qualifies. Throws NoRecords.
Selection select_model(std::span<const EpochRecord> records, const SelectionConfig& selection);

struct EvalResult {
  double sari = 0.0;
  double f_keep = 0.0;
  double f_del = 0.0;
  double f_add = 0.0;
  double bleu = 0.0;
  double input_fkgl = 0.0;
  double output_fkgl = 0.0;
};

// Greedy complex->simple decoding of each pair's complex side, scored against
// the simple side.
EvalResult evaluate_pairs(const DualDecoderModel& model, std::span<const SentencePair> pairs,
                          std::vector<Sentence>* outputs = nullptr);
// Scores copying the input through unchanged.
EvalResult evaluate_copy(std::span<const SentencePair> pairs);

struct RunResult {
  std::vector<EpochRecord> epochs;
  Selection selection;
  std::optional<EvalResult> test;
  std::string report_json;
};

// Output directory layout: config.txt, train_log.jsonl, pretrained.ckpt,
// checkpoints/epoch_NNN.ckpt, records.json, selected.ckpt, report.json and
// timings.json. Errors are rethrown with the failing stage and step.
RunResult run(const TrainerConfig& config, const TrainingData& data, const std::filesystem::path& out_dir,
              const TrainerHooks& hooks = {});

}  // namespace btsimp
