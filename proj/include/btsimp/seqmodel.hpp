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
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

#include "btsimp/random.hpp"
#include "btsimp/text.hpp"

namespace btsimp {

// The four conditional models: autoencoders s->s and c->c, and the
// translation policies s->c and c->s. The target side selects the decoder.
enum class TranslationDirection { s2s, c2c, s2c, c2s };

std::string_view direction_name(TranslationDirection d);
Side target_side(TranslationDirection d);
Side source_side(TranslationDirection d);

// Closed vocabulary shared by both sides. Output id 0 is end-of-sentence;
// words follow in byte order. The decoder start symbol is input-only and
// lives one past the last output id.
class ModelVocabulary {
 public:
  static constexpr int kEos = 0;

  ModelVocabulary() = default;
  explicit ModelVocabulary(std::vector<Token> words);

  static ModelVocabulary from_corpora(std::span<const Corpus> corpora);

  std::size_t size() const noexcept { return words_.size() + 1; }  // output classes
  int bos() const noexcept { return static_cast<int>(size()); }
  bool contains(std::string_view token) const { return ids_.find(token) != ids_.end(); }
  // Throws UnknownToken.
  int id(std::string_view token) const;
  const Token& word(int id) const;
  const std::vector<Token>& words() const noexcept { return words_; }

  std::vector<int> encode(const Sentence& s) const;
  Sentence decode(std::span<const int> ids) const;
  std::uint64_t hash() const;

  friend bool operator==(const ModelVocabulary& a, const ModelVocabulary& b) { return a.words_ == b.words_; }

 private:
  std::vector<Token> words_;
  StringMap<int> ids_;
};

struct ModelShape {
  std::size_t embed_dim = 64;
  std::size_t hidden_dim = 64;
};

// Named parameter blocks inside the flat parameter vector.
enum class Block : std::size_t {
  embedding,   // E x (V+1), column per token, last column is the start symbol
  enc_wx,      // 3H x E  (update, reset, candidate)
  enc_uzr,     // 2H x H
  enc_un,      // H x H
  enc_b,       // 3H
  out_w,       // V x H, shared output projection
  out_b,       // V
  // Decoder blocks; the complex-side copy follows at kDecoderBlockCount offset.
  dec_s_wx,
  dec_s_uzr,
  dec_s_un,
  dec_s_b,
  dec_s_att,   // H x H bilinear attention
  dec_s_comb,  // H x 2H
  dec_s_comb_b,
  dec_s_init,  // H x H
  dec_s_init_b,
  dec_c_wx,
  dec_c_uzr,
  dec_c_un,
  dec_c_b,
  dec_c_att,
  dec_c_comb,
  dec_c_comb_b,
  dec_c_init,
  dec_c_init_b,
  count,
};

inline constexpr std::size_t kDecoderBlockCount = 9;

struct BlockInfo {
  std::string name;
  std::size_t offset = 0;
  std::size_t rows = 0;
  std::size_t cols = 0;
  double init_bound = 0.0;  // uniform(-b, b); 0 for zero init
  std::size_t size() const { return rows * cols; }
};

class ParamLayout {
 public:
  ParamLayout() = default;
  ParamLayout(std::size_t vocab, const ModelShape& shape);

  const BlockInfo& info(Block b) const { return blocks_[static_cast<std::size_t>(b)]; }
  const std::vector<BlockInfo>& blocks() const noexcept { return blocks_; }
  std::size_t total() const noexcept { return total_; }

  Eigen::Map<Eigen::MatrixXd> view(Eigen::VectorXd& flat, Block b) const {
    const auto& i = info(b);
    return {flat.data() + i.offset, static_cast<Eigen::Index>(i.rows), static_cast<Eigen::Index>(i.cols)};
  }
  Eigen::Map<const Eigen::MatrixXd> view(const Eigen::VectorXd& flat, Block b) const {
    const auto& i = info(b);
    return {flat.data() + i.offset, static_cast<Eigen::Index>(i.rows), static_cast<Eigen::Index>(i.cols)};
  }

  // Decoder block for a side, given the simple-side block id.
  static Block decoder_block(Block simple_block, Side side) {
    if (side == Side::simple) return simple_block;
    return static_cast<Block>(static_cast<std::size_t>(simple_block) + kDecoderBlockCount);
  }

 private:
  std::vector<BlockInfo> blocks_;
  std::size_t total_ = 0;
};

struct DualDecoderModel {
  ModelVocabulary vocab;
  ModelShape shape;
  ParamLayout layout;
  Eigen::VectorXd params;  // Theta

  std::size_t param_count() const noexcept { return static_cast<std::size_t>(params.size()); }
};

// Uniform init in +-1/sqrt(fan_in) for weight matrices, +-0.1 for the
// embedding table, zero biases. Deterministic in the seed.
DualDecoderModel init_model(const ModelVocabulary& vocab, const ModelShape& shape, std::uint64_t seed);

struct DecodeOutput {
  Sentence tokens;
  // One entry per emitted token plus the end-of-sentence step when `ended`.
  std::vector<double> token_logprobs;
  bool ended = false;

  double total_logprob() const;
};

struct NllResult {
  double loss = 0.0;  // mean negative log-likelihood per target step
  Eigen::VectorXd gradient;
};

// Teacher-forced NLL of `target` (plus end-of-sentence) given `source`,
// averaged over target steps, and its exact gradient. Throws UnknownToken.
NllResult nll_and_grad(const DualDecoderModel& model, const Sentence& source, const Sentence& target,
                       TranslationDirection direction);

// Lower-level form on id sequences: adds scale * d(sum of -log p)/dTheta into
// `gradient` and returns the unscaled sum of -log p. `append_eos` controls
// whether the end-of-sentence step is part of the sequence.
double accumulate_sequence_gradient(const DualDecoderModel& model, std::span<const int> source,
                                    std::span<const int> target, bool append_eos, Side decoder_side,
                                    double scale, Eigen::VectorXd& gradient);

// Sum of teacher-forced log-probabilities.
double sequence_log_prob(const DualDecoderModel& model, const Sentence& source, const Sentence& target,
                         TranslationDirection direction, bool append_eos = true);

// Per-step output distributions under teacher forcing (column per step).
Eigen::MatrixXd step_distributions(const DualDecoderModel& model, const Sentence& source, const Sentence& target,
                                   TranslationDirection direction);

inline std::size_t default_max_len(std::size_t source_len) { return 2 * source_len + 5; }

// Argmax decoding; ties go to the lowest token id. Never emits more than
// max_len tokens; end-of-sentence is excluded until min_len tokens exist.
// Both decoders throw NumericError if the model yields a non-finite distribution.
DecodeOutput decode_greedy(const DualDecoderModel& model, const Sentence& source, TranslationDirection direction,
                           std::size_t max_len, std::size_t min_len = 0);

// Ancestral sampling from the per-step softmax.
DecodeOutput decode_sample(const DualDecoderModel& model, const Sentence& source, TranslationDirection direction,
                           RandomSource& rng, std::size_t max_len);

// Gradient of -advantage * log P(sample | source). Equals the NLL gradient of
// the sample scaled by advantage times the number of sampled steps.
Eigen::VectorXd pg_grad(const DualDecoderModel& model, const Sentence& source, const DecodeOutput& sample,
                        double advantage, TranslationDirection direction);

struct AdamState {
  static constexpr double kBeta1 = 0.5;
  static constexpr double kBeta2 = 0.999;
  static constexpr double kEpsilon = 1e-8;

  Eigen::VectorXd m;
  Eigen::VectorXd v;
  std::uint64_t step = 0;

  static AdamState for_model(const DualDecoderModel& model);
  friend bool operator==(const AdamState& a, const AdamState& b) {
    return a.step == b.step && a.m.size() == b.m.size() && a.m == b.m && a.v == b.v;
  }
};

// Bias-corrected Adam. Throws NumericError on a non-finite gradient and
// ShapeError when sizes do not match.
void adam_step(DualDecoderModel& model, const Eigen::VectorXd& gradient, AdamState& state, double lr);

// Bookkeeping stored alongside a checkpoint so training can resume.
struct TrainingProgress {
  std::uint64_t epoch = 0;
  std::uint64_t global_step = 0;
};

struct Checkpoint {
  DualDecoderModel model;
  AdamState adam;
  TrainingProgress progress;
};

inline constexpr std::uint32_t kCheckpointVersion = 1;

void save_checkpoint(const DualDecoderModel& model, const AdamState& adam, const std::filesystem::path& path,
                     const TrainingProgress& progress = {});
// Throws CheckpointError on I/O failure, corruption or version mismatch.
Checkpoint load_checkpoint(const std::filesystem::path& path);

}  // namespace btsimp
