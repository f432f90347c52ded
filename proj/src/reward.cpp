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

#include "btsimp/reward.hpp"

#include <algorithm>
#include <cmath>

#include "btsimp/error.hpp"
#include "btsimp/metrics.hpp"

namespace btsimp {

double harmonic_mean(std::span<const double> values) {
  if (values.empty()) fail(ErrorCode::invalid_argument, "harmonic mean of an empty list");
  double inv = 0.0;
  bool zero = false;
  for (double v : values) {
    if (v < 0.0 || std::isnan(v)) fail(ErrorCode::range, "harmonic mean input must be non-negative");
    if (v <= kHarmonicZero) zero = true;
    else inv += 1.0 / v;
  }
  if (zero) return 0.0;
  return static_cast<double>(values.size()) / inv;
}

RewardBundle total_reward(const Sentence& sentence, const Sentence& model_input, Side side,
                          const RewardScorers& scorers) {
  if (sentence.empty()) fail(ErrorCode::degenerate_input, "cannot reward an empty sentence");
  const FluencyModel* lm = side == Side::simple ? scorers.simple_lm : scorers.complex_lm;
  if (!lm || !scorers.embeddings || !scorers.vocab) fail(ErrorCode::invalid_argument, "reward scorers incomplete");

  RewardBundle b;
  b.r_f = fluency_reward(*lm, sentence);
  b.r_s = relevance_reward(sentence_vector(*scorers.embeddings, model_input, *scorers.vocab, scorers.sif_a),
                           sentence_vector(*scorers.embeddings, sentence, *scorers.vocab, scorers.sif_a));
  // A sentence without word tokens has no grade level; treat it as maximally
  // unreadable for the side.
  const bool has_words = std::any_of(sentence.begin(), sentence.end(), [](const Token& t) { return is_word(t); });
  b.r_c = has_words ? complexity_reward(sentence_fkgl(sentence), scorers.fkgl_stats, side) : 0.0;
  const double parts[] = {b.r_f, b.r_s, b.r_c};
  b.total = harmonic_mean(parts);
  return b;
}

double advantage(const RewardBundle& sample, const RewardBundle& greedy) { return sample.total - greedy.total; }

double gamma_at(const GammaSchedule& schedule, std::uint64_t step) {
  if (step < schedule.ramp_start) return 0.0;
  const double length = static_cast<double>(std::max<std::uint64_t>(schedule.ramp_length, 1));
  const double progress = static_cast<double>(step - schedule.ramp_start) / length;
  const double g = schedule.gamma_max / (1.0 + std::exp(-schedule.slope * (progress - 0.5)));
  return std::clamp(g, 0.0, schedule.gamma_max);
}

double combined_loss(double l_ce, double l_pg, double gamma) { return (1.0 - gamma) * l_ce + gamma * l_pg; }

}  // namespace btsimp
