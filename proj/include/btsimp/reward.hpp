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

#include <cstdint>
#include <span>

#include "btsimp/complexity.hpp"
#include "btsimp/embedding.hpp"
#include "btsimp/lm.hpp"
#include "btsimp/text.hpp"

namespace btsimp {

struct RewardBundle {
  double r_f = 0.0;  // fluency
  double r_s = 0.0;  // relevance
  double r_c = 0.0;  // complexity
  double total = 0.0;
  double advantage = 0.0;
};

inline constexpr double kHarmonicZero = 1e-12;

// n / sum(1/v); 0 when any value is at or below kHarmonicZero. Throws
// RangeError for negative values and InvalidArgument for an empty list.
double harmonic_mean(std::span<const double> values);

// Scorers needed to reward sentences on either side.
struct RewardScorers {
  const FluencyModel* simple_lm = nullptr;
  const FluencyModel* complex_lm = nullptr;
  const EmbeddingTable* embeddings = nullptr;
  const Vocabulary* vocab = nullptr;  // unigram frequencies for SIF weights
  FkglStats fkgl_stats;
  double sif_a = kDefaultSifWeight;
};

// Rewards `sentence`, generated on `side` from `model_input`. Fluency uses
// the side's LM; relevance compares SIF vectors of the model input and the
// sentence; complexity uses the sentence's own FKGL. `advantage` is left 0.
RewardBundle total_reward(const Sentence& sentence, const Sentence& model_input, Side side,
                          const RewardScorers& scorers);

double advantage(const RewardBundle& sample, const RewardBundle& greedy);

struct GammaSchedule {
  double gamma_max = 0.9;
  std::uint64_t ramp_start = 0;
  std::uint64_t ramp_length = 1;
  double slope = 8.0;
};

// 0 before ramp_start, then gamma_max * logistic(slope * (progress - 0.5))
// with progress = (step - ramp_start) / ramp_length, clamped to
// [0, gamma_max].
double gamma_at(const GammaSchedule& schedule, std::uint64_t step);

// (1 - gamma) * l_ce + gamma * l_pg.
double combined_loss(double l_ce, double l_pg, double gamma);

}  // namespace btsimp
