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

#include <span>

#include "btsimp/text.hpp"

namespace btsimp {

struct FkglStats {
  double mean = 0.0;
  double std = 1.0;
};

inline constexpr double kFkglStdFloor = 1e-6;

// FKGL of a single sentence treated as a one-sentence corpus.
double sentence_fkgl(const Sentence& s);

// Mean and population standard deviation of per-sentence FKGL over the
// sentences that contain words. Throws DegenerateInput with fewer than two.
FkglStats corpus_fkgl_stats(std::span<const Sentence> corpus);

// logistic((value - mean) / std) on the complex side, one minus that on the
// simple side.
double complexity_reward(double fkgl_value, const FkglStats& stats, Side side);

}  // namespace btsimp
