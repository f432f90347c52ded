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

#include "btsimp/complexity.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

#include "btsimp/error.hpp"
#include "btsimp/metrics.hpp"

namespace btsimp {

double sentence_fkgl(const Sentence& s) { return fkgl(std::span<const Sentence>(&s, 1)).fkgl; }

FkglStats corpus_fkgl_stats(std::span<const Sentence> corpus) {
  std::vector<double> values;
  values.reserve(corpus.size());
  for (const auto& s : corpus) {
    if (std::none_of(s.begin(), s.end(), [](const Token& t) { return is_word(t); })) continue;
    values.push_back(sentence_fkgl(s));
  }
  if (values.size() < 2) fail(ErrorCode::degenerate_input, "FKGL statistics need at least two sentences with words");
  double mean = 0.0;
  for (double v : values) mean += v;
  mean /= static_cast<double>(values.size());
  double var = 0.0;
  for (double v : values) var += (v - mean) * (v - mean);
  var /= static_cast<double>(values.size());
  return {mean, std::max(std::sqrt(var), kFkglStdFloor)};
}

double complexity_reward(double fkgl_value, const FkglStats& stats, Side side) {
  const double z = (fkgl_value - stats.mean) / stats.std;
  const double normalized = 1.0 / (1.0 + std::exp(-z));
  return side == Side::complex ? normalized : 1.0 - normalized;
}

}  // namespace btsimp
