// Copyright 2026 The Crowneval Authors. All Rights Reserved.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     https://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.
#include "crowneval/thresholds.h"

#include <string>

#include "crowneval/errors.h"

namespace crowneval {

ThresholdSet ThresholdSet::Coco() {
  std::vector<double> values;
  for (int k = 50; k <= 95; k += 5) values.push_back(k / 100.0);
  return ThresholdSet(std::move(values));
}

ThresholdSet::ThresholdSet(std::vector<double> values)
    : values_(std::move(values)) {
  if (values_.empty()) throw ValidationError("threshold set is empty");
  for (size_t i = 0; i < values_.size(); ++i) {
    if (!(values_[i] > 0.0 && values_[i] < 1.0)) {
      throw ValidationError("threshold " + std::to_string(values_[i]) +
                            " outside (0, 1)");
    }
    if (i > 0 && !(values_[i] > values_[i - 1])) {
      throw ValidationError("thresholds must be strictly increasing");
    }
  }
}

std::optional<size_t> ThresholdSet::IndexOf(double tau) const {
  for (size_t i = 0; i < values_.size(); ++i) {
    if (values_[i] == tau) return i;
  }
  return std::nullopt;
}

}  // namespace crowneval
