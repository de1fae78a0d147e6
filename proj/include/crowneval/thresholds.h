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
#ifndef CROWNEVAL_THRESHOLDS_H_
#define CROWNEVAL_THRESHOLDS_H_

#include <optional>
#include <vector>

namespace crowneval {

// Ordered IoU thresholds. Strictly increasing, each in (0, 1).
class ThresholdSet {
 public:
  // {0.50, 0.55, ..., 0.95}, each value the nearest double to k / 100.
  static ThresholdSet Coco();

  // Throws ValidationError on an empty, unordered or out-of-range list.
  explicit ThresholdSet(std::vector<double> values);

  const std::vector<double>& values() const { return values_; }
  size_t size() const { return values_.size(); }

  // Position of `tau` in the set, if present.
  std::optional<size_t> IndexOf(double tau) const;

 private:
  std::vector<double> values_;
};

}  // namespace crowneval

#endif  // CROWNEVAL_THRESHOLDS_H_
