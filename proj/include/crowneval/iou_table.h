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
#ifndef CROWNEVAL_IOU_TABLE_H_
#define CROWNEVAL_IOU_TABLE_H_

#include <cstdint>
#include <span>
#include <vector>

#include "crowneval/crown.h"

namespace crowneval {

struct IouEntry {
  uint32_t column = 0;
  double iou = 0.0;
};

// Sparse rows x columns IoU table holding strictly positive entries only.
// Entries of a row are sorted by column.
class IouTable {
 public:
  IouTable() = default;
  IouTable(size_t rows, size_t cols) : rows_(rows), cols_(cols) {}

  // Zero entries of the dense table are dropped.
  static IouTable FromDense(const std::vector<std::vector<double>>& dense,
                            size_t cols);

  size_t rows() const { return rows_.size(); }
  size_t cols() const { return cols_; }

  std::span<const IouEntry> Row(size_t r) const { return rows_[r]; }
  double Get(size_t r, size_t c) const;
  double RowMax(size_t r) const;

  // Appends an entry; columns must arrive in increasing order per row.
  void Add(size_t r, size_t c, double iou);

  IouTable Transposed() const;

 private:
  std::vector<std::vector<IouEntry>> rows_;
  size_t cols_ = 0;
};

// Uniform-grid bucket index over boxes, used to find overlapping candidates
// without an all-pairs scan.
class BoxIndex {
 public:
  explicit BoxIndex(std::vector<Box> boxes);

  // Indices (ascending) whose box has positive-area overlap with `query`.
  std::vector<uint32_t> Query(const Box& query) const;

  size_t size() const { return boxes_.size(); }

 private:
  std::vector<Box> boxes_;
  double cell_ = 1.0;
  int64_t origin_x_ = 0;
  int64_t origin_y_ = 0;
  int64_t cells_x_ = 0;
  int64_t cells_y_ = 0;
  std::vector<std::vector<uint32_t>> buckets_;
};

// IoU of every (row, column) pair with overlapping boxes.
IouTable ComputeIouTable(std::span<const CrownInstance> rows,
                         std::span<const CrownInstance> cols, IouKind kind);

}  // namespace crowneval

#endif  // CROWNEVAL_IOU_TABLE_H_
