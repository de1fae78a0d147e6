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
#include "crowneval/iou_table.h"

#include <algorithm>
#include <cmath>
#include <memory>

#include "crowneval/errors.h"

namespace crowneval {

namespace {

constexpr int64_t kMaxCells = int64_t{1} << 22;

bool Overlaps(const Box& a, const Box& b) {
  return !BoxIntersection(a, b).Empty();
}

}  // namespace

IouTable IouTable::FromDense(const std::vector<std::vector<double>>& dense,
                             size_t cols) {
  IouTable table(dense.size(), cols);
  for (size_t r = 0; r < dense.size(); ++r) {
    for (size_t c = 0; c < dense[r].size(); ++c) {
      if (dense[r][c] > 0.0) table.Add(r, c, dense[r][c]);
    }
  }
  return table;
}

double IouTable::Get(size_t r, size_t c) const {
  const auto& row = rows_[r];
  auto it = std::lower_bound(
      row.begin(), row.end(), c,
      [](const IouEntry& e, size_t col) { return e.column < col; });
  return (it != row.end() && it->column == c) ? it->iou : 0.0;
}

double IouTable::RowMax(size_t r) const {
  double best = 0.0;
  for (const IouEntry& e : rows_[r]) best = std::max(best, e.iou);
  return best;
}

void IouTable::Add(size_t r, size_t c, double iou) {
  if (c >= cols_) throw ValidationError("IoU table column out of range");
  auto& row = rows_[r];
  if (!row.empty() && row.back().column >= c) {
    throw ValidationError("IoU table columns must be added in order");
  }
  row.push_back({static_cast<uint32_t>(c), iou});
}

IouTable IouTable::Transposed() const {
  IouTable out(cols_, rows_.size());
  for (size_t r = 0; r < rows_.size(); ++r) {
    for (const IouEntry& e : rows_[r]) out.Add(e.column, r, e.iou);
  }
  return out;
}

BoxIndex::BoxIndex(std::vector<Box> boxes) : boxes_(std::move(boxes)) {
  double x0 = 0, y0 = 0, x1 = 0, y1 = 0, extent_sum = 0;
  size_t n = 0;
  for (const Box& b : boxes_) {
    if (b.Empty()) continue;
    if (n == 0) {
      x0 = b.x0;
      y0 = b.y0;
      x1 = b.x1;
      y1 = b.y1;
    }
    x0 = std::min(x0, b.x0);
    y0 = std::min(y0, b.y0);
    x1 = std::max(x1, b.x1);
    y1 = std::max(y1, b.y1);
    extent_sum += std::max(b.Width(), b.Height());
    ++n;
  }
  if (n == 0) return;
  cell_ = std::max(4.0, extent_sum / static_cast<double>(n));
  origin_x_ = static_cast<int64_t>(std::floor(x0));
  origin_y_ = static_cast<int64_t>(std::floor(y0));
  auto span_cells = [&](double lo, double hi) {
    return static_cast<int64_t>(std::floor((hi - lo) / cell_)) + 1;
  };
  while (span_cells(origin_x_, x1) * span_cells(origin_y_, y1) > kMaxCells) {
    cell_ *= 2.0;
  }
  cells_x_ = span_cells(origin_x_, x1);
  cells_y_ = span_cells(origin_y_, y1);
  buckets_.resize(static_cast<size_t>(cells_x_ * cells_y_));
  for (size_t i = 0; i < boxes_.size(); ++i) {
    const Box& b = boxes_[i];
    if (b.Empty()) continue;
    const auto cx0 = static_cast<int64_t>((b.x0 - origin_x_) / cell_);
    const auto cy0 = static_cast<int64_t>((b.y0 - origin_y_) / cell_);
    const auto cx1 = std::min(
        cells_x_ - 1, static_cast<int64_t>((b.x1 - origin_x_) / cell_));
    const auto cy1 = std::min(
        cells_y_ - 1, static_cast<int64_t>((b.y1 - origin_y_) / cell_));
    for (int64_t cy = cy0; cy <= cy1; ++cy) {
      for (int64_t cx = cx0; cx <= cx1; ++cx) {
        buckets_[cy * cells_x_ + cx].push_back(static_cast<uint32_t>(i));
      }
    }
  }
}

std::vector<uint32_t> BoxIndex::Query(const Box& query) const {
  std::vector<uint32_t> out;
  if (buckets_.empty() || query.Empty()) return out;
  auto clamp_cell = [](double v, int64_t limit) {
    return std::clamp<int64_t>(static_cast<int64_t>(std::floor(v)), 0,
                               limit - 1);
  };
  const int64_t cx0 = clamp_cell((query.x0 - origin_x_) / cell_, cells_x_);
  const int64_t cy0 = clamp_cell((query.y0 - origin_y_) / cell_, cells_y_);
  const int64_t cx1 = clamp_cell((query.x1 - origin_x_) / cell_, cells_x_);
  const int64_t cy1 = clamp_cell((query.y1 - origin_y_) / cell_, cells_y_);
  for (int64_t cy = cy0; cy <= cy1; ++cy) {
    for (int64_t cx = cx0; cx <= cx1; ++cx) {
      for (uint32_t id : buckets_[cy * cells_x_ + cx]) {
        if (Overlaps(boxes_[id], query)) out.push_back(id);
      }
    }
  }
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

IouTable ComputeIouTable(std::span<const CrownInstance> rows,
                         std::span<const CrownInstance> cols, IouKind kind) {
  IouTable table(rows.size(), cols.size());
  if (rows.empty() || cols.empty()) return table;

  // Masks for polygon-only crowns are rasterized once up front.
  std::vector<std::unique_ptr<BinaryMask>> owned;
  auto mask_refs = [&](std::span<const CrownInstance> side) {
    std::vector<const BinaryMask*> refs(side.size(), nullptr);
    if (kind != IouKind::kMask) return refs;
    for (size_t i = 0; i < side.size(); ++i) {
      if (side[i].mask) {
        refs[i] = &*side[i].mask;
      } else {
        owned.push_back(std::make_unique<BinaryMask>(InstanceMask(side[i])));
        refs[i] = owned.back().get();
      }
    }
    return refs;
  };
  const auto row_masks = mask_refs(rows);
  const auto col_masks = mask_refs(cols);

  std::vector<Box> col_boxes;
  col_boxes.reserve(cols.size());
  for (size_t c = 0; c < cols.size(); ++c) {
    col_boxes.push_back(kind == IouKind::kMask && col_masks[c]->Empty()
                            ? Box{}
                            : InstanceBox(cols[c]));
  }
  const BoxIndex index(col_boxes);

  for (size_t r = 0; r < rows.size(); ++r) {
    if (kind == IouKind::kMask && row_masks[r]->Empty()) continue;
    const Box row_box = InstanceBox(rows[r]);
    for (uint32_t c : index.Query(row_box)) {
      double iou = 0.0;
      switch (kind) {
        case IouKind::kMask: {
          const int64_t inter = IntersectionCount(*row_masks[r], *col_masks[c]);
          const int64_t uni = row_masks[r]->Count() + col_masks[c]->Count() -
                              inter;
          iou = static_cast<double>(inter) / static_cast<double>(uni);
          break;
        }
        case IouKind::kBox:
          iou = BoxIoU(row_box, col_boxes[c]);
          break;
        case IouKind::kPolygon:
          iou = InstanceIoU(rows[r], cols[c], IouKind::kPolygon);
          break;
      }
      if (iou > 0.0) table.Add(r, c, iou);
    }
  }
  return table;
}

}  // namespace crowneval
