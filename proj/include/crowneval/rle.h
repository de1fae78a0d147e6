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
#ifndef CROWNEVAL_RLE_H_
#define CROWNEVAL_RLE_H_

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "crowneval/geometry.h"

namespace crowneval {

// Column-major run lengths over a height x width image, alternating unset and
// set runs and starting with unset (possibly 0). Sum of counts equals
// height * width.
struct RleMask {
  int64_t height = 0;
  int64_t width = 0;
  std::vector<uint64_t> counts;

  friend bool operator==(const RleMask&, const RleMask&) = default;
};

// Encodes the part of `mask` inside `image`; the RLE covers the whole image.
RleMask EncodeRle(const BinaryMask& mask, const PixelRect& image);

// Decodes into a mask framed at `image` (x, y give the raster-frame origin).
// Throws ValidationError when the counts do not sum to the image area.
BinaryMask DecodeRle(const RleMask& rle, int64_t origin_x = 0,
                     int64_t origin_y = 0);

// Compact ASCII form used by COCO tools: 5-bit groups with continuation bit,
// counts after the second stored as deltas to the count two places back.
std::string RleCountsToString(const std::vector<uint64_t>& counts);
// Throws ValidationError on malformed input.
std::vector<uint64_t> RleCountsFromString(std::string_view s);

}  // namespace crowneval

#endif  // CROWNEVAL_RLE_H_
