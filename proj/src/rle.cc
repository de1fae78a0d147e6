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
#include "crowneval/rle.h"

#include "crowneval/errors.h"

namespace crowneval {

RleMask EncodeRle(const BinaryMask& mask, const PixelRect& image) {
  if (image.width < 0 || image.height < 0) {
    throw ValidationError("RLE image size must be non-negative");
  }
  RleMask rle{image.height, image.width, {}};
  bool current = false;
  uint64_t run = 0;
  for (int64_t x = image.x; x < image.Right(); ++x) {
    for (int64_t y = image.y; y < image.Bottom(); ++y) {
      const bool v = mask.At(x, y);
      if (v != current) {
        rle.counts.push_back(run);
        run = 0;
        current = v;
      }
      ++run;
    }
  }
  rle.counts.push_back(run);
  return rle;
}

BinaryMask DecodeRle(const RleMask& rle, int64_t origin_x, int64_t origin_y) {
  if (rle.height < 0 || rle.width < 0) {
    throw ValidationError("RLE size must be non-negative");
  }
  const auto area = static_cast<uint64_t>(rle.height * rle.width);
  uint64_t total = 0;
  for (uint64_t c : rle.counts) {
    if (c > area - total) {
      throw ValidationError("RLE counts exceed image area " +
                            std::to_string(area));
    }
    total += c;
  }
  if (total != area) {
    throw ValidationError("RLE counts sum to " + std::to_string(total) +
                          ", expected " + std::to_string(area));
  }
  std::vector<uint8_t> bits(static_cast<size_t>(area), 0);
  uint64_t pos = 0;
  bool set = false;
  for (uint64_t c : rle.counts) {
    if (set) {
      for (uint64_t k = pos; k < pos + c; ++k) {
        const uint64_t col = k / static_cast<uint64_t>(rle.height);
        const uint64_t row = k % static_cast<uint64_t>(rle.height);
        bits[row * static_cast<uint64_t>(rle.width) + col] = 1;
      }
    }
    pos += c;
    set = !set;
  }
  return BinaryMask(PixelRect{origin_x, origin_y, rle.width, rle.height},
                    std::move(bits));
}

std::string RleCountsToString(const std::vector<uint64_t>& counts) {
  std::string s;
  for (size_t i = 0; i < counts.size(); ++i) {
    auto x = static_cast<int64_t>(counts[i]);
    if (i > 2) x -= static_cast<int64_t>(counts[i - 2]);
    bool more = true;
    while (more) {
      char c = static_cast<char>(x & 0x1f);
      x >>= 5;  // arithmetic shift keeps the sign
      more = (c & 0x10) ? x != -1 : x != 0;
      if (more) c |= 0x20;
      s.push_back(static_cast<char>(c + 48));
    }
  }
  return s;
}

std::vector<uint64_t> RleCountsFromString(std::string_view s) {
  std::vector<uint64_t> counts;
  size_t p = 0;
  while (p < s.size()) {
    int64_t x = 0;
    int k = 0;
    bool more = true;
    while (more) {
      if (p >= s.size()) throw ValidationError("truncated RLE string");
      const int c = static_cast<unsigned char>(s[p]) - 48;
      if (c < 0 || c > 63 || k > 11) {
        throw ValidationError("malformed RLE string");
      }
      x |= static_cast<int64_t>(c & 0x1f) << (5 * k);
      more = (c & 0x20) != 0;
      ++p;
      ++k;
      if (!more && (c & 0x10)) x |= static_cast<int64_t>(~0ULL << (5 * k));
    }
    if (counts.size() > 2) x += static_cast<int64_t>(counts[counts.size() - 2]);
    if (x < 0) throw ValidationError("negative run in RLE string");
    counts.push_back(static_cast<uint64_t>(x));
  }
  return counts;
}

}  // namespace crowneval
