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
#include "crowneval/tiff_io.h"

#include <tiffio.h>

#include <algorithm>
#include <cmath>
#include <cstdarg>
#include <cstdio>
#include <memory>
#include <mutex>
#include <regex>
#include <vector>

#include "crowneval/errors.h"

namespace crowneval {

namespace {

constexpr ttag_t kPixelScale = 33550;
constexpr ttag_t kTiepoint = 33922;
constexpr ttag_t kModelTransform = 34264;
constexpr ttag_t kGeoKeyDirectory = 34735;
constexpr ttag_t kGeoAsciiParams = 34737;

constexpr uint16_t kGtModelType = 1024;
constexpr uint16_t kGtRasterType = 1025;
constexpr uint16_t kGtCitation = 1026;
constexpr uint16_t kGeographicType = 2048;
constexpr uint16_t kProjectedType = 3072;

char kPixelScaleName[] = "ModelPixelScaleTag";
char kTiepointName[] = "ModelTiepointTag";
char kModelTransformName[] = "ModelTransformationTag";
char kGeoKeyName[] = "GeoKeyDirectoryTag";
char kGeoAsciiName[] = "GeoAsciiParamsTag";

const TIFFFieldInfo kGeoFields[] = {
    {kPixelScale, -1, -1, TIFF_DOUBLE, FIELD_CUSTOM, 1, 1, kPixelScaleName},
    {kTiepoint, -1, -1, TIFF_DOUBLE, FIELD_CUSTOM, 1, 1, kTiepointName},
    {kModelTransform, -1, -1, TIFF_DOUBLE, FIELD_CUSTOM, 1, 1,
     kModelTransformName},
    {kGeoKeyDirectory, -1, -1, TIFF_SHORT, FIELD_CUSTOM, 1, 1, kGeoKeyName},
    {kGeoAsciiParams, -1, -1, TIFF_ASCII, FIELD_CUSTOM, 1, 0, kGeoAsciiName},
};

TIFFExtendProc g_parent_extender = nullptr;

void GeoExtender(TIFF* tif) {
  TIFFMergeFieldInfo(tif, kGeoFields,
                     sizeof(kGeoFields) / sizeof(kGeoFields[0]));
  if (g_parent_extender) g_parent_extender(tif);
}

thread_local std::string g_last_error;

void ErrorHandler(const char* module, const char* fmt, va_list ap) {
  char buf[512];
  std::vsnprintf(buf, sizeof(buf), fmt, ap);
  g_last_error = std::string(module ? module : "libtiff") + ": " + buf;
}

void QuietWarning(const char*, const char*, va_list) {}

void InstallHandlers() {
  static std::once_flag once;
  std::call_once(once, [] {
    g_parent_extender = TIFFSetTagExtender(GeoExtender);
    TIFFSetErrorHandler(ErrorHandler);
    TIFFSetWarningHandler(QuietWarning);
  });
}

using TiffPtr = std::unique_ptr<TIFF, decltype(&TIFFClose)>;

TiffPtr Open(const std::filesystem::path& path, const char* mode) {
  InstallHandlers();
  g_last_error.clear();
  TiffPtr tif(TIFFOpen(path.c_str(), mode), &TIFFClose);
  if (!tif) {
    throw IoError("cannot open TIFF " + path.string() +
                  (g_last_error.empty() ? "" : " (" + g_last_error + ")"));
  }
  return tif;
}

std::optional<int> EpsgCode(const std::string& crs) {
  static const std::regex re(R"(^\s*EPSG:(\d+)\s*$)", std::regex::icase);
  std::smatch m;
  if (std::regex_match(crs, m, re)) return std::stoi(m[1]);
  return std::nullopt;
}

TiffInfo ReadInfo(TIFF* tif, const std::filesystem::path& path) {
  TiffInfo info;
  uint32_t w = 0, h = 0;
  uint16_t spp = 1, bps = 8, sample_format = SAMPLEFORMAT_UINT;
  TIFFGetField(tif, TIFFTAG_IMAGEWIDTH, &w);
  TIFFGetField(tif, TIFFTAG_IMAGELENGTH, &h);
  TIFFGetFieldDefaulted(tif, TIFFTAG_SAMPLESPERPIXEL, &spp);
  TIFFGetFieldDefaulted(tif, TIFFTAG_BITSPERSAMPLE, &bps);
  TIFFGetFieldDefaulted(tif, TIFFTAG_SAMPLEFORMAT, &sample_format);
  if (bps != 8 || sample_format != SAMPLEFORMAT_UINT) {
    throw IoError(path.string() + ": only 8-bit unsigned samples are supported");
  }
  uint16_t extra_count = 0;
  uint16_t* extra = nullptr;
  if (TIFFGetField(tif, TIFFTAG_EXTRASAMPLES, &extra_count, &extra) &&
      extra_count > 0) {
    const uint16_t last = extra[extra_count - 1];
    info.has_alpha = extra_count == 1 && (last == EXTRASAMPLE_ASSOCALPHA ||
                                          last == EXTRASAMPLE_UNASSALPHA);
  }
  info.width = w;
  info.height = h;
  info.color_channels = spp - (info.has_alpha ? 1 : 0);

  uint16_t n = 0;
  double* values = nullptr;
  if (TIFFGetField(tif, kModelTransform, &n, &values) && n >= 16) {
    info.transform = GeoTransform(
        {values[3], values[0], values[1], values[7], values[4], values[5]});
  } else {
    double* scale = nullptr;
    double* tie = nullptr;
    uint16_t ns = 0, nt = 0;
    if (TIFFGetField(tif, kPixelScale, &ns, &scale) && ns >= 2 &&
        TIFFGetField(tif, kTiepoint, &nt, &tie) && nt >= 6) {
      // Tie point (i, j) -> (x, y); y axis points down in pixel space.
      info.transform = GeoTransform({tie[3] - tie[0] * scale[0], scale[0], 0.0,
                                     tie[4] + tie[1] * scale[1], 0.0,
                                     -scale[1]});
    }
  }

  uint16_t nkeys = 0;
  uint16_t* keys = nullptr;
  char* ascii = nullptr;
  const bool has_ascii = TIFFGetField(tif, kGeoAsciiParams, &ascii) && ascii;
  if (TIFFGetField(tif, kGeoKeyDirectory, &nkeys, &keys) && nkeys >= 4) {
    const uint16_t count = keys[3];
    std::optional<int> epsg;
    std::string citation;
    for (uint16_t k = 0; k < count && 4 + 4 * k + 3 < nkeys; ++k) {
      const uint16_t* e = keys + 4 + 4 * k;
      if ((e[0] == kProjectedType || e[0] == kGeographicType) && e[1] == 0 &&
          e[3] != 32767) {
        epsg = e[3];
      } else if (e[0] == kGtCitation && e[1] == kGeoAsciiParams && has_ascii) {
        const std::string all(ascii);
        if (e[3] < all.size()) {
          citation = all.substr(e[3], e[2] > 0 ? e[2] - 1 : 0);
        }
      }
    }
    if (!citation.empty()) {
      info.crs = citation;
    } else if (epsg) {
      info.crs = "EPSG:" + std::to_string(*epsg);
    }
  }
  return info;
}

}  // namespace

TiffInfo ReadTiffInfo(const std::filesystem::path& path) {
  TiffPtr tif = Open(path, "r");
  return ReadInfo(tif.get(), path);
}

GeoRaster ReadGeoTiff(const std::filesystem::path& path) {
  TiffPtr tif = Open(path, "r");
  GeoRaster out;
  out.info = ReadInfo(tif.get(), path);
  uint16_t planar = PLANARCONFIG_CONTIG, photometric = PHOTOMETRIC_RGB;
  uint16_t compression = COMPRESSION_NONE;
  TIFFGetFieldDefaulted(tif.get(), TIFFTAG_PLANARCONFIG, &planar);
  TIFFGetField(tif.get(), TIFFTAG_PHOTOMETRIC, &photometric);
  TIFFGetField(tif.get(), TIFFTAG_COMPRESSION, &compression);
  if (planar != PLANARCONFIG_CONTIG) {
    throw IoError(path.string() + ": planar-separate TIFF is not supported");
  }
  if (photometric == PHOTOMETRIC_YCBCR && compression == COMPRESSION_JPEG) {
    TIFFSetField(tif.get(), TIFFTAG_JPEGCOLORMODE, JPEGCOLORMODE_RGB);
  } else if (photometric != PHOTOMETRIC_RGB &&
             photometric != PHOTOMETRIC_MINISBLACK) {
    throw IoError(path.string() + ": unsupported photometric interpretation");
  }
  const int64_t w = out.info.width, h = out.info.height;
  const int spp = out.info.color_channels + (out.info.has_alpha ? 1 : 0);
  std::vector<uint8_t> raw(static_cast<size_t>(w * h * spp));
  if (TIFFIsTiled(tif.get())) {
    uint32_t tw = 0, th = 0;
    TIFFGetField(tif.get(), TIFFTAG_TILEWIDTH, &tw);
    TIFFGetField(tif.get(), TIFFTAG_TILELENGTH, &th);
    std::vector<uint8_t> buf(static_cast<size_t>(TIFFTileSize(tif.get())));
    for (int64_t ty = 0; ty < h; ty += th) {
      for (int64_t tx = 0; tx < w; tx += tw) {
        if (TIFFReadTile(tif.get(), buf.data(), static_cast<uint32_t>(tx),
                         static_cast<uint32_t>(ty), 0, 0) < 0) {
          throw IoError(path.string() + ": tile read failed");
        }
        const int64_t cw = std::min<int64_t>(tw, w - tx);
        const int64_t ch = std::min<int64_t>(th, h - ty);
        for (int64_t y = 0; y < ch; ++y) {
          std::copy_n(buf.data() + y * tw * spp, cw * spp,
                      raw.data() + ((ty + y) * w + tx) * spp);
        }
      }
    }
  } else {
    std::vector<uint8_t> line(static_cast<size_t>(TIFFScanlineSize(tif.get())));
    for (int64_t y = 0; y < h; ++y) {
      if (TIFFReadScanline(tif.get(), line.data(), static_cast<uint32_t>(y)) <
          0) {
        throw IoError(path.string() + ": scanline read failed");
      }
      std::copy_n(line.data(), w * spp, raw.data() + y * w * spp);
    }
  }
  const int cc = out.info.color_channels;
  out.color = Image(w, h, cc);
  if (out.info.has_alpha) out.alpha = BinaryMask(PixelRect{0, 0, w, h});
  std::vector<uint8_t> alpha_bits;
  if (out.info.has_alpha) alpha_bits.resize(static_cast<size_t>(w * h));
  for (int64_t i = 0; i < w * h; ++i) {
    std::copy_n(raw.data() + i * spp, cc, out.color.pixels.data() + i * cc);
    if (out.info.has_alpha) alpha_bits[i] = raw[i * spp + cc] > 0;
  }
  if (out.info.has_alpha) {
    out.alpha = BinaryMask(PixelRect{0, 0, w, h}, std::move(alpha_bits));
  }
  return out;
}

void WriteGeoTiff(const std::filesystem::path& path, const Image& color,
                  const BinaryMask* validity,
                  const std::optional<GeoTransform>& transform,
                  const std::string& crs) {
  if (color.channels != 1 && color.channels != 3) {
    throw ValidationError("TIFF output needs 1 or 3 color channels");
  }
  TiffPtr tif = Open(path, "w");
  TIFF* t = tif.get();
  const int spp = color.channels + (validity ? 1 : 0);
  TIFFSetField(t, TIFFTAG_IMAGEWIDTH, static_cast<uint32_t>(color.width));
  TIFFSetField(t, TIFFTAG_IMAGELENGTH, static_cast<uint32_t>(color.height));
  TIFFSetField(t, TIFFTAG_SAMPLESPERPIXEL, static_cast<uint16_t>(spp));
  TIFFSetField(t, TIFFTAG_BITSPERSAMPLE, static_cast<uint16_t>(8));
  TIFFSetField(t, TIFFTAG_SAMPLEFORMAT, SAMPLEFORMAT_UINT);
  TIFFSetField(t, TIFFTAG_PLANARCONFIG, PLANARCONFIG_CONTIG);
  TIFFSetField(t, TIFFTAG_PHOTOMETRIC, color.channels == 3
                                           ? PHOTOMETRIC_RGB
                                           : PHOTOMETRIC_MINISBLACK);
  TIFFSetField(t, TIFFTAG_COMPRESSION, COMPRESSION_LZW);
  TIFFSetField(t, TIFFTAG_ROWSPERSTRIP, TIFFDefaultStripSize(t, 0));
  if (validity) {
    uint16_t extra = EXTRASAMPLE_UNASSALPHA;
    TIFFSetField(t, TIFFTAG_EXTRASAMPLES, 1, &extra);
  }
  if (transform) {
    const auto& c = transform->coeffs();
    if (c[2] == 0.0 && c[4] == 0.0 && c[1] > 0.0 && c[5] < 0.0) {
      double scale[3] = {c[1], -c[5], 0.0};
      double tie[6] = {0.0, 0.0, 0.0, c[0], c[3], 0.0};
      TIFFSetField(t, kPixelScale, 3, scale);
      TIFFSetField(t, kTiepoint, 6, tie);
    } else {
      double m[16] = {c[1], c[2], 0, c[0], c[4], c[5], 0, c[3],
                      0,    0,    0, 0,    0,    0,    0, 1};
      TIFFSetField(t, kModelTransform, 16, m);
    }
  }
  if (transform || !crs.empty()) {
    std::vector<uint16_t> keys = {1, 1, 0, 0};
    const std::optional<int> epsg = EpsgCode(crs);
    const bool geographic = epsg && *epsg >= 4000 && *epsg < 5000;
    auto add = [&](uint16_t id, uint16_t loc, uint16_t count, uint16_t value) {
      keys.insert(keys.end(), {id, loc, count, value});
      ++keys[3];
    };
    add(kGtModelType, 0, 1, geographic ? 2 : 1);
    add(kGtRasterType, 0, 1, 1);  // pixel is area
    std::string ascii;
    if (!crs.empty()) {
      ascii = crs + "|";
      add(kGtCitation, static_cast<uint16_t>(kGeoAsciiParams),
          static_cast<uint16_t>(ascii.size()), 0);
    }
    if (epsg) {
      add(geographic ? kGeographicType : kProjectedType, 0, 1,
          static_cast<uint16_t>(*epsg));
    }
    TIFFSetField(t, kGeoKeyDirectory, static_cast<uint16_t>(keys.size()),
                 keys.data());
    if (!ascii.empty()) TIFFSetField(t, kGeoAsciiParams, ascii.c_str());
  }
  std::vector<uint8_t> line(static_cast<size_t>(color.width * spp));
  for (int64_t y = 0; y < color.height; ++y) {
    for (int64_t x = 0; x < color.width; ++x) {
      const uint8_t* src = color.At(x, y);
      uint8_t* dst = line.data() + x * spp;
      std::copy_n(src, color.channels, dst);
      if (validity) dst[color.channels] = validity->At(x, y) ? 255 : 0;
    }
    if (TIFFWriteScanline(t, line.data(), static_cast<uint32_t>(y), 0) < 0) {
      throw IoError("write failed for " + path.string());
    }
  }
  if (!TIFFFlush(t)) throw IoError("flush failed for " + path.string());
}

GeoTransform ShiftedTransform(const GeoTransform& t, int64_t dx, int64_t dy) {
  const Point origin =
      t.PixelToWorld({static_cast<double>(dx), static_cast<double>(dy)});
  auto c = t.coeffs();
  c[0] = origin.x;
  c[3] = origin.y;
  return GeoTransform(c);
}

RasterGrid GridFromTiff(const TiffInfo& info,
                        std::optional<double> gsd_override) {
  RasterGrid grid;
  grid.width = info.width;
  grid.height = info.height;
  grid.crs = info.crs;
  if (info.transform) grid.transform = *info.transform;
  if (gsd_override) {
    grid.gsd = *gsd_override;
  } else if (info.transform) {
    const auto& c = info.transform->coeffs();
    const double gx = std::hypot(c[1], c[4]);
    const double gy = std::hypot(c[2], c[5]);
    if (std::abs(gx - gy) > 1e-9 * std::max(gx, gy)) {
      throw ValidationError("non-square pixels; set gsd explicitly");
    }
    grid.gsd = gx;
  }
  grid.Validate();
  return grid;
}

}  // namespace crowneval
