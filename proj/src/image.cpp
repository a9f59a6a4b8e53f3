// Copyright (c) 2026, the fovea authors.
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

#include "fovea/image.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <fstream>

#include "fovea/errors.hpp"

namespace fovea {

namespace {

constexpr double kSingularEps = 1e-12;

inline float clamp01(double v) {
  return static_cast<float>(std::min(1.0, std::max(0.0, v)));
}

inline double nudge_ulps(double x, int ulps) {
  for (int i = 0; i < ulps; ++i) x = std::nextafter(x, 1e300);
  for (int i = 0; i > ulps; --i) x = std::nextafter(x, -1e300);
  return x;
}

}  // namespace

Image::Image(int w, int h, float fill) : width(w), height(h) {
  if (w < 1 || h < 1) throw BoundsError("image dims must be >= 1");
  data.assign(std::size_t(w) * h * 3, fill);
}

AffineMatrix AffineMatrix::translation(double tx, double ty) {
  AffineMatrix a;
  a.m = {1, 0, tx, 0, 1, ty, 0, 0, 1};
  return a;
}

AffineMatrix AffineMatrix::scaling(double sx, double sy) {
  AffineMatrix a;
  a.m = {sx, 0, 0, 0, sy, 0, 0, 0, 1};
  return a;
}

AffineMatrix AffineMatrix::rotation(double angle_rad) {
  const auto cs = unit_cos_sin(std::abs(angle_rad));
  const double c = cs[0];
  const double s = angle_rad < 0 ? -cs[1] : cs[1];
  AffineMatrix a;
  a.m = {c, -s, 0, s, c, 0, 0, 0, 1};
  return a;
}

AffineMatrix AffineMatrix::shear_x(double s) {
  AffineMatrix a;
  a.m = {1, s, 0, 0, 1, 0, 0, 0, 1};
  return a;
}

AffineMatrix AffineMatrix::shear_y(double s) {
  AffineMatrix a;
  a.m = {1, 0, 0, s, 1, 0, 0, 0, 1};
  return a;
}

AffineMatrix operator*(const AffineMatrix& a, const AffineMatrix& b) {
  AffineMatrix p;
  for (int r = 0; r < 3; ++r) {
    for (int c = 0; c < 3; ++c) {
      p.m[r * 3 + c] = a(r, 0) * b(0, c) + a(r, 1) * b(1, c) + a(r, 2) * b(2, c);
    }
  }
  return p;
}

bool AffineMatrix::is_identity() const {
  static const std::array<double, 9> id = {1, 0, 0, 0, 1, 0, 0, 0, 1};
  return m == id;
}

AffineMatrix AffineMatrix::inverse() const {
  const double det = det2x2();
  if (!std::isfinite(det) || std::abs(det) <= kSingularEps) {
    throw SingularTransform("affine matrix is singular (|det| <= 1e-12)");
  }
  const double ia = m[4] / det;
  const double ib = -m[1] / det;
  const double ic = -m[3] / det;
  const double id = m[0] / det;
  AffineMatrix r;
  r.m = {ia, ib, -(ia * m[2] + ib * m[5]),
         ic, id, -(ic * m[2] + id * m[5]),
         0,  0,  1};
  return r;
}

std::array<double, 2> unit_cos_sin(double angle_rad) {
  const double c0 = std::cos(angle_rad);
  const double s0 = std::sin(angle_rad);
  // Try candidates in increasing ulp distance from (c0, s0).
  for (int total = 0; total <= 64; ++total) {
    for (int ci = -total; ci <= total; ++ci) {
      const int rem = total - std::abs(ci);
      for (int si : {rem, -rem}) {
        const double c = nudge_ulps(c0, ci);
        const double s = nudge_ulps(s0, si);
        if (c * c + s * s == 1.0) return {c, s};
        if (rem == 0) break;
      }
    }
  }
  return {c0, s0};  // not reached for sane inputs
}

Image warp_affine(const Image& img, const AffineMatrix& m, int out_w,
                  int out_h, float fill) {
  if (out_w < 1 || out_h < 1) throw BoundsError("warp output dims must be >= 1");
  for (double v : m.m) {
    if (!std::isfinite(v)) throw SingularTransform("non-finite affine matrix");
  }
  if (m.is_identity() && out_w == img.width && out_h == img.height) {
    return img;
  }
  const AffineMatrix inv = m.inverse();

  Image out(out_w, out_h);
  const int iw = img.width;
  const int ih = img.height;
  auto tap = [&](int x, int y, int c) -> double {
    if (x < 0 || x >= iw || y < 0 || y >= ih) return fill;
    return img.at(x, y, c);
  };
  for (int oy = 0; oy < out_h; ++oy) {
    const double ny = 2.0 * (oy + 0.5) / out_h - 1.0;
    for (int ox = 0; ox < out_w; ++ox) {
      const double nx = 2.0 * (ox + 0.5) / out_w - 1.0;
      const double px = inv(0, 0) * nx + inv(0, 1) * ny + inv(0, 2);
      const double py = inv(1, 0) * nx + inv(1, 1) * ny + inv(1, 2);
      // Normalized -> pixel coordinates (align-corners-false).
      const double sx = ((px + 1.0) * iw - 1.0) / 2.0;
      const double sy = ((py + 1.0) * ih - 1.0) / 2.0;
      const int x0 = static_cast<int>(std::floor(sx));
      const int y0 = static_cast<int>(std::floor(sy));
      const double fx = sx - x0;
      const double fy = sy - y0;
      for (int c = 0; c < 3; ++c) {
        const double top = tap(x0, y0, c) * (1.0 - fx) + tap(x0 + 1, y0, c) * fx;
        const double bot =
            tap(x0, y0 + 1, c) * (1.0 - fx) + tap(x0 + 1, y0 + 1, c) * fx;
        out.at(ox, oy, c) = clamp01(top * (1.0 - fy) + bot * fy);
      }
    }
  }
  return out;
}

Image resize(const Image& img, int out_w, int out_h) {
  if (out_w < 1 || out_h < 1) throw BoundsError("resize dims must be >= 1");
  if (out_w == img.width && out_h == img.height) return img;

  Image out(out_w, out_h);
  const int iw = img.width;
  const int ih = img.height;
  const double kx = static_cast<double>(iw) / out_w;
  const double ky = static_cast<double>(ih) / out_h;
  auto tap = [&](int x, int y, int c) -> double {
    x = std::clamp(x, 0, iw - 1);
    y = std::clamp(y, 0, ih - 1);
    return img.at(x, y, c);
  };
  for (int oy = 0; oy < out_h; ++oy) {
    const double sy = (oy + 0.5) * ky - 0.5;
    const int y0 = static_cast<int>(std::floor(sy));
    const double fy = sy - y0;
    for (int ox = 0; ox < out_w; ++ox) {
      const double sx = (ox + 0.5) * kx - 0.5;
      const int x0 = static_cast<int>(std::floor(sx));
      const double fx = sx - x0;
      for (int c = 0; c < 3; ++c) {
        const double top = tap(x0, y0, c) * (1.0 - fx) + tap(x0 + 1, y0, c) * fx;
        const double bot =
            tap(x0, y0 + 1, c) * (1.0 - fx) + tap(x0 + 1, y0 + 1, c) * fx;
        out.at(ox, oy, c) = clamp01(top * (1.0 - fy) + bot * fy);
      }
    }
  }
  return out;
}

Image crop(const Image& img, int x0, int y0, int w, int h) {
  if (w < 1 || h < 1 || x0 < 0 || y0 < 0 || x0 + w > img.width ||
      y0 + h > img.height) {
    throw BoundsError("crop rectangle out of bounds");
  }
  if (x0 == 0 && y0 == 0 && w == img.width && h == img.height) return img;
  Image out(w, h);
  for (int y = 0; y < h; ++y) {
    const float* src = &img.data[(std::size_t(y0 + y) * img.width + x0) * 3];
    float* dst = &out.data[std::size_t(y) * w * 3];
    std::memcpy(dst, src, std::size_t(w) * 3 * sizeof(float));
  }
  return out;
}

Image resize_shorter_side(const Image& img, int s) {
  if (s < 1) throw BoundsError("target side must be >= 1");
  if (std::min(img.width, img.height) == s) return img;
  if (img.width <= img.height) {
    const int h = static_cast<int>(
        std::lround(static_cast<double>(img.height) * s / img.width));
    return resize(img, s, std::max(1, h));
  }
  const int w = static_cast<int>(
      std::lround(static_cast<double>(img.width) * s / img.height));
  return resize(img, std::max(1, w), s);
}

namespace {

// Reads one PPM header token, skipping whitespace and '#' comments.
std::string ppm_token(const std::vector<unsigned char>& bytes,
                      std::size_t* pos) {
  std::size_t i = *pos;
  for (;;) {
    while (i < bytes.size() && std::isspace(bytes[i])) ++i;
    if (i < bytes.size() && bytes[i] == '#') {
      while (i < bytes.size() && bytes[i] != '\n') ++i;
      continue;
    }
    break;
  }
  if (i >= bytes.size()) throw ParseError("unexpected end of PPM header", i);
  std::string tok;
  while (i < bytes.size() && !std::isspace(bytes[i]) && bytes[i] != '#') {
    tok.push_back(static_cast<char>(bytes[i++]));
  }
  *pos = i;
  return tok;
}

int ppm_int(const std::vector<unsigned char>& bytes, std::size_t* pos) {
  const std::size_t at = *pos;
  const std::string tok = ppm_token(bytes, pos);
  try {
    std::size_t used = 0;
    const int v = std::stoi(tok, &used);
    if (used != tok.size()) throw std::invalid_argument(tok);
    return v;
  } catch (const std::exception&) {
    throw ParseError("expected integer in PPM header, got '" + tok + "'", at);
  }
}

}  // namespace

Image decode_ppm(const std::vector<unsigned char>& bytes) {
  std::size_t pos = 0;
  const std::string magic = ppm_token(bytes, &pos);
  if (magic != "P6") throw ParseError("not a binary PPM (expected P6)", 0);
  const int w = ppm_int(bytes, &pos);
  const int h = ppm_int(bytes, &pos);
  const int maxval = ppm_int(bytes, &pos);
  if (w < 1 || h < 1) throw ParseError("invalid PPM dimensions", pos);
  if (maxval != 255) throw ParseError("unsupported PPM maxval (want 255)", pos);
  if (pos >= bytes.size() || !std::isspace(bytes[pos])) {
    throw ParseError("missing whitespace after PPM maxval", pos);
  }
  ++pos;  // exactly one whitespace byte before the raster
  const std::size_t need = std::size_t(w) * h * 3;
  if (bytes.size() - pos < need) {
    throw ParseError("truncated PPM raster", bytes.size());
  }
  Image img(w, h);
  for (std::size_t i = 0; i < need; ++i) {
    img.data[i] = static_cast<float>(bytes[pos + i]) / 255.0f;
  }
  return img;
}

std::vector<unsigned char> encode_ppm(const Image& img) {
  char header[64];
  const int n =
      std::snprintf(header, sizeof(header), "P6\n%d %d\n255\n", img.width,
                    img.height);
  std::vector<unsigned char> bytes(header, header + n);
  bytes.reserve(bytes.size() + img.data.size());
  for (float v : img.data) {
    const long q = std::lround(std::min(1.0f, std::max(0.0f, v)) * 255.0f);
    bytes.push_back(static_cast<unsigned char>(q));
  }
  return bytes;
}

Image read_image(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open '" + path + "' for reading");
  std::vector<unsigned char> bytes((std::istreambuf_iterator<char>(in)),
                                   std::istreambuf_iterator<char>());
  return decode_ppm(bytes);
}

void write_image(const Image& img, const std::string& path) {
  const std::vector<unsigned char> bytes = encode_ppm(img);
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error("cannot open '" + path + "' for writing");
  out.write(reinterpret_cast<const char*>(bytes.data()),
            static_cast<std::streamsize>(bytes.size()));
  if (!out) throw Error("failed writing '" + path + "'");
}

}  // namespace fovea
