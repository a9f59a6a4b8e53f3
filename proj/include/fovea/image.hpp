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

#ifndef FOVEA_IMAGE_HPP_
#define FOVEA_IMAGE_HPP_

#include <array>
#include <cstddef>
#include <string>
#include <vector>

namespace fovea {

/// RGB raster with float intensities in [0, 1], row-major, interleaved
/// channels. Images are value objects; all operations return new images.
struct Image {
  int width = 0;
  int height = 0;
  std::vector<float> data;  // size = width * height * 3

  Image() = default;
  Image(int w, int h, float fill = 0.0f);

  float& at(int x, int y, int c) { return data[(std::size_t(y) * width + x) * 3 + c]; }
  float at(int x, int y, int c) const {
    return data[(std::size_t(y) * width + x) * 3 + c];
  }

  bool same_dims(const Image& o) const {
    return width == o.width && height == o.height;
  }
};

/// 3x3 affine matrix over normalized image coordinates in [-1, 1] per axis
/// (align-corners-false: -1/+1 are the outer edges of the corner pixels).
/// Row-major; realized transforms keep the last row exactly (0, 0, 1).
struct AffineMatrix {
  std::array<double, 9> m{1, 0, 0, 0, 1, 0, 0, 0, 1};

  static AffineMatrix identity() { return AffineMatrix{}; }
  static AffineMatrix translation(double tx, double ty);
  static AffineMatrix scaling(double sx, double sy);
  static AffineMatrix rotation(double angle_rad);
  static AffineMatrix shear_x(double s);
  static AffineMatrix shear_y(double s);

  double operator()(int r, int c) const { return m[r * 3 + c]; }
  double& operator()(int r, int c) { return m[r * 3 + c]; }

  /// a * b, plain sum-of-products per entry (no FMA; the exact-identity
  /// composition tests depend on this evaluation order).
  friend AffineMatrix operator*(const AffineMatrix& a, const AffineMatrix& b);

  bool is_identity() const;
  double det2x2() const { return m[0] * m[4] - m[1] * m[3]; }

  /// Inverse of an affine matrix (last row (0,0,1)).
  /// Throws SingularTransform when the 2x2 block is not invertible.
  AffineMatrix inverse() const;
};

/// Cosine/sine pair for `angle_rad`, nudged by at most a few ulps so that
/// the float expression c*c + s*s evaluates to exactly 1.0. This makes a
/// rotation and its negation compose to the exact identity matrix.
std::array<double, 2> unit_cos_sin(double angle_rad);

/// Inverse-warps `img` by the image-space transform `m`: output pixel (u,v)
/// samples the input at m^-1 * (u, v, 1) in normalized coordinates, with
/// bilinear interpolation. Out-of-bounds taps read `fill`. Output intensities
/// are clamped to [0, 1].
Image warp_affine(const Image& img, const AffineMatrix& m, int out_w,
                  int out_h, float fill = 0.0f);

/// Bilinear resize with the same kernel and align-corners-false convention
/// as warp_affine. Identical dims return a bit-identical copy.
Image resize(const Image& img, int out_w, int out_h);

/// Crop the rectangle [x0, x0+w) x [y0, y0+h); throws BoundsError if the
/// rectangle leaves the image.
Image crop(const Image& img, int x0, int y0, int w, int h);

/// Resize preserving aspect ratio so the shorter side equals `s`.
Image resize_shorter_side(const Image& img, int s);

/// Binary PPM (P6, maxval 255) IO. Intensities quantize to round(v*255) on
/// write and k/255 on read; a write/read round-trip is lossless after the
/// first quantization.
Image read_image(const std::string& path);
void write_image(const Image& img, const std::string& path);

Image decode_ppm(const std::vector<unsigned char>& bytes);
std::vector<unsigned char> encode_ppm(const Image& img);

}  // namespace fovea

#endif  // FOVEA_IMAGE_HPP_
