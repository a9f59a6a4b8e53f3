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

#include "fovea/transforms.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <numbers>

#include "fovea/errors.hpp"

namespace fovea {

namespace {

constexpr double kMaxShear = 0.3;
constexpr double kMaxRotateDeg = 30.0;
constexpr double kMaxTranslateFrac = 0.45;  // of the axis length
constexpr double kMaxEnhance = 0.9;         // factor = 1 +- 0.9*level/9

inline float clamp01f(double v) {
  return static_cast<float>(std::min(1.0, std::max(0.0, v)));
}

inline int quant8(float v) {
  return static_cast<int>(std::lround(std::min(1.0f, std::max(0.0f, v)) * 255.0f));
}

inline double level_frac(int level) { return static_cast<double>(level) / 9.0; }

// ITU-R 601 luma weights, as used by the common imaging libraries.
inline double luma(float r, float g, float b) {
  return 0.299 * r + 0.587 * g + 0.114 * b;
}

// Reciprocal nudged by at most a few ulps so that the float product k * q
// is exactly 1.0; rescale sign pairs then compose to the exact identity.
double exact_reciprocal(double k) {
  const double q0 = 1.0 / k;
  for (int j = 0; j <= 8; ++j) {
    for (int dir : {+1, -1}) {
      double q = q0;
      for (int i = 0; i < j; ++i) {
        q = std::nextafter(q, dir > 0 ? 1e300 : -1e300);
      }
      if (k * q == 1.0) return q;
      if (j == 0) break;
    }
  }
  return q0;
}

void check_spec(const TransformSpec& spec) {
  if (spec.level < 0 || spec.level > 9) {
    throw ConfigError("transform level must be in 0..9, got " +
                      std::to_string(spec.level));
  }
  if (spec.sign != 1 && spec.sign != -1) {
    throw ConfigError("transform sign must be +1 or -1");
  }
}

Image apply_lut(const Image& img, const std::array<std::array<int, 256>, 3>& lut) {
  Image out(img.width, img.height);
  const std::size_t n = std::size_t(img.width) * img.height;
  for (std::size_t i = 0; i < n; ++i) {
    for (int c = 0; c < 3; ++c) {
      out.data[i * 3 + c] =
          static_cast<float>(lut[c][quant8(img.data[i * 3 + c])]) / 255.0f;
    }
  }
  return out;
}

Image equalize_op(const Image& img) {
  // Classic integer histogram equalization on 8-bit quantized values:
  // lut accumulates the histogram in steps of (total - h[255]) / 255.
  std::array<std::array<int, 256>, 3> lut{};
  const std::size_t n = std::size_t(img.width) * img.height;
  for (int c = 0; c < 3; ++c) {
    std::array<long, 256> hist{};
    for (std::size_t i = 0; i < n; ++i) ++hist[quant8(img.data[i * 3 + c])];
    long total = 0;
    for (long h : hist) total += h;
    const long step = (total - hist[255]) / 255;
    if (step == 0) {
      for (int i = 0; i < 256; ++i) lut[c][i] = i;
      continue;
    }
    long acc = step / 2;
    for (int i = 0; i < 256; ++i) {
      lut[c][i] = static_cast<int>(std::min<long>(255, acc / step));
      acc += hist[i];
    }
  }
  return apply_lut(img, lut);
}

Image autocontrast_op(const Image& img) {
  std::array<std::array<int, 256>, 3> lut{};
  const std::size_t n = std::size_t(img.width) * img.height;
  for (int c = 0; c < 3; ++c) {
    int lo = 255, hi = 0;
    for (std::size_t i = 0; i < n; ++i) {
      const int q = quant8(img.data[i * 3 + c]);
      lo = std::min(lo, q);
      hi = std::max(hi, q);
    }
    for (int i = 0; i < 256; ++i) {
      lut[c][i] = (hi > lo) ? static_cast<int>(std::lround(
                                  (i - lo) * 255.0 / (hi - lo)))
                            : i;
      lut[c][i] = std::clamp(lut[c][i], 0, 255);
    }
  }
  return apply_lut(img, lut);
}

Image posterize_op(const Image& img, int level) {
  const int bits = 8 - static_cast<int>(std::lround(level * 4.0 / 9.0));
  const int mask = (~((1 << (8 - bits)) - 1)) & 0xFF;
  Image out(img.width, img.height);
  for (std::size_t i = 0; i < img.data.size(); ++i) {
    out.data[i] = static_cast<float>(quant8(img.data[i]) & mask) / 255.0f;
  }
  return out;
}

// Inversion runs on the 8-bit grid like the other LUT ops; this keeps
// invert a bitwise involution.
inline float invert8(float v) {
  return static_cast<float>((255 - quant8(v)) / 255.0);
}

Image solarize_op(const Image& img, int level) {
  // Invert intensities strictly above the threshold; the threshold walks
  // from 255 (nothing flips) down to 0 as the level grows.
  const int threshold_q =
      static_cast<int>(std::lround((1.0 - level_frac(level)) * 255.0));
  Image out(img.width, img.height);
  for (std::size_t i = 0; i < img.data.size(); ++i) {
    const float v = img.data[i];
    out.data[i] = quant8(v) > threshold_q ? invert8(v) : v;
  }
  return out;
}

Image invert_op(const Image& img) {
  Image out(img.width, img.height);
  for (std::size_t i = 0; i < img.data.size(); ++i) {
    out.data[i] = invert8(img.data[i]);
  }
  return out;
}

double enhance_factor(const TransformSpec& spec) {
  return 1.0 + spec.sign * kMaxEnhance * level_frac(spec.level);
}

Image color_op(const Image& img, double factor) {
  // Interpolate each pixel toward its own gray value.
  Image out(img.width, img.height);
  const std::size_t n = std::size_t(img.width) * img.height;
  for (std::size_t i = 0; i < n; ++i) {
    const float* p = &img.data[i * 3];
    const double g = luma(p[0], p[1], p[2]);
    for (int c = 0; c < 3; ++c) {
      out.data[i * 3 + c] = clamp01f(g + factor * (p[c] - g));
    }
  }
  return out;
}

Image contrast_op(const Image& img, double factor) {
  // Interpolate toward the global mean luminance.
  const std::size_t n = std::size_t(img.width) * img.height;
  double mean_luma = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const float* p = &img.data[i * 3];
    mean_luma += luma(p[0], p[1], p[2]);
  }
  mean_luma /= static_cast<double>(n);
  Image out(img.width, img.height);
  for (std::size_t i = 0; i < img.data.size(); ++i) {
    out.data[i] = clamp01f(mean_luma + factor * (img.data[i] - mean_luma));
  }
  return out;
}

Image sharpness_op(const Image& img, double factor) {
  // Interpolate between the image and its 3x3 smoothed version
  // (kernel [1 1 1; 1 5 1; 1 1 1]/13, edge-replicated).
  static constexpr double kKernel[3][3] = {
      {1 / 13.0, 1 / 13.0, 1 / 13.0},
      {1 / 13.0, 5 / 13.0, 1 / 13.0},
      {1 / 13.0, 1 / 13.0, 1 / 13.0}};
  Image out(img.width, img.height);
  for (int y = 0; y < img.height; ++y) {
    for (int x = 0; x < img.width; ++x) {
      for (int c = 0; c < 3; ++c) {
        double smooth = 0.0;
        for (int dy = -1; dy <= 1; ++dy) {
          for (int dx = -1; dx <= 1; ++dx) {
            const int sx = std::clamp(x + dx, 0, img.width - 1);
            const int sy = std::clamp(y + dy, 0, img.height - 1);
            smooth += kKernel[dy + 1][dx + 1] * img.at(sx, sy, c);
          }
        }
        out.at(x, y, c) = clamp01f(smooth + factor * (img.at(x, y, c) - smooth));
      }
    }
  }
  return out;
}

}  // namespace

bool kind_is_geometric(TransformKind k) {
  switch (k) {
    case TransformKind::kShearX:
    case TransformKind::kShearY:
    case TransformKind::kTranslateX:
    case TransformKind::kTranslateY:
    case TransformKind::kRescale:
    case TransformKind::kRotate:
      return true;
    default:
      return false;
  }
}

bool kind_is_signed(TransformKind k) { return kind_is_geometric(k); }

const char* kind_name(TransformKind k) {
  switch (k) {
    case TransformKind::kEqualize: return "equalize";
    case TransformKind::kSolarize: return "solarize";
    case TransformKind::kShearX: return "shearX";
    case TransformKind::kShearY: return "shearY";
    case TransformKind::kInvert: return "invert";
    case TransformKind::kTranslateX: return "translateX";
    case TransformKind::kTranslateY: return "translateY";
    case TransformKind::kColor: return "color";
    case TransformKind::kRescale: return "rescale";
    case TransformKind::kAutocontrast: return "autocontrast";
    case TransformKind::kRotate: return "rotate";
    case TransformKind::kPosterize: return "posterize";
    case TransformKind::kContrast: return "contrast";
    case TransformKind::kSharpness: return "sharpness";
  }
  return "?";
}

TransformKind kind_from_name(const std::string& name) {
  for (int i = 0; i < kNumTransformKinds; ++i) {
    const auto k = static_cast<TransformKind>(i);
    if (name == kind_name(k)) return k;
  }
  throw ConfigError("unknown transform kind '" + name + "'");
}

std::string TransformSpec::str() const {
  std::string s = std::string(kind_name(kind)) + ":" + std::to_string(level);
  if (kind_is_signed(kind) && level > 0) s += sign > 0 ? ":+" : ":-";
  return s;
}

TransformSpec parse_spec(const std::string& text) {
  const std::size_t p1 = text.find(':');
  if (p1 == std::string::npos) {
    throw ConfigError("transform spec '" + text + "' must be kind:level[:sign]");
  }
  const std::size_t p2 = text.find(':', p1 + 1);
  TransformSpec spec;
  spec.kind = kind_from_name(text.substr(0, p1));
  const std::string level_str =
      p2 == std::string::npos ? text.substr(p1 + 1) : text.substr(p1 + 1, p2 - p1 - 1);
  try {
    std::size_t used = 0;
    spec.level = std::stoi(level_str, &used);
    if (used != level_str.size()) throw std::invalid_argument(level_str);
  } catch (const std::exception&) {
    throw ConfigError("bad level in transform spec '" + text + "'");
  }
  if (p2 != std::string::npos) {
    const std::string s = text.substr(p2 + 1);
    if (s == "+") spec.sign = 1;
    else if (s == "-") spec.sign = -1;
    else throw ConfigError("bad sign in transform spec '" + text + "'");
  }
  check_spec(spec);
  return spec;
}

SubPolicy parse_subpolicy(const std::string& text) {
  const std::size_t p = text.find(';');
  if (p == std::string::npos) {
    throw ConfigError("sub-policy '" + text + "' must be specA;specB");
  }
  return SubPolicy{parse_spec(text.substr(0, p)), parse_spec(text.substr(p + 1))};
}

AffineMatrix affine_for_spec(const TransformSpec& spec) {
  check_spec(spec);
  const double f = level_frac(spec.level);
  switch (spec.kind) {
    case TransformKind::kShearX:
      return AffineMatrix::shear_x(spec.sign * kMaxShear * f);
    case TransformKind::kShearY:
      return AffineMatrix::shear_y(spec.sign * kMaxShear * f);
    case TransformKind::kTranslateX:
      // Normalized coordinates span 2, so a fraction p of the axis is 2p.
      return AffineMatrix::translation(spec.sign * 2.0 * kMaxTranslateFrac * f,
                                       0.0);
    case TransformKind::kTranslateY:
      return AffineMatrix::translation(0.0,
                                       spec.sign * 2.0 * kMaxTranslateFrac * f);
    case TransformKind::kRotate: {
      const double rad =
          spec.sign * kMaxRotateDeg * f * std::numbers::pi / 180.0;
      return AffineMatrix::rotation(rad);
    }
    case TransformKind::kRescale: {
      const double k = 1.0 + f;  // zoom factor
      const double q = exact_reciprocal(k);
      return spec.sign > 0 ? AffineMatrix::scaling(k, k)
                           : AffineMatrix::scaling(q, q);
    }
    default:
      throw ConfigError(std::string("'") + kind_name(spec.kind) +
                        "' has no affine realization");
  }
}

Image apply(const TransformSpec& spec, const Image& img) {
  check_spec(spec);
  if (spec.level == 0) return img;
  if (kind_is_geometric(spec.kind)) {
    return warp_affine(img, affine_for_spec(spec), img.width, img.height, 0.0f);
  }
  switch (spec.kind) {
    case TransformKind::kEqualize: return equalize_op(img);
    case TransformKind::kSolarize: return solarize_op(img, spec.level);
    case TransformKind::kInvert: return invert_op(img);
    case TransformKind::kColor: return color_op(img, enhance_factor(spec));
    case TransformKind::kAutocontrast: return autocontrast_op(img);
    case TransformKind::kPosterize: return posterize_op(img, spec.level);
    case TransformKind::kContrast: return contrast_op(img, enhance_factor(spec));
    case TransformKind::kSharpness:
      return sharpness_op(img, enhance_factor(spec));
    default:
      throw ConfigError("unhandled transform kind");
  }
}

Image apply_subpolicy(const SubPolicy& sp, const Image& img) {
  return apply(sp.second, apply(sp.first, img));
}

std::vector<TransformSpec> catalog(const std::vector<int>& levels,
                                   SignPolicy signs) {
  std::vector<int> sorted_levels = levels;
  std::sort(sorted_levels.begin(), sorted_levels.end());
  sorted_levels.erase(std::unique(sorted_levels.begin(), sorted_levels.end()),
                      sorted_levels.end());
  std::vector<TransformSpec> out;
  for (int k = 0; k < kNumTransformKinds; ++k) {
    const auto kind = static_cast<TransformKind>(k);
    for (int level : sorted_levels) {
      if (level < 0 || level > 9) {
        throw ConfigError("catalog level out of range: " + std::to_string(level));
      }
      if (level == 0 || !kind_is_signed(kind) ||
          signs == SignPolicy::kPlusOnly) {
        out.push_back({kind, level, +1});
      } else {
        out.push_back({kind, level, +1});
        out.push_back({kind, level, -1});
      }
    }
  }
  return out;
}

}  // namespace fovea
