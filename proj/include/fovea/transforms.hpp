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

#ifndef FOVEA_TRANSFORMS_HPP_
#define FOVEA_TRANSFORMS_HPP_

#include <string>
#include <vector>

#include "fovea/image.hpp"

namespace fovea {

/// The deterministic transform catalog. Declaration order is the canonical
/// enumeration and tie-break order everywhere.
enum class TransformKind {
  kEqualize,
  kSolarize,
  kShearX,
  kShearY,
  kInvert,
  kTranslateX,
  kTranslateY,
  kColor,
  kRescale,
  kAutocontrast,
  kRotate,
  kPosterize,
  kContrast,
  kSharpness,
};

inline constexpr int kNumTransformKinds = 14;

/// shearX/Y, translateX/Y, rescale and rotate move pixels; the rest change
/// their values.
bool kind_is_geometric(TransformKind k);

/// True for kinds where the sign of the magnitude is meaningful (the
/// geometric families plus the enhancement factors honor it on apply;
/// appearance kinds are enumerated unsigned in the catalog).
bool kind_is_signed(TransformKind k);

const char* kind_name(TransformKind k);
TransformKind kind_from_name(const std::string& name);

/// A deterministic transformation: kind, magnitude level 0..9 (0 = identity
/// for every kind) and a sign for the signed families.
struct TransformSpec {
  TransformKind kind = TransformKind::kEqualize;
  int level = 0;
  int sign = +1;

  std::string str() const;
  bool operator==(const TransformSpec&) const = default;
};

/// Parses `kind:level[:sign]`, e.g. "rotate:7:-".
TransformSpec parse_spec(const std::string& text);

/// Ordered pair of transforms, applied first-then-second.
struct SubPolicy {
  TransformSpec first;
  TransformSpec second;

  std::string str() const { return first.str() + ";" + second.str(); }
  bool operator==(const SubPolicy&) const = default;
};

/// Parses `a;b` where a and b are transform specs.
SubPolicy parse_subpolicy(const std::string& text);

/// The affine realization of a geometric spec over normalized coordinates.
/// Magnitude map: shear max 0.3, rotate max 30 deg, translate max 0.45 of
/// the axis, rescale factor 1 + level/9 (sign + zooms in, - zooms out).
/// Throws for appearance kinds.
AffineMatrix affine_for_spec(const TransformSpec& spec);

/// Applies a spec. Level 0 returns the input unchanged for every kind.
/// Geometric kinds warp with black fill and preserve dimensions; appearance
/// kinds are per-pixel or histogram operations (also dimension-preserving).
Image apply(const TransformSpec& spec, const Image& img);

Image apply_subpolicy(const SubPolicy& sp, const Image& img);

enum class SignPolicy { kPlusOnly, kBothSigns };

/// Enumerates specs in canonical order: kind order as declared, then level
/// ascending, then sign (+ before -). Appearance kinds ignore the sign
/// policy and appear once per level; level 0 appears once per kind.
std::vector<TransformSpec> catalog(const std::vector<int>& levels,
                                   SignPolicy signs);

}  // namespace fovea

#endif  // FOVEA_TRANSFORMS_HPP_
