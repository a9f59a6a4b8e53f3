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

#ifndef FOVEA_CROP_POLICIES_HPP_
#define FOVEA_CROP_POLICIES_HPP_

#include <cstdint>
#include <optional>
#include <string>

#include "fovea/image.hpp"
#include "fovea/rng.hpp"

namespace fovea {

/// Stochastic crop/augmentation policies with explicit parameter
/// distributions. The scale s is the crop area fraction; the aspect ratio r
/// is sampled log-uniformly. BetaRrc reshapes the scale distribution with a
/// Beta(alpha, beta) over the same interval.
struct CropPolicy {
  enum class Variant {
    kRandomResizedCrop,
    kBetaRrc,
    kRandomSizeCenterCrop,
    kFixedSizeRandomCrop,
    kTranslatePct,
    kFixedSizeCenterCrop,
    kComposite,  // TranslatePct followed by RandomSizeCenterCrop
  };

  Variant variant = Variant::kRandomResizedCrop;
  double s_minus = 0.08;
  double s_plus = 1.0;
  double r_minus = 3.0 / 4.0;
  double r_plus = 4.0 / 3.0;
  double alpha = 1.0;         // BetaRrc
  double beta = 1.0;          // BetaRrc
  bool aspect_ratio = true;   // RandomSizeCenterCrop: false pins r = 1
  double translate_pct = 0.3; // TranslatePct / Composite
  int resize_to = 256;        // shorter-side resize for the fixed-size family
  int out = 224;

  static CropPolicy random_resized_crop(double s_minus = 0.08,
                                        double s_plus = 1.0, int out = 224);
  static CropPolicy beta_rrc(double alpha, double beta, int out = 224);
  static CropPolicy random_size_center_crop(double s_minus = 0.08,
                                            double s_plus = 1.0,
                                            bool aspect_ratio = true,
                                            int out = 224);
  static CropPolicy fixed_size_random_crop(int resize_to = 256, int out = 224);
  static CropPolicy translate_only(double pct = 0.3, int resize_to = 256,
                                   int out = 224);
  static CropPolicy fixed_size_center_crop(int resize_to = 256, int out = 224);
  static CropPolicy composite(double pct, double s_minus, double s_plus,
                              bool aspect_ratio = true, int out = 224);

  void validate() const;
  std::string str() const;
};

/// Parses the policy config syntax, e.g.
///   rrc(s=0.08..1,r=0.75..1.333,out=224)
///   beta_rrc(a=1,b=0.5,out=224)
///   rscc(s=0.08..1,ar=0,out=224)
///   fsrc(resize=256,out=224)
///   t(0.30,resize=256,out=224)
///   fscc(resize=256,out=224)
///   t(0.30)+rscc(s=0.08..1)
CropPolicy parse_crop_policy(const std::string& text);

/// One realized draw: the sampled parameters and the crop actually taken,
/// reproducible from the seed recorded alongside.
struct CropSample {
  double s = 1.0;
  double r = 1.0;
  int crop_x = 0, crop_y = 0, crop_w = 0, crop_h = 0;
  double translate_x = 0.0, translate_y = 0.0;  // pixels
  bool fallback = false;  // center-crop fallback after 10 rejected attempts
  std::uint64_t seed = 0;
};

/// Draws a scale factor for the policy: uniform on [s-, s+] for RRC,
/// s- + (s+ - s-) * Beta(alpha, beta) for BetaRrc.
double sample_scale(const CropPolicy& policy, RngStream& rng);

/// Samples the policy's parameters and applies it. Output is exactly
/// out x out. FixedSizeCenterCrop consumes no randomness.
std::pair<Image, CropSample> sample_and_apply(const CropPolicy& policy,
                                              const Image& img,
                                              RngStream& rng);

/// Monte-Carlo estimate of Var(1/s) where s = s- + (s+ - s-) * Beta(a, b).
struct InverseScaleVariance {
  double variance = 0.0;
  double standard_error = 0.0;
  std::size_t n = 0;
};
InverseScaleVariance inverse_scale_variance(double alpha, double beta,
                                            double s_minus, double s_plus,
                                            std::size_t n_samples,
                                            RngStream& rng);

}  // namespace fovea

#endif  // FOVEA_CROP_POLICIES_HPP_
