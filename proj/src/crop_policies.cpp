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

#include "fovea/crop_policies.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <sstream>

#include "fovea/errors.hpp"
#include "fovea/stats.hpp"

namespace fovea {

namespace {

constexpr int kMaxAttempts = 10;

// Center crop used both directly and as the rejection fallback: clamps the
// requested aspect ratio to the image's and crops centrally.
void center_crop_rect(int img_w, int img_h, double r_minus, double r_plus,
                      CropSample* s) {
  const double img_ratio = static_cast<double>(img_w) / img_h;
  int w, h;
  if (img_ratio < r_minus) {
    w = img_w;
    h = static_cast<int>(std::lround(w / r_minus));
  } else if (img_ratio > r_plus) {
    h = img_h;
    w = static_cast<int>(std::lround(h * r_plus));
  } else {
    w = img_w;
    h = img_h;
  }
  s->crop_w = std::max(1, std::min(w, img_w));
  s->crop_h = std::max(1, std::min(h, img_h));
  s->crop_x = (img_w - s->crop_w) / 2;
  s->crop_y = (img_h - s->crop_h) / 2;
  s->fallback = true;
}

// Shared scale/ratio crop sampler for RRC, BetaRrc and RandomSizeCenterCrop.
// Resamples out-of-bounds rectangles up to kMaxAttempts, then falls back to
// a center crop; `centered` pins the position to the center.
CropSample sample_scale_ratio_crop(const CropPolicy& policy, int img_w,
                                   int img_h, bool centered, bool use_ratio,
                                   RngStream& rng) {
  CropSample s;
  const double area = static_cast<double>(img_w) * img_h;
  for (int attempt = 0; attempt < kMaxAttempts; ++attempt) {
    s.s = sample_scale(policy, rng);
    s.r = use_ratio
              ? std::exp(rng.uniform(std::log(policy.r_minus),
                                     std::log(policy.r_plus)))
              : 1.0;
    const double target = s.s * area;
    const int w = static_cast<int>(std::lround(std::sqrt(target * s.r)));
    const int h = static_cast<int>(std::lround(std::sqrt(target / s.r)));
    if (w >= 1 && h >= 1 && w <= img_w && h <= img_h) {
      s.crop_w = w;
      s.crop_h = h;
      if (centered) {
        s.crop_x = (img_w - w) / 2;
        s.crop_y = (img_h - h) / 2;
      } else {
        s.crop_x = static_cast<int>(rng.uniform_int(img_w - w + 1));
        s.crop_y = static_cast<int>(rng.uniform_int(img_h - h + 1));
      }
      return s;
    }
  }
  center_crop_rect(img_w, img_h, use_ratio ? policy.r_minus : 1.0,
                   use_ratio ? policy.r_plus : 1.0, &s);
  return s;
}

Image apply_translate(const Image& img, double tx_pixels, double ty_pixels) {
  if (tx_pixels == 0.0 && ty_pixels == 0.0) return img;
  // Pixel shift -> normalized shift (axis spans 2).
  const AffineMatrix m = AffineMatrix::translation(
      2.0 * tx_pixels / img.width, 2.0 * ty_pixels / img.height);
  return warp_affine(img, m, img.width, img.height, 0.0f);
}

Image center_crop_out(const Image& img, int out) {
  if (img.width < out || img.height < out) {
    throw GeometryError("image smaller than requested center crop");
  }
  return crop(img, (img.width - out) / 2, (img.height - out) / 2, out, out);
}

double parse_number(const std::string& text, const std::string& ctx) {
  try {
    std::size_t used = 0;
    const double v = std::stod(text, &used);
    if (used != text.size()) throw std::invalid_argument(text);
    return v;
  } catch (const std::exception&) {
    throw ConfigError("bad number '" + text + "' in policy '" + ctx + "'");
  }
}

// Parses "name(k=v,k=lo..hi,0.3,...)" into name + positional/keyed args.
struct PolicyCall {
  std::string name;
  std::vector<std::string> positional;
  std::map<std::string, std::string> args;
};

PolicyCall parse_call(const std::string& text) {
  PolicyCall call;
  const std::size_t open = text.find('(');
  if (open == std::string::npos) {
    call.name = text;
    return call;
  }
  if (text.back() != ')') {
    throw ConfigError("unbalanced parentheses in policy '" + text + "'");
  }
  call.name = text.substr(0, open);
  const std::string inner = text.substr(open + 1, text.size() - open - 2);
  std::stringstream ss(inner);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (item.empty()) continue;
    const std::size_t eq = item.find('=');
    if (eq == std::string::npos) {
      call.positional.push_back(item);
    } else {
      call.args[item.substr(0, eq)] = item.substr(eq + 1);
    }
  }
  return call;
}

void apply_range(const std::string& value, const std::string& ctx, double* lo,
                 double* hi) {
  const std::size_t dots = value.find("..");
  if (dots == std::string::npos) {
    *lo = *hi = parse_number(value, ctx);
  } else {
    *lo = parse_number(value.substr(0, dots), ctx);
    *hi = parse_number(value.substr(dots + 2), ctx);
  }
}

CropPolicy parse_single_policy(const std::string& text) {
  const PolicyCall call = parse_call(text);
  CropPolicy p;
  auto common = [&](CropPolicy* out) {
    for (const auto& [k, v] : call.args) {
      if (k == "s") apply_range(v, text, &out->s_minus, &out->s_plus);
      else if (k == "r") apply_range(v, text, &out->r_minus, &out->r_plus);
      else if (k == "a") out->alpha = parse_number(v, text);
      else if (k == "b") out->beta = parse_number(v, text);
      else if (k == "ar") out->aspect_ratio = parse_number(v, text) != 0.0;
      else if (k == "out") out->out = static_cast<int>(parse_number(v, text));
      else if (k == "resize")
        out->resize_to = static_cast<int>(parse_number(v, text));
      else if (k == "p") out->translate_pct = parse_number(v, text);
      else throw ConfigError("unknown key '" + k + "' in policy '" + text + "'");
    }
  };
  if (call.name == "rrc") {
    p.variant = CropPolicy::Variant::kRandomResizedCrop;
  } else if (call.name == "beta_rrc") {
    p.variant = CropPolicy::Variant::kBetaRrc;
  } else if (call.name == "rscc") {
    p.variant = CropPolicy::Variant::kRandomSizeCenterCrop;
  } else if (call.name == "fsrc") {
    p.variant = CropPolicy::Variant::kFixedSizeRandomCrop;
  } else if (call.name == "t") {
    p.variant = CropPolicy::Variant::kTranslatePct;
    if (!call.positional.empty()) {
      p.translate_pct = parse_number(call.positional[0], text);
    }
  } else if (call.name == "fscc") {
    p.variant = CropPolicy::Variant::kFixedSizeCenterCrop;
  } else {
    throw ConfigError("unknown crop policy '" + call.name + "'");
  }
  common(&p);
  p.validate();
  return p;
}

}  // namespace

CropPolicy CropPolicy::random_resized_crop(double s_minus, double s_plus,
                                           int out) {
  CropPolicy p;
  p.variant = Variant::kRandomResizedCrop;
  p.s_minus = s_minus;
  p.s_plus = s_plus;
  p.out = out;
  p.validate();
  return p;
}

CropPolicy CropPolicy::beta_rrc(double alpha, double beta, int out) {
  CropPolicy p;
  p.variant = Variant::kBetaRrc;
  p.alpha = alpha;
  p.beta = beta;
  p.out = out;
  p.validate();
  return p;
}

CropPolicy CropPolicy::random_size_center_crop(double s_minus, double s_plus,
                                               bool aspect_ratio, int out) {
  CropPolicy p;
  p.variant = Variant::kRandomSizeCenterCrop;
  p.s_minus = s_minus;
  p.s_plus = s_plus;
  p.aspect_ratio = aspect_ratio;
  p.out = out;
  p.validate();
  return p;
}

CropPolicy CropPolicy::fixed_size_random_crop(int resize_to, int out) {
  CropPolicy p;
  p.variant = Variant::kFixedSizeRandomCrop;
  p.resize_to = resize_to;
  p.out = out;
  p.validate();
  return p;
}

CropPolicy CropPolicy::translate_only(double pct, int resize_to, int out) {
  CropPolicy p;
  p.variant = Variant::kTranslatePct;
  p.translate_pct = pct;
  p.resize_to = resize_to;
  p.out = out;
  p.validate();
  return p;
}

CropPolicy CropPolicy::fixed_size_center_crop(int resize_to, int out) {
  CropPolicy p;
  p.variant = Variant::kFixedSizeCenterCrop;
  p.resize_to = resize_to;
  p.out = out;
  p.validate();
  return p;
}

CropPolicy CropPolicy::composite(double pct, double s_minus, double s_plus,
                                 bool aspect_ratio, int out) {
  CropPolicy p;
  p.variant = Variant::kComposite;
  p.translate_pct = pct;
  p.s_minus = s_minus;
  p.s_plus = s_plus;
  p.aspect_ratio = aspect_ratio;
  p.out = out;
  p.validate();
  return p;
}

void CropPolicy::validate() const {
  if (!(s_minus > 0.0) || s_minus > s_plus || s_plus > 1.0) {
    throw ConfigError("require 0 < s_minus <= s_plus <= 1");
  }
  if (r_minus > r_plus || r_minus <= 0.0) {
    throw ConfigError("require 0 < r_minus <= r_plus");
  }
  if (out < 1) throw ConfigError("require out >= 1");
  if (translate_pct < 0.0 || translate_pct > 1.0) {
    throw ConfigError("require 0 <= translate pct <= 1");
  }
  if (alpha <= 0.0 || beta <= 0.0) throw ConfigError("require alpha, beta > 0");
  const bool fixed_family = variant == Variant::kFixedSizeRandomCrop ||
                            variant == Variant::kTranslatePct ||
                            variant == Variant::kFixedSizeCenterCrop;
  if (fixed_family && resize_to < out) {
    throw ConfigError("require resize_to >= out");
  }
}

std::string CropPolicy::str() const {
  std::ostringstream os;
  switch (variant) {
    case Variant::kRandomResizedCrop:
      os << "rrc(s=" << s_minus << ".." << s_plus << ",r=" << r_minus << ".."
         << r_plus << ",out=" << out << ")";
      break;
    case Variant::kBetaRrc:
      os << "beta_rrc(a=" << alpha << ",b=" << beta << ",s=" << s_minus << ".."
         << s_plus << ",out=" << out << ")";
      break;
    case Variant::kRandomSizeCenterCrop:
      os << "rscc(s=" << s_minus << ".." << s_plus << ",ar=" << aspect_ratio
         << ",out=" << out << ")";
      break;
    case Variant::kFixedSizeRandomCrop:
      os << "fsrc(resize=" << resize_to << ",out=" << out << ")";
      break;
    case Variant::kTranslatePct:
      os << "t(" << translate_pct << ",resize=" << resize_to << ",out=" << out
         << ")";
      break;
    case Variant::kFixedSizeCenterCrop:
      os << "fscc(resize=" << resize_to << ",out=" << out << ")";
      break;
    case Variant::kComposite:
      os << "t(" << translate_pct << ")+rscc(s=" << s_minus << ".." << s_plus
         << ",ar=" << aspect_ratio << ",out=" << out << ")";
      break;
  }
  return os.str();
}

CropPolicy parse_crop_policy(const std::string& text) {
  const std::size_t plus = text.find(")+");
  if (plus != std::string::npos) {
    const CropPolicy t = parse_single_policy(text.substr(0, plus + 1));
    const CropPolicy rscc = parse_single_policy(text.substr(plus + 2));
    if (t.variant != CropPolicy::Variant::kTranslatePct ||
        rscc.variant != CropPolicy::Variant::kRandomSizeCenterCrop) {
      throw ConfigError("composite policy must be t(..)+rscc(..)");
    }
    CropPolicy p = rscc;
    p.variant = CropPolicy::Variant::kComposite;
    p.translate_pct = t.translate_pct;
    p.resize_to = t.resize_to;
    p.validate();
    return p;
  }
  return parse_single_policy(text);
}

double sample_scale(const CropPolicy& policy, RngStream& rng) {
  if (policy.variant == CropPolicy::Variant::kBetaRrc) {
    return policy.s_minus +
           (policy.s_plus - policy.s_minus) * rng.beta(policy.alpha, policy.beta);
  }
  return rng.uniform(policy.s_minus, policy.s_plus);
}

std::pair<Image, CropSample> sample_and_apply(const CropPolicy& policy,
                                              const Image& img,
                                              RngStream& rng) {
  policy.validate();
  CropSample sample;
  sample.seed = rng.base_seed();
  using V = CropPolicy::Variant;
  switch (policy.variant) {
    case V::kRandomResizedCrop:
    case V::kBetaRrc: {
      sample = sample_scale_ratio_crop(policy, img.width, img.height,
                                       /*centered=*/false, /*use_ratio=*/true,
                                       rng);
      sample.seed = rng.base_seed();
      const Image c = crop(img, sample.crop_x, sample.crop_y, sample.crop_w,
                           sample.crop_h);
      return {resize(c, policy.out, policy.out), sample};
    }
    case V::kRandomSizeCenterCrop: {
      sample = sample_scale_ratio_crop(policy, img.width, img.height,
                                       /*centered=*/true, policy.aspect_ratio,
                                       rng);
      sample.seed = rng.base_seed();
      const Image c = crop(img, sample.crop_x, sample.crop_y, sample.crop_w,
                           sample.crop_h);
      return {resize(c, policy.out, policy.out), sample};
    }
    case V::kFixedSizeRandomCrop: {
      const Image r = resize_shorter_side(img, policy.resize_to);
      if (r.width < policy.out || r.height < policy.out) {
        throw GeometryError("resized image smaller than crop size");
      }
      sample.crop_w = sample.crop_h = policy.out;
      sample.crop_x = static_cast<int>(rng.uniform_int(r.width - policy.out + 1));
      sample.crop_y =
          static_cast<int>(rng.uniform_int(r.height - policy.out + 1));
      return {crop(r, sample.crop_x, sample.crop_y, policy.out, policy.out),
              sample};
    }
    case V::kTranslatePct: {
      const Image r = resize_shorter_side(img, policy.resize_to);
      sample.translate_x =
          rng.uniform(-policy.translate_pct, policy.translate_pct) * r.width;
      sample.translate_y =
          rng.uniform(-policy.translate_pct, policy.translate_pct) * r.height;
      if (policy.translate_pct == 0.0) {
        sample.translate_x = sample.translate_y = 0.0;
      }
      const Image t = apply_translate(r, sample.translate_x, sample.translate_y);
      sample.crop_w = sample.crop_h = policy.out;
      sample.crop_x = (t.width - policy.out) / 2;
      sample.crop_y = (t.height - policy.out) / 2;
      return {center_crop_out(t, policy.out), sample};
    }
    case V::kFixedSizeCenterCrop: {
      const Image r = resize_shorter_side(img, policy.resize_to);
      sample.crop_w = sample.crop_h = policy.out;
      sample.crop_x = (r.width - policy.out) / 2;
      sample.crop_y = (r.height - policy.out) / 2;
      return {center_crop_out(r, policy.out), sample};
    }
    case V::kComposite: {
      // Translate on the original frame, then take the random-size center
      // crop of the shifted image.
      const Image& r = img;
      sample.translate_x =
          rng.uniform(-policy.translate_pct, policy.translate_pct) * r.width;
      sample.translate_y =
          rng.uniform(-policy.translate_pct, policy.translate_pct) * r.height;
      const Image shifted =
          apply_translate(r, sample.translate_x, sample.translate_y);
      CropSample inner = sample_scale_ratio_crop(
          policy, shifted.width, shifted.height, /*centered=*/true,
          policy.aspect_ratio, rng);
      sample.s = inner.s;
      sample.r = inner.r;
      sample.crop_x = inner.crop_x;
      sample.crop_y = inner.crop_y;
      sample.crop_w = inner.crop_w;
      sample.crop_h = inner.crop_h;
      sample.fallback = inner.fallback;
      const Image c = crop(shifted, inner.crop_x, inner.crop_y, inner.crop_w,
                           inner.crop_h);
      return {resize(c, policy.out, policy.out), sample};
    }
  }
  throw GeometryError("unhandled crop policy variant");
}

InverseScaleVariance inverse_scale_variance(double alpha, double beta,
                                            double s_minus, double s_plus,
                                            std::size_t n_samples,
                                            RngStream& rng) {
  if (n_samples < 2) throw ConfigError("need at least 2 samples");
  std::vector<double> inv(n_samples);
  for (std::size_t i = 0; i < n_samples; ++i) {
    const double s = s_minus + (s_plus - s_minus) * rng.beta(alpha, beta);
    inv[i] = 1.0 / s;
  }
  const stats::VarianceEstimate e = stats::variance_with_se(inv);
  return {e.variance, e.standard_error, e.n};
}

}  // namespace fovea
