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

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "fovea/embedders.hpp"
#include "fovea/errors.hpp"
#include "fovea/metrics.hpp"
#include "fovea/stats.hpp"

using namespace fovea;

namespace {

Image random_image(int w, int h, std::uint64_t seed) {
  RngStream rng(seed);
  Image img(w, h);
  for (float& v : img.data) v = static_cast<float>(rng.uniform01());
  return img;
}

// Smooth random images: low-frequency sums so translations decorrelate
// gently instead of into noise.
Image smooth_image(int n, std::uint64_t seed) {
  RngStream rng(seed);
  Image img(n, n);
  struct Wave {
    double fx, fy, ph, amp;
  };
  std::vector<Wave> waves;
  for (int k = 0; k < 4; ++k) {
    waves.push_back({rng.uniform(-3, 3), rng.uniform(-3, 3),
                     rng.uniform(0, 6.28), rng.uniform(0.1, 0.25)});
  }
  for (int y = 0; y < n; ++y) {
    for (int x = 0; x < n; ++x) {
      for (int c = 0; c < 3; ++c) {
        double v = 0.5;
        for (const Wave& w : waves) {
          v += w.amp * std::sin(6.2831853 * (w.fx * x + w.fy * y) / n +
                                w.ph + c);
        }
        img.at(x, y, c) = static_cast<float>(std::clamp(v, 0.0, 1.0));
      }
    }
  }
  return img;
}

std::vector<Image> smooth_set(int count, int n, std::uint64_t seed) {
  std::vector<Image> images;
  for (int i = 0; i < count; ++i) images.push_back(smooth_image(n, seed + i));
  return images;
}

}  // namespace

TEST_CASE("identity transform gives Inv = 1 for every sample") {
  ConvEmbedderConfig cfg;
  cfg.input_size = 16;
  cfg.channels = 4;
  const SeededConvEmbedder conv(cfg);
  const auto images = smooth_set(12, 16, 100);
  RngStream rng(1);
  const auto dist =
      invariance(conv, images, transform_fn(TransformSpec{TransformKind::kRotate, 0, +1}),
                 "rotate:0", rng);
  CHECK(dist.n == 12);
  for (double v : dist.values) CHECK(v == doctest::Approx(1.0).epsilon(1e-9));
}

TEST_CASE("gap conv embedder: Inv = 1 under cyclic translation") {
  ConvEmbedderConfig cfg;
  cfg.input_size = 16;
  cfg.channels = 4;
  cfg.gap = true;
  const SeededConvEmbedder conv(cfg);
  const auto images = smooth_set(10, 16, 200);
  RngStream rng(2);
  for (int dx : {1, 5, 9}) {
    const auto dist = invariance(
        conv, images,
        [dx](const Image& img) { return cyclic_shift(img, dx, 0); },
        "cyclic", rng);
    for (double v : dist.values) {
      CHECK(v == doctest::Approx(1.0).epsilon(1e-5));
    }
  }
}

TEST_CASE("noise provider: mean Inv statistically zero") {
  const HashNoiseEmbedder noise(3, 128);
  const auto images = smooth_set(400, 8, 300);
  RngStream rng(3);
  const auto dist = invariance(
      noise, images,
      [](const Image& img) { return cyclic_shift(img, 1, 0); }, "cyclic", rng);
  CHECK(std::abs(dist.mean) < 3.0 * dist.sem);
}

TEST_CASE("invariance requires two samples and a sane baseline") {
  const HistogramEmbedder hist(16);
  RngStream rng(4);
  CHECK_THROWS_AS(
      invariance(hist, {random_image(4, 4, 1)},
                 transform_fn(TransformSpec{TransformKind::kInvert, 1, +1}),
                 "invert:1", rng),
      ShapeError);
  // Identical images: baseline distance is 0 -> DegenerateBaseline.
  std::vector<Image> same(5, random_image(4, 4, 2));
  CHECK_THROWS_AS(
      invariance(hist, same,
                 transform_fn(TransformSpec{TransformKind::kEqualize, 0, +1}),
                 "equalize:0", rng),
      DegenerateBaseline);
}

TEST_CASE("equivariance: conv stack positive under cyclic translation") {
  ConvEmbedderConfig cfg;
  cfg.input_size = 16;
  cfg.channels = 4;
  cfg.seed = 5;
  const SeededConvEmbedder conv(cfg);
  const auto images = smooth_set(40, 16, 400);
  RngStream rng(5);
  EquivarianceOptions opts;
  opts.pair_budget = 600;
  const auto dist = equivariance_alignment(
      conv, images, [](const Image& img) { return cyclic_shift(img, 3, 0); },
      "cyclic", rng, opts);
  CHECK(dist.mean > 0.0);
  // One-sided test against zero at p < 0.01.
  const double z = dist.mean / dist.sem;
  CHECK(1.0 - stats::normal_cdf(z) < 0.01);

  // The score weakens as the shift decorrelates the response.
  RngStream rng2(5);
  const auto far = equivariance_alignment(
      conv, images, [](const Image& img) { return cyclic_shift(img, 8, 0); },
      "cyclic", rng2, opts);
  CHECK(far.mean < dist.mean);
}

TEST_CASE("equivariance: gap variant reports all pairs degenerate") {
  ConvEmbedderConfig cfg;
  cfg.input_size = 16;
  cfg.channels = 4;
  cfg.gap = true;
  const SeededConvEmbedder conv(cfg);
  const auto images = smooth_set(10, 16, 500);
  RngStream rng(6);
  EquivarianceOptions opts;
  opts.pair_budget = 100;
  const auto dist = equivariance_alignment(
      conv, images, [](const Image& img) { return cyclic_shift(img, 4, 0); },
      "cyclic", rng, opts);
  CHECK(dist.values.empty());
  CHECK(dist.excluded == 45);  // exhaustive: budget exceeds the 10*9/2 pairs
  CHECK(dist.excluded_reason == "DegenerateDifference");
}

TEST_CASE("equivariance at level 0: all differences degenerate") {
  ConvEmbedderConfig cfg;
  cfg.input_size = 16;
  cfg.channels = 4;
  const SeededConvEmbedder conv(cfg);
  const auto images = smooth_set(8, 16, 600);
  RngStream rng(7);
  EquivarianceOptions opts;
  opts.pair_budget = 20;
  const auto dist = equivariance_alignment(
      conv, images,
      transform_fn(TransformSpec{TransformKind::kTranslateX, 0, +1}),
      "translateX:0", rng, opts);
  CHECK(dist.values.empty());
  CHECK(dist.excluded == 20);
}

TEST_CASE("equivariance brute-force check on 5 fixed 4x4 images with f=x") {
  // f(x) = x flattened; invert level 5 gives d_i = x_i - invert(x_i).
  const PixelEmbedder pixel(0);
  std::vector<Image> images;
  for (int k = 0; k < 5; ++k) {
    Image img(4, 4);
    for (std::size_t i = 0; i < img.data.size(); ++i) {
      // Shared ramp plus a per-image offset: structured data.
      img.data[i] = static_cast<float>(
          std::round((0.1 + 0.05 * k + 0.8 * (i / 48.0)) * 255.0) / 255.0);
    }
    images.push_back(img);
  }
  RngStream rng(8);
  EquivarianceOptions opts;
  opts.pair_budget = 0;            // all pairs
  opts.score_diff_minus_baseline = true;
  const auto dist = equivariance_alignment(
      pixel, images, transform_fn(TransformSpec{TransformKind::kInvert, 5, +1}),
      "invert:5", rng, opts);
  // d_i = 2 x_i - 1 up to quantization; rows are near-perfectly aligned
  // (cosine ~ 1), so under this sign convention genuine pairs beat the
  // shuffled baseline.
  CHECK(dist.mean > 0.0);
  CHECK(dist.n == 10);
}

TEST_CASE("equivariance sign flag flips the score") {
  ConvEmbedderConfig cfg;
  cfg.input_size = 16;
  cfg.channels = 4;
  const SeededConvEmbedder conv(cfg);
  const auto images = smooth_set(12, 16, 700);
  EquivarianceOptions a, b;
  a.pair_budget = b.pair_budget = 50;
  b.score_diff_minus_baseline = true;
  RngStream r1(9), r2(9);
  const auto da = equivariance_alignment(
      conv, images, [](const Image& img) { return cyclic_shift(img, 2, 1); },
      "cyclic", r1, a);
  const auto db = equivariance_alignment(
      conv, images, [](const Image& img) { return cyclic_shift(img, 2, 1); },
      "cyclic", r2, b);
  CHECK(da.mean == doctest::Approx(-db.mean));
}

TEST_CASE("simchange: identity transform gives exactly zero") {
  const PixelEmbedder pixel(0);
  const auto images = smooth_set(8, 8, 800);
  const std::vector<int> labels(8, 0);
  RngStream rng(10);
  const PairSet pairs = make_pairs(labels, 0, rng);
  const auto result = simchange(
      pixel, images, labels,
      pairs, transform_fn(TransformSpec{TransformKind::kRotate, 0, +1}),
      "rotate:0");
  CHECK(result.pooled.n == 8 * 7);
  for (double v : result.pooled.values) CHECK(v == 0.0);
}

TEST_CASE("simchange: histogram embedder invariant to exact-shift translate") {
  // 64-px images with a 17-px black margin; translateX level 5 shifts by
  // exactly 16 px, so the histogram is preserved bit-for-bit.
  std::vector<Image> images;
  for (int k = 0; k < 6; ++k) {
    Image img(64, 64, 0.0f);
    const Image inner = smooth_image(24, 900 + k);
    for (int y = 0; y < 24; ++y) {
      for (int x = 0; x < 24; ++x) {
        for (int c = 0; c < 3; ++c) {
          img.at(20 + x, 20 + y, c) =
              std::round(inner.at(x, y, c) * 255.0f) / 255.0f;
        }
      }
    }
    images.push_back(img);
  }
  const HistogramEmbedder hist(32);
  const std::vector<int> labels(6, 0);
  RngStream rng(11);
  const PairSet pairs = make_pairs(labels, 0, rng);
  const auto result = simchange(
      hist, images, labels, pairs,
      transform_fn(TransformSpec{TransformKind::kTranslateX, 5, +1}),
      "translateX:5:+");
  for (double v : result.pooled.values) {
    CHECK(std::abs(v) < 1e-6);
  }
}

TEST_CASE("simchange rejects cross-class pairs and counts degenerates") {
  const PixelEmbedder pixel(0);
  const auto images = smooth_set(4, 8, 1000);
  const std::vector<int> labels = {0, 0, 1, 1};
  PairSet bad;
  bad.pairs = {{0, 2}};
  CHECK_THROWS_AS(
      simchange(pixel, images, labels, bad,
                transform_fn(TransformSpec{TransformKind::kInvert, 1, +1}),
                "invert:1"),
      ShapeError);
}

TEST_CASE("simchange is asymmetric: transforming x2 differs from x1") {
  // Regression guard: the metric must not silently symmetrize.
  const PixelEmbedder pixel(0);
  std::vector<Image> images = {smooth_image(8, 1100), smooth_image(8, 1101)};
  const std::vector<int> labels = {0, 0};
  const auto fn = transform_fn(TransformSpec{TransformKind::kShearX, 6, +1});
  PairSet fwd, rev;
  fwd.pairs = {{0, 1}};
  rev.pairs = {{1, 0}};
  const double a =
      simchange(pixel, images, labels, fwd, fn, "shearX:6:+").pooled.values[0];
  const double b =
      simchange(pixel, images, labels, rev, fn, "shearX:6:+").pooled.values[0];
  CHECK(a != b);
}

TEST_CASE("make_pairs: budget, exhaustive and reproducibility") {
  const std::vector<int> labels = {0, 0, 0, 1, 1, 1, 1};
  RngStream r1(12), r2(12);
  const PairSet a = make_pairs(labels, 5, r1);
  const PairSet b = make_pairs(labels, 5, r2);
  CHECK(a.pairs == b.pairs);
  CHECK(a.pairs.size() == 10);  // 5 per class
  for (const auto& [i, j] : a.pairs) {
    CHECK(i != j);
    CHECK(labels[i] == labels[j]);
  }
  RngStream r3(13);
  const PairSet full = make_pairs(labels, 0, r3);
  CHECK(full.pairs.size() == 3 * 2 + 4 * 3);
}

TEST_CASE("metrics are reproducible bit-for-bit under a fixed seed") {
  ConvEmbedderConfig cfg;
  cfg.input_size = 16;
  cfg.channels = 4;
  const SeededConvEmbedder conv(cfg);
  const auto images = smooth_set(10, 16, 1200);
  RngStream r1(14), r2(14);
  const auto a = invariance(
      conv, images, transform_fn(TransformSpec{TransformKind::kRotate, 3, +1}),
      "rotate:3:+", r1);
  const auto b = invariance(
      conv, images, transform_fn(TransformSpec{TransformKind::kRotate, 3, +1}),
      "rotate:3:+", r2);
  CHECK(a.values == b.values);

  // Same values regardless of the worker count.
  RngStream r3(14);
  InvarianceOptions opts;
  opts.jobs = 4;
  const auto c = invariance(
      conv, images, transform_fn(TransformSpec{TransformKind::kRotate, 3, +1}),
      "rotate:3:+", r3, opts);
  CHECK(a.values == c.values);
  CHECK(a.mean == c.mean);
}

TEST_CASE("zero-norm embeddings raise DegenerateEmbedding") {
  // All-black images embed to the zero histogram bin pattern with nonzero
  // norm, so use the pixel embedder where black means a zero vector.
  const PixelEmbedder pixel(0);
  std::vector<Image> images = {Image(4, 4, 0.0f), Image(4, 4, 0.5f)};
  RngStream rng(15);
  CHECK_THROWS_AS(
      invariance(pixel, images,
                 transform_fn(TransformSpec{TransformKind::kEqualize, 0, +1}),
                 "equalize:0", rng),
      DegenerateEmbedding);
}
