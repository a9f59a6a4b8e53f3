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
#include <numbers>

#include "fovea/errors.hpp"
#include "fovea/lie_augment.hpp"
#include "fovea/stats.hpp"

using namespace fovea;

namespace {

Image smooth_image(int n, std::uint64_t seed) {
  RngStream rng(seed);
  Image img(n, n);
  struct Wave {
    double fx, fy, ph, amp;
  };
  std::vector<Wave> waves;
  for (int k = 0; k < 3; ++k) {
    waves.push_back({rng.uniform(-2, 2), rng.uniform(-2, 2),
                     rng.uniform(0, 6.28), rng.uniform(0.1, 0.25)});
  }
  for (int y = 0; y < n; ++y) {
    for (int x = 0; x < n; ++x) {
      for (int c = 0; c < 3; ++c) {
        double v = 0.5;
        for (const Wave& w : waves) {
          v += w.amp *
               std::sin(6.2831853 * (w.fx * x + w.fy * y) / n + w.ph + c);
        }
        img.at(x, y, c) = static_cast<float>(std::clamp(v, 0.0, 1.0));
      }
    }
  }
  return img;
}

double max_abs(const Mat3& a) {
  double m = 0.0;
  for (double v : a) m = std::max(m, std::abs(v));
  return m;
}

Mat3 mat3_sub(const Mat3& a, const Mat3& b) {
  Mat3 r;
  for (int i = 0; i < 9; ++i) r[i] = a[i] - b[i];
  return r;
}

}  // namespace

TEST_CASE("generator structure") {
  const auto& g = lie_generators();
  // Translations are nilpotent: G^2 = 0.
  CHECK(max_abs(mat3_mul(g[kLieTx], g[kLieTx])) == 0.0);
  CHECK(max_abs(mat3_mul(g[kLieTy], g[kLieTy])) == 0.0);
  // Rotation generator antisymmetric in the 2x2 block.
  CHECK(g[kLieRotate][1] == -g[kLieRotate][3]);
  // All generators have a zero last row (affine algebra).
  for (const Mat3& m : g) {
    CHECK(m[6] == 0.0);
    CHECK(m[7] == 0.0);
    CHECK(m[8] == 0.0);
  }
}

TEST_CASE("expm of zero is the identity") {
  const Mat3 e = expm(Mat3{0, 0, 0, 0, 0, 0, 0, 0, 0});
  CHECK(e == mat3_identity());
}

TEST_CASE("expm closed forms: rotation and nilpotent translation") {
  // Rotation by pi/2.
  Mat3 a{};
  const double phi = std::numbers::pi / 2.0;
  a[1] = -phi;
  a[3] = phi;
  const Mat3 r = expm(a);
  const Mat3 expected{0, -1, 0, 1, 0, 0, 0, 0, 1};
  CHECK(max_abs(mat3_sub(r, expected)) < 1e-9);

  // Translation: series terminates at first order.
  Mat3 t{};
  t[2] = 0.37;
  const Mat3 e = expm(t);
  Mat3 expected_t = mat3_identity();
  expected_t[2] = 0.37;
  CHECK(max_abs(mat3_sub(e, expected_t)) < 1e-15);

  // General rotation angle against cos/sin.
  for (double th : {0.1, 0.9, 2.4}) {
    Mat3 rot{};
    rot[1] = -th;
    rot[3] = th;
    const Mat3 m = expm(rot);
    CHECK(std::abs(m[0] - std::cos(th)) < 1e-9);
    CHECK(std::abs(m[1] + std::sin(th)) < 1e-9);
    CHECK(std::abs(m[3] - std::sin(th)) < 1e-9);
  }

  // Uniform scale: expm(s I2) = e^s I2.
  Mat3 sc{};
  sc[0] = sc[4] = -0.6;
  const Mat3 s = expm(sc);
  CHECK(std::abs(s[0] - std::exp(-0.6)) < 1e-12);
}

TEST_CASE("expm(A) expm(-A) = I over 100 seeded draws") {
  RngStream rng(5);
  for (int k = 0; k < 100; ++k) {
    Mat3 a{};
    for (int i = 0; i < 6; ++i) {
      const Mat3& g = lie_generators()[i];
      const double u = rng.uniform(-1.0, 1.0);
      for (int j = 0; j < 9; ++j) a[j] += u * g[j];
    }
    Mat3 neg;
    for (int j = 0; j < 9; ++j) neg[j] = -a[j];
    const Mat3 prod = mat3_mul(expm(a), expm(neg));
    CHECK(max_abs(mat3_sub(prod, mat3_identity())) < 1e-8);
  }
}

TEST_CASE("expm rejects non-finite input") {
  Mat3 a{};
  a[0] = std::numeric_limits<double>::quiet_NaN();
  CHECK_THROWS_AS(expm(a), NumericError);
}

TEST_CASE("expm tangents match finite differences") {
  RngStream rng(6);
  for (int trial = 0; trial < 10; ++trial) {
    Mat3 a{};
    std::array<double, 6> u;
    for (int i = 0; i < 6; ++i) {
      u[i] = rng.uniform(-0.8, 0.8);
      for (int j = 0; j < 9; ++j) a[j] += u[i] * lie_generators()[i][j];
    }
    std::vector<Mat3> tangents(lie_generators().begin(),
                               lie_generators().end());
    Mat3 value;
    std::vector<Mat3> derivs;
    expm_with_tangents(a, tangents, &value, &derivs);
    const double h = 1e-6;
    for (int i = 0; i < 6; ++i) {
      Mat3 ap = a, am = a;
      for (int j = 0; j < 9; ++j) {
        ap[j] += h * lie_generators()[i][j];
        am[j] -= h * lie_generators()[i][j];
      }
      const Mat3 ep = expm(ap), em = expm(am);
      for (int j = 0; j < 9; ++j) {
        const double fd = (ep[j] - em[j]) / (2 * h);
        CHECK(derivs[i][j] == doctest::Approx(fd).epsilon(1e-4));
      }
    }
  }
}

TEST_CASE("theta=0 samples the exact identity") {
  LieAugParams params;
  RngStream rng(7);
  for (int k = 0; k < 10; ++k) {
    CHECK(sample_transform(params, rng).is_identity());
  }
}

TEST_CASE("single-coordinate samples have the closed forms") {
  LieAugParams params;
  params.theta[kLieTx] = 1.2;
  RngStream rng(8);
  for (int k = 0; k < 20; ++k) {
    const AffineMatrix m = sample_transform(params, rng);
    CHECK(std::abs(m(0, 2)) <= 0.6);
    CHECK(m(0, 0) == 1.0);
    CHECK(m(1, 1) == 1.0);
    CHECK(m(1, 2) == 0.0);
  }

  LieAugParams rot;
  rot.theta[kLieRotate] = 1.0;
  RngStream rng2(9);
  for (int k = 0; k < 20; ++k) {
    const AffineMatrix m = sample_transform(rot, rng2);
    // A rotation matrix: orthonormal columns, det 1.
    CHECK(m(0, 0) == doctest::Approx(m(1, 1)));
    CHECK(m(0, 1) == doctest::Approx(-m(1, 0)));
    CHECK(m(0, 0) * m(1, 1) - m(0, 1) * m(1, 0) == doctest::Approx(1.0));
  }
}

TEST_CASE("asymmetric scale never zooms out") {
  LieAugParams params;
  params.theta[kLieScale] = 2.0;
  params.asymmetric_scale = true;
  RngStream rng(10);
  for (int k = 0; k < 50; ++k) {
    const AffineMatrix m = sample_transform(params, rng);
    // Algebra coordinate <= 0 means grid scale <= 1, i.e. zoom-in under the
    // inverse warp.
    CHECK(m(0, 0) <= 1.0 + 1e-12);
  }
}

TEST_CASE("warp_by_grid with the identity grid copies the tensor") {
  const Image img = smooth_image(12, 11);
  const Tensor in = tensor_from_image(img);
  const Tensor out = warp_by_grid(in, mat3_identity());
  double max_err = 0.0;
  for (std::size_t i = 0; i < in.data.size(); ++i) {
    max_err = std::max(max_err, std::abs(in.data[i] - out.data[i]));
  }
  CHECK(max_err < 1e-12);
}

TEST_CASE("averaged_forward with theta=0 equals the plain forward") {
  AugerinoModelConfig cfg;
  cfg.input_size = 12;
  cfg.channels = 4;
  const AugerinoModel model(cfg);
  const Image img = smooth_image(12, 12);
  LieAugParams params;  // theta = 0
  RngStream rng(11);
  const auto avg = averaged_forward(model, params, img, rng, 8);
  const auto plain = model.forward(tensor_from_image(img));
  for (std::size_t i = 0; i < avg.size(); ++i) {
    CHECK(avg[i] == doctest::Approx(plain[i]).epsilon(1e-12));
  }
}

TEST_CASE("averaged logits variance shrinks as 1/n") {
  AugerinoModelConfig cfg;
  cfg.input_size = 12;
  cfg.channels = 4;
  const AugerinoModel model(cfg);
  const Image img = smooth_image(12, 13);
  LieAugParams params;
  params.theta[kLieTx] = 0.8;
  params.theta[kLieRotate] = 0.5;

  auto variance_at = [&](int n_copies, int reps) {
    std::vector<double> first_logit;
    for (int r = 0; r < reps; ++r) {
      RngStream rng(1000 + r);
      first_logit.push_back(
          averaged_forward(model, params, img, rng, n_copies)[0]);
    }
    const double sd = stats::stddev(first_logit);
    return sd * sd;
  };
  const double v1 = variance_at(1, 200);
  const double v4 = variance_at(4, 200);
  const double v16 = variance_at(16, 200);
  const double v64 = variance_at(64, 200);
  // Ratios track 1/n within Monte-Carlo slack.
  CHECK(v1 / v4 == doctest::Approx(4.0).epsilon(0.5));
  CHECK(v4 / v16 == doctest::Approx(4.0).epsilon(0.5));
  CHECK(v16 / v64 == doctest::Approx(4.0).epsilon(0.5));
}

TEST_CASE("objective with theta=0 is plain cross-entropy") {
  AugerinoModelConfig cfg;
  cfg.input_size = 12;
  cfg.channels = 4;
  const AugerinoModel model(cfg);
  const Image img = smooth_image(12, 14);
  const Tensor in = tensor_from_image(img);
  LieAugParams params;  // theta = 0, lambda default 0
  params.lambda = 0.7;  // reg term is -lambda * ||0|| = 0 anyway
  const std::vector<std::vector<EpsDraw>> eps = {{EpsDraw{0.3, -0.2, 0.1, 0, 0.4, -0.5}}};
  const double obj =
      augerino_objective(model, params, {in}, {1}, eps, nullptr);
  std::vector<double> g;
  const double ce = softmax_cross_entropy(model.forward(in), 1, &g);
  CHECK(obj == doctest::Approx(ce).epsilon(1e-12));
}

TEST_CASE("shutdown zeroes the regularizer gradient at threshold") {
  LieAugParams params;
  params.lambda = 0.5;
  params.theta = {0.5, 2.5, 0.3, 0.0, 0.0, 0.0};  // ty above its 2.0 threshold
  const auto grad = regularizer_gradient(params);
  CHECK(grad[kLieTy] == 0.0);
  const double norm = std::sqrt(0.5 * 0.5 + 0.3 * 0.3);
  CHECK(grad[kLieTx] == doctest::Approx(-0.5 * 0.5 / norm));
  CHECK(grad[kLieRotate] == doctest::Approx(-0.5 * 0.3 / norm));
  CHECK(grad[kLieScale] == 0.0);  // zero coordinate has zero gradient

  // Exactly at threshold counts as shut down.
  params.theta = {2.0, 0.0, 0.0, 0.0, 0.0, 0.0};
  CHECK(regularizer_gradient(params)[kLieTx] == 0.0);
}

TEST_CASE("full objective gradient passes a central finite-difference check") {
  AugerinoModelConfig cfg;
  cfg.input_size = 10;
  cfg.channels = 3;
  cfg.seed = 21;
  AugerinoModel model(cfg);
  std::vector<Tensor> batch;
  std::vector<int> labels;
  for (int k = 0; k < 3; ++k) {
    batch.push_back(tensor_from_image(smooth_image(10, 300 + k)));
    labels.push_back(k % 2);
  }
  RngStream rng(22);
  for (int checkpoint = 0; checkpoint < 10; ++checkpoint) {
    // Random parameter point: perturb the model and pick random theta.
    std::vector<double> p = model.parameters();
    for (double& v : p) v += rng.uniform(-0.1, 0.1);
    model.set_parameters(p);
    LieAugParams params;
    params.lambda = rng.uniform(0.0, 0.6);
    for (int i = 0; i < 6; ++i) params.theta[i] = rng.uniform(0.05, 0.7);
    std::vector<std::vector<EpsDraw>> eps(batch.size());
    for (auto& per_sample : eps) {
      per_sample.resize(2);
      for (EpsDraw& d : per_sample) {
        for (int i = 0; i < 6; ++i) d[i] = rng.uniform(-0.5, 0.5);
      }
    }

    ObjectiveGrads grads;
    augerino_objective(model, params, batch, labels, eps, &grads);

    const double h = 1e-5;
    // Check every theta coordinate and a sample of model weights.
    double num = 0.0, den = 0.0;
    for (int i = 0; i < 6; ++i) {
      LieAugParams up = params, dn = params;
      up.theta[i] += h;
      dn.theta[i] -= h;
      const double fd = (augerino_objective(model, up, batch, labels, eps, nullptr) -
                         augerino_objective(model, dn, batch, labels, eps, nullptr)) /
                        (2 * h);
      num += (grads.theta[i] - fd) * (grads.theta[i] - fd);
      den += fd * fd;
    }
    std::vector<double> base = model.parameters();
    for (std::size_t w = 0; w < base.size(); w += 17) {
      std::vector<double> up = base, dn = base;
      up[w] += h;
      dn[w] -= h;
      AugerinoModel mu(cfg), md(cfg);
      mu.set_parameters(up);
      md.set_parameters(dn);
      const double fd = (augerino_objective(mu, params, batch, labels, eps, nullptr) -
                         augerino_objective(md, params, batch, labels, eps, nullptr)) /
                        (2 * h);
      num += (grads.model[w] - fd) * (grads.model[w] - fd);
      den += fd * fd;
    }
    CHECK(std::sqrt(num / den) < 1e-4);
  }
}

TEST_CASE("training learns translation but not rotation on a planted task") {
  // Labels depend on stripe orientation: invariant to x-translation,
  // destroyed by rotation.
  std::vector<Image> images;
  std::vector<int> labels;
  RngStream rng(30);
  const int n = 16;
  for (int k = 0; k < 60; ++k) {
    const int label = k % 2;
    Image img(n, n);
    const double phase = rng.uniform(0.0, 6.28);
    for (int y = 0; y < n; ++y) {
      for (int x = 0; x < n; ++x) {
        const double t = label == 0 ? x : y;
        const double v = 0.5 + 0.4 * std::sin(6.2831853 * 2.5 * t / n + phase);
        for (int c = 0; c < 3; ++c) {
          img.at(x, y, c) = static_cast<float>(std::clamp(v, 0.0, 1.0));
        }
      }
    }
    images.push_back(img);
    labels.push_back(label);
  }

  AugerinoModelConfig mcfg;
  mcfg.input_size = n;
  mcfg.channels = 6;
  mcfg.seed = 31;
  AugerinoModel model(mcfg);

  LieAugParams init;
  init.lambda = 0.08;
  init.theta = {0.05, 0.05, 0.05, 0.0, 0.0, 0.0};
  TrainConfig tcfg;
  tcfg.epochs = 60;
  tcfg.batch_size = 10;
  tcfg.lr_model = 0.15;
  tcfg.lr_theta = 0.02;
  tcfg.seed = 32;

  const TrainResult result = augerino_train(&model, init, images, labels, tcfg);
  CHECK(result.params.theta[kLieTx] > 3.0 * result.params.theta[kLieRotate]);
  CHECK(result.log.size() == 60);
  // Theta trajectory is recorded.
  CHECK(result.log.front().theta[kLieTx] <= result.log.back().theta[kLieTx]);

  // Trained model classifies the task.
  const EvalResult plain = augerino_evaluate(model, result.params, images,
                                             labels, false, 1, {1});
  CHECK(plain.mean_accuracy > 0.9);
  // Augerino-enabled evaluation stays within 1% on this invariant task.
  const EvalResult aug = augerino_evaluate(model, result.params, images,
                                           labels, true, 4, {1, 2, 3, 4, 5});
  CHECK(aug.mean_accuracy >= plain.mean_accuracy - 0.01);
}

TEST_CASE("theta has no upward force at zero without regularization") {
  AugerinoModelConfig mcfg;
  mcfg.input_size = 10;
  mcfg.channels = 3;
  AugerinoModel model(mcfg);
  // At theta = 0 the sampled grid is the identity for every draw, so the
  // reparametrized theta gradient is odd in eps: antithetic draws cancel
  // exactly and the expected gradient is zero.
  const Tensor in = tensor_from_image(smooth_image(10, 500));
  LieAugParams params;  // theta = 0, lambda = 0
  const EpsDraw e{0.31, -0.12, 0.44, -0.27, 0.08, 0.19};
  EpsDraw neg;
  for (int i = 0; i < 6; ++i) neg[i] = -e[i];
  ObjectiveGrads grads;
  augerino_objective(model, params, {in}, {1}, {{e, neg}}, &grads);
  for (double g : grads.theta) CHECK(g == 0.0);

  // Under SGD, theta then stays pinned near the boundary: the projection
  // reflects the zero-mean noise, so it never develops a trend.
  std::vector<Image> images;
  std::vector<int> labels;
  for (int k = 0; k < 12; ++k) {
    images.push_back(smooth_image(10, 500 + k));
    labels.push_back(k % 2);
  }
  LieAugParams init;  // theta = 0, lambda = 0
  TrainConfig tcfg;
  tcfg.epochs = 5;
  tcfg.batch_size = 4;
  tcfg.lr_theta = 0.01;
  const TrainResult result = augerino_train(&model, init, images, labels, tcfg);
  for (double t : result.params.theta) CHECK(t < 0.02);
}

TEST_CASE("deterministic evaluation under a fixed seed") {
  AugerinoModelConfig cfg;
  cfg.input_size = 10;
  cfg.channels = 3;
  const AugerinoModel model(cfg);
  std::vector<Image> images;
  std::vector<int> labels;
  for (int k = 0; k < 8; ++k) {
    images.push_back(smooth_image(10, 600 + k));
    labels.push_back(k % 2);
  }
  LieAugParams params;
  params.theta[kLieTx] = 0.5;
  const EvalResult a =
      augerino_evaluate(model, params, images, labels, true, 4, {7, 8});
  const EvalResult b =
      augerino_evaluate(model, params, images, labels, true, 4, {7, 8});
  CHECK(a.per_seed == b.per_seed);

  // theta = 0: enabled and disabled evaluation agree exactly.
  LieAugParams zero;
  const EvalResult on =
      augerino_evaluate(model, zero, images, labels, true, 4, {1});
  const EvalResult off =
      augerino_evaluate(model, zero, images, labels, false, 4, {1});
  CHECK(on.mean_accuracy == off.mean_accuracy);
}
