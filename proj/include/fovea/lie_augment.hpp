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

#ifndef FOVEA_LIE_AUGMENT_HPP_
#define FOVEA_LIE_AUGMENT_HPP_

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "fovea/convnet.hpp"
#include "fovea/image.hpp"
#include "fovea/rng.hpp"

namespace fovea {

/// 3x3 matrix over the Lie algebra / group of planar affine maps.
using Mat3 = std::array<double, 9>;

Mat3 mat3_identity();
Mat3 mat3_mul(const Mat3& a, const Mat3& b);

/// The six generator coordinates, in parameter order.
enum LieCoord {
  kLieTx = 0,
  kLieTy = 1,
  kLieRotate = 2,
  kLieScale = 3,
  kLieStretch = 4,
  kLieShear = 5,
};

/// Fixed generator basis of aff(2): unit translations, rotation, uniform
/// scale, stretch (diag(1,-1)) and shear ([[0,1],[1,0]]), all acting on
/// normalized [-1,1] coordinates. Translation value 1.0 shifts by half the
/// axis (50% of the image).
const std::array<Mat3, 6>& lie_generators();

/// Matrix exponential by scaling-and-squaring with a truncated Taylor
/// series; relative error vs closed forms < 1e-9. Throws NumericError on
/// non-finite input.
Mat3 expm(const Mat3& a);

/// expm together with its directional derivatives along `tangents`
/// (forward-mode through the series and the squarings).
void expm_with_tangents(const Mat3& a, const std::vector<Mat3>& tangents,
                        Mat3* value, std::vector<Mat3>* derivatives);

/// Bounds of the uniform distributions on the Lie algebra, one per
/// generator, plus the regularization state.
struct LieAugParams {
  std::array<double, 6> theta{};  // >= 0 elementwise
  double lambda = 0.0;
  // Shutdown thresholds: translations default to 2.0 (a bound spanning
  // -50%..50% of the axis) and scale to 2 ln 20 (a 2000% zoom under the
  // inverse warp); the rest default high enough to stay out of the way.
  std::array<double, 6> shutdown_thresholds{2.0, 2.0, 6.2832, 5.9915,
                                            2.0, 2.0};
  bool asymmetric_scale = false;  // sample scale from U(-theta_s/2, 0)
  int n_train_copies = 1;
  int n_eval_copies = 4;

  void validate() const;
};

/// Algebra draw u with u_i ~ U(-theta_i/2, theta_i/2) (scale from
/// U(-theta_s/2, 0) when asymmetric). theta_i = 0 fixes u_i = 0.
std::array<double, 6> sample_algebra(const LieAugParams& params,
                                     RngStream& rng);

/// The image-space transformation matrix exp(sum_i u_i G_i) for a fresh
/// algebra draw. theta = 0 returns the exact identity. The matrix is used
/// as the sampling grid (inverse warping): output pixel q reads the input
/// at M q, so a negative scale coordinate zooms in.
AffineMatrix sample_transform(const LieAugParams& params, RngStream& rng);

/// Inverse-warps a tensor with sampling matrix `grid`: out(q) = in(grid q)
/// over normalized coordinates, bilinear, zero fill, unclamped (training
/// path needs the raw values).
Tensor warp_by_grid(const Tensor& in, const Mat3& grid);

/// d loss / d grid entries (top two rows) given d loss / d out.
Mat3 warp_by_grid_backward(const Tensor& in, const Mat3& grid,
                           const Tensor& grad_out);

/// Small trainable classifier: conv (circular padding) -> tanh -> GAP ->
/// linear head. Tanh keeps the loss smooth for the finite-difference
/// gradient checks.
struct AugerinoModelConfig {
  int input_size = 32;
  int channels = 8;
  int n_classes = 2;
  std::uint64_t seed = 1;
};

class AugerinoModel {
 public:
  explicit AugerinoModel(const AugerinoModelConfig& cfg);

  std::vector<double> forward(const Tensor& in) const;
  const AugerinoModelConfig& config() const { return cfg_; }

  /// Flat parameter vector: conv weights, conv bias, head weights, head
  /// bias. Used by the optimizer and the finite-difference checks.
  std::vector<double> parameters() const;
  void set_parameters(const std::vector<double>& p);
  std::size_t n_parameters() const;

  ConvLayer conv;
  LinearLayer head;

 private:
  AugerinoModelConfig cfg_;
};

/// Mean of per-copy logits over `n_copies` fresh transform draws;
/// theta = 0 reduces to a single plain forward pass.
std::vector<double> averaged_forward(const AugerinoModel& model,
                                     const LieAugParams& params,
                                     const Image& img, RngStream& rng,
                                     int n_copies);

/// Fixed algebra noise for one (sample, copy): u = eps * theta elementwise.
using EpsDraw = std::array<double, 6>;

/// Training objective on a batch with fixed noise draws:
///   (1/N) sum_s (1/C) sum_c CE(model(warp(x_s, exp(sum u_i G_i))), y_s)
///     - lambda * || theta_active ||_2
/// where active excludes coordinates at or above their shutdown threshold
/// (re-activated as soon as the value drops back below). Returns the value
/// and, when grads are requested, d/d(model params) and d/d theta.
struct ObjectiveGrads {
  std::vector<double> model;      // same layout as AugerinoModel::parameters
  std::array<double, 6> theta{};  // full objective incl. regularizer
};
double augerino_objective(const AugerinoModel& model,
                          const LieAugParams& params,
                          const std::vector<Tensor>& batch,
                          const std::vector<int>& labels,
                          const std::vector<std::vector<EpsDraw>>& eps,
                          ObjectiveGrads* grads);

/// The regularizer gradient alone (for the shutdown unit checks):
/// -lambda * theta_i / ||theta_active|| for active i, 0 for shut-down i.
std::array<double, 6> regularizer_gradient(const LieAugParams& params);

struct TrainConfig {
  int epochs = 20;
  int batch_size = 16;
  double lr_model = 0.05;
  double lr_theta = 0.05;
  double momentum = 0.9;
  std::uint64_t seed = 1;
};

struct EpochLog {
  int epoch = 0;
  double loss = 0.0;  // mean objective over the epoch
  std::array<double, 6> theta{};
  std::array<bool, 6> shutdown{};
};

struct TrainResult {
  LieAugParams params;
  std::vector<EpochLog> log;
};

/// SGD with momentum on model weights and theta jointly; theta is projected
/// to >= 0 after each step. Throws NumericError with a diagnostic snapshot
/// if the loss goes non-finite.
TrainResult augerino_train(AugerinoModel* model, const LieAugParams& init,
                           const std::vector<Image>& images,
                           const std::vector<int>& labels,
                           const TrainConfig& cfg);

/// Accuracy over `test_seeds` evaluation seeds (mean and SEM). With
/// use_augerino, logits average over n_eval_copies transformed copies;
/// otherwise a single plain forward pass.
struct EvalResult {
  double mean_accuracy = 0.0;
  double sem_accuracy = 0.0;
  std::vector<double> per_seed;
};
EvalResult augerino_evaluate(const AugerinoModel& model,
                             const LieAugParams& params,
                             const std::vector<Image>& images,
                             const std::vector<int>& labels, bool use_augerino,
                             int n_eval_copies,
                             const std::vector<std::uint64_t>& test_seeds);

}  // namespace fovea

#endif  // FOVEA_LIE_AUGMENT_HPP_
