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

#include "fovea/lie_augment.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "fovea/errors.hpp"
#include "fovea/stats.hpp"

namespace fovea {

namespace {

Mat3 mat3_zero() { return Mat3{0, 0, 0, 0, 0, 0, 0, 0, 0}; }

Mat3 mat3_scale(const Mat3& a, double k) {
  Mat3 r = a;
  for (double& v : r) v *= k;
  return r;
}

Mat3 mat3_add(const Mat3& a, const Mat3& b) {
  Mat3 r;
  for (int i = 0; i < 9; ++i) r[i] = a[i] + b[i];
  return r;
}

double mat3_max_abs(const Mat3& a) {
  double m = 0.0;
  for (double v : a) m = std::max(m, std::abs(v));
  return m;
}

}  // namespace

Mat3 mat3_identity() { return Mat3{1, 0, 0, 0, 1, 0, 0, 0, 1}; }

Mat3 mat3_mul(const Mat3& a, const Mat3& b) {
  Mat3 r;
  for (int i = 0; i < 3; ++i) {
    for (int j = 0; j < 3; ++j) {
      r[i * 3 + j] = a[i * 3 + 0] * b[0 * 3 + j] + a[i * 3 + 1] * b[1 * 3 + j] +
                     a[i * 3 + 2] * b[2 * 3 + j];
    }
  }
  return r;
}

const std::array<Mat3, 6>& lie_generators() {
  static const std::array<Mat3, 6> g = {{
      {0, 0, 1, 0, 0, 0, 0, 0, 0},    // translate x
      {0, 0, 0, 0, 0, 1, 0, 0, 0},    // translate y
      {0, -1, 0, 1, 0, 0, 0, 0, 0},   // rotation
      {1, 0, 0, 0, 1, 0, 0, 0, 0},    // uniform scale
      {1, 0, 0, 0, -1, 0, 0, 0, 0},   // stretch
      {0, 1, 0, 1, 0, 0, 0, 0, 0},    // shear
  }};
  return g;
}

Mat3 expm(const Mat3& a) {
  Mat3 value;
  expm_with_tangents(a, {}, &value, nullptr);
  return value;
}

void expm_with_tangents(const Mat3& a, const std::vector<Mat3>& tangents,
                        Mat3* value, std::vector<Mat3>* derivatives) {
  for (double v : a) {
    if (!std::isfinite(v)) throw NumericError("expm of non-finite matrix");
  }
  // Scale down so the series converges fast, then square back up.
  int squarings = 0;
  double norm = mat3_max_abs(a);
  while (norm > 0.5) {
    norm *= 0.5;
    ++squarings;
  }
  const double scale = std::ldexp(1.0, -squarings);
  const Mat3 x = mat3_scale(a, scale);
  const std::size_t nt = tangents.size();
  std::vector<Mat3> dx(nt);
  for (std::size_t t = 0; t < nt; ++t) dx[t] = mat3_scale(tangents[t], scale);

  // Taylor: E = sum_k x^k / k!, with the product rule running alongside.
  Mat3 e = mat3_identity();
  Mat3 term = mat3_identity();
  std::vector<Mat3> de(nt, mat3_zero()), dterm(nt, mat3_zero());
  for (int k = 1; k <= 40; ++k) {
    const double inv_k = 1.0 / k;
    for (std::size_t t = 0; t < nt; ++t) {
      dterm[t] = mat3_scale(
          mat3_add(mat3_mul(dterm[t], x), mat3_mul(term, dx[t])), inv_k);
    }
    term = mat3_scale(mat3_mul(term, x), inv_k);
    e = mat3_add(e, term);
    for (std::size_t t = 0; t < nt; ++t) de[t] = mat3_add(de[t], dterm[t]);
    if (mat3_max_abs(term) < 1e-18) break;
  }
  // Square back: E <- E^2, dE <- dE E + E dE.
  for (int s = 0; s < squarings; ++s) {
    for (std::size_t t = 0; t < nt; ++t) {
      de[t] = mat3_add(mat3_mul(de[t], e), mat3_mul(e, de[t]));
    }
    e = mat3_mul(e, e);
  }
  *value = e;
  if (derivatives) *derivatives = std::move(de);
}

void LieAugParams::validate() const {
  for (double t : theta) {
    if (!(t >= 0.0) || !std::isfinite(t)) {
      throw ConfigError("theta must be finite and >= 0");
    }
  }
  for (double t : shutdown_thresholds) {
    if (!(t > 0.0)) throw ConfigError("shutdown thresholds must be > 0");
  }
  if (n_train_copies < 1 || n_eval_copies < 1) {
    throw ConfigError("copy counts must be >= 1");
  }
  if (!std::isfinite(lambda)) throw ConfigError("lambda must be finite");
}

std::array<double, 6> sample_algebra(const LieAugParams& params,
                                     RngStream& rng) {
  params.validate();
  std::array<double, 6> u{};
  for (int i = 0; i < 6; ++i) {
    const double half = params.theta[i] / 2.0;
    if (params.asymmetric_scale && i == kLieScale) {
      u[i] = rng.uniform(-half, 0.0);
    } else {
      u[i] = rng.uniform(-half, half);
    }
    if (params.theta[i] == 0.0) u[i] = 0.0;
  }
  return u;
}

AffineMatrix sample_transform(const LieAugParams& params, RngStream& rng) {
  const std::array<double, 6> u = sample_algebra(params, rng);
  Mat3 a = mat3_zero();
  bool all_zero = true;
  for (int i = 0; i < 6; ++i) {
    if (u[i] != 0.0) {
      a = mat3_add(a, mat3_scale(lie_generators()[i], u[i]));
      all_zero = false;
    }
  }
  AffineMatrix m;  // identity
  if (all_zero) return m;
  m.m = expm(a);
  return m;
}

Tensor warp_by_grid(const Tensor& in, const Mat3& grid) {
  const int h = in.height, w = in.width;
  Tensor out(in.channels, h, w);
  auto tap = [&](int c, int y, int x) -> double {
    if (x < 0 || x >= w || y < 0 || y >= h) return 0.0;
    return in.at(c, y, x);
  };
  for (int oy = 0; oy < h; ++oy) {
    const double ny = 2.0 * (oy + 0.5) / h - 1.0;
    for (int ox = 0; ox < w; ++ox) {
      const double nx = 2.0 * (ox + 0.5) / w - 1.0;
      const double px = grid[0] * nx + grid[1] * ny + grid[2];
      const double py = grid[3] * nx + grid[4] * ny + grid[5];
      const double sx = ((px + 1.0) * w - 1.0) / 2.0;
      const double sy = ((py + 1.0) * h - 1.0) / 2.0;
      const int x0 = static_cast<int>(std::floor(sx));
      const int y0 = static_cast<int>(std::floor(sy));
      const double fx = sx - x0;
      const double fy = sy - y0;
      for (int c = 0; c < in.channels; ++c) {
        const double top =
            tap(c, y0, x0) * (1.0 - fx) + tap(c, y0, x0 + 1) * fx;
        const double bot =
            tap(c, y0 + 1, x0) * (1.0 - fx) + tap(c, y0 + 1, x0 + 1) * fx;
        out.at(c, oy, ox) = top * (1.0 - fy) + bot * fy;
      }
    }
  }
  return out;
}

Mat3 warp_by_grid_backward(const Tensor& in, const Mat3& grid,
                           const Tensor& grad_out) {
  const int h = in.height, w = in.width;
  Mat3 grad = mat3_zero();
  auto tap = [&](int c, int y, int x) -> double {
    if (x < 0 || x >= w || y < 0 || y >= h) return 0.0;
    return in.at(c, y, x);
  };
  for (int oy = 0; oy < h; ++oy) {
    const double ny = 2.0 * (oy + 0.5) / h - 1.0;
    for (int ox = 0; ox < w; ++ox) {
      const double nx = 2.0 * (ox + 0.5) / w - 1.0;
      const double px = grid[0] * nx + grid[1] * ny + grid[2];
      const double py = grid[3] * nx + grid[4] * ny + grid[5];
      const double sx = ((px + 1.0) * w - 1.0) / 2.0;
      const double sy = ((py + 1.0) * h - 1.0) / 2.0;
      const int x0 = static_cast<int>(std::floor(sx));
      const int y0 = static_cast<int>(std::floor(sy));
      const double fx = sx - x0;
      const double fy = sy - y0;
      double gx = 0.0, gy = 0.0;  // d loss / d (sx, sy)
      for (int c = 0; c < in.channels; ++c) {
        const double g = grad_out.at(c, oy, ox);
        if (g == 0.0) continue;
        const double t00 = tap(c, y0, x0), t10 = tap(c, y0, x0 + 1);
        const double t01 = tap(c, y0 + 1, x0), t11 = tap(c, y0 + 1, x0 + 1);
        gx += g * ((1.0 - fy) * (t10 - t00) + fy * (t11 - t01));
        gy += g * ((1.0 - fx) * (t01 - t00) + fx * (t11 - t10));
      }
      // Chain to normalized coords, then to the grid entries.
      const double gpx = gx * w / 2.0;
      const double gpy = gy * h / 2.0;
      grad[0] += gpx * nx;
      grad[1] += gpx * ny;
      grad[2] += gpx;
      grad[3] += gpy * nx;
      grad[4] += gpy * ny;
      grad[5] += gpy;
    }
  }
  return grad;
}

AugerinoModel::AugerinoModel(const AugerinoModelConfig& cfg) : cfg_(cfg) {
  RngStream rng(cfg.seed);
  conv = ConvLayer(3, cfg.channels, Padding::kCircular, rng);
  head = LinearLayer(cfg.channels, cfg.n_classes, rng);
}

std::vector<double> AugerinoModel::forward(const Tensor& in) const {
  const Tensor pre = conv.forward(in);
  const Tensor act = activation_forward(pre, Activation::kTanh);
  return head.forward(gap_forward(act));
}

std::vector<double> AugerinoModel::parameters() const {
  std::vector<double> p;
  p.reserve(n_parameters());
  p.insert(p.end(), conv.weights.begin(), conv.weights.end());
  p.insert(p.end(), conv.bias.begin(), conv.bias.end());
  p.insert(p.end(), head.weights.begin(), head.weights.end());
  p.insert(p.end(), head.bias.begin(), head.bias.end());
  return p;
}

void AugerinoModel::set_parameters(const std::vector<double>& p) {
  if (p.size() != n_parameters()) throw ShapeError("parameter vector size");
  std::size_t at = 0;
  auto take = [&](std::vector<double>& dst) {
    std::copy(p.begin() + at, p.begin() + at + dst.size(), dst.begin());
    at += dst.size();
  };
  take(conv.weights);
  take(conv.bias);
  take(head.weights);
  take(head.bias);
}

std::size_t AugerinoModel::n_parameters() const {
  return conv.weights.size() + conv.bias.size() + head.weights.size() +
         head.bias.size();
}

std::vector<double> averaged_forward(const AugerinoModel& model,
                                     const LieAugParams& params,
                                     const Image& img, RngStream& rng,
                                     int n_copies) {
  if (n_copies < 1) throw ConfigError("n_copies must be >= 1");
  const Tensor in = tensor_from_image(img);
  std::vector<double> acc(model.config().n_classes, 0.0);
  for (int c = 0; c < n_copies; ++c) {
    const AffineMatrix g = sample_transform(params, rng);
    const std::vector<double> logits =
        g.is_identity() ? model.forward(in)
                        : model.forward(warp_by_grid(in, g.m));
    for (std::size_t k = 0; k < acc.size(); ++k) acc[k] += logits[k];
  }
  for (double& v : acc) v /= n_copies;
  return acc;
}

std::array<double, 6> regularizer_gradient(const LieAugParams& params) {
  std::array<double, 6> grad{};
  double norm_sq = 0.0;
  std::array<bool, 6> active;
  for (int i = 0; i < 6; ++i) {
    active[i] = params.theta[i] < params.shutdown_thresholds[i];
    if (active[i]) norm_sq += params.theta[i] * params.theta[i];
  }
  const double norm = std::sqrt(norm_sq);
  if (norm <= 0.0) return grad;
  for (int i = 0; i < 6; ++i) {
    if (active[i]) grad[i] = -params.lambda * params.theta[i] / norm;
  }
  return grad;
}

double augerino_objective(const AugerinoModel& model,
                          const LieAugParams& params,
                          const std::vector<Tensor>& batch,
                          const std::vector<int>& labels,
                          const std::vector<std::vector<EpsDraw>>& eps,
                          ObjectiveGrads* grads) {
  if (batch.size() != labels.size() || batch.size() != eps.size() ||
      batch.empty()) {
    throw ShapeError("objective: batch/labels/eps size mismatch");
  }
  const auto& gens = lie_generators();
  const double n_inv = 1.0 / static_cast<double>(batch.size());

  if (grads) {
    grads->model.assign(model.n_parameters(), 0.0);
    grads->theta.fill(0.0);
  }
  std::vector<double> g_conv_w(model.conv.weights.size(), 0.0);
  std::vector<double> g_conv_b(model.conv.bias.size(), 0.0);
  std::vector<double> g_head_w(model.head.weights.size(), 0.0);
  std::vector<double> g_head_b(model.head.bias.size(), 0.0);

  double data_term = 0.0;
  for (std::size_t s = 0; s < batch.size(); ++s) {
    const double c_inv = 1.0 / static_cast<double>(eps[s].size());
    for (const EpsDraw& e : eps[s]) {
      // u = eps * theta, A = sum u_i G_i, grid = expm(A).
      std::array<double, 6> u;
      Mat3 a = mat3_zero();
      std::vector<Mat3> tangents;  // dA/du_i for coordinates that can move
      std::vector<int> tangent_coord;
      for (int i = 0; i < 6; ++i) {
        u[i] = e[i] * params.theta[i];
        if (u[i] != 0.0) a = mat3_add(a, mat3_scale(gens[i], u[i]));
        if (grads && e[i] != 0.0) {
          tangents.push_back(gens[i]);
          tangent_coord.push_back(i);
        }
      }
      Mat3 grid;
      std::vector<Mat3> dgrid;
      expm_with_tangents(a, grads ? tangents : std::vector<Mat3>{}, &grid,
                         grads ? &dgrid : nullptr);

      const Tensor warped = warp_by_grid(batch[s], grid);
      const Tensor pre = model.conv.forward(warped);
      const Tensor act = activation_forward(pre, Activation::kTanh);
      const std::vector<double> pooled = gap_forward(act);
      const std::vector<double> logits = model.head.forward(pooled);
      std::vector<double> g_logits;
      const double loss =
          softmax_cross_entropy(logits, labels[s], grads ? &g_logits : nullptr);
      data_term += loss * n_inv * c_inv;

      if (!grads) continue;
      const double scale = n_inv * c_inv;
      for (double& g : g_logits) g *= scale;
      std::vector<double> g_pooled;
      model.head.backward(pooled, g_logits, &g_pooled, &g_head_w, &g_head_b);
      const Tensor g_act = gap_backward(act, g_pooled);
      const Tensor g_pre = activation_backward(pre, g_act, Activation::kTanh);
      Tensor g_warped;
      model.conv.backward(warped, g_pre, &g_warped, &g_conv_w, &g_conv_b);
      const Mat3 g_grid = warp_by_grid_backward(batch[s], grid, g_warped);
      for (std::size_t t = 0; t < tangent_coord.size(); ++t) {
        double dot = 0.0;
        for (int k = 0; k < 9; ++k) dot += g_grid[k] * dgrid[t][k];
        grads->theta[tangent_coord[t]] += dot * e[tangent_coord[t]];
      }
    }
  }

  // Regularizer: -lambda * norm of the active (below-threshold) coordinates.
  double norm_sq = 0.0;
  for (int i = 0; i < 6; ++i) {
    if (params.theta[i] < params.shutdown_thresholds[i]) {
      norm_sq += params.theta[i] * params.theta[i];
    }
  }
  const double reg = -params.lambda * std::sqrt(norm_sq);

  if (grads) {
    const std::array<double, 6> g_reg = regularizer_gradient(params);
    for (int i = 0; i < 6; ++i) grads->theta[i] += g_reg[i];
    std::size_t at = 0;
    auto put = [&](const std::vector<double>& src) {
      std::copy(src.begin(), src.end(), grads->model.begin() + at);
      at += src.size();
    };
    put(g_conv_w);
    put(g_conv_b);
    put(g_head_w);
    put(g_head_b);
  }
  return data_term + reg;
}

TrainResult augerino_train(AugerinoModel* model, const LieAugParams& init,
                           const std::vector<Image>& images,
                           const std::vector<int>& labels,
                           const TrainConfig& cfg) {
  if (images.size() != labels.size() || images.empty()) {
    throw ShapeError("train: images/labels size mismatch");
  }
  init.validate();
  LieAugParams params = init;
  std::vector<Tensor> tensors;
  tensors.reserve(images.size());
  for (const Image& img : images) tensors.push_back(tensor_from_image(img));

  RngStream rng(cfg.seed);
  std::vector<double> vel_model(model->n_parameters(), 0.0);
  std::array<double, 6> vel_theta{};
  std::vector<std::size_t> order(images.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;

  TrainResult result;
  for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
    rng.shuffle(order);
    double epoch_loss = 0.0;
    std::size_t n_batches = 0;
    for (std::size_t start = 0; start < order.size();
         start += cfg.batch_size) {
      const std::size_t end =
          std::min(order.size(), start + cfg.batch_size);
      std::vector<Tensor> batch;
      std::vector<int> batch_labels;
      std::vector<std::vector<EpsDraw>> eps;
      for (std::size_t k = start; k < end; ++k) {
        batch.push_back(tensors[order[k]]);
        batch_labels.push_back(labels[order[k]]);
        std::vector<EpsDraw> draws(params.n_train_copies);
        for (EpsDraw& d : draws) {
          for (int i = 0; i < 6; ++i) {
            d[i] = (params.asymmetric_scale && i == kLieScale)
                       ? rng.uniform(-0.5, 0.0)
                       : rng.uniform(-0.5, 0.5);
          }
        }
        eps.push_back(std::move(draws));
      }
      ObjectiveGrads grads;
      const double loss =
          augerino_objective(*model, params, batch, batch_labels, eps, &grads);
      if (!std::isfinite(loss)) {
        std::ostringstream snap;
        snap << "non-finite loss at epoch " << epoch << ", batch "
             << n_batches << "; theta =";
        for (double t : params.theta) snap << ' ' << t;
        throw NumericError(snap.str());
      }
      epoch_loss += loss;
      ++n_batches;

      std::vector<double> p = model->parameters();
      for (std::size_t i = 0; i < p.size(); ++i) {
        vel_model[i] = cfg.momentum * vel_model[i] - cfg.lr_model * grads.model[i];
        p[i] += vel_model[i];
      }
      model->set_parameters(p);
      for (int i = 0; i < 6; ++i) {
        vel_theta[i] = cfg.momentum * vel_theta[i] - cfg.lr_theta * grads.theta[i];
        params.theta[i] = std::max(0.0, params.theta[i] + vel_theta[i]);
      }
    }
    EpochLog log;
    log.epoch = epoch;
    log.loss = epoch_loss / std::max<std::size_t>(1, n_batches);
    log.theta = params.theta;
    for (int i = 0; i < 6; ++i) {
      log.shutdown[i] = params.theta[i] >= params.shutdown_thresholds[i];
    }
    result.log.push_back(log);
  }
  result.params = params;
  return result;
}

EvalResult augerino_evaluate(const AugerinoModel& model,
                             const LieAugParams& params,
                             const std::vector<Image>& images,
                             const std::vector<int>& labels, bool use_augerino,
                             int n_eval_copies,
                             const std::vector<std::uint64_t>& test_seeds) {
  if (images.size() != labels.size() || images.empty()) {
    throw ShapeError("evaluate: images/labels size mismatch");
  }
  if (test_seeds.empty()) throw ConfigError("need at least one test seed");
  EvalResult result;
  for (std::uint64_t seed : test_seeds) {
    RngStream rng(seed);
    std::size_t correct = 0;
    for (std::size_t i = 0; i < images.size(); ++i) {
      std::vector<double> logits;
      if (use_augerino) {
        logits = averaged_forward(model, params, images[i], rng, n_eval_copies);
      } else {
        logits = model.forward(tensor_from_image(images[i]));
      }
      const int pred = static_cast<int>(
          std::max_element(logits.begin(), logits.end()) - logits.begin());
      if (pred == labels[i]) ++correct;
    }
    result.per_seed.push_back(static_cast<double>(correct) / images.size());
  }
  result.mean_accuracy = stats::mean(result.per_seed);
  result.sem_accuracy = stats::sem(result.per_seed);
  return result;
}

}  // namespace fovea
