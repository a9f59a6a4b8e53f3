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

#include "fovea/convnet.hpp"

#include <algorithm>
#include <cmath>

#include "fovea/errors.hpp"

namespace fovea {

namespace {

inline int wrap(int v, int n) {
  v %= n;
  return v < 0 ? v + n : v;
}

}  // namespace

Tensor tensor_from_image(const Image& img) {
  Tensor t(3, img.height, img.width);
  for (int y = 0; y < img.height; ++y) {
    for (int x = 0; x < img.width; ++x) {
      for (int c = 0; c < 3; ++c) t.at(c, y, x) = img.at(x, y, c);
    }
  }
  return t;
}

ConvLayer::ConvLayer(int in_c, int out_c, Padding pad, RngStream& rng)
    : in_channels(in_c), out_channels(out_c), padding(pad),
      weights(std::size_t(out_c) * in_c * 9), bias(out_c, 0.0) {
  const double scale = 1.0 / std::sqrt(9.0 * in_c);
  for (double& w : weights) w = rng.normal() * scale;
}

Tensor ConvLayer::forward(const Tensor& in) const {
  if (in.channels != in_channels) {
    throw ShapeError("conv input channels mismatch");
  }
  const int h = in.height, w = in.width;
  Tensor out(out_channels, h, w);
  for (int oc = 0; oc < out_channels; ++oc) {
    for (int y = 0; y < h; ++y) {
      for (int x = 0; x < w; ++x) {
        double acc = bias[oc];
        for (int ic = 0; ic < in_channels; ++ic) {
          const double* wk = &weights[(std::size_t(oc) * in_channels + ic) * 9];
          for (int ky = -1; ky <= 1; ++ky) {
            for (int kx = -1; kx <= 1; ++kx) {
              int sy = y + ky, sx = x + kx;
              double v;
              if (padding == Padding::kCircular) {
                v = in.at(ic, wrap(sy, h), wrap(sx, w));
              } else {
                v = (sy < 0 || sy >= h || sx < 0 || sx >= w)
                        ? 0.0
                        : in.at(ic, sy, sx);
              }
              acc += wk[(ky + 1) * 3 + (kx + 1)] * v;
            }
          }
        }
        out.at(oc, y, x) = acc;
      }
    }
  }
  return out;
}

void ConvLayer::backward(const Tensor& in, const Tensor& grad_out,
                         Tensor* grad_in, std::vector<double>* grad_weights,
                         std::vector<double>* grad_bias) const {
  const int h = in.height, w = in.width;
  *grad_in = Tensor(in_channels, h, w);
  for (int oc = 0; oc < out_channels; ++oc) {
    for (int y = 0; y < h; ++y) {
      for (int x = 0; x < w; ++x) {
        const double g = grad_out.at(oc, y, x);
        if (g == 0.0) continue;
        (*grad_bias)[oc] += g;
        for (int ic = 0; ic < in_channels; ++ic) {
          const std::size_t wbase = (std::size_t(oc) * in_channels + ic) * 9;
          for (int ky = -1; ky <= 1; ++ky) {
            for (int kx = -1; kx <= 1; ++kx) {
              int sy = y + ky, sx = x + kx;
              if (padding == Padding::kCircular) {
                sy = wrap(sy, h);
                sx = wrap(sx, w);
              } else if (sy < 0 || sy >= h || sx < 0 || sx >= w) {
                continue;
              }
              const std::size_t wi = wbase + (ky + 1) * 3 + (kx + 1);
              (*grad_weights)[wi] += g * in.at(ic, sy, sx);
              grad_in->at(ic, sy, sx) += g * weights[wi];
            }
          }
        }
      }
    }
  }
}

Tensor activation_forward(const Tensor& in, Activation act) {
  if (act == Activation::kNone) return in;
  Tensor out = in;
  if (act == Activation::kRelu) {
    for (double& v : out.data) v = std::max(0.0, v);
  } else {
    for (double& v : out.data) v = std::tanh(v);
  }
  return out;
}

Tensor activation_backward(const Tensor& in, const Tensor& grad_out,
                           Activation act) {
  if (act == Activation::kNone) return grad_out;
  Tensor grad_in = grad_out;
  if (act == Activation::kRelu) {
    for (std::size_t i = 0; i < in.data.size(); ++i) {
      if (in.data[i] <= 0.0) grad_in.data[i] = 0.0;
    }
  } else {
    for (std::size_t i = 0; i < in.data.size(); ++i) {
      const double t = std::tanh(in.data[i]);
      grad_in.data[i] *= 1.0 - t * t;
    }
  }
  return grad_in;
}

std::vector<double> gap_forward(const Tensor& in) {
  std::vector<double> out(in.channels, 0.0);
  const double inv = 1.0 / (static_cast<double>(in.height) * in.width);
  for (int c = 0; c < in.channels; ++c) {
    double acc = 0.0;
    for (int y = 0; y < in.height; ++y) {
      for (int x = 0; x < in.width; ++x) acc += in.at(c, y, x);
    }
    out[c] = acc * inv;
  }
  return out;
}

Tensor gap_backward(const Tensor& in, const std::vector<double>& grad_out) {
  Tensor grad_in(in.channels, in.height, in.width);
  const double inv = 1.0 / (static_cast<double>(in.height) * in.width);
  for (int c = 0; c < in.channels; ++c) {
    const double g = grad_out[c] * inv;
    for (int y = 0; y < in.height; ++y) {
      for (int x = 0; x < in.width; ++x) grad_in.at(c, y, x) = g;
    }
  }
  return grad_in;
}

LinearLayer::LinearLayer(int in_d, int out_d, RngStream& rng)
    : in_dim(in_d), out_dim(out_d), weights(std::size_t(in_d) * out_d),
      bias(out_d, 0.0) {
  const double scale = 1.0 / std::sqrt(static_cast<double>(in_d));
  for (double& w : weights) w = rng.normal() * scale;
}

std::vector<double> LinearLayer::forward(const std::vector<double>& x) const {
  if (static_cast<int>(x.size()) != in_dim) {
    throw ShapeError("linear layer input dim mismatch");
  }
  std::vector<double> out(out_dim);
  for (int o = 0; o < out_dim; ++o) {
    double acc = bias[o];
    const double* row = &weights[std::size_t(o) * in_dim];
    for (int i = 0; i < in_dim; ++i) acc += row[i] * x[i];
    out[o] = acc;
  }
  return out;
}

void LinearLayer::backward(const std::vector<double>& x,
                           const std::vector<double>& grad_out,
                           std::vector<double>* grad_in,
                           std::vector<double>* grad_weights,
                           std::vector<double>* grad_bias) const {
  grad_in->assign(in_dim, 0.0);
  for (int o = 0; o < out_dim; ++o) {
    const double g = grad_out[o];
    (*grad_bias)[o] += g;
    const double* row = &weights[std::size_t(o) * in_dim];
    double* gw = &(*grad_weights)[std::size_t(o) * in_dim];
    for (int i = 0; i < in_dim; ++i) {
      gw[i] += g * x[i];
      (*grad_in)[i] += g * row[i];
    }
  }
}

double softmax_cross_entropy(const std::vector<double>& logits, int label,
                             std::vector<double>* grad_logits) {
  if (label < 0 || label >= static_cast<int>(logits.size())) {
    throw ShapeError("label out of range");
  }
  const double mx = *std::max_element(logits.begin(), logits.end());
  double z = 0.0;
  for (double v : logits) z += std::exp(v - mx);
  const double log_z = std::log(z) + mx;
  if (grad_logits) {
    grad_logits->resize(logits.size());
    for (std::size_t i = 0; i < logits.size(); ++i) {
      (*grad_logits)[i] = std::exp(logits[i] - log_z);
    }
    (*grad_logits)[label] -= 1.0;
  }
  return log_z - logits[label];
}

}  // namespace fovea
