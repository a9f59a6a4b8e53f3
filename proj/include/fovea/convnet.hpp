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

#ifndef FOVEA_CONVNET_HPP_
#define FOVEA_CONVNET_HPP_

#include <cstddef>
#include <vector>

#include "fovea/image.hpp"
#include "fovea/rng.hpp"

namespace fovea {

/// CHW tensor in double precision; small enough networks that clarity
/// beats throughput.
struct Tensor {
  int channels = 0;
  int height = 0;
  int width = 0;
  std::vector<double> data;

  Tensor() = default;
  Tensor(int c, int h, int w)
      : channels(c), height(h), width(w),
        data(std::size_t(c) * h * w, 0.0) {}

  double& at(int c, int y, int x) {
    return data[(std::size_t(c) * height + y) * width + x];
  }
  double at(int c, int y, int x) const {
    return data[(std::size_t(c) * height + y) * width + x];
  }
  std::size_t size() const { return data.size(); }
};

Tensor tensor_from_image(const Image& img);

enum class Padding { kCircular, kZero };
enum class Activation { kRelu, kTanh, kNone };

/// One 3x3 stride-1 convolution layer with bias. Weights live in a flat
/// vector [out][in][ky][kx] so the optimizer can treat them uniformly.
struct ConvLayer {
  int in_channels = 0;
  int out_channels = 0;
  Padding padding = Padding::kCircular;
  std::vector<double> weights;  // out*in*9
  std::vector<double> bias;     // out

  ConvLayer() = default;
  ConvLayer(int in_c, int out_c, Padding pad, RngStream& rng);

  Tensor forward(const Tensor& in) const;
  /// Gradients of a scalar loss: fills grad_in (same dims as in) and
  /// accumulates into grad_weights/grad_bias (pre-sized, zeroed by caller).
  void backward(const Tensor& in, const Tensor& grad_out, Tensor* grad_in,
                std::vector<double>* grad_weights,
                std::vector<double>* grad_bias) const;
};

Tensor activation_forward(const Tensor& in, Activation act);
Tensor activation_backward(const Tensor& in, const Tensor& grad_out,
                           Activation act);

/// Global average pool per channel.
std::vector<double> gap_forward(const Tensor& in);
Tensor gap_backward(const Tensor& in, const std::vector<double>& grad_out);

/// Dense layer logits = W x + b with W stored row-major [out][in].
struct LinearLayer {
  int in_dim = 0;
  int out_dim = 0;
  std::vector<double> weights;
  std::vector<double> bias;

  LinearLayer() = default;
  LinearLayer(int in_d, int out_d, RngStream& rng);

  std::vector<double> forward(const std::vector<double>& x) const;
  void backward(const std::vector<double>& x,
                const std::vector<double>& grad_out,
                std::vector<double>* grad_in, std::vector<double>* grad_weights,
                std::vector<double>* grad_bias) const;
};

/// Softmax cross-entropy; returns the loss and writes d loss / d logits.
double softmax_cross_entropy(const std::vector<double>& logits, int label,
                             std::vector<double>* grad_logits);

}  // namespace fovea

#endif  // FOVEA_CONVNET_HPP_
