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

#ifndef FOVEA_METRICS_HPP_
#define FOVEA_METRICS_HPP_

#include <array>
#include <functional>
#include <map>
#include <string>
#include <vector>

#include "fovea/embedders.hpp"
#include "fovea/image.hpp"
#include "fovea/rng.hpp"
#include "fovea/transforms.hpp"

namespace fovea {

/// Any deterministic image transformation; built from TransformSpec or
/// SubPolicy via transform_fn(), or supplied directly (e.g. cyclic shifts
/// in tests).
using TransformFn = std::function<Image(const Image&)>;

TransformFn transform_fn(const TransformSpec& spec);
TransformFn transform_fn(const SubPolicy& sp);

/// Cyclically shifts pixels by (dx, dy); the exact counterpart of the fill
/// translations in the catalog.
Image cyclic_shift(const Image& img, int dx, int dy);

/// Summary of per-pair (or per-sample) metric values.
struct MetricDistribution {
  std::string metric;
  std::string transform_tag;
  std::vector<double> values;
  double mean = 0.0;
  double sem = 0.0;
  std::array<double, 5> quantiles{};  // p5, p25, p50, p75, p95
  std::size_t n = 0;
  std::size_t excluded = 0;
  std::string excluded_reason;

  void finalize();
};

/// Ordered same-or-any-class sample pairs with the seed they came from.
struct PairSet {
  std::vector<std::pair<int, int>> pairs;  // (i, j); transform applies to j
  std::uint64_t seed = 0;
  bool same_class_only = true;
};

/// Samples `budget` ordered pairs (i != j) per class; budget 0 means all
/// ordered same-class pairs (exhaustive).
PairSet make_pairs(const std::vector<int>& labels, std::size_t budget_per_class,
                   RngStream& rng);

/// Invariance relative to a random-pair baseline:
///   Inv_i = (b - d(f(x_i), f(T x_i))) / b,  d = 1 - cosine similarity,
/// with b the mean of d(f(x_i), f(T x_j)) over a shuffled re-pairing of the
/// same samples. Throws DegenerateBaseline when b <= 1e-9 and
/// DegenerateEmbedding on zero-norm embeddings.
struct InvarianceOptions {
  bool per_pair_baseline = false;  // divide by each pair's own baseline draw
  unsigned jobs = 1;
};
MetricDistribution invariance(const EmbeddingProvider& provider,
                              const std::vector<Image>& samples,
                              const TransformFn& transform,
                              const std::string& tag, RngStream& rng,
                              const InvarianceOptions& opts = {});

/// Equivariance from the alignment of embedding differences
/// d_i = f(x_i) - f(T x_i) against a baseline B that shuffles each
/// embedding column independently across samples.
///
/// Default score per sampled pair: sim(b_i, b_j) - sim(d_i, d_j), positive
/// mean = equivariant response. The shuffle preserves every per-column
/// value pool (and with it the average pairwise inner product), so the
/// signature of a structured response is genuine-pair cosines sitting
/// BELOW the norm-homogenized baseline; an unstructured response scores
/// near zero. Set score_diff_minus_baseline to flip the sign convention.
/// Pairs touching a zero-norm difference (invariant samples) are excluded
/// and counted.
struct EquivarianceOptions {
  std::size_t pair_budget = 2000;
  bool score_diff_minus_baseline = false;
  unsigned jobs = 1;
};
MetricDistribution equivariance_alignment(const EmbeddingProvider& provider,
                                          const std::vector<Image>& samples,
                                          const TransformFn& transform,
                                          const std::string& tag,
                                          RngStream& rng,
                                          const EquivarianceOptions& opts = {});

/// Percent similarity change of same-class pairs when the second member is
/// transformed:
///   (sim(f(x1), f(T x2)) - sim(f(x1), f(x2))) / sim(f(x1), f(x2)).
/// Pairs with |denominator| <= 1e-9 are excluded and counted.
struct SimChangeResult {
  MetricDistribution pooled;
  std::map<int, MetricDistribution> per_class;
};
SimChangeResult simchange(const EmbeddingProvider& provider,
                          const std::vector<Image>& samples,
                          const std::vector<int>& labels, const PairSet& pairs,
                          const TransformFn& transform, const std::string& tag,
                          unsigned jobs = 1);

/// Cosine similarity with double accumulation. Throws DegenerateEmbedding
/// (with `who`) when either side has zero norm.
double cosine_similarity(const std::vector<float>& a,
                         const std::vector<float>& b, const std::string& who);

}  // namespace fovea

#endif  // FOVEA_METRICS_HPP_
