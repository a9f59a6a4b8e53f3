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

#include "fovea/stats.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace fovea::stats {

double pairwise_sum(std::span<const double> v) {
  const std::size_t n = v.size();
  if (n == 0) return 0.0;
  if (n <= 8) {
    double s = 0.0;
    for (double x : v) s += x;
    return s;
  }
  const std::size_t half = n / 2;
  return pairwise_sum(v.first(half)) + pairwise_sum(v.subspan(half));
}

double mean(std::span<const double> v) {
  if (v.empty()) return 0.0;
  return pairwise_sum(v) / static_cast<double>(v.size());
}

double stddev(std::span<const double> v) {
  const std::size_t n = v.size();
  if (n < 2) return 0.0;
  const double m = mean(v);
  std::vector<double> sq(n);
  for (std::size_t i = 0; i < n; ++i) sq[i] = (v[i] - m) * (v[i] - m);
  return std::sqrt(pairwise_sum(sq) / static_cast<double>(n - 1));
}

double sem(std::span<const double> v) {
  if (v.empty()) return 0.0;
  return stddev(v) / std::sqrt(static_cast<double>(v.size()));
}

std::array<double, 5> quantiles5(std::vector<double> v) {
  std::array<double, 5> out{};
  if (v.empty()) return out;
  std::sort(v.begin(), v.end());
  const std::array<double, 5> ps = {0.05, 0.25, 0.5, 0.75, 0.95};
  for (std::size_t k = 0; k < ps.size(); ++k) {
    const double pos = ps[k] * static_cast<double>(v.size() - 1);
    const std::size_t i = static_cast<std::size_t>(pos);
    const double frac = pos - static_cast<double>(i);
    out[k] = (i + 1 < v.size()) ? v[i] * (1.0 - frac) + v[i + 1] * frac : v[i];
  }
  return out;
}

VarianceEstimate variance_with_se(std::span<const double> v) {
  VarianceEstimate e;
  e.n = v.size();
  if (e.n < 2) return e;
  const double m = mean(v);
  std::vector<double> d2(e.n), d4(e.n);
  for (std::size_t i = 0; i < e.n; ++i) {
    const double d = v[i] - m;
    d2[i] = d * d;
    d4[i] = d2[i] * d2[i];
  }
  const double nn = static_cast<double>(e.n);
  const double m2 = pairwise_sum(d2) / nn;
  const double m4 = pairwise_sum(d4) / nn;
  e.variance = m2 * nn / (nn - 1.0);
  const double var_of_var = (m4 - m2 * m2) / nn;
  e.standard_error = var_of_var > 0.0 ? std::sqrt(var_of_var) : 0.0;
  return e;
}

double ks_statistic_uniform(std::vector<double> sample, double lo, double hi) {
  std::sort(sample.begin(), sample.end());
  const double n = static_cast<double>(sample.size());
  double d = 0.0;
  for (std::size_t i = 0; i < sample.size(); ++i) {
    const double cdf = std::clamp((sample[i] - lo) / (hi - lo), 0.0, 1.0);
    const double lo_step = static_cast<double>(i) / n;
    const double hi_step = static_cast<double>(i + 1) / n;
    d = std::max(d, std::max(cdf - lo_step, hi_step - cdf));
  }
  return d;
}

double kolmogorov_q(double lambda) {
  if (lambda < 1e-8) return 1.0;
  double sum = 0.0;
  for (int k = 1; k <= 100; ++k) {
    const double term = std::exp(-2.0 * k * k * lambda * lambda);
    sum += (k % 2 == 1) ? term : -term;
    if (term < 1e-16) break;
  }
  return std::clamp(2.0 * sum, 0.0, 1.0);
}

double ks_p_value(double d, std::size_t n) {
  const double sn = std::sqrt(static_cast<double>(n));
  return kolmogorov_q(d * (sn + 0.12 + 0.11 / sn));
}

double normal_cdf(double z) { return 0.5 * std::erfc(-z / std::sqrt(2.0)); }

bool pearson(std::span<const double> x, std::span<const double> y,
             double* out) {
  const std::size_t n = x.size();
  if (n != y.size() || n < 2) return false;
  const double mx = mean(x);
  const double my = mean(y);
  double sxy = 0.0, sxx = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double dx = x[i] - mx;
    const double dy = y[i] - my;
    sxy += dx * dy;
    sxx += dx * dx;
    syy += dy * dy;
  }
  if (sxx == 0.0 || syy == 0.0) return false;
  *out = sxy / std::sqrt(sxx * syy);
  return true;
}

std::vector<double> average_ranks(std::span<const double> v) {
  const std::size_t n = v.size();
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return v[a] < v[b]; });
  std::vector<double> ranks(n, 0.0);
  std::size_t i = 0;
  while (i < n) {
    std::size_t j = i;
    while (j + 1 < n && v[order[j + 1]] == v[order[i]]) ++j;
    // Ties share the average of the ranks they span (1-based).
    const double avg = 0.5 * static_cast<double>(i + j) + 1.0;
    for (std::size_t k = i; k <= j; ++k) ranks[order[k]] = avg;
    i = j + 1;
  }
  return ranks;
}

bool spearman(std::span<const double> x, std::span<const double> y,
              double* out) {
  if (x.size() != y.size() || x.size() < 2) return false;
  const std::vector<double> rx = average_ranks(x);
  const std::vector<double> ry = average_ranks(y);
  return pearson(rx, ry, out);
}

}  // namespace fovea::stats
