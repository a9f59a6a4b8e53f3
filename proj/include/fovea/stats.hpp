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

#ifndef FOVEA_STATS_HPP_
#define FOVEA_STATS_HPP_

#include <array>
#include <cstddef>
#include <span>
#include <vector>

namespace fovea::stats {

/// Pairwise (cascade) summation. Order-independent accumulation error,
/// so reductions give the same result regardless of chunking.
double pairwise_sum(std::span<const double> v);

double mean(std::span<const double> v);

/// Sample standard deviation (n-1 denominator).
double stddev(std::span<const double> v);

/// Standard error of the mean: stddev / sqrt(n).
double sem(std::span<const double> v);

/// Quantiles at {0.05, 0.25, 0.5, 0.75, 0.95} by linear interpolation.
std::array<double, 5> quantiles5(std::vector<double> v);

/// Monte-Carlo variance estimate with its standard error,
/// SE(s^2) = sqrt((m4 - s^4) / n) from the fourth central moment.
struct VarianceEstimate {
  double variance = 0.0;
  double standard_error = 0.0;
  std::size_t n = 0;
};
VarianceEstimate variance_with_se(std::span<const double> v);

/// Two-sided Kolmogorov-Smirnov statistic of `sample` against the uniform
/// distribution on [lo, hi].
double ks_statistic_uniform(std::vector<double> sample, double lo, double hi);

/// Kolmogorov distribution tail Q(lambda) = 2 sum_{k>=1} (-1)^{k-1}
/// exp(-2 k^2 lambda^2); the asymptotic p-value for D*sqrt(n).
double kolmogorov_q(double lambda);

/// Approximate p-value of a two-sided KS test with Stephens' finite-n
/// correction.
double ks_p_value(double d, std::size_t n);

/// Standard normal CDF.
double normal_cdf(double z);

/// Pearson correlation; returns false when either side has zero variance.
bool pearson(std::span<const double> x, std::span<const double> y,
             double* out);

/// Ranks with ties resolved by averaging (1-based).
std::vector<double> average_ranks(std::span<const double> v);

/// Spearman rank correlation = Pearson on average ranks.
/// Returns false when a side is constant (undefined correlation).
bool spearman(std::span<const double> x, std::span<const double> y,
              double* out);

}  // namespace fovea::stats

#endif  // FOVEA_STATS_HPP_
