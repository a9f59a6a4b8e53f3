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

#include "fovea/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "fovea/errors.hpp"
#include "fovea/parallel.hpp"
#include "fovea/stats.hpp"

namespace fovea {

namespace {

constexpr double kDenomEps = 1e-9;

double norm_or_throw(const std::vector<float>& v, const std::string& who) {
  double s = 0.0;
  for (float x : v) s += static_cast<double>(x) * x;
  const double n = std::sqrt(s);
  if (!(n > 0.0) || !std::isfinite(n)) throw DegenerateEmbedding(who);
  return n;
}

// Embeds every sample, preserving order; parallel but slot-deterministic.
std::vector<std::vector<float>> embed_all(const EmbeddingProvider& provider,
                                          const std::vector<Image>& samples,
                                          unsigned jobs) {
  std::vector<std::vector<float>> out(samples.size());
  parallel_for(samples.size(), jobs,
               [&](std::size_t i) { out[i] = provider.embed(samples[i]); });
  return out;
}

std::vector<std::vector<float>> embed_transformed(
    const EmbeddingProvider& provider, const std::vector<Image>& samples,
    const TransformFn& transform, unsigned jobs) {
  std::vector<std::vector<float>> out(samples.size());
  parallel_for(samples.size(), jobs, [&](std::size_t i) {
    out[i] = provider.embed(transform(samples[i]));
  });
  return out;
}

// Random re-pairing without fixed points (the trailing fix-up swap keeps it
// a derangement for n >= 2).
std::vector<std::size_t> shuffled_partner(std::size_t n, RngStream& rng) {
  std::vector<std::size_t> p(n);
  std::iota(p.begin(), p.end(), std::size_t{0});
  rng.shuffle(p);
  for (std::size_t i = 0; i < n; ++i) {
    if (p[i] == i) std::swap(p[i], p[(i + 1) % n]);
  }
  return p;
}

}  // namespace

TransformFn transform_fn(const TransformSpec& spec) {
  return [spec](const Image& img) { return apply(spec, img); };
}

TransformFn transform_fn(const SubPolicy& sp) {
  return [sp](const Image& img) { return apply_subpolicy(sp, img); };
}

Image cyclic_shift(const Image& img, int dx, int dy) {
  Image out(img.width, img.height);
  const int w = img.width, h = img.height;
  auto wrap = [](int v, int n) {
    v %= n;
    return v < 0 ? v + n : v;
  };
  for (int y = 0; y < h; ++y) {
    const int sy = wrap(y - dy, h);
    for (int x = 0; x < w; ++x) {
      const int sx = wrap(x - dx, w);
      for (int c = 0; c < 3; ++c) out.at(x, y, c) = img.at(sx, sy, c);
    }
  }
  return out;
}

void MetricDistribution::finalize() {
  n = values.size();
  mean = stats::mean(values);
  sem = stats::sem(values);
  quantiles = stats::quantiles5(values);
}

PairSet make_pairs(const std::vector<int>& labels, std::size_t budget_per_class,
                   RngStream& rng) {
  PairSet ps;
  ps.seed = rng.base_seed();
  std::map<int, std::vector<int>> by_class;
  for (std::size_t i = 0; i < labels.size(); ++i) {
    by_class[labels[i]].push_back(static_cast<int>(i));
  }
  for (const auto& [cls, members] : by_class) {
    (void)cls;
    const std::size_t m = members.size();
    if (m < 2) continue;
    const std::size_t all = m * (m - 1);
    if (budget_per_class == 0 || budget_per_class >= all) {
      for (std::size_t a = 0; a < m; ++a) {
        for (std::size_t b = 0; b < m; ++b) {
          if (a != b) ps.pairs.emplace_back(members[a], members[b]);
        }
      }
    } else {
      for (std::size_t k = 0; k < budget_per_class; ++k) {
        const std::size_t a = rng.uniform_int(m);
        std::size_t b = rng.uniform_int(m - 1);
        if (b >= a) ++b;
        ps.pairs.emplace_back(members[a], members[b]);
      }
    }
  }
  return ps;
}

double cosine_similarity(const std::vector<float>& a,
                         const std::vector<float>& b, const std::string& who) {
  if (a.size() != b.size()) throw ShapeError("cosine: dim mismatch");
  const double na = norm_or_throw(a, who);
  const double nb = norm_or_throw(b, who);
  double dot = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    dot += static_cast<double>(a[i]) * b[i];
  }
  return dot / (na * nb);
}

MetricDistribution invariance(const EmbeddingProvider& provider,
                              const std::vector<Image>& samples,
                              const TransformFn& transform,
                              const std::string& tag, RngStream& rng,
                              const InvarianceOptions& opts) {
  if (samples.size() < 2) throw ShapeError("invariance needs >= 2 samples");
  const auto base = embed_all(provider, samples, opts.jobs);
  const auto moved = embed_transformed(provider, samples, transform, opts.jobs);

  const std::vector<std::size_t> partner = shuffled_partner(samples.size(), rng);
  std::vector<double> d(samples.size()), b(samples.size());
  parallel_for(samples.size(), opts.jobs, [&](std::size_t i) {
    const std::string who = "sample " + std::to_string(i);
    d[i] = 1.0 - cosine_similarity(base[i], moved[i], who);
    b[i] = 1.0 - cosine_similarity(base[i], moved[partner[i]], who);
  });

  const double b_mean = stats::mean(b);
  if (!opts.per_pair_baseline && b_mean <= kDenomEps) {
    throw DegenerateBaseline("baseline distance " + std::to_string(b_mean) +
                             " <= 1e-9 for " + tag);
  }
  MetricDistribution dist;
  dist.metric = "invariance";
  dist.transform_tag = tag;
  dist.values.reserve(samples.size());
  for (std::size_t i = 0; i < samples.size(); ++i) {
    if (opts.per_pair_baseline) {
      if (b[i] <= kDenomEps) {
        ++dist.excluded;
        dist.excluded_reason = "DegenerateBaseline";
        continue;
      }
      dist.values.push_back((b[i] - d[i]) / b[i]);
    } else {
      dist.values.push_back((b_mean - d[i]) / b_mean);
    }
  }
  dist.finalize();
  return dist;
}

MetricDistribution equivariance_alignment(const EmbeddingProvider& provider,
                                          const std::vector<Image>& samples,
                                          const TransformFn& transform,
                                          const std::string& tag,
                                          RngStream& rng,
                                          const EquivarianceOptions& opts) {
  const std::size_t n = samples.size();
  if (n < 3) throw ShapeError("equivariance needs >= 3 samples");
  const auto base = embed_all(provider, samples, opts.jobs);
  const auto moved = embed_transformed(provider, samples, transform, opts.jobs);
  const std::size_t dim = base[0].size();

  std::vector<std::vector<float>> diffs(n, std::vector<float>(dim));
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t c = 0; c < dim; ++c) diffs[i][c] = base[i][c] - moved[i][c];
  }
  // Baseline: shuffle each column independently across samples.
  std::vector<std::vector<float>> shuffled(n, std::vector<float>(dim));
  std::vector<std::size_t> perm(n);
  for (std::size_t c = 0; c < dim; ++c) {
    std::iota(perm.begin(), perm.end(), std::size_t{0});
    rng.shuffle(perm);
    for (std::size_t i = 0; i < n; ++i) shuffled[i][c] = diffs[perm[i]][c];
  }

  auto row_norm = [dim](const std::vector<float>& v) {
    double s = 0.0;
    for (std::size_t c = 0; c < dim; ++c) s += static_cast<double>(v[c]) * v[c];
    return std::sqrt(s);
  };
  std::vector<double> dnorm(n), bnorm(n);
  for (std::size_t i = 0; i < n; ++i) {
    dnorm[i] = row_norm(diffs[i]);
    bnorm[i] = row_norm(shuffled[i]);
  }

  // Sampled pairs i < j, deterministic from the stream.
  std::vector<std::pair<std::size_t, std::size_t>> pairs;
  const std::size_t all = n * (n - 1) / 2;
  if (opts.pair_budget == 0 || opts.pair_budget >= all) {
    pairs.reserve(all);
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t j = i + 1; j < n; ++j) pairs.emplace_back(i, j);
    }
  } else {
    pairs.reserve(opts.pair_budget);
    for (std::size_t k = 0; k < opts.pair_budget; ++k) {
      const std::size_t i = rng.uniform_int(n);
      std::size_t j = rng.uniform_int(n - 1);
      if (j >= i) ++j;
      pairs.emplace_back(std::min(i, j), std::max(i, j));
    }
  }

  MetricDistribution dist;
  dist.metric = "equivariance";
  dist.transform_tag = tag;
  std::vector<double> scores(pairs.size(),
                             std::numeric_limits<double>::quiet_NaN());
  parallel_for(pairs.size(), opts.jobs, [&](std::size_t k) {
    const auto [i, j] = pairs[k];
    if (dnorm[i] <= kDenomEps || dnorm[j] <= kDenomEps ||
        bnorm[i] <= kDenomEps || bnorm[j] <= kDenomEps) {
      return;  // degenerate difference, stays NaN
    }
    double sd = 0.0, sb = 0.0;
    for (std::size_t c = 0; c < dim; ++c) {
      sd += static_cast<double>(diffs[i][c]) * diffs[j][c];
      sb += static_cast<double>(shuffled[i][c]) * shuffled[j][c];
    }
    sd /= dnorm[i] * dnorm[j];
    sb /= bnorm[i] * bnorm[j];
    scores[k] = opts.score_diff_minus_baseline ? sd - sb : sb - sd;
  });
  for (double s : scores) {
    if (std::isnan(s)) {
      ++dist.excluded;
      dist.excluded_reason = "DegenerateDifference";
    } else {
      dist.values.push_back(s);
    }
  }
  dist.finalize();
  return dist;
}

SimChangeResult simchange(const EmbeddingProvider& provider,
                          const std::vector<Image>& samples,
                          const std::vector<int>& labels, const PairSet& pairs,
                          const TransformFn& transform, const std::string& tag,
                          unsigned jobs) {
  if (samples.size() != labels.size()) {
    throw ShapeError("simchange: samples/labels size mismatch");
  }
  for (const auto& [i, j] : pairs.pairs) {
    if (labels[i] != labels[j]) {
      throw ShapeError("simchange pairs must be same-class");
    }
  }
  const auto base = embed_all(provider, samples, jobs);
  const auto moved = embed_transformed(provider, samples, transform, jobs);

  std::vector<double> vals(pairs.pairs.size(),
                           std::numeric_limits<double>::quiet_NaN());
  parallel_for(pairs.pairs.size(), jobs, [&](std::size_t k) {
    const auto [i, j] = pairs.pairs[k];
    const std::string who = "pair " + std::to_string(k);
    const double s0 = cosine_similarity(base[i], base[j], who);
    if (std::abs(s0) <= kDenomEps) return;  // degenerate, stays NaN
    const double s1 = cosine_similarity(base[i], moved[j], who);
    vals[k] = (s1 - s0) / s0;
  });

  SimChangeResult result;
  result.pooled.metric = "simchange";
  result.pooled.transform_tag = tag;
  std::map<int, MetricDistribution> per_class;
  for (std::size_t k = 0; k < vals.size(); ++k) {
    const int cls = labels[pairs.pairs[k].first];
    MetricDistribution& cd = per_class[cls];
    if (cd.metric.empty()) {
      cd.metric = "simchange";
      cd.transform_tag = tag;
    }
    if (std::isnan(vals[k])) {
      ++result.pooled.excluded;
      ++cd.excluded;
      cd.excluded_reason = result.pooled.excluded_reason =
          "DegenerateSimilarity";
    } else {
      result.pooled.values.push_back(vals[k]);
      cd.values.push_back(vals[k]);
    }
  }
  result.pooled.finalize();
  for (auto& [cls, cd] : per_class) {
    (void)cls;
    cd.finalize();
  }
  result.per_class = std::move(per_class);
  return result;
}

}  // namespace fovea
