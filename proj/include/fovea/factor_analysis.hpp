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

#ifndef FOVEA_FACTOR_ANALYSIS_HPP_
#define FOVEA_FACTOR_ANALYSIS_HPP_

#include <map>
#include <set>
#include <string>
#include <vector>

#include "fovea/transforms.hpp"

namespace fovea {

/// One (class, transform) cell of SimChange results.
/// weighted_boost = mean positive change in percent x proportion of pairs
/// strictly boosted (change > 0).
struct SimChangeCell {
  int class_id = 0;
  TransformSpec spec;
  double mean_change = 0.0;
  double prop_boosted = 0.0;
  double weighted_boost = 0.0;
  std::size_t n_pairs = 0;
  std::size_t excluded = 0;
};

/// Builds a cell from per-pair changes (raw ratios, not percent).
SimChangeCell make_cell(int class_id, const TransformSpec& spec,
                        const std::vector<double>& changes,
                        std::size_t excluded);

enum class RankKey { kMeanChange, kWeightedBoost };
enum class RankScope { kPerClass, kGlobal };

struct RankedEntry {
  TransformSpec spec;
  double mean_change = 0.0;
  double prop_boosted = 0.0;
  double weighted_boost = 0.0;
};

/// Descending ranking of transforms for one class (or the global average,
/// class_id = -1). Ties break by catalog order.
struct ClassRanking {
  int class_id = 0;
  RankKey key = RankKey::kMeanChange;
  std::vector<RankedEntry> entries;

  const TransformSpec& top() const { return entries.front().spec; }
};

/// Ranks transforms per class or globally (global = unweighted average of
/// per-class means across classes). Every (class, spec) cell must be
/// present; otherwise throws IncompleteGrid naming the gaps.
std::vector<ClassRanking> rank_transforms(const std::vector<SimChangeCell>& cells,
                                          RankScope scope, RankKey key);

/// Fractions of classes whose top transform is appearance vs geometric,
/// plus the fraction topped by the identity when only geometric transforms
/// (and the identity) compete. Also reports the catalog balance.
struct CategorySplit {
  double appearance_fraction = 0.0;
  double geometric_fraction = 0.0;
  double identity_top_fraction_geometric_only = 0.0;
  double catalog_geometric_share = 0.0;
  std::size_t n_classes = 0;
};
CategorySplit category_split(const std::vector<ClassRanking>& rankings);

/// Buckets specs by invariance change between two runs and reports, per
/// bucket, the probability of landing in a class's top-k.
struct InvarianceChangeRow {
  TransformSpec spec;
  double inv_before = 0.0;
  double inv_after = 0.0;
};
struct TopkBucket {
  std::string bucket;  // "increase" | "decrease" | "minimal"
  std::size_t n_specs = 0;
  double topk_probability = 0.0;
};
std::vector<TopkBucket> invariance_change_vs_topk(
    const std::vector<InvarianceChangeRow>& before_after,
    const std::vector<ClassRanking>& rankings, std::size_t k,
    double minimal_threshold = 0.01);

/// Intersection-over-union of two sample-id sets. Throws EmptyUnion when
/// both are empty.
double list_iou(const std::set<std::string>& a, const std::set<std::string>& b);

}  // namespace fovea

#endif  // FOVEA_FACTOR_ANALYSIS_HPP_
