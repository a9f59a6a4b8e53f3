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

#ifndef FOVEA_TAXONOMY_HPP_
#define FOVEA_TAXONOMY_HPP_

#include <map>
#include <string>
#include <vector>

#include "fovea/factor_analysis.hpp"

namespace fovea {

enum class SimilarityMethod { kWuPalmer, kPath, kLeacockChodorow };

SimilarityMethod similarity_method_from_name(const std::string& name);

/// Rooted tree over class names. Built from child<TAB>parent edge lines;
/// the single node without a parent is the root (depth 1).
class TaxonomyTree {
 public:
  static TaxonomyTree from_edges(
      const std::vector<std::pair<std::string, std::string>>& edges);
  static TaxonomyTree from_file(const std::string& path);

  /// Small built-in tree used by tests and the demo CLI config.
  static TaxonomyTree demo_tree();

  bool contains(const std::string& node) const;
  bool is_leaf(const std::string& node) const;
  int depth(const std::string& node) const;  // root = 1
  int max_depth() const { return max_depth_; }
  const std::string& lca(const std::string& a, const std::string& b) const;
  int edge_distance(const std::string& a, const std::string& b) const;
  std::vector<std::string> leaves() const;

  /// wu_palmer = 2 depth(lca) / (depth(a) + depth(b));
  /// path       = 1 / (1 + edge distance);
  /// leacock_chodorow = -ln(max(1, distance) / (2 max_depth)).
  double similarity(const std::string& a, const std::string& b,
                    SimilarityMethod method) const;

 private:
  int index_of(const std::string& node) const;  // throws UnknownClass
  std::vector<std::string> names_;
  std::map<std::string, int> index_;
  std::vector<int> parent_;  // -1 for root
  std::vector<int> depth_;
  std::vector<bool> leaf_;
  int root_ = -1;
  int max_depth_ = 0;
};

/// One class pair: taxonomy similarity vs Spearman correlation of the two
/// classes' full transform rankings.
struct RankCorrelationRow {
  std::string class_a;
  std::string class_b;
  double similarity = 0.0;
  double spearman_rho = 0.0;
};

struct BinnedCorrelation {
  double bin_low = 0.0;
  double bin_high = 0.0;
  double mean_rho = 0.0;
  double sem_rho = 0.0;
  std::size_t n_pairs = 0;
};

struct SimilarityRankCorrelation {
  std::vector<RankCorrelationRow> rows;
  std::vector<BinnedCorrelation> bins;
  std::size_t excluded = 0;  // pairs with constant rankings (rho undefined)
};

/// For every leaf pair with a ranking: (similarity, Spearman rho between
/// the classes' rank vectors over the shared spec catalog), binned into
/// `n_bins` equal similarity intervals. `class_to_leaf` maps ranking class
/// ids to leaf names.
SimilarityRankCorrelation similarity_vs_rank_correlation(
    const TaxonomyTree& tree, const std::vector<ClassRanking>& rankings,
    const std::map<int, std::string>& class_to_leaf, SimilarityMethod method,
    int n_bins = 5);

/// Reads `class_id<TAB>leaf_name` lines.
std::map<int, std::string> read_class_map(const std::string& path);

}  // namespace fovea

#endif  // FOVEA_TAXONOMY_HPP_
