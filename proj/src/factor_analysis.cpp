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

#include "fovea/factor_analysis.hpp"

#include <algorithm>
#include <map>

#include "fovea/errors.hpp"
#include "fovea/stats.hpp"

namespace fovea {

namespace {

// Canonical catalog position, the deterministic tie-break.
long spec_order(const TransformSpec& s) {
  return (static_cast<long>(s.kind) * 10 + s.level) * 2 + (s.sign < 0 ? 1 : 0);
}

bool ranks_before(const RankedEntry& a, const RankedEntry& b, RankKey key) {
  const double ka = key == RankKey::kMeanChange ? a.mean_change : a.weighted_boost;
  const double kb = key == RankKey::kMeanChange ? b.mean_change : b.weighted_boost;
  if (ka != kb) return ka > kb;
  return spec_order(a.spec) < spec_order(b.spec);
}

}  // namespace

SimChangeCell make_cell(int class_id, const TransformSpec& spec,
                        const std::vector<double>& changes,
                        std::size_t excluded) {
  SimChangeCell cell;
  cell.class_id = class_id;
  cell.spec = spec;
  cell.n_pairs = changes.size();
  cell.excluded = excluded;
  cell.mean_change = stats::mean(changes);
  std::vector<double> boosted;
  for (double c : changes) {
    if (c > 0.0) boosted.push_back(c);
  }
  cell.prop_boosted =
      changes.empty() ? 0.0
                      : static_cast<double>(boosted.size()) / changes.size();
  // Percent units, matching the ranking convention: mean positive boost in
  // percent times the proportion boosted.
  cell.weighted_boost =
      boosted.empty() ? 0.0
                      : stats::mean(boosted) * 100.0 * cell.prop_boosted;
  return cell;
}

std::vector<ClassRanking> rank_transforms(const std::vector<SimChangeCell>& cells,
                                          RankScope scope, RankKey key) {
  if (cells.empty()) throw IncompleteGrid("no simchange cells supplied");

  std::set<int> classes;
  std::map<long, TransformSpec> specs;
  for (const SimChangeCell& c : cells) {
    classes.insert(c.class_id);
    specs.emplace(spec_order(c.spec), c.spec);
  }
  std::map<std::pair<int, long>, const SimChangeCell*> grid;
  for (const SimChangeCell& c : cells) {
    grid[{c.class_id, spec_order(c.spec)}] = &c;
  }
  std::string gaps;
  for (int cls : classes) {
    for (const auto& [order, spec] : specs) {
      if (!grid.count({cls, order})) {
        gaps += " (class " + std::to_string(cls) + ", " + spec.str() + ")";
      }
    }
  }
  if (!gaps.empty()) throw IncompleteGrid("missing cells:" + gaps);

  std::vector<ClassRanking> rankings;
  if (scope == RankScope::kPerClass) {
    for (int cls : classes) {
      ClassRanking r;
      r.class_id = cls;
      r.key = key;
      for (const auto& [order, spec] : specs) {
        const SimChangeCell* c = grid[{cls, order}];
        r.entries.push_back(
            {spec, c->mean_change, c->prop_boosted, c->weighted_boost});
      }
      std::sort(r.entries.begin(), r.entries.end(),
                [key](const RankedEntry& a, const RankedEntry& b) {
                  return ranks_before(a, b, key);
                });
      rankings.push_back(std::move(r));
    }
  } else {
    ClassRanking r;
    r.class_id = -1;
    r.key = key;
    for (const auto& [order, spec] : specs) {
      RankedEntry e;
      e.spec = spec;
      std::vector<double> means, props, boosts;
      for (int cls : classes) {
        const SimChangeCell* c = grid[{cls, order}];
        means.push_back(c->mean_change);
        props.push_back(c->prop_boosted);
        boosts.push_back(c->weighted_boost);
      }
      e.mean_change = stats::mean(means);
      e.prop_boosted = stats::mean(props);
      e.weighted_boost = stats::mean(boosts);
      r.entries.push_back(e);
    }
    std::sort(r.entries.begin(), r.entries.end(),
              [key](const RankedEntry& a, const RankedEntry& b) {
                return ranks_before(a, b, key);
              });
    rankings.push_back(std::move(r));
  }
  return rankings;
}

CategorySplit category_split(const std::vector<ClassRanking>& rankings) {
  if (rankings.empty()) throw IncompleteGrid("no rankings supplied");
  CategorySplit split;
  split.n_classes = rankings.size();
  std::size_t appearance = 0, geometric = 0, identity_geo = 0;
  std::size_t geo_specs = 0, total_specs = rankings.front().entries.size();
  for (const RankedEntry& e : rankings.front().entries) {
    if (kind_is_geometric(e.spec.kind) && e.spec.level > 0) ++geo_specs;
  }
  for (const ClassRanking& r : rankings) {
    if (r.entries.empty()) throw IncompleteGrid("empty ranking");
    // Top non-identity transform decides the class's category.
    const RankedEntry* top = nullptr;
    for (const RankedEntry& e : r.entries) {
      if (e.spec.level > 0) {
        top = &e;
        break;
      }
    }
    if (!top) throw IncompleteGrid("ranking contains only identity specs");
    if (kind_is_geometric(top->spec.kind)) ++geometric;
    else ++appearance;

    // Geometric-only pool (identity included): does the identity win?
    const RankedEntry* top_geo = nullptr;
    for (const RankedEntry& e : r.entries) {
      if (e.spec.level == 0 || kind_is_geometric(e.spec.kind)) {
        top_geo = &e;
        break;
      }
    }
    if (top_geo && top_geo->spec.level == 0) ++identity_geo;
  }
  const double n = static_cast<double>(rankings.size());
  split.appearance_fraction = appearance / n;
  split.geometric_fraction = geometric / n;
  split.identity_top_fraction_geometric_only = identity_geo / n;
  split.catalog_geometric_share =
      total_specs ? static_cast<double>(geo_specs) / total_specs : 0.0;
  return split;
}

std::vector<TopkBucket> invariance_change_vs_topk(
    const std::vector<InvarianceChangeRow>& before_after,
    const std::vector<ClassRanking>& rankings, std::size_t k,
    double minimal_threshold) {
  if (rankings.empty()) throw IncompleteGrid("no rankings supplied");
  // The invariance rows and the rankings must cover the same catalog.
  std::set<long> inv_specs, rank_specs;
  for (const InvarianceChangeRow& r : before_after) {
    inv_specs.insert(spec_order(r.spec));
  }
  for (const RankedEntry& e : rankings.front().entries) {
    rank_specs.insert(spec_order(e.spec));
  }
  if (inv_specs != rank_specs) {
    throw CatalogMismatch(
        "invariance rows and rankings cover different spec catalogs");
  }

  std::map<std::string, std::vector<long>> buckets;
  for (const InvarianceChangeRow& r : before_after) {
    const double delta = r.inv_after - r.inv_before;
    const char* b = delta > minimal_threshold    ? "increase"
                    : delta < -minimal_threshold ? "decrease"
                                                 : "minimal";
    buckets[b].push_back(spec_order(r.spec));
  }

  std::vector<TopkBucket> out;
  for (const char* name : {"increase", "decrease", "minimal"}) {
    auto it = buckets.find(name);
    TopkBucket bucket;
    bucket.bucket = name;
    if (it == buckets.end()) {
      out.push_back(bucket);
      continue;
    }
    bucket.n_specs = it->second.size();
    std::size_t hits = 0, trials = 0;
    for (const ClassRanking& r : rankings) {
      std::set<long> topk;
      for (std::size_t i = 0; i < r.entries.size() && i < k; ++i) {
        topk.insert(spec_order(r.entries[i].spec));
      }
      for (long spec : it->second) {
        ++trials;
        if (topk.count(spec)) ++hits;
      }
    }
    bucket.topk_probability =
        trials ? static_cast<double>(hits) / trials : 0.0;
    out.push_back(bucket);
  }
  return out;
}

double list_iou(const std::set<std::string>& a,
                const std::set<std::string>& b) {
  if (a.empty() && b.empty()) {
    throw EmptyUnion("IoU of two empty lists is undefined");
  }
  std::size_t inter = 0;
  for (const std::string& x : a) inter += b.count(x);
  const std::size_t uni = a.size() + b.size() - inter;
  return static_cast<double>(inter) / static_cast<double>(uni);
}

}  // namespace fovea
