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

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>

#include "fovea/errors.hpp"
#include "fovea/factor_analysis.hpp"
#include "fovea/rng.hpp"

using namespace fovea;

namespace {

std::vector<TransformSpec> small_catalog() {
  return catalog({0, 5}, SignPolicy::kPlusOnly);
}

std::vector<SimChangeCell> grid_for(
    const std::vector<int>& classes, const std::vector<TransformSpec>& specs,
    const std::function<double(int, const TransformSpec&)>& mean_of) {
  std::vector<SimChangeCell> cells;
  for (int cls : classes) {
    for (const TransformSpec& s : specs) {
      const double m = mean_of(cls, s);
      cells.push_back(make_cell(cls, s, {m, m, m}, 0));
    }
  }
  return cells;
}

}  // namespace

TEST_CASE("weighted boost definition arithmetic") {
  // Half the pairs boosted by +4%, the rest unchanged: 4 * 0.5 = 2.0.
  std::vector<double> changes;
  for (int i = 0; i < 10; ++i) changes.push_back(i < 5 ? 0.04 : 0.0);
  const SimChangeCell cell =
      make_cell(0, {TransformKind::kRotate, 5, +1}, changes, 0);
  CHECK(cell.prop_boosted == doctest::Approx(0.5));
  CHECK(cell.weighted_boost == doctest::Approx(2.0));
  CHECK(cell.mean_change == doctest::Approx(0.02));
}

TEST_CASE("weighted boost is zero iff nothing is boosted") {
  const SimChangeCell none =
      make_cell(0, {TransformKind::kInvert, 1, +1}, {-0.1, 0.0, -0.2}, 0);
  CHECK(none.weighted_boost == 0.0);
  const SimChangeCell some =
      make_cell(0, {TransformKind::kInvert, 1, +1}, {-0.1, 0.01, -0.2}, 0);
  CHECK(some.weighted_boost > 0.0);
}

TEST_CASE("rank_transforms: per-class ordering and determinism") {
  const auto specs = small_catalog();
  const auto cells = grid_for({0, 1}, specs, [](int cls, const TransformSpec& s) {
    if (cls == 0) return s.kind == TransformKind::kRotate && s.level == 5 ? 0.5 : -0.1;
    return s.kind == TransformKind::kInvert && s.level == 5 ? 0.3 : -0.1;
  });
  const auto rankings =
      rank_transforms(cells, RankScope::kPerClass, RankKey::kMeanChange);
  CHECK(rankings.size() == 2);
  CHECK(rankings[0].top().kind == TransformKind::kRotate);
  CHECK(rankings[1].top().kind == TransformKind::kInvert);

  // Permutation invariance of the input rows.
  auto shuffled = cells;
  RngStream rng(1);
  rng.shuffle(shuffled);
  const auto rankings2 =
      rank_transforms(shuffled, RankScope::kPerClass, RankKey::kMeanChange);
  for (std::size_t c = 0; c < rankings.size(); ++c) {
    for (std::size_t i = 0; i < rankings[c].entries.size(); ++i) {
      CHECK(rankings[c].entries[i].spec == rankings2[c].entries[i].spec);
    }
  }
}

TEST_CASE("all-zero simchange degenerates to catalog order") {
  const auto specs = small_catalog();
  const auto cells = grid_for({0}, specs, [](int, const TransformSpec&) {
    return 0.0;
  });
  const auto rankings =
      rank_transforms(cells, RankScope::kPerClass, RankKey::kMeanChange);
  for (std::size_t i = 0; i < specs.size(); ++i) {
    CHECK(rankings[0].entries[i].spec == specs[i]);
  }
}

TEST_CASE("global scope averages per-class means with equal weight") {
  const auto specs = small_catalog();
  const auto cells = grid_for({0, 1}, specs, [](int cls, const TransformSpec& s) {
    if (s.kind == TransformKind::kColor && s.level == 5) {
      return cls == 0 ? 1.0 : 0.0;  // average 0.5, the global winner
    }
    return cls == 0 ? 0.6 : 0.1;  // average 0.35
  });
  const auto rankings =
      rank_transforms(cells, RankScope::kGlobal, RankKey::kMeanChange);
  CHECK(rankings.size() == 1);
  CHECK(rankings[0].class_id == -1);
  CHECK(rankings[0].top().kind == TransformKind::kColor);
  CHECK(rankings[0].entries[0].mean_change == doctest::Approx(0.5));
}

TEST_CASE("missing cells raise IncompleteGrid naming the gap") {
  const auto specs = small_catalog();
  auto cells = grid_for({0, 1}, specs, [](int, const TransformSpec&) {
    return 0.1;
  });
  cells.pop_back();
  try {
    rank_transforms(cells, RankScope::kPerClass, RankKey::kMeanChange);
    FAIL("expected IncompleteGrid");
  } catch (const IncompleteGrid& e) {
    CHECK(std::string(e.what()).find("class 1") != std::string::npos);
  }
}

TEST_CASE("rank by weighted boost uses that key") {
  const auto specs = small_catalog();
  std::vector<SimChangeCell> cells;
  for (const TransformSpec& s : specs) {
    // rotate: small mean, everything boosted; invert: big mean on half.
    std::vector<double> changes;
    if (s.kind == TransformKind::kRotate && s.level == 5) {
      changes = {0.01, 0.01, 0.01, 0.01};
    } else if (s.kind == TransformKind::kInvert && s.level == 5) {
      changes = {0.5, -0.5, 0.5, -0.5};
    } else {
      changes = {-0.1, -0.1, -0.1, -0.1};
    }
    cells.push_back(make_cell(0, s, changes, 0));
  }
  const auto by_mean =
      rank_transforms(cells, RankScope::kPerClass, RankKey::kMeanChange);
  const auto by_boost =
      rank_transforms(cells, RankScope::kPerClass, RankKey::kWeightedBoost);
  CHECK(by_mean[0].top().kind == TransformKind::kRotate);   // mean 0.01 wins
  CHECK(by_boost[0].top().kind == TransformKind::kInvert);  // 50 * 0.5 = 25
  CHECK(by_mean[0].entries[0].mean_change == doctest::Approx(0.01));
}

TEST_CASE("category split fractions") {
  const auto specs = small_catalog();
  const auto cells = grid_for({0, 1, 2, 3}, specs, [](int cls, const TransformSpec& s) {
    // Classes 0-2 topped by color (appearance), class 3 by rotate.
    if (cls <= 2) return s.kind == TransformKind::kColor && s.level == 5 ? 0.5 : 0.0;
    return s.kind == TransformKind::kRotate && s.level == 5 ? 0.5 : 0.0;
  });
  const auto rankings =
      rank_transforms(cells, RankScope::kPerClass, RankKey::kMeanChange);
  const CategorySplit split = category_split(rankings);
  CHECK(split.appearance_fraction == doctest::Approx(0.75));
  CHECK(split.geometric_fraction == doctest::Approx(0.25));
  CHECK(split.appearance_fraction + split.geometric_fraction ==
        doctest::Approx(1.0));
  CHECK(split.n_classes == 4);
  // 6 geometric of 14 level-5 specs in this catalog.
  CHECK(split.catalog_geometric_share == doctest::Approx(6.0 / 28.0));
  CHECK_THROWS_AS(category_split({}), IncompleteGrid);
}

TEST_CASE("identity tops the geometric-only pool for invariant providers") {
  const auto specs = small_catalog();
  // Appearance transforms help, geometric ones hurt: in the geometric-only
  // pool the identity (0.0) wins.
  const auto cells = grid_for({0, 1}, specs, [](int, const TransformSpec& s) {
    if (s.level == 0) return 0.0;
    return kind_is_geometric(s.kind) ? -0.2 : 0.3;
  });
  const auto rankings =
      rank_transforms(cells, RankScope::kPerClass, RankKey::kMeanChange);
  const CategorySplit split = category_split(rankings);
  CHECK(split.identity_top_fraction_geometric_only == doctest::Approx(1.0));
  CHECK(split.appearance_fraction == doctest::Approx(1.0));
}

TEST_CASE("invariance change vs top-k buckets") {
  const auto specs = small_catalog();
  const auto cells = grid_for({0, 1}, specs, [](int, const TransformSpec& s) {
    return s.kind == TransformKind::kRotate && s.level == 5 ? 0.5 : 0.0;
  });
  const auto rankings =
      rank_transforms(cells, RankScope::kPerClass, RankKey::kMeanChange);

  std::vector<InvarianceChangeRow> rows;
  for (const TransformSpec& s : specs) {
    InvarianceChangeRow r;
    r.spec = s;
    r.inv_before = 0.5;
    // Only rotate:5 gains invariance.
    r.inv_after = (s.kind == TransformKind::kRotate && s.level == 5) ? 0.8 : 0.5;
    rows.push_back(r);
  }
  const auto buckets = invariance_change_vs_topk(rows, rankings, 1);
  for (const TopkBucket& b : buckets) {
    if (b.bucket == "increase") {
      CHECK(b.n_specs == 1);
      CHECK(b.topk_probability == doctest::Approx(1.0));
    } else if (b.bucket == "minimal") {
      CHECK(b.n_specs == specs.size() - 1);
      CHECK(b.topk_probability == doctest::Approx(0.0));
    } else {
      CHECK(b.n_specs == 0);
    }
  }

  // Identical before/after: everything lands in "minimal".
  std::vector<InvarianceChangeRow> same = rows;
  for (auto& r : same) r.inv_after = r.inv_before;
  const auto buckets2 = invariance_change_vs_topk(same, rankings, 1);
  for (const TopkBucket& b : buckets2) {
    if (b.bucket == "minimal") CHECK(b.n_specs == specs.size());
    else CHECK(b.n_specs == 0);
  }

  // k beyond the catalog: every spec is top-k.
  const auto buckets3 = invariance_change_vs_topk(rows, rankings, 1000);
  for (const TopkBucket& b : buckets3) {
    if (b.n_specs > 0) CHECK(b.topk_probability == doctest::Approx(1.0));
  }

  // Catalog mismatch raises.
  std::vector<InvarianceChangeRow> wrong(rows.begin(), rows.end() - 1);
  CHECK_THROWS_AS(invariance_change_vs_topk(wrong, rankings, 1),
                  CatalogMismatch);
}

TEST_CASE("list IoU") {
  const std::set<std::string> a = {"1", "2", "3"};
  const std::set<std::string> b = {"2", "3", "4"};
  CHECK(list_iou(a, a) == doctest::Approx(1.0));
  CHECK(list_iou(a, b) == doctest::Approx(0.5));
  CHECK(list_iou({"x", "y", "z"}, {"p", "q"}) == doctest::Approx(0.0));
  CHECK(list_iou(a, {}) == doctest::Approx(0.0));
  CHECK_THROWS_AS(list_iou({}, {}), EmptyUnion);
}
