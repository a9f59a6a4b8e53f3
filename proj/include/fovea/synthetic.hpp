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

#ifndef FOVEA_SYNTHETIC_HPP_
#define FOVEA_SYNTHETIC_HPP_

#include <cstdint>
#include <string>
#include <vector>

#include "fovea/embedders.hpp"
#include "fovea/factor_analysis.hpp"
#include "fovea/image.hpp"
#include "fovea/rng.hpp"
#include "fovea/transforms.hpp"

namespace fovea {

/// One class of the planted-factor dataset: a seeded base motif varied only
/// by the planted transform (at levels from `levels`, random sign for the
/// signed kinds) plus optional pixel noise.
struct PlantedClassSpec {
  int class_id = 0;
  std::uint64_t pattern_seed = 0;
  TransformKind planted = TransformKind::kTranslateX;
  std::vector<int> levels = {0, 6};  // sampled uniformly per image
  double noise = 0.0;                // gaussian amplitude, clamped to [0,1]
  int n_samples = 100;
  int image_size = 24;
};

struct SyntheticDataset {
  std::vector<Image> images;
  std::vector<int> labels;
  std::vector<int> planted_levels;  // per image
  std::vector<PlantedClassSpec> specs;
};

/// Base motif for a class: a procedural pattern on a black background whose
/// structure is tuned so the planted transform family actually decorrelates
/// it (spokes for rotations, thin stripes for shears, rings for rescale,
/// channel-independent fields for color, ...). Frequencies are capped so
/// bilinear warps lose little energy.
Image base_pattern(const PlantedClassSpec& spec);

/// Generates the dataset; bit-reproducible from the specs' seeds.
SyntheticDataset generate(const std::vector<PlantedClassSpec>& specs);

/// Default demo dataset: `n_classes` classes cycling through all transform
/// kinds, with per-kind level sets chosen so each planted factor is
/// recoverable from zero-noise data.
std::vector<PlantedClassSpec> default_class_specs(int n_classes,
                                                  int per_class, double noise,
                                                  std::uint64_t seed,
                                                  int image_size = 24);

/// Exhaustive per-class rankings: evaluates the percent similarity change
/// over every ordered same-class pair and every catalog spec, with no
/// sampling. Straight-line code kept independent of the metrics module, so
/// it can serve as its oracle.
std::vector<ClassRanking> oracle_rank(const SyntheticDataset& dataset,
                                      const EmbeddingProvider& provider,
                                      const std::vector<TransformSpec>& specs,
                                      RankKey key = RankKey::kMeanChange,
                                      unsigned jobs = 1);

/// Writes images as PPMs plus a manifest TSV (id, class, planted kind,
/// level) into `dir`; returns the manifest path.
std::string write_dataset(const SyntheticDataset& dataset,
                          const std::string& dir);

/// Reads back a dataset written by write_dataset.
SyntheticDataset read_dataset(const std::string& manifest_path);

}  // namespace fovea

#endif  // FOVEA_SYNTHETIC_HPP_
