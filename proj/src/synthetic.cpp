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

#include "fovea/synthetic.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <numbers>
#include <sstream>

#include "fovea/errors.hpp"
#include "fovea/parallel.hpp"
#include "fovea/stats.hpp"

namespace fovea {

namespace {

// Motif families keyed by what decorrelates them. All draw inside a central
// disk with a margin wide enough that the planted warps keep content in
// frame; spatial frequencies stay below ~6 cycles per image.
enum class MotifStyle {
  kBlobs,       // low-frequency fields; translations decorrelate them
  kSpokes,      // angular wave; rotations decorrelate
  kVStripes,    // thin vertical stripes; x-shear decorrelates
  kHStripes,    // thin horizontal stripes; y-shear decorrelates
  kRings,       // radial wave; rescale decorrelates
  kColorField,  // channel-independent fields; saturation moves decorrelate
  kChecker,     // fine checkerboard; sharpness/blur decorrelates
  kTwoTone,     // bimodal bright/dim stripes; solarize swaps the tones
};

struct MotifParams {
  MotifStyle style = MotifStyle::kBlobs;
  double amp_low = 0.25, amp_high = 0.4;  // value spread inside the motif
  double value_cap = 0.95;                // max intensity
  double base_level = 0.5;
  double freq_lo = 4.5, freq_hi = 6.0;    // stripes / rings
  bool distinct_channel_gains = false;    // autocontrast needs uneven maxima
};

// Each planted kind gets a motif family its transform actually decorrelates,
// with values spread wide enough that histogram equalization (the universal
// confound: it boosts any class whose clusters differ mostly in histogram)
// stays close to a no-op. The exceptions are the equalize and posterize
// classes themselves, which need low-contrast content for their planted
// transform to bite.
MotifParams motif_for_kind(TransformKind kind) {
  MotifParams p;
  switch (kind) {
    case TransformKind::kRotate:
      p.style = MotifStyle::kSpokes;
      break;
    case TransformKind::kShearX:
      p.style = MotifStyle::kVStripes;
      p.freq_lo = 7.0;
      p.freq_hi = 8.5;
      break;
    case TransformKind::kShearY:
      p.style = MotifStyle::kHStripes;
      p.freq_lo = 7.0;
      p.freq_hi = 8.5;
      break;
    case TransformKind::kRescale:
      p.style = MotifStyle::kRings;
      p.freq_lo = 7.0;
      p.freq_hi = 8.0;
      p.amp_low = 0.4;
      p.amp_high = 0.5;
      break;
    case TransformKind::kSolarize:
      p.style = MotifStyle::kTwoTone;
      p.freq_lo = 3.0;
      p.freq_hi = 4.5;
      break;
    case TransformKind::kColor:
      p.style = MotifStyle::kColorField;
      p.amp_low = 0.3;
      p.amp_high = 0.5;
      break;
    case TransformKind::kSharpness:
      p.style = MotifStyle::kChecker;
      break;
    case TransformKind::kEqualize:
      p.amp_low = 0.1;
      p.amp_high = 0.2;
      p.base_level = 0.3;
      p.value_cap = 0.55;
      break;
    case TransformKind::kPosterize:
      p.amp_low = 0.06;
      p.amp_high = 0.12;  // dim, so 4-bit quantization bites
      p.base_level = 0.22;
      p.value_cap = 0.4;
      break;
    case TransformKind::kAutocontrast:
      p.style = MotifStyle::kColorField;
      p.value_cap = 0.6;  // headroom for the per-channel stretch
      p.distinct_channel_gains = true;
      break;
    case TransformKind::kContrast:
      p.amp_low = 0.4;
      p.amp_high = 0.5;  // wide spread so the clamp reshapes the values
      p.value_cap = 0.98;
      break;
    default:  // translations, invert
      p.amp_low = 0.3;
      p.amp_high = 0.45;
      break;
  }
  return p;
}

std::vector<int> default_levels_for_kind(TransformKind kind) {
  switch (kind) {
    case TransformKind::kEqualize:
    case TransformKind::kInvert:
    case TransformKind::kAutocontrast:
      return {0, 5};
    case TransformKind::kSolarize:
    case TransformKind::kPosterize:
      return {0, 8};
    case TransformKind::kContrast:
    case TransformKind::kColor:
    case TransformKind::kSharpness:
    case TransformKind::kShearX:
    case TransformKind::kShearY:
      return {0, 9};
    default:  // translations, rotation, rescale
      return {0, 6};
  }
}

}  // namespace

Image base_pattern(const PlantedClassSpec& spec) {
  const MotifParams mp = motif_for_kind(spec.planted);
  RngStream rng(mix64(spec.pattern_seed ^ 0x5eedULL));
  const int n = spec.image_size;
  Image img(n, n, 0.0f);
  const double radius = 0.26;  // of the image; keeps a ~25% black margin
  const double cx = 0.5, cy = 0.5;
  const double theta0 = rng.uniform(0.0, std::numbers::pi);
  const double spoke_count = 8.0 + static_cast<double>(rng.uniform_int(3));
  const double stripe_freq = rng.uniform(mp.freq_lo, mp.freq_hi);
  const double ring_freq = rng.uniform(mp.freq_lo, mp.freq_hi);

  // Per-channel field parameters.
  struct Wave {
    double fx, fy, phase, amp;
  };
  std::array<std::vector<Wave>, 3> waves;
  std::array<double, 3> channel_gain{};
  for (int c = 0; c < 3; ++c) {
    for (int k = 0; k < 3; ++k) {
      waves[c].push_back({rng.uniform(-2.5, 2.5), rng.uniform(-2.5, 2.5),
                          rng.uniform(0.0, 2.0 * std::numbers::pi),
                          rng.uniform(mp.amp_low, mp.amp_high)});
    }
    channel_gain[c] = rng.uniform(0.7, 1.0);
  }
  if (mp.distinct_channel_gains) {
    // Strongly uneven per-channel maxima, shuffled per class.
    std::vector<double> gains = {0.35, 0.65, 1.0};
    rng.shuffle(gains);
    for (int c = 0; c < 3; ++c) channel_gain[c] = gains[c];
  }

  for (int y = 0; y < n; ++y) {
    for (int x = 0; x < n; ++x) {
      const double u = (x + 0.5) / n, v = (y + 0.5) / n;
      const double dx = u - cx, dy = v - cy;
      const double r = std::sqrt(dx * dx + dy * dy);
      if (r >= radius) continue;
      const double ang = std::atan2(dy, dx);
      // Soft edge keeps the warp-restored clusters tight.
      const double edge = std::min(1.0, (radius - r) / 0.04);
      for (int c = 0; c < 3; ++c) {
        double val = mp.base_level;
        switch (mp.style) {
          case MotifStyle::kBlobs:
          case MotifStyle::kColorField:
            for (const Wave& w : waves[c]) {
              val += w.amp * std::sin(2.0 * std::numbers::pi *
                                          (w.fx * u + w.fy * v) +
                                      w.phase);
            }
            break;
          case MotifStyle::kSpokes:
            val += 0.45 * std::sin(spoke_count * ang + waves[c][0].phase);
            val += 0.15 * std::sin(2.0 * std::numbers::pi *
                                       (waves[c][0].fx * u + waves[c][0].fy * v) +
                                   waves[c][1].phase);
            break;
          case MotifStyle::kVStripes: {
            // Stripe phase responds to the shear; the row-wise envelope
            // separates a shear (rows keep their envelope) from a small
            // rotation (rows trade envelopes), which would otherwise tilt
            // the stripes the same way.
            const double envelope =
                0.6 + 0.4 * std::sin(2.0 * std::numbers::pi * 2.5 * v +
                                     waves[c][1].phase);
            val += 0.45 * envelope *
                   std::sin(2.0 * std::numbers::pi * stripe_freq * u +
                            waves[c][0].phase);
            break;
          }
          case MotifStyle::kHStripes: {
            const double envelope =
                0.6 + 0.4 * std::sin(2.0 * std::numbers::pi * 2.5 * u +
                                     waves[c][1].phase);
            val += 0.45 * envelope *
                   std::sin(2.0 * std::numbers::pi * stripe_freq * v +
                            waves[c][0].phase);
            break;
          }
          case MotifStyle::kRings:
            val += 0.45 * std::sin(2.0 * std::numbers::pi * ring_freq * r /
                                       radius +
                                   waves[c][0].phase);
            break;
          case MotifStyle::kChecker: {
            // Nyquist checkerboard: the strongest possible response to a
            // 3x3 sharpen/blur.
            const int parity = (x + y) % 2;
            val += (parity ? 0.22 : -0.22) + 0.08 * std::sin(theta0 + 7.0 * u);
            break;
          }
          case MotifStyle::kTwoTone: {
            // Bright/dim stripe tones; a deep solarize swaps them.
            const double wave = std::sin(2.0 * std::numbers::pi * stripe_freq *
                                             (std::cos(theta0) * u +
                                              std::sin(theta0) * v) +
                                         waves[c][0].phase);
            val = wave > 0.0 ? 0.88 : 0.16;
            break;
          }
        }
        val *= channel_gain[c];
        img.at(x, y, c) = static_cast<float>(
            std::clamp(val * edge, 0.0, mp.value_cap));
      }
    }
  }
  return img;
}

SyntheticDataset generate(const std::vector<PlantedClassSpec>& specs) {
  SyntheticDataset ds;
  ds.specs = specs;
  for (const PlantedClassSpec& spec : specs) {
    if (spec.levels.empty() || spec.n_samples < 1) {
      throw ConfigError("class spec needs levels and n_samples >= 1");
    }
    for (int level : spec.levels) {
      if (level < 0 || level > 9) throw ConfigError("planted level out of 0..9");
    }
    const Image base = base_pattern(spec);
    RngStream rng(mix64(spec.pattern_seed ^ 0xda7aULL));
    for (int k = 0; k < spec.n_samples; ++k) {
      TransformSpec t;
      t.kind = spec.planted;
      t.level = spec.levels[rng.uniform_int(spec.levels.size())];
      t.sign = kind_is_signed(spec.planted) ? rng.sign() : +1;
      Image img = apply(t, base);
      if (spec.noise > 0.0) {
        for (float& v : img.data) {
          v = static_cast<float>(std::clamp(
              static_cast<double>(v) + spec.noise * rng.normal(), 0.0, 1.0));
        }
      }
      ds.images.push_back(std::move(img));
      ds.labels.push_back(spec.class_id);
      ds.planted_levels.push_back(t.level);
    }
  }
  return ds;
}

std::vector<PlantedClassSpec> default_class_specs(int n_classes, int per_class,
                                                  double noise,
                                                  std::uint64_t seed,
                                                  int image_size) {
  std::vector<PlantedClassSpec> specs;
  for (int c = 0; c < n_classes; ++c) {
    PlantedClassSpec s;
    s.class_id = c;
    s.pattern_seed = mix64(seed ^ (0x1000 + static_cast<std::uint64_t>(c)));
    s.planted = static_cast<TransformKind>(c % kNumTransformKinds);
    s.levels = default_levels_for_kind(s.planted);
    s.noise = noise;
    s.n_samples = per_class;
    s.image_size = image_size;
    specs.push_back(s);
  }
  return specs;
}

std::vector<ClassRanking> oracle_rank(const SyntheticDataset& dataset,
                                      const EmbeddingProvider& provider,
                                      const std::vector<TransformSpec>& specs,
                                      RankKey key, unsigned jobs) {
  const std::size_t n = dataset.images.size();
  std::vector<std::vector<float>> base(n);
  parallel_for(n, jobs, [&](std::size_t i) {
    base[i] = provider.embed(dataset.images[i]);
  });
  std::vector<double> norms(n);
  for (std::size_t i = 0; i < n; ++i) {
    double s = 0.0;
    for (float v : base[i]) s += static_cast<double>(v) * v;
    norms[i] = std::sqrt(s);
    if (!(norms[i] > 0.0)) {
      throw DegenerateEmbedding("sample " + std::to_string(i));
    }
  }
  std::map<int, std::vector<std::size_t>> by_class;
  for (std::size_t i = 0; i < n; ++i) {
    by_class[dataset.labels[i]].push_back(i);
  }
  std::vector<int> class_ids;
  std::vector<const std::vector<std::size_t>*> class_members;
  for (const auto& [cls, members] : by_class) {
    class_ids.push_back(cls);
    class_members.push_back(&members);
  }

  // Base-pair cosines are shared by every spec; compute them once.
  std::vector<std::vector<double>> base_sims(class_ids.size());
  parallel_for(class_ids.size(), jobs, [&](std::size_t c) {
    const auto& members = *class_members[c];
    base_sims[c].reserve(members.size() * (members.size() - 1));
    for (std::size_t a : members) {
      for (std::size_t b : members) {
        if (a == b) continue;
        double dot0 = 0.0;
        const std::vector<float>& ea = base[a];
        const std::vector<float>& eb = base[b];
        for (std::size_t d = 0; d < ea.size(); ++d) {
          dot0 += static_cast<double>(ea[d]) * eb[d];
        }
        base_sims[c].push_back(dot0 / (norms[a] * norms[b]));
      }
    }
  });

  // Every ordered pair, every spec, no sampling.
  std::vector<SimChangeCell> cells;
  for (const TransformSpec& spec : specs) {
    std::vector<std::vector<float>> moved(n);
    parallel_for(n, jobs, [&](std::size_t i) {
      moved[i] = provider.embed(apply(spec, dataset.images[i]));
    });
    std::vector<double> moved_norms(n);
    for (std::size_t i = 0; i < n; ++i) {
      double s = 0.0;
      for (float v : moved[i]) s += static_cast<double>(v) * v;
      moved_norms[i] = std::sqrt(s);
    }
    std::vector<SimChangeCell> spec_cells(class_ids.size());
    parallel_for(class_ids.size(), jobs, [&](std::size_t c) {
      const auto& members = *class_members[c];
      std::vector<double> changes;
      changes.reserve(base_sims[c].size());
      std::size_t excluded = 0;
      std::size_t pair_idx = 0;
      for (std::size_t a : members) {
        for (std::size_t b : members) {
          if (a == b) continue;
          const double s0 = base_sims[c][pair_idx++];
          if (std::abs(s0) <= 1e-9 || !(moved_norms[b] > 0.0)) {
            ++excluded;
            continue;
          }
          double dot1 = 0.0;
          const std::vector<float>& ea = base[a];
          const std::vector<float>& tb = moved[b];
          for (std::size_t d = 0; d < ea.size(); ++d) {
            dot1 += static_cast<double>(ea[d]) * tb[d];
          }
          const double s1 = dot1 / (norms[a] * moved_norms[b]);
          changes.push_back((s1 - s0) / s0);
        }
      }
      spec_cells[c] = make_cell(class_ids[c], spec, changes, excluded);
    });
    cells.insert(cells.end(), spec_cells.begin(), spec_cells.end());
  }
  return rank_transforms(cells, RankScope::kPerClass, key);
}

std::string write_dataset(const SyntheticDataset& dataset,
                          const std::string& dir) {
  namespace fs = std::filesystem;
  fs::create_directories(dir);
  const std::string manifest_path = (fs::path(dir) / "manifest.tsv").string();
  std::ofstream manifest(manifest_path, std::ios::trunc);
  if (!manifest) throw Error("cannot write manifest '" + manifest_path + "'");
  manifest << "id\tclass\tplanted\tlevel\n";
  std::map<int, TransformKind> planted_by_class;
  for (const PlantedClassSpec& s : dataset.specs) {
    planted_by_class[s.class_id] = s.planted;
  }
  for (std::size_t i = 0; i < dataset.images.size(); ++i) {
    std::ostringstream id;
    id << "img" << std::setw(6) << std::setfill('0') << i;
    write_image(dataset.images[i], (fs::path(dir) / (id.str() + ".ppm")).string());
    manifest << id.str() << '\t' << dataset.labels[i] << '\t'
             << kind_name(planted_by_class.at(dataset.labels[i])) << '\t'
             << dataset.planted_levels[i] << '\n';
  }
  if (!manifest) throw Error("failed writing manifest");
  return manifest_path;
}

SyntheticDataset read_dataset(const std::string& manifest_path) {
  namespace fs = std::filesystem;
  std::ifstream in(manifest_path);
  if (!in) throw Error("cannot open manifest '" + manifest_path + "'");
  const fs::path dir = fs::path(manifest_path).parent_path();
  SyntheticDataset ds;
  std::string line;
  std::getline(in, line);  // header
  std::map<int, TransformKind> planted_by_class;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::stringstream ss(line);
    std::string id, cls, kind, level;
    if (!std::getline(ss, id, '\t') || !std::getline(ss, cls, '\t') ||
        !std::getline(ss, kind, '\t') || !std::getline(ss, level, '\t')) {
      throw ParseError("bad manifest row '" + line + "'", 0);
    }
    ds.images.push_back(read_image((dir / (id + ".ppm")).string()));
    ds.labels.push_back(std::stoi(cls));
    ds.planted_levels.push_back(std::stoi(level));
    planted_by_class[ds.labels.back()] = kind_from_name(kind);
  }
  for (const auto& [cls, kind] : planted_by_class) {
    PlantedClassSpec spec;
    spec.class_id = cls;
    spec.planted = kind;
    if (!ds.images.empty()) spec.image_size = ds.images.front().width;
    ds.specs.push_back(spec);
  }
  std::sort(ds.specs.begin(), ds.specs.end(),
            [](const PlantedClassSpec& a, const PlantedClassSpec& b) {
              return a.class_id < b.class_id;
            });
  return ds;
}

}  // namespace fovea
