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

#include "fovea/taxonomy.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

#include "fovea/errors.hpp"
#include "fovea/stats.hpp"

namespace fovea {

SimilarityMethod similarity_method_from_name(const std::string& name) {
  if (name == "wu_palmer") return SimilarityMethod::kWuPalmer;
  if (name == "path") return SimilarityMethod::kPath;
  if (name == "leacock_chodorow" || name == "lch") {
    return SimilarityMethod::kLeacockChodorow;
  }
  throw ConfigError("unknown similarity method '" + name + "'");
}

TaxonomyTree TaxonomyTree::from_edges(
    const std::vector<std::pair<std::string, std::string>>& edges) {
  TaxonomyTree t;
  auto intern = [&t](const std::string& name) {
    auto it = t.index_.find(name);
    if (it != t.index_.end()) return it->second;
    const int id = static_cast<int>(t.names_.size());
    t.names_.push_back(name);
    t.index_.emplace(name, id);
    t.parent_.push_back(-1);
    return id;
  };
  std::vector<bool> has_parent;
  for (const auto& [child, parent] : edges) {
    const int c = intern(child);
    const int p = intern(parent);
    if (c == p) throw ParseError("self-edge '" + child + "'", 0);
    if (t.parent_[c] != -1 && t.parent_[c] != p) {
      throw ParseError("node '" + child + "' has two parents", 0);
    }
    t.parent_[c] = p;
  }
  const int n = static_cast<int>(t.names_.size());
  if (n == 0) throw ParseError("empty taxonomy", 0);
  for (int i = 0; i < n; ++i) {
    if (t.parent_[i] == -1) {
      if (t.root_ != -1) {
        throw ParseError("multiple roots: '" + t.names_[t.root_] + "' and '" +
                             t.names_[i] + "'",
                         0);
      }
      t.root_ = i;
    }
  }
  if (t.root_ == -1) throw ParseError("taxonomy has a cycle (no root)", 0);

  t.depth_.assign(n, 0);
  for (int i = 0; i < n; ++i) {
    int d = 1, v = i, steps = 0;
    while (t.parent_[v] != -1) {
      v = t.parent_[v];
      ++d;
      if (++steps > n) throw ParseError("taxonomy has a cycle", 0);
    }
    if (v != t.root_) throw ParseError("disconnected taxonomy", 0);
    t.depth_[i] = d;
    t.max_depth_ = std::max(t.max_depth_, d);
  }
  t.leaf_.assign(n, true);
  for (int i = 0; i < n; ++i) {
    if (t.parent_[i] != -1) t.leaf_[t.parent_[i]] = false;
  }
  return t;
}

TaxonomyTree TaxonomyTree::from_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open taxonomy '" + path + "'");
  std::vector<std::pair<std::string, std::string>> edges;
  std::string line;
  std::size_t offset = 0;
  while (std::getline(in, line)) {
    if (!line.empty()) {
      const std::size_t tab = line.find('\t');
      if (tab == std::string::npos) {
        throw ParseError("taxonomy line missing TAB: '" + line + "'", offset);
      }
      edges.emplace_back(line.substr(0, tab), line.substr(tab + 1));
    }
    offset += line.size() + 1;
  }
  return from_edges(edges);
}

TaxonomyTree TaxonomyTree::demo_tree() {
  // entity(1) -> {animal(2) -> {dog(3)->{beagle,husky}(4),
  //               cat(3)->{tabby,siamese}(4)},
  //               object(2) -> {fabric(3)->{velvet,wool}(4),
  //               vehicle(3)->{car,boat}(4)}}
  return from_edges({
      {"animal", "entity"},
      {"object", "entity"},
      {"dog", "animal"},
      {"cat", "animal"},
      {"fabric", "object"},
      {"vehicle", "object"},
      {"beagle", "dog"},
      {"husky", "dog"},
      {"tabby", "cat"},
      {"siamese", "cat"},
      {"velvet", "fabric"},
      {"wool", "fabric"},
      {"car", "vehicle"},
      {"boat", "vehicle"},
  });
}

int TaxonomyTree::index_of(const std::string& node) const {
  auto it = index_.find(node);
  if (it == index_.end()) throw UnknownClass("unknown class '" + node + "'");
  return it->second;
}

bool TaxonomyTree::contains(const std::string& node) const {
  return index_.count(node) != 0;
}

bool TaxonomyTree::is_leaf(const std::string& node) const {
  return leaf_[index_of(node)];
}

int TaxonomyTree::depth(const std::string& node) const {
  return depth_[index_of(node)];
}

const std::string& TaxonomyTree::lca(const std::string& a,
                                     const std::string& b) const {
  int x = index_of(a), y = index_of(b);
  while (depth_[x] > depth_[y]) x = parent_[x];
  while (depth_[y] > depth_[x]) y = parent_[y];
  while (x != y) {
    x = parent_[x];
    y = parent_[y];
  }
  return names_[x];
}

int TaxonomyTree::edge_distance(const std::string& a,
                                const std::string& b) const {
  const int da = depth_[index_of(a)];
  const int db = depth_[index_of(b)];
  const int dl = depth_[index_of(lca(a, b))];
  return (da - dl) + (db - dl);
}

std::vector<std::string> TaxonomyTree::leaves() const {
  std::vector<std::string> out;
  for (std::size_t i = 0; i < names_.size(); ++i) {
    if (leaf_[i]) out.push_back(names_[i]);
  }
  std::sort(out.begin(), out.end());
  return out;
}

double TaxonomyTree::similarity(const std::string& a, const std::string& b,
                                SimilarityMethod method) const {
  switch (method) {
    case SimilarityMethod::kWuPalmer: {
      const int dl = depth(lca(a, b));
      return 2.0 * dl / (depth(a) + depth(b));
    }
    case SimilarityMethod::kPath:
      return 1.0 / (1.0 + edge_distance(a, b));
    case SimilarityMethod::kLeacockChodorow: {
      const int dist = std::max(1, edge_distance(a, b));
      return -std::log(static_cast<double>(dist) / (2.0 * max_depth_));
    }
  }
  throw ConfigError("unhandled similarity method");
}

SimilarityRankCorrelation similarity_vs_rank_correlation(
    const TaxonomyTree& tree, const std::vector<ClassRanking>& rankings,
    const std::map<int, std::string>& class_to_leaf, SimilarityMethod method,
    int n_bins) {
  if (n_bins < 1) throw ConfigError("need at least one bin");
  // Rank vector per class over the shared catalog: position of each spec in
  // the class's ranking, keyed by the spec's canonical string.
  struct ClassInfo {
    std::string leaf;
    std::map<std::string, double> rank_of;
  };
  std::vector<ClassInfo> infos;
  for (const ClassRanking& r : rankings) {
    auto it = class_to_leaf.find(r.class_id);
    if (it == class_to_leaf.end()) {
      throw UnknownClass("no leaf mapping for class " +
                         std::to_string(r.class_id));
    }
    if (!tree.contains(it->second) || !tree.is_leaf(it->second)) {
      throw UnknownClass("'" + it->second + "' is not a leaf of the taxonomy");
    }
    ClassInfo info;
    info.leaf = it->second;
    for (std::size_t i = 0; i < r.entries.size(); ++i) {
      info.rank_of[r.entries[i].spec.str()] = static_cast<double>(i + 1);
    }
    infos.push_back(std::move(info));
  }

  SimilarityRankCorrelation out;
  for (std::size_t i = 0; i < infos.size(); ++i) {
    for (std::size_t j = i + 1; j < infos.size(); ++j) {
      if (infos[i].rank_of.size() != infos[j].rank_of.size()) {
        throw CatalogMismatch("rankings cover different catalogs");
      }
      std::vector<double> ra, rb;
      for (const auto& [spec, rank] : infos[i].rank_of) {
        auto it = infos[j].rank_of.find(spec);
        if (it == infos[j].rank_of.end()) {
          throw CatalogMismatch("spec '" + spec + "' missing from a ranking");
        }
        ra.push_back(rank);
        rb.push_back(it->second);
      }
      double rho = 0.0;
      if (!stats::spearman(ra, rb, &rho)) {
        ++out.excluded;
        continue;
      }
      out.rows.push_back({infos[i].leaf, infos[j].leaf,
                          tree.similarity(infos[i].leaf, infos[j].leaf, method),
                          rho});
    }
  }

  if (!out.rows.empty()) {
    double lo = out.rows.front().similarity, hi = lo;
    for (const RankCorrelationRow& r : out.rows) {
      lo = std::min(lo, r.similarity);
      hi = std::max(hi, r.similarity);
    }
    const double width = (hi - lo) / n_bins;
    for (int b = 0; b < n_bins; ++b) {
      BinnedCorrelation bin;
      bin.bin_low = lo + b * width;
      bin.bin_high = (b + 1 == n_bins) ? hi : lo + (b + 1) * width;
      std::vector<double> rhos;
      for (const RankCorrelationRow& r : out.rows) {
        const bool in_bin =
            width == 0.0
                ? b == 0
                : (r.similarity >= bin.bin_low &&
                   (r.similarity < bin.bin_high || b + 1 == n_bins));
        if (in_bin) rhos.push_back(r.spearman_rho);
      }
      bin.n_pairs = rhos.size();
      bin.mean_rho = stats::mean(rhos);
      bin.sem_rho = stats::sem(rhos);
      out.bins.push_back(bin);
    }
  }
  return out;
}

std::map<int, std::string> read_class_map(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open class map '" + path + "'");
  std::map<int, std::string> out;
  std::string line;
  std::size_t offset = 0;
  while (std::getline(in, line)) {
    if (!line.empty()) {
      const std::size_t tab = line.find('\t');
      if (tab == std::string::npos) {
        throw ParseError("class map line missing TAB", offset);
      }
      try {
        out[std::stoi(line.substr(0, tab))] = line.substr(tab + 1);
      } catch (const std::exception&) {
        throw ParseError("bad class id in class map", offset);
      }
    }
    offset += line.size() + 1;
  }
  return out;
}

}  // namespace fovea
