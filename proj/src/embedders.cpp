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

#include "fovea/embedders.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <fstream>
#include <sstream>

#include "fovea/errors.hpp"

namespace fovea {

namespace {

void check_input_size(const Image& img, int expected, const char* who) {
  if (expected > 0 && (img.width != expected || img.height != expected)) {
    throw ShapeError(std::string(who) + " expects " + std::to_string(expected) +
                     "x" + std::to_string(expected) + " input, got " +
                     std::to_string(img.width) + "x" +
                     std::to_string(img.height));
  }
}

std::uint64_t fnv1a(const void* bytes, std::size_t n, std::uint64_t h) {
  const auto* p = static_cast<const unsigned char*>(bytes);
  for (std::size_t i = 0; i < n; ++i) {
    h ^= p[i];
    h *= 0x100000001b3ULL;
  }
  return h;
}

std::map<std::string, std::string> parse_kv(const std::string& text) {
  std::map<std::string, std::string> kv;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (item.empty()) continue;
    const std::size_t eq = item.find('=');
    if (eq == std::string::npos) {
      throw ConfigError("expected key=value in provider spec, got '" + item +
                        "'");
    }
    kv[item.substr(0, eq)] = item.substr(eq + 1);
  }
  return kv;
}

long kv_int(const std::map<std::string, std::string>& kv, const std::string& k,
            long fallback) {
  auto it = kv.find(k);
  if (it == kv.end()) return fallback;
  try {
    return std::stol(it->second);
  } catch (const std::exception&) {
    throw ConfigError("bad integer for '" + k + "' in provider spec");
  }
}

}  // namespace

SeededConvEmbedder::SeededConvEmbedder(const ConvEmbedderConfig& cfg)
    : cfg_(cfg) {
  if (cfg.input_size < 3 || cfg.channels < 1 || cfg.layers < 1) {
    throw ConfigError("bad conv embedder config");
  }
  RngStream rng(cfg.seed);
  int in_c = 3;
  for (int l = 0; l < cfg.layers; ++l) {
    convs_.emplace_back(in_c, cfg.channels, cfg.padding, rng);
    in_c = cfg.channels;
  }
}

ProviderInfo SeededConvEmbedder::info() const {
  ProviderInfo pi;
  pi.variant = "conv";
  pi.seed = cfg_.seed;
  pi.dim = cfg_.gap ? cfg_.channels
                    : cfg_.channels * cfg_.input_size * cfg_.input_size;
  pi.description = std::string("seeded conv stack, ") +
                   (cfg_.gap ? "gap" : "flatten") + ", " +
                   (cfg_.padding == Padding::kCircular ? "circular" : "zero") +
                   " padding";
  return pi;
}

Tensor SeededConvEmbedder::features(const Image& img) const {
  check_input_size(img, cfg_.input_size, "conv embedder");
  Tensor t = tensor_from_image(img);
  for (const ConvLayer& conv : convs_) {
    t = activation_forward(conv.forward(t), cfg_.activation);
  }
  return t;
}

std::vector<float> SeededConvEmbedder::embed(const Image& img) const {
  const Tensor t = features(img);
  if (cfg_.gap) {
    const std::vector<double> pooled = gap_forward(t);
    return std::vector<float>(pooled.begin(), pooled.end());
  }
  return std::vector<float>(t.data.begin(), t.data.end());
}

SeededPatchPoolEmbedder::SeededPatchPoolEmbedder(const PatchPoolConfig& cfg)
    : cfg_(cfg) {
  if (cfg.patch < 1 || cfg.input_size % cfg.patch != 0 || cfg.dim < 1) {
    throw ConfigError("patch embedder: input_size must be divisible by patch");
  }
  RngStream rng(cfg.seed);
  const int in_dim = 3 * cfg.patch * cfg.patch;
  weights_.resize(std::size_t(cfg.dim) * in_dim);
  const double scale = 1.0 / std::sqrt(static_cast<double>(in_dim));
  for (double& w : weights_) w = rng.normal() * scale;
}

ProviderInfo SeededPatchPoolEmbedder::info() const {
  ProviderInfo pi;
  pi.variant = "patch";
  pi.seed = cfg_.seed;
  pi.dim = cfg_.dim;
  pi.description = "shared linear patch map, mean over patches";
  return pi;
}

std::vector<float> SeededPatchPoolEmbedder::embed(const Image& img) const {
  check_input_size(img, cfg_.input_size, "patch embedder");
  const int p = cfg_.patch;
  const int per_side = cfg_.input_size / p;
  const int in_dim = 3 * p * p;
  std::vector<double> acc(cfg_.dim, 0.0);
  std::vector<double> patch(in_dim);
  for (int py = 0; py < per_side; ++py) {
    for (int px = 0; px < per_side; ++px) {
      int k = 0;
      for (int y = 0; y < p; ++y) {
        for (int x = 0; x < p; ++x) {
          for (int c = 0; c < 3; ++c) {
            patch[k++] = img.at(px * p + x, py * p + y, c);
          }
        }
      }
      for (int d = 0; d < cfg_.dim; ++d) {
        const double* row = &weights_[std::size_t(d) * in_dim];
        double s = 0.0;
        for (int i = 0; i < in_dim; ++i) s += row[i] * patch[i];
        acc[d] += s;
      }
    }
  }
  const double inv = 1.0 / (static_cast<double>(per_side) * per_side);
  std::vector<float> out(cfg_.dim);
  for (int d = 0; d < cfg_.dim; ++d) out[d] = static_cast<float>(acc[d] * inv);
  return out;
}

ProviderInfo HistogramEmbedder::info() const {
  ProviderInfo pi;
  pi.variant = "hist";
  pi.dim = 3 * bins_;
  pi.description = "global per-channel histogram";
  return pi;
}

std::vector<float> HistogramEmbedder::embed(const Image& img) const {
  std::vector<float> out(3 * bins_, 0.0f);
  const std::size_t n = std::size_t(img.width) * img.height;
  const float inc = 1.0f / static_cast<float>(n);
  for (std::size_t i = 0; i < n; ++i) {
    for (int c = 0; c < 3; ++c) {
      const float v = img.data[i * 3 + c];
      const int bin = std::min(bins_ - 1, static_cast<int>(v * bins_));
      out[c * bins_ + std::max(0, bin)] += inc;
    }
  }
  return out;
}

ProviderInfo PixelEmbedder::info() const {
  ProviderInfo pi;
  pi.variant = "pixel";
  pi.dim = size_ > 0 ? 3 * size_ * size_ : 0;
  pi.description = "flattened pixels";
  return pi;
}

std::vector<float> PixelEmbedder::embed(const Image& img) const {
  const Image& src = img;
  if (size_ > 0 && (img.width != size_ || img.height != size_)) {
    return resize(img, size_, size_).data;
  }
  return src.data;
}

ProviderInfo HashNoiseEmbedder::info() const {
  ProviderInfo pi;
  pi.variant = "noise";
  pi.seed = seed_;
  pi.dim = dim_;
  pi.description = "content-hash seeded gaussian noise";
  return pi;
}

std::vector<float> HashNoiseEmbedder::embed(const Image& img) const {
  std::uint64_t h = fnv1a(&img.width, sizeof(img.width),
                          0xcbf29ce484222325ULL ^ seed_);
  h = fnv1a(&img.height, sizeof(img.height), h);
  h = fnv1a(img.data.data(), img.data.size() * sizeof(float), h);
  RngStream rng(h);
  std::vector<float> out(dim_);
  for (int i = 0; i < dim_; ++i) out[i] = static_cast<float>(rng.normal());
  return out;
}

ProviderInfo FileStoreProvider::info() const {
  ProviderInfo pi;
  pi.variant = "file";
  pi.dim = dim_;
  pi.description = source_;
  return pi;
}

std::vector<float> FileStoreProvider::embed(const Image&) const {
  throw CapabilityError(
      "file stores are id-keyed; use lookup(id) instead of embed(image)");
}

const std::vector<float>& FileStoreProvider::lookup(const std::string& id) const {
  auto it = rows_.find(id);
  if (it == rows_.end()) throw MissingEmbedding(id);
  return it->second;
}

bool FileStoreProvider::contains(const std::string& id) const {
  return rows_.count(id) != 0;
}

void FileStoreProvider::insert(const std::string& id,
                               std::vector<float> values) {
  if (rows_.count(id)) throw DuplicateId(id);
  if (dim_ == 0) dim_ = static_cast<int>(values.size());
  if (static_cast<int>(values.size()) != dim_) {
    throw ParseError("embedding dim mismatch for id '" + id + "'", 0);
  }
  rows_.emplace(id, std::move(values));
}

namespace {

constexpr char kStoreMagic[4] = {'F', 'E', 'B', '1'};

FileStoreProvider load_binary_store(const std::vector<unsigned char>& bytes) {
  FileStoreProvider store;
  std::size_t pos = 4;
  auto need = [&](std::size_t n) {
    if (bytes.size() - pos < n) {
      throw ParseError("truncated embedding store", bytes.size());
    }
  };
  need(4 + 8);
  std::uint32_t dim = 0;
  std::memcpy(&dim, &bytes[pos], 4);
  pos += 4;
  std::uint64_t count = 0;
  std::memcpy(&count, &bytes[pos], 8);
  pos += 8;
  for (std::uint64_t r = 0; r < count; ++r) {
    need(4);
    std::uint32_t id_len = 0;
    std::memcpy(&id_len, &bytes[pos], 4);
    pos += 4;
    need(id_len);
    std::string id(reinterpret_cast<const char*>(&bytes[pos]), id_len);
    pos += id_len;
    need(std::size_t(dim) * 4);
    std::vector<float> values(dim);
    std::memcpy(values.data(), &bytes[pos], std::size_t(dim) * 4);
    pos += std::size_t(dim) * 4;
    store.insert(id, std::move(values));
  }
  return store;
}

}  // namespace

FileStoreProvider load_file_store(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open embedding store '" + path + "'");
  std::vector<unsigned char> bytes((std::istreambuf_iterator<char>(in)),
                                   std::istreambuf_iterator<char>());
  if (bytes.size() >= 4 && std::memcmp(bytes.data(), kStoreMagic, 4) == 0) {
    FileStoreProvider store = load_binary_store(bytes);
    store.source_ = path;
    return store;
  }
  // Text format.
  FileStoreProvider store;
  std::string text(bytes.begin(), bytes.end());
  std::istringstream ss(text);
  std::string header;
  if (!std::getline(ss, header)) throw ParseError("empty embedding store", 0);
  int dim = 0;
  long count = -1;
  if (std::sscanf(header.c_str(), "dim=%d count=%ld", &dim, &count) != 2 ||
      dim < 1 || count < 0) {
    throw ParseError("bad store header (want 'dim=<d> count=<n>')", 0);
  }
  std::size_t offset = header.size() + 1;
  std::string line;
  long rows = 0;
  while (std::getline(ss, line)) {
    if (line.empty()) {
      offset += 1;
      continue;
    }
    const std::size_t tab = line.find('\t');
    if (tab == std::string::npos) {
      throw ParseError("store row missing TAB separator", offset);
    }
    const std::string id = line.substr(0, tab);
    std::vector<float> values;
    values.reserve(dim);
    std::stringstream vs(line.substr(tab + 1));
    std::string tok;
    while (std::getline(vs, tok, ',')) {
      try {
        values.push_back(std::stof(tok));
      } catch (const std::exception&) {
        throw ParseError("bad float '" + tok + "' in store row", offset);
      }
    }
    if (static_cast<int>(values.size()) != dim) {
      throw ParseError("row has " + std::to_string(values.size()) +
                           " values, header says dim=" + std::to_string(dim),
                       offset);
    }
    store.insert(id, std::move(values));
    offset += line.size() + 1;
    ++rows;
  }
  if (rows != count) {
    throw ParseError("store has " + std::to_string(rows) +
                         " rows, header says count=" + std::to_string(count),
                     offset);
  }
  store.source_ = path;
  return store;
}

void save_file_store(const FileStoreProvider& store, const std::string& path,
                     bool binary) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error("cannot open '" + path + "' for writing");
  if (binary) {
    out.write(kStoreMagic, 4);
    const std::uint32_t dim = static_cast<std::uint32_t>(store.dim_);
    const std::uint64_t count = store.rows_.size();
    out.write(reinterpret_cast<const char*>(&dim), 4);
    out.write(reinterpret_cast<const char*>(&count), 8);
    for (const auto& [id, values] : store.rows_) {
      const std::uint32_t id_len = static_cast<std::uint32_t>(id.size());
      out.write(reinterpret_cast<const char*>(&id_len), 4);
      out.write(id.data(), id_len);
      out.write(reinterpret_cast<const char*>(values.data()),
                static_cast<std::streamsize>(values.size() * 4));
    }
  } else {
    out << "dim=" << store.dim_ << " count=" << store.rows_.size() << "\n";
    for (const auto& [id, values] : store.rows_) {
      out << id << '\t';
      for (std::size_t i = 0; i < values.size(); ++i) {
        if (i) out << ',';
        out << values[i];
      }
      out << '\n';
    }
  }
  if (!out) throw Error("failed writing '" + path + "'");
}

LinearClassifier::LinearClassifier(
    std::shared_ptr<const EmbeddingProvider> provider, int n_classes,
    std::uint64_t seed)
    : provider_(std::move(provider)) {
  RngStream rng(seed);
  const int d = provider_->dim();
  if (d < 1) throw ConfigError("provider must declare a fixed dim for a head");
  head_ = LinearLayer(d, n_classes, rng);
  // Start from the zero map: all-equal logits until fitted.
  std::fill(head_.weights.begin(), head_.weights.end(), 0.0);
}

std::vector<double> LinearClassifier::classify(const Image& img) const {
  const std::vector<float> e = provider_->embed(img);
  return head_.forward(std::vector<double>(e.begin(), e.end()));
}

int LinearClassifier::predict(const Image& img) const {
  const std::vector<double> logits = classify(img);
  return static_cast<int>(std::max_element(logits.begin(), logits.end()) -
                          logits.begin());
}

void LinearClassifier::fit(const std::vector<Image>& images,
                           const std::vector<int>& labels, int epochs,
                           double lr, std::uint64_t seed) {
  if (images.size() != labels.size() || images.empty()) {
    throw ShapeError("fit: images/labels size mismatch");
  }
  std::vector<std::vector<double>> embs(images.size());
  for (std::size_t i = 0; i < images.size(); ++i) {
    const std::vector<float> e = provider_->embed(images[i]);
    embs[i].assign(e.begin(), e.end());
  }
  RngStream rng(seed);
  std::vector<std::size_t> order(images.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::vector<double> gw(head_.weights.size());
  std::vector<double> gb(head_.bias.size());
  std::vector<double> gx, glogits;
  for (int e = 0; e < epochs; ++e) {
    rng.shuffle(order);
    for (std::size_t i : order) {
      const std::vector<double> logits = head_.forward(embs[i]);
      softmax_cross_entropy(logits, labels[i], &glogits);
      std::fill(gw.begin(), gw.end(), 0.0);
      std::fill(gb.begin(), gb.end(), 0.0);
      head_.backward(embs[i], glogits, &gx, &gw, &gb);
      for (std::size_t k = 0; k < gw.size(); ++k) head_.weights[k] -= lr * gw[k];
      for (std::size_t k = 0; k < gb.size(); ++k) head_.bias[k] -= lr * gb[k];
    }
  }
}

std::unique_ptr<EmbeddingProvider> make_provider(const std::string& spec) {
  const std::size_t colon = spec.find(':');
  const std::string name = spec.substr(0, colon);
  const std::string rest =
      colon == std::string::npos ? "" : spec.substr(colon + 1);
  if (name == "file") {
    if (rest.empty()) throw ConfigError("file provider needs a path");
    return std::make_unique<FileStoreProvider>(load_file_store(rest));
  }
  const auto kv = parse_kv(rest);
  if (name == "conv") {
    ConvEmbedderConfig cfg;
    cfg.seed = static_cast<std::uint64_t>(kv_int(kv, "seed", 1));
    cfg.input_size = static_cast<int>(kv_int(kv, "size", 64));
    cfg.channels = static_cast<int>(kv_int(kv, "ch", 8));
    cfg.layers = static_cast<int>(kv_int(kv, "layers", 1));
    if (auto it = kv.find("pool"); it != kv.end()) {
      if (it->second == "gap") cfg.gap = true;
      else if (it->second == "none") cfg.gap = false;
      else throw ConfigError("pool must be gap|none");
    }
    if (auto it = kv.find("pad"); it != kv.end()) {
      if (it->second == "circular") cfg.padding = Padding::kCircular;
      else if (it->second == "zero") cfg.padding = Padding::kZero;
      else throw ConfigError("pad must be circular|zero");
    }
    if (auto it = kv.find("act"); it != kv.end()) {
      if (it->second == "relu") cfg.activation = Activation::kRelu;
      else if (it->second == "tanh") cfg.activation = Activation::kTanh;
      else if (it->second == "none") cfg.activation = Activation::kNone;
      else throw ConfigError("act must be relu|tanh|none");
    }
    return std::make_unique<SeededConvEmbedder>(cfg);
  }
  if (name == "patch") {
    PatchPoolConfig cfg;
    cfg.seed = static_cast<std::uint64_t>(kv_int(kv, "seed", 1));
    cfg.input_size = static_cast<int>(kv_int(kv, "size", 64));
    cfg.patch = static_cast<int>(kv_int(kv, "patch", 8));
    cfg.dim = static_cast<int>(kv_int(kv, "dim", 64));
    return std::make_unique<SeededPatchPoolEmbedder>(cfg);
  }
  if (name == "hist") {
    return std::make_unique<HistogramEmbedder>(
        static_cast<int>(kv_int(kv, "bins", 32)));
  }
  if (name == "pixel") {
    return std::make_unique<PixelEmbedder>(
        static_cast<int>(kv_int(kv, "size", 0)));
  }
  if (name == "noise") {
    return std::make_unique<HashNoiseEmbedder>(
        static_cast<std::uint64_t>(kv_int(kv, "seed", 7)),
        static_cast<int>(kv_int(kv, "dim", 128)));
  }
  throw ConfigError("unknown provider '" + name + "'");
}

}  // namespace fovea
