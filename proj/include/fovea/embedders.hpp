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

#ifndef FOVEA_EMBEDDERS_HPP_
#define FOVEA_EMBEDDERS_HPP_

#include <cstdint>
#include <map>
#include <memory>
#include <string>
#include <vector>

#include "fovea/convnet.hpp"
#include "fovea/image.hpp"
#include "fovea/rng.hpp"

namespace fovea {

struct ProviderInfo {
  std::string variant;
  std::uint64_t seed = 0;
  int dim = 0;
  bool deterministic = true;
  bool has_classifier = false;
  std::string description;
};

/// An embedding function over images. Providers are immutable after
/// construction; embed() is safe to call concurrently.
class EmbeddingProvider {
 public:
  virtual ~EmbeddingProvider() = default;
  virtual ProviderInfo info() const = 0;
  virtual int dim() const { return info().dim; }
  /// Fixed expected input size (callers resize first); 0 = any size.
  virtual int input_size() const { return 0; }
  virtual std::vector<float> embed(const Image& img) const = 0;
};

/// Untrained conv stack with seeded Gaussian weights. Circular padding makes
/// translation equivariance exact; the zero-padding variant shows only the
/// approximate version. `pool=gap` collapses the spatial map, making the
/// embedding exactly invariant to cyclic shifts.
struct ConvEmbedderConfig {
  std::uint64_t seed = 1;
  int input_size = 64;
  int channels = 8;
  int layers = 1;
  bool gap = false;
  Padding padding = Padding::kCircular;
  Activation activation = Activation::kRelu;
};

class SeededConvEmbedder : public EmbeddingProvider {
 public:
  explicit SeededConvEmbedder(const ConvEmbedderConfig& cfg);
  ProviderInfo info() const override;
  int input_size() const override { return cfg_.input_size; }
  std::vector<float> embed(const Image& img) const override;

  /// Final feature map before pooling/flattening (used by tests to check
  /// the permutation structure of cyclic shifts).
  Tensor features(const Image& img) const;
  const ConvEmbedderConfig& config() const { return cfg_; }

 private:
  ConvEmbedderConfig cfg_;
  std::vector<ConvLayer> convs_;
};

/// Non-overlapping PxP patches through a shared seeded linear map, averaged
/// over patches. Exactly invariant to patch-aligned cyclic shifts and not
/// to sub-patch shifts.
struct PatchPoolConfig {
  std::uint64_t seed = 1;
  int input_size = 64;
  int patch = 8;
  int dim = 64;
};

class SeededPatchPoolEmbedder : public EmbeddingProvider {
 public:
  explicit SeededPatchPoolEmbedder(const PatchPoolConfig& cfg);
  ProviderInfo info() const override;
  int input_size() const override { return cfg_.input_size; }
  std::vector<float> embed(const Image& img) const override;

 private:
  PatchPoolConfig cfg_;
  std::vector<double> weights_;  // dim x (3*patch*patch)
};

/// Global per-channel intensity histogram; position-free, so invariant to
/// every permutation of pixel locations.
class HistogramEmbedder : public EmbeddingProvider {
 public:
  explicit HistogramEmbedder(int bins = 32) : bins_(bins) {}
  ProviderInfo info() const override;
  std::vector<float> embed(const Image& img) const override;

 private:
  int bins_;
};

/// Identity embedding: the image itself, flattened (optionally after a
/// resize). The most transparent probe of the metrics.
class PixelEmbedder : public EmbeddingProvider {
 public:
  explicit PixelEmbedder(int size = 0) : size_(size) {}
  ProviderInfo info() const override;
  int input_size() const override { return size_; }
  std::vector<float> embed(const Image& img) const override;

 private:
  int size_;  // 0 = use input dims as-is (dim then depends on the input)
};

/// Deterministic noise: hashes the pixel contents into a seed and emits a
/// Gaussian vector. Same image -> same vector; different images ->
/// independent vectors. A null model for the metrics.
class HashNoiseEmbedder : public EmbeddingProvider {
 public:
  HashNoiseEmbedder(std::uint64_t seed, int dim) : seed_(seed), dim_(dim) {}
  ProviderInfo info() const override;
  std::vector<float> embed(const Image& img) const override;

 private:
  std::uint64_t seed_;
  int dim_;
};

/// Embeddings computed elsewhere, keyed by sample id. Not callable on
/// images; use lookup(). Transformed samples use the id convention
/// "<id>#<transform-tag>".
class FileStoreProvider : public EmbeddingProvider {
 public:
  ProviderInfo info() const override;
  std::vector<float> embed(const Image& img) const override;  // CapabilityError
  const std::vector<float>& lookup(const std::string& id) const;
  bool contains(const std::string& id) const;
  std::size_t count() const { return rows_.size(); }

  friend FileStoreProvider load_file_store(const std::string& path);
  friend void save_file_store(const FileStoreProvider& store,
                              const std::string& path, bool binary);
  void insert(const std::string& id, std::vector<float> values);

 private:
  int dim_ = 0;
  std::string source_;
  std::map<std::string, std::vector<float>> rows_;
};

/// Reads either the text format
///   dim=<d> count=<n>\n
///   id<TAB>v1,v2,...\n
/// or the binary format (magic "FEB1", little-endian u32 dim, u64 count,
/// then per row: u32 id length, id bytes, dim f32 values).
FileStoreProvider load_file_store(const std::string& path);
void save_file_store(const FileStoreProvider& store, const std::string& path,
                     bool binary);

/// Linear classification head over a provider's embedding. The head is the
/// only mutable part; fit() runs plain SGD on softmax cross-entropy.
class LinearClassifier {
 public:
  LinearClassifier(std::shared_ptr<const EmbeddingProvider> provider,
                   int n_classes, std::uint64_t seed);

  std::vector<double> classify(const Image& img) const;
  int predict(const Image& img) const;
  void fit(const std::vector<Image>& images, const std::vector<int>& labels,
           int epochs, double lr, std::uint64_t seed);
  int n_classes() const { return head_.out_dim; }
  const EmbeddingProvider& provider() const { return *provider_; }

 private:
  std::shared_ptr<const EmbeddingProvider> provider_;
  LinearLayer head_;
};

/// Builds a provider from its CLI spec, e.g.
///   conv:seed=1,size=64,ch=8,pool=gap,pad=circular,act=relu
///   patch:seed=1,size=64,patch=8,dim=64
///   hist:bins=32   pixel:size=32   noise:seed=7,dim=128   file:PATH
std::unique_ptr<EmbeddingProvider> make_provider(const std::string& spec);

}  // namespace fovea

#endif  // FOVEA_EMBEDDERS_HPP_
