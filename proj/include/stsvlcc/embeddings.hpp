// Copyright (c) 2026 The stsvlcc Authors
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

#ifndef STSVLCC_EMBEDDINGS_HPP_
#define STSVLCC_EMBEDDINGS_HPP_

#include <cstdint>
#include <iosfwd>
#include <map>
#include <memory>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "stsvlcc/error.hpp"

namespace stsvlcc {

inline constexpr int kDefaultEmbeddingDim = 512;

enum class Modality : std::uint8_t { kVision = 0, kText = 1 };

struct EmbeddingVector {
  std::string key;
  Modality modality = Modality::kVision;
  Eigen::VectorXf values;

  bool operator==(const EmbeddingVector &other) const {
    return key == other.key && modality == other.modality &&
           values.size() == other.values.size() &&
           (values.array() == other.values.array()).all();
  }
};

// Keyed vectors of one shared dimension. Immutable once loaded; safe to
// share across threads for reading.
class EmbeddingStore {
 public:
  explicit EmbeddingStore(int dim = kDefaultEmbeddingDim);

  int dim() const { return dim_; }
  std::size_t size() const { return entries_.size(); }
  bool contains(const std::string &key) const {
    return entries_.count(key) != 0;
  }
  const EmbeddingVector *find(const std::string &key) const;

  // Throws kDimMismatch or kInvalidArgument (non-finite values, key too
  // long). Replaces an existing record with the same key.
  void insert(EmbeddingVector vec);

  // Sorted by key.
  const std::map<std::string, EmbeddingVector> &entries() const {
    return entries_;
  }

  bool operator==(const EmbeddingStore &other) const {
    return dim_ == other.dim_ && entries_ == other.entries_;
  }

 private:
  int dim_;
  std::map<std::string, EmbeddingVector> entries_;
};

// STVE layout, little-endian throughout:
//   "STVE" | u16 version=1 | u16 flags=0 | u32 dim | u64 count |
//   count x { u16 key_len | key bytes | u8 modality | dim x f32 }
// Records are sorted by key.
inline constexpr std::uint16_t kStveVersion = 1;
inline constexpr std::size_t kStveHeaderBytes = 20;

std::uint64_t WriteStore(const EmbeddingStore &store, std::ostream &sink);
EmbeddingStore ReadStore(std::istream &source);

// Std-file convenience wrappers; throw kIoError naming the path.
void WriteStoreFile(const EmbeddingStore &store, const std::string &path);
EmbeddingStore ReadStoreFile(const std::string &path);

// Join keys shared with sample plans and the exporter.
std::int64_t TimestampMs(double seconds);
std::string FrameKey(const std::string &video_id, double timestamp);
std::string TurnTextKey(const std::string &video_id, int turn);
std::string FallbackTextKey(const std::string &video_id, double timestamp);

// Stand-in for the frozen image-text encoder. Implementations must be
// deterministic and callable concurrently.
class EmbeddingProvider {
 public:
  virtual ~EmbeddingProvider() = default;
  virtual int dim() const = 0;
  virtual EmbeddingVector embed_text(const std::string &text) const = 0;
  virtual EmbeddingVector embed_frame(const std::string &video_id,
                                      double timestamp) const = 0;
};

// Planted signal: frames of `video_id` whose timestamp falls in
// [start, end] become (1 - weight) * base + weight * direction,
// renormalized when the provider normalizes.
struct Injection {
  std::string video_id;
  double start = 0.0;
  double end = 0.0;
  Eigen::VectorXf direction;
  float weight = 0.5f;
};

// With `normalize` off, vectors keep the raw Gaussian draw and planted
// mixtures are not re-projected to the unit sphere.
class SyntheticProvider final : public EmbeddingProvider {
 public:
  SyntheticProvider(std::uint64_t seed, int dim,
                    std::vector<Injection> injections = {},
                    bool normalize = true);

  int dim() const override { return dim_; }
  EmbeddingVector embed_text(const std::string &text) const override;
  EmbeddingVector embed_frame(const std::string &video_id,
                              double timestamp) const override;

  bool normalizes() const { return normalize_; }

  // Pseudorandom vector determined by (seed, tag, payload); unit norm when
  // normalizing.
  Eigen::VectorXf HashVector(const std::string &tag,
                             const std::string &payload) const;

 private:
  std::uint64_t seed_;
  int dim_;
  std::vector<Injection> injections_;
  bool normalize_;
};

std::unique_ptr<EmbeddingProvider> MakeSyntheticProvider(
    std::uint64_t seed, int dim, std::vector<Injection> injections = {},
    bool normalize = true);

}  // namespace stsvlcc

#endif  // STSVLCC_EMBEDDINGS_HPP_
