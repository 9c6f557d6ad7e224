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

#include "stsvlcc/embeddings.hpp"

#include <bit>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <istream>
#include <limits>
#include <ostream>

#include "stsvlcc/corpus_io.hpp"

namespace stsvlcc {

static_assert(std::endian::native == std::endian::little,
              "STVE I/O assumes a little-endian host");

EmbeddingStore::EmbeddingStore(int dim) : dim_(dim) {
  if (dim < 1) throw Error(ErrorCode::kInvalidArgument, "dim must be >= 1");
}

const EmbeddingVector *EmbeddingStore::find(const std::string &key) const {
  auto it = entries_.find(key);
  return it == entries_.end() ? nullptr : &it->second;
}

void EmbeddingStore::insert(EmbeddingVector vec) {
  if (vec.values.size() != dim_)
    throw Error(ErrorCode::kDimMismatch,
                "record '" + vec.key + "' has dim " +
                    std::to_string(vec.values.size()) + ", store has " +
                    std::to_string(dim_));
  if (!vec.values.allFinite())
    throw Error(ErrorCode::kInvalidArgument,
                "record '" + vec.key + "' has non-finite values");
  if (vec.key.size() > std::numeric_limits<std::uint16_t>::max())
    throw Error(ErrorCode::kInvalidArgument, "key longer than 65535 bytes");
  std::string key = vec.key;
  entries_.insert_or_assign(std::move(key), std::move(vec));
}

namespace {

template <typename T>
void Put(std::ostream &out, T value) {
  out.write(reinterpret_cast<const char *>(&value), sizeof(T));
}

template <typename T>
bool Get(std::istream &in, T *value) {
  in.read(reinterpret_cast<char *>(value), sizeof(T));
  return in.gcount() == static_cast<std::streamsize>(sizeof(T));
}

}  // namespace

std::uint64_t WriteStore(const EmbeddingStore &store, std::ostream &sink) {
  std::uint64_t bytes = kStveHeaderBytes;
  sink.write("STVE", 4);
  Put<std::uint16_t>(sink, kStveVersion);
  Put<std::uint16_t>(sink, 0);
  Put<std::uint32_t>(sink, static_cast<std::uint32_t>(store.dim()));
  Put<std::uint64_t>(sink, store.size());
  for (const auto &[key, vec] : store.entries()) {
    Put<std::uint16_t>(sink, static_cast<std::uint16_t>(key.size()));
    sink.write(key.data(), static_cast<std::streamsize>(key.size()));
    Put<std::uint8_t>(sink, static_cast<std::uint8_t>(vec.modality));
    sink.write(reinterpret_cast<const char *>(vec.values.data()),
               static_cast<std::streamsize>(sizeof(float) * vec.values.size()));
    bytes += 2 + key.size() + 1 + sizeof(float) * vec.values.size();
  }
  sink.flush();
  if (!sink) throw Error(ErrorCode::kSinkFailure, "write to sink failed");
  return bytes;
}

EmbeddingStore ReadStore(std::istream &source) {
  char magic[4];
  source.read(magic, 4);
  if (source.gcount() != 4 || std::memcmp(magic, "STVE", 4) != 0)
    throw Error(ErrorCode::kBadMagic, "not an STVE store");
  std::uint16_t version = 0, flags = 0;
  std::uint32_t dim = 0;
  std::uint64_t count = 0;
  if (!Get(source, &version))
    throw Error(ErrorCode::kTruncatedRecord, "truncated header");
  if (version != kStveVersion)
    throw Error(ErrorCode::kUnsupportedVersion,
                "STVE version " + std::to_string(version));
  if (!Get(source, &flags) || !Get(source, &dim) || !Get(source, &count))
    throw Error(ErrorCode::kTruncatedRecord, "truncated header");
  if (dim == 0 || dim > (1u << 24))
    throw Error(ErrorCode::kDimMismatch, "implausible dim " + std::to_string(dim));

  EmbeddingStore store(static_cast<int>(dim));
  std::string prev_key;
  for (std::uint64_t r = 0; r < count; ++r) {
    auto truncated = [&] {
      return Error(ErrorCode::kTruncatedRecord,
                   "record " + std::to_string(r) + " of " +
                       std::to_string(count) + " is truncated");
    };
    std::uint16_t key_len = 0;
    if (!Get(source, &key_len)) throw truncated();
    EmbeddingVector vec;
    vec.key.resize(key_len);
    source.read(vec.key.data(), key_len);
    if (source.gcount() != key_len) throw truncated();
    std::uint8_t modality = 0;
    if (!Get(source, &modality)) throw truncated();
    if (modality > 1)
      throw Error(ErrorCode::kTruncatedRecord,
                  "record '" + vec.key + "' has unknown modality " +
                      std::to_string(modality));
    vec.modality = static_cast<Modality>(modality);
    vec.values.resize(dim);
    const auto payload = static_cast<std::streamsize>(sizeof(float) * dim);
    source.read(reinterpret_cast<char *>(vec.values.data()), payload);
    if (source.gcount() != payload) throw truncated();
    if (r > 0 && !(prev_key < vec.key))
      throw Error(ErrorCode::kInvalidArgument,
                  "records not sorted by unique key at '" + vec.key + "'");
    prev_key = vec.key;
    store.insert(std::move(vec));
  }
  return store;
}

void WriteStoreFile(const EmbeddingStore &store, const std::string &path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorCode::kIoError, "cannot open '" + path + "' for writing");
  WriteStore(store, out);
}

EmbeddingStore ReadStoreFile(const std::string &path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::kIoError, "cannot open store '" + path + "'");
  return ReadStore(in);
}

std::int64_t TimestampMs(double seconds) {
  return static_cast<std::int64_t>(std::llround(seconds * 1000.0));
}

std::string FrameKey(const std::string &video_id, double timestamp) {
  return video_id + ":frame:" + std::to_string(TimestampMs(timestamp));
}

std::string TurnTextKey(const std::string &video_id, int turn) {
  return video_id + ":text:k=" + std::to_string(turn);
}

std::string FallbackTextKey(const std::string &video_id, double timestamp) {
  return video_id + ":text:fallback:" + std::to_string(TimestampMs(timestamp));
}

namespace {

std::uint64_t Fnv1a(std::string_view bytes, std::uint64_t h) {
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

std::uint64_t SplitMix64(std::uint64_t *state) {
  std::uint64_t z = (*state += 0x9e3779b97f4a7c15ULL);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

// Uniform in (0, 1).
double UnitOpen(std::uint64_t *state) {
  return (static_cast<double>(SplitMix64(state) >> 11) + 0.5) * 0x1.0p-53;
}

std::string HexDigest(std::uint64_t h) {
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

}  // namespace

SyntheticProvider::SyntheticProvider(std::uint64_t seed, int dim,
                                     std::vector<Injection> injections,
                                     bool normalize)
    : seed_(seed), dim_(dim), injections_(std::move(injections)),
      normalize_(normalize) {
  if (dim < 1) throw Error(ErrorCode::kInvalidArgument, "dim must be >= 1");
  for (Injection &inj : injections_) {
    if (inj.direction.size() != dim)
      throw Error(ErrorCode::kDimMismatch, "injection direction dim mismatch");
    float norm = inj.direction.norm();
    if (norm > 0.0f) inj.direction /= norm;
  }
}

Eigen::VectorXf SyntheticProvider::HashVector(const std::string &tag,
                                              const std::string &payload) const {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  unsigned char seed_bytes[8];
  std::memcpy(seed_bytes, &seed_, 8);
  h = Fnv1a(std::string_view(reinterpret_cast<char *>(seed_bytes), 8), h);
  h = Fnv1a(tag, h);
  h = Fnv1a(std::string_view("\x1f", 1), h);
  h = Fnv1a(payload, h);

  // Box-Muller Gaussian draws, accumulated at double precision before
  // narrowing.
  Eigen::VectorXd v(dim_);
  std::uint64_t state = h;
  for (int i = 0; i < dim_; i += 2) {
    double r = std::sqrt(-2.0 * std::log(UnitOpen(&state)));
    double theta = 2.0 * M_PI * UnitOpen(&state);
    v[i] = r * std::cos(theta);
    if (i + 1 < dim_) v[i + 1] = r * std::sin(theta);
  }
  if (normalize_) v.normalize();
  return v.cast<float>();
}

EmbeddingVector SyntheticProvider::embed_text(const std::string &text) const {
  std::string normalized = CollapseWhitespace(text);
  EmbeddingVector out;
  out.key = "q:" + HexDigest(Fnv1a(normalized, 0xcbf29ce484222325ULL));
  out.modality = Modality::kText;
  out.values = HashVector("text", normalized);
  return out;
}

EmbeddingVector SyntheticProvider::embed_frame(const std::string &video_id,
                                               double timestamp) const {
  const std::int64_t ms = TimestampMs(timestamp);
  EmbeddingVector out;
  out.key = FrameKey(video_id, timestamp);
  out.modality = Modality::kVision;
  Eigen::VectorXf base =
      HashVector("frame", video_id + "@" + std::to_string(ms));
  for (const Injection &inj : injections_) {
    const double t = static_cast<double>(ms) / 1000.0;
    if (inj.video_id != video_id || t < inj.start || t > inj.end) continue;
    base = (1.0f - inj.weight) * base + inj.weight * inj.direction;
    if (!normalize_) continue;
    float norm = base.norm();
    if (norm > 0.0f) base /= norm;
  }
  out.values = std::move(base);
  return out;
}

std::unique_ptr<EmbeddingProvider> MakeSyntheticProvider(
    std::uint64_t seed, int dim, std::vector<Injection> injections,
    bool normalize) {
  return std::make_unique<SyntheticProvider>(seed, dim, std::move(injections),
                                             normalize);
}

}  // namespace stsvlcc
