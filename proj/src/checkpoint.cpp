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

#include "stsvlcc/checkpoint.hpp"

#include <fstream>
#include <istream>
#include <ostream>

#include <nlohmann/json.hpp>

namespace stsvlcc {

namespace {

void WriteDoubles(std::ostream &out, const double *data, std::size_t count) {
  out.write(reinterpret_cast<const char *>(data),
            static_cast<std::streamsize>(sizeof(double) * count));
}

void ReadDoubles(std::istream &in, double *data, std::size_t count) {
  const auto bytes = static_cast<std::streamsize>(sizeof(double) * count);
  in.read(reinterpret_cast<char *>(data), bytes);
  if (in.gcount() != bytes)
    throw Error(ErrorCode::kTruncatedRecord, "checkpoint payload is truncated");
}

nlohmann::json ReadHeader(std::istream &in, const char *kind) {
  std::string line;
  if (!std::getline(in, line))
    throw Error(ErrorCode::kBadMagic, "checkpoint has no header line");
  nlohmann::json header = nlohmann::json::parse(line, nullptr, false);
  if (header.is_discarded() || !header.is_object() ||
      header.value("kind", std::string()) != kind)
    throw Error(ErrorCode::kBadMagic, std::string("not a ") + kind + " checkpoint");
  auto version = header.find("format_version");
  if (version == header.end() || !version->is_number_integer() ||
      version->get<long long>() != kCheckpointFormatVersion)
    throw Error(ErrorCode::kUnsupportedVersion, "unsupported checkpoint version");
  auto d = header.find("d");
  if (d == header.end() || !d->is_number_integer() || d->get<long long>() < 1 ||
      d->get<long long>() > (1 << 16))
    throw Error(ErrorCode::kDimMismatch, "checkpoint has invalid d");
  auto alpha = header.find("alpha");
  if (alpha != header.end() && !alpha->is_number())
    throw Error(ErrorCode::kBadMagic, "checkpoint alpha is not a number");
  return header;
}

std::ofstream OpenOut(const std::string &path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorCode::kIoError, "cannot open '" + path + "' for writing");
  return out;
}

std::ifstream OpenIn(const std::string &path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::kIoError, "cannot open checkpoint '" + path + "'");
  return in;
}

}  // namespace

void WriteAdapterCheckpoint(const AdapterCheckpoint &ckpt, std::ostream &out) {
  ValidateAdapter(ckpt.params);
  nlohmann::json header = {{"kind", "adapter"},
                           {"d", ckpt.params.dim()},
                           {"alpha", ckpt.alpha},
                           {"format_version", kCheckpointFormatVersion}};
  out << header.dump() << '\n';
  using RowMajor = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
  RowMajor w = ckpt.params.weight;
  WriteDoubles(out, w.data(), static_cast<std::size_t>(w.size()));
  WriteDoubles(out, ckpt.params.bias.data(), static_cast<std::size_t>(ckpt.params.bias.size()));
  if (!out) throw Error(ErrorCode::kSinkFailure, "checkpoint write failed");
}

AdapterCheckpoint ReadAdapterCheckpoint(std::istream &in) {
  nlohmann::json header = ReadHeader(in, "adapter");
  const int d = header["d"].get<int>();
  AdapterCheckpoint ckpt;
  ckpt.alpha = header.value("alpha", 0.5);
  Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor> w(d, d);
  ReadDoubles(in, w.data(), static_cast<std::size_t>(w.size()));
  ckpt.params.weight = w;
  ckpt.params.bias.resize(d);
  ReadDoubles(in, ckpt.params.bias.data(), static_cast<std::size_t>(d));
  ValidateAdapter(ckpt.params);
  return ckpt;
}

void WriteScorerCheckpoint(const ToyScorerParams &params, std::ostream &out) {
  nlohmann::json header = {{"kind", "toy_scorer"},
                           {"d", params.dim()},
                           {"format_version", kCheckpointFormatVersion}};
  out << header.dump() << '\n';
  WriteDoubles(out, params.weight.data(), static_cast<std::size_t>(params.weight.size()));
  WriteDoubles(out, &params.bias, 1);
  if (!out) throw Error(ErrorCode::kSinkFailure, "checkpoint write failed");
}

ToyScorerParams ReadScorerCheckpoint(std::istream &in) {
  nlohmann::json header = ReadHeader(in, "toy_scorer");
  const int d = header["d"].get<int>();
  ToyScorerParams params = ToyScorerParams::Zero(d);
  ReadDoubles(in, params.weight.data(), static_cast<std::size_t>(4 * d));
  ReadDoubles(in, &params.bias, 1);
  if (!params.weight.allFinite() || !std::isfinite(params.bias))
    throw Error(ErrorCode::kInvalidArgument, "scorer checkpoint has non-finite values");
  return params;
}

void SaveAdapterCheckpoint(const AdapterCheckpoint &ckpt, const std::string &path) {
  auto out = OpenOut(path);
  WriteAdapterCheckpoint(ckpt, out);
}

AdapterCheckpoint LoadAdapterCheckpoint(const std::string &path) {
  auto in = OpenIn(path);
  return ReadAdapterCheckpoint(in);
}

void SaveScorerCheckpoint(const ToyScorerParams &params, const std::string &path) {
  auto out = OpenOut(path);
  WriteScorerCheckpoint(params, out);
}

ToyScorerParams LoadScorerCheckpoint(const std::string &path) {
  auto in = OpenIn(path);
  return ReadScorerCheckpoint(in);
}

}  // namespace stsvlcc
