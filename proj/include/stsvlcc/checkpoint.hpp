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

// Checkpoints are a one-line JSON header terminated by '\n', followed by raw
// little-endian f64 values.
//   adapter: {"kind":"adapter","d","alpha","format_version":1} W (row-major), b
//   scorer:  {"kind":"toy_scorer","d","format_version":1}      w (4d), b0

#ifndef STSVLCC_CHECKPOINT_HPP_
#define STSVLCC_CHECKPOINT_HPP_

#include <iosfwd>
#include <string>

#include "stsvlcc/fusion.hpp"
#include "stsvlcc/qa_eval.hpp"

namespace stsvlcc {

inline constexpr int kCheckpointFormatVersion = 1;

struct AdapterCheckpoint {
  AdapterParams<double> params;
  double alpha = 0.5;
};

void WriteAdapterCheckpoint(const AdapterCheckpoint &ckpt, std::ostream &out);
AdapterCheckpoint ReadAdapterCheckpoint(std::istream &in);

void WriteScorerCheckpoint(const ToyScorerParams &params, std::ostream &out);
ToyScorerParams ReadScorerCheckpoint(std::istream &in);

void SaveAdapterCheckpoint(const AdapterCheckpoint &ckpt, const std::string &path);
AdapterCheckpoint LoadAdapterCheckpoint(const std::string &path);
void SaveScorerCheckpoint(const ToyScorerParams &params, const std::string &path);
ToyScorerParams LoadScorerCheckpoint(const std::string &path);

}  // namespace stsvlcc

#endif  // STSVLCC_CHECKPOINT_HPP_
