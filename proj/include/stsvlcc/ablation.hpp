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

// Modality ablations: each perturbation is a pure transform of the evaluation
// inputs, and the deltas are base accuracy minus perturbed accuracy.

#ifndef STSVLCC_ABLATION_HPP_
#define STSVLCC_ABLATION_HPP_

#include <optional>
#include <string>
#include <vector>

#include "stsvlcc/qa_eval.hpp"

namespace stsvlcc {

inline constexpr const char *kGibberishWord = "gibberish";

enum class PerturbationKind {
  kNone,
  kSubstituteVideo,      // "defaced": frame embeddings from another store
  kBlankVideo,           // frame embeddings zeroed before fusion
  kGibberishTranscript,  // every transcript surface becomes "gibberish"
};

std::string PerturbationName(PerturbationKind kind);

struct Perturbation {
  PerturbationKind kind = PerturbationKind::kNone;
  const EmbeddingStore *substitute_store = nullptr;  // kSubstituteVideo only
};

struct PerturbedInputs {
  EvalInputs inputs;
  // Frame keys absent from the substitute store; their instances get
  // skipped downstream. The CLI logs each one as MissingSubstituteKey.
  std::vector<std::string> missing_substitute_keys;
};

/// `provider` re-embeds the replacement transcript for kGibberishTranscript
/// and may be null for the other kinds.
PerturbedInputs ApplyPerturbation(const Perturbation &perturbation,
                                  const EvalInputs &inputs,
                                  const EmbeddingProvider *provider);

enum class AccuracyUnit { kAuto, kFraction, kPercent };

struct AblationReport {
  AccuracyUnit unit = AccuracyUnit::kFraction;
  double acc_base = 0.0;
  std::optional<double> acc_defaced;
  double acc_blank = 0.0;
  double acc_gibberish = 0.0;
  std::optional<double> delta1;
  double delta2 = 0.0;
  double delta3 = 0.0;
};

/// kAuto infers percent when every value exceeds 1 and fraction when none
/// does; a mix is kUnitMismatch, as is a value out of range for an explicit
/// unit.
AblationReport DeltaReport(double base, std::optional<double> defaced,
                           double blank, double gibberish,
                           AccuracyUnit unit = AccuracyUnit::kAuto);

struct AblationRun {
  AblationReport report;
  EvalReport base;
  std::optional<EvalReport> defaced;
  EvalReport blank;
  EvalReport gibberish;
  std::vector<std::string> missing_substitute_keys;
};

AblationRun RunAblation(std::span<const QAInstance> instances,
                        const EvalInputs &inputs,
                        const AdapterParams<double> &adapter,
                        const Scorer &scorer, const EvalOptions &options,
                        const EmbeddingProvider &provider,
                        const EmbeddingStore *substitute_store = nullptr);

}  // namespace stsvlcc

#endif  // STSVLCC_ABLATION_HPP_
