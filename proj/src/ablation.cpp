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

#include "stsvlcc/ablation.hpp"

#include <cmath>

namespace stsvlcc {

std::string PerturbationName(PerturbationKind kind) {
  switch (kind) {
    case PerturbationKind::kNone: return "none";
    case PerturbationKind::kSubstituteVideo: return "substitute_video";
    case PerturbationKind::kBlankVideo: return "blank_video";
    case PerturbationKind::kGibberishTranscript: return "gibberish_transcript";
  }
  return "unknown";
}

PerturbedInputs ApplyPerturbation(const Perturbation &perturbation,
                                  const EvalInputs &inputs,
                                  const EmbeddingProvider *provider) {
  PerturbedInputs out{inputs, {}};
  switch (perturbation.kind) {
    case PerturbationKind::kNone:
      break;

    case PerturbationKind::kBlankVideo: {
      EmbeddingStore store(inputs.store.dim());
      for (const auto &[key, vec] : inputs.store.entries()) {
        EmbeddingVector copy = vec;
        if (copy.modality == Modality::kVision) copy.values.setZero();
        store.insert(std::move(copy));
      }
      out.inputs.store = std::move(store);
      break;
    }

    case PerturbationKind::kSubstituteVideo: {
      const EmbeddingStore *sub = perturbation.substitute_store;
      if (sub == nullptr)
        throw Error(ErrorCode::kInvalidArgument,
                    "substitute_video needs a substitute store");
      if (sub->dim() != inputs.store.dim())
        throw Error(ErrorCode::kDimMismatch, "substitute store dim differs");
      EmbeddingStore store(inputs.store.dim());
      for (const auto &[key, vec] : inputs.store.entries()) {
        if (vec.modality != Modality::kVision) {
          store.insert(vec);
          continue;
        }
        const EmbeddingVector *replacement = sub->find(key);
        if (replacement == nullptr) {
          out.missing_substitute_keys.push_back(key);
          continue;
        }
        EmbeddingVector copy = *replacement;
        copy.modality = Modality::kVision;
        store.insert(std::move(copy));
      }
      out.inputs.store = std::move(store);
      break;
    }

    case PerturbationKind::kGibberishTranscript: {
      if (provider == nullptr)
        throw Error(ErrorCode::kInvalidArgument,
                    "gibberish_transcript needs a provider to re-embed text");
      for (auto &[video, plan] : out.inputs.plans)
        for (FrameSample &frame : plan.frames) frame.transcript = kGibberishWord;
      for (auto &[video, text] : out.inputs.transcripts) text = kGibberishWord;
      for (const auto &[video, plan] : out.inputs.plans)
        out.inputs.transcripts[video] = kGibberishWord;

      Eigen::VectorXf gibberish = provider->embed_text(kGibberishWord).values;
      EmbeddingStore store(inputs.store.dim());
      for (const auto &[key, vec] : inputs.store.entries()) {
        EmbeddingVector copy = vec;
        if (copy.modality == Modality::kText) copy.values = gibberish;
        store.insert(std::move(copy));
      }
      out.inputs.store = std::move(store);
      break;
    }
  }
  return out;
}

AblationReport DeltaReport(double base, std::optional<double> defaced,
                           double blank, double gibberish, AccuracyUnit unit) {
  std::vector<double> values = {base, blank, gibberish};
  if (defaced) values.push_back(*defaced);
  for (double v : values)
    if (!std::isfinite(v) || v < 0.0 || v > 100.0)
      throw Error(ErrorCode::kInvalidArgument,
                  "accuracy " + std::to_string(v) + " outside [0, 100]");

  std::size_t above_one = 0;
  for (double v : values) above_one += v > 1.0 ? 1 : 0;
  if (unit == AccuracyUnit::kAuto) {
    if (above_one != 0 && above_one != values.size())
      throw Error(ErrorCode::kUnitMismatch,
                  "accuracies mix fractions and percentages");
    unit = above_one == 0 ? AccuracyUnit::kFraction : AccuracyUnit::kPercent;
  } else if (unit == AccuracyUnit::kFraction && above_one != 0) {
    throw Error(ErrorCode::kUnitMismatch, "fraction accuracies must lie in [0, 1]");
  }

  AblationReport r;
  r.unit = unit;
  r.acc_base = base;
  r.acc_defaced = defaced;
  r.acc_blank = blank;
  r.acc_gibberish = gibberish;
  if (defaced) r.delta1 = base - *defaced;
  r.delta2 = base - blank;
  r.delta3 = base - gibberish;
  return r;
}

AblationRun RunAblation(std::span<const QAInstance> instances,
                        const EvalInputs &inputs,
                        const AdapterParams<double> &adapter,
                        const Scorer &scorer, const EvalOptions &options,
                        const EmbeddingProvider &provider,
                        const EmbeddingStore *substitute_store) {
  auto run = [&](PerturbationKind kind, std::vector<std::string> *missing) {
    PerturbedInputs p =
        ApplyPerturbation({kind, substitute_store}, inputs, &provider);
    if (missing != nullptr) *missing = std::move(p.missing_substitute_keys);
    return Evaluate(instances, p.inputs, adapter, scorer, options);
  };

  AblationRun out;
  out.base = run(PerturbationKind::kNone, nullptr);
  if (substitute_store != nullptr)
    out.defaced = run(PerturbationKind::kSubstituteVideo, &out.missing_substitute_keys);
  out.blank = run(PerturbationKind::kBlankVideo, nullptr);
  out.gibberish = run(PerturbationKind::kGibberishTranscript, nullptr);
  out.report = DeltaReport(
      out.base.accuracy,
      out.defaced ? std::optional<double>(out.defaced->accuracy) : std::nullopt,
      out.blank.accuracy, out.gibberish.accuracy, AccuracyUnit::kFraction);
  return out;
}

}  // namespace stsvlcc
