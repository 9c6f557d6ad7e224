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

// Joint training of the fusion adapter and the toy scorer on yes/no
// answer-mask targets (gold answer = yes, the other three = no).

#ifndef STSVLCC_TRAINING_HPP_
#define STSVLCC_TRAINING_HPP_

#include <array>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "stsvlcc/fusion.hpp"
#include "stsvlcc/gradient_check.hpp"
#include "stsvlcc/qa_eval.hpp"

namespace stsvlcc {

// Per-instance quantities the toy scorer reads. Since the adapter is affine,
// the mean adapter output over frames equals the adapter applied to the mean
// fused input, so one d-vector per instance is enough.
struct TrainingExample {
  Eigen::VectorXd fused_input_mean;
  Eigen::VectorXd question;
  std::array<Eigen::VectorXd, kAnswersPerQuestion> answers;
  int gold = 0;
};

struct JointParams {
  AdapterParams<double> adapter;
  ToyScorerParams scorer;

  int dim() const { return adapter.dim(); }
  // Layout: W (column-major), b, w, b0.
  Eigen::VectorXd Flatten() const;
  static JointParams Unflatten(const Eigen::VectorXd &flat, int dim);
  static std::size_t FlatSize(int dim);
};

struct JointGradients {
  AdapterGradients<double> adapter;
  Eigen::VectorXd scorer_weight;
  double scorer_bias = 0.0;

  Eigen::VectorXd Flatten() const;
};

/// Mean binary cross-entropy over every (instance, answer) pair, computed
/// from logits. Fills `grad` when non-null.
double JointLoss(const JointParams &params,
                 std::span<const TrainingExample> examples,
                 JointGradients *grad = nullptr);

/// JointLoss over flattened parameters, for GradientCheck.
DifferentiableLoss MakeJointLoss(std::vector<TrainingExample> examples, int dim);

struct ExampleBuildResult {
  std::vector<TrainingExample> examples;
  std::vector<std::string> skipped;  // one reason per skipped instance
};

ExampleBuildResult BuildTrainingExamples(std::span<const QAInstance> instances,
                                         const EvalInputs &inputs,
                                         const EmbeddingProvider &provider,
                                         double alpha);

struct FitOptions {
  int steps = 500;
  double learning_rate = 0.5;
  double momentum = 0.9;
  double init_sigma = 0.01;  // adapter = I + N(0, sigma^2)
  std::uint64_t seed = 0;
};

struct FitResult {
  JointParams params;
  std::vector<double> loss_curve;  // loss before each step, then final
};

FitResult Fit(std::span<const TrainingExample> examples, int dim,
              const FitOptions &options);

}  // namespace stsvlcc

#endif  // STSVLCC_TRAINING_HPP_
