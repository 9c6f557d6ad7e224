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

#include "stsvlcc/training.hpp"

#include <cmath>

namespace stsvlcc {

std::size_t JointParams::FlatSize(int dim) {
  const auto d = static_cast<std::size_t>(dim);
  return d * d + d + 4 * d + 1;
}

Eigen::VectorXd JointParams::Flatten() const {
  const int d = dim();
  Eigen::VectorXd flat(FlatSize(d));
  flat << adapter.weight.reshaped(), adapter.bias, scorer.weight, scorer.bias;
  return flat;
}

JointParams JointParams::Unflatten(const Eigen::VectorXd &flat, int dim) {
  if (static_cast<std::size_t>(flat.size()) != FlatSize(dim))
    throw Error(ErrorCode::kDimMismatch, "flat parameter vector has wrong size");
  const Eigen::Index d = dim;
  JointParams p;
  p.adapter.weight = flat.segment(0, d * d).reshaped(d, d);
  p.adapter.bias = flat.segment(d * d, d);
  p.scorer.weight = flat.segment(d * d + d, 4 * d);
  p.scorer.bias = flat[d * d + 5 * d];
  return p;
}

Eigen::VectorXd JointGradients::Flatten() const {
  const auto d = adapter.bias.size();
  Eigen::VectorXd flat(d * d + 5 * d + 1);
  flat << adapter.weight.reshaped(), adapter.bias, scorer_weight, scorer_bias;
  return flat;
}

namespace {

// log(1 + e^s), stable for large |s|.
double Softplus(double s) {
  return s > 0 ? s + std::log1p(std::exp(-s)) : std::log1p(std::exp(s));
}

}  // namespace

double JointLoss(const JointParams &params,
                 std::span<const TrainingExample> examples,
                 JointGradients *grad) {
  const Eigen::Index d = params.dim();
  if (params.scorer.weight.size() != 4 * d)
    throw Error(ErrorCode::kDimMismatch, "scorer weight must have 4d entries");
  const auto n = static_cast<Eigen::Index>(examples.size());
  if (n == 0) throw Error(ErrorCode::kInvalidArgument, "no training examples");

  Eigen::MatrixXd inputs(d, n);
  for (Eigen::Index e = 0; e < n; ++e) {
    if (examples[e].fused_input_mean.size() != d)
      throw Error(ErrorCode::kDimMismatch, "training example has wrong dim");
    inputs.col(e) = examples[e].fused_input_mean;
  }
  const Eigen::MatrixXd fused = AdapterApply(params.adapter, inputs);

  const auto w = params.scorer.weight;
  const auto w_q = w.segment(0, d);
  const auto w_a = w.segment(d, d);
  const auto w_m = w.segment(2 * d, d);
  const auto w_x = w.segment(3 * d, d);
  const double answers = static_cast<double>(kAnswersPerQuestion);
  const double scale = 1.0 / (answers * static_cast<double>(n));

  Eigen::MatrixXd upstream;  // dL/d(mean adapter output), times n
  if (grad != nullptr) {
    upstream = Eigen::MatrixXd::Zero(d, n);
    grad->scorer_weight = Eigen::VectorXd::Zero(4 * d);
    grad->scorer_bias = 0.0;
  }

  double total = 0.0;
  for (Eigen::Index e = 0; e < n; ++e) {
    const TrainingExample &ex = examples[e];
    const auto m = fused.col(e);
    const double shared = w_q.dot(ex.question) + w_m.dot(m) + params.scorer.bias;
    for (std::size_t j = 0; j < kAnswersPerQuestion; ++j) {
      const Eigen::VectorXd &a = ex.answers[j];
      const double y = static_cast<int>(j) == ex.gold ? 1.0 : 0.0;
      const double s = shared + w_a.dot(a) + w_x.dot(a.cwiseProduct(m));
      total += Softplus(s) - y * s;
      if (grad == nullptr) continue;
      const double delta = (Sigmoid(s) - y) * scale;
      grad->scorer_weight.segment(0, d) += delta * ex.question;
      grad->scorer_weight.segment(d, d) += delta * a;
      grad->scorer_weight.segment(2 * d, d) += delta * m;
      grad->scorer_weight.segment(3 * d, d) += delta * a.cwiseProduct(m);
      grad->scorer_bias += delta;
      upstream.col(e) +=
          (delta * static_cast<double>(n)) * (w_m + w_x.cwiseProduct(a));
    }
  }
  if (grad != nullptr)
    grad->adapter = AdapterGradient(params.adapter, inputs, upstream);
  return total * scale;
}

DifferentiableLoss MakeJointLoss(std::vector<TrainingExample> examples, int dim) {
  return [examples = std::move(examples), dim](const Eigen::VectorXd &flat,
                                               Eigen::VectorXd *grad) {
    JointParams params = JointParams::Unflatten(flat, dim);
    if (grad == nullptr) return JointLoss(params, examples);
    JointGradients g;
    double loss = JointLoss(params, examples, &g);
    *grad = g.Flatten();
    return loss;
  };
}

ExampleBuildResult BuildTrainingExamples(std::span<const QAInstance> instances,
                                         const EvalInputs &inputs,
                                         const EmbeddingProvider &provider,
                                         double alpha) {
  if (provider.dim() != inputs.store.dim())
    throw Error(ErrorCode::kDimMismatch, "provider and store dims differ");
  ExampleBuildResult out;
  for (const QAInstance &qa : instances) {
    auto plan = inputs.plans.find(qa.video_id);
    if (plan == inputs.plans.end()) {
      out.skipped.push_back(qa.qa_id + ": MissingPlan");
      continue;
    }
    TrainingExample ex;
    try {
      Eigen::MatrixXd z = FusedInputs(plan->second, inputs.store, alpha);
      ex.fused_input_mean = z.cols() > 0 ? Eigen::VectorXd(z.rowwise().mean())
                                         : Eigen::VectorXd::Zero(inputs.store.dim());
    } catch (const Error &e) {
      if (e.code() != ErrorCode::kMissingEmbedding) throw;
      out.skipped.push_back(qa.qa_id + ": " + e.what());
      continue;
    }
    ex.question = provider.embed_text(qa.question).values.cast<double>();
    for (std::size_t j = 0; j < kAnswersPerQuestion; ++j)
      ex.answers[j] = provider.embed_text(qa.answers[j]).values.cast<double>();
    ex.gold = qa.gold_index;
    out.examples.push_back(std::move(ex));
  }
  return out;
}

FitResult Fit(std::span<const TrainingExample> examples, int dim,
              const FitOptions &options) {
  if (options.steps < 0 || !(options.learning_rate > 0.0) ||
      !(options.momentum >= 0.0 && options.momentum < 1.0))
    throw Error(ErrorCode::kInvalidArgument, "invalid optimizer settings");

  FitResult result;
  result.params.adapter =
      AdapterParams<double>::NearIdentity(dim, options.init_sigma, options.seed);
  result.params.scorer = ToyScorerParams::Zero(dim);

  Eigen::VectorXd flat = result.params.Flatten();
  Eigen::VectorXd velocity = Eigen::VectorXd::Zero(flat.size());
  for (int step = 0; step < options.steps; ++step) {
    JointGradients grad;
    const double loss =
        JointLoss(JointParams::Unflatten(flat, dim), examples, &grad);
    if (!std::isfinite(loss))
      throw Error(ErrorCode::kNonFiniteLoss,
                  "loss diverged at step " + std::to_string(step));
    result.loss_curve.push_back(loss);
    velocity = options.momentum * velocity - options.learning_rate * grad.Flatten();
    flat += velocity;
  }
  result.params = JointParams::Unflatten(flat, dim);
  result.loss_curve.push_back(JointLoss(result.params, examples));
  return result;
}

}  // namespace stsvlcc
