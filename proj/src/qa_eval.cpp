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

#include "stsvlcc/qa_eval.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <mutex>
#include <thread>

namespace stsvlcc {

std::vector<TokenWindow> ChunkTranscript(std::size_t token_count,
                                         int chunk_size, int overlap) {
  if (overlap < 0 || chunk_size <= overlap)
    throw Error(ErrorCode::kInvalidChunking,
                "need chunk_size > overlap >= 0 (got " +
                    std::to_string(chunk_size) + ", " +
                    std::to_string(overlap) + ")");
  const auto size = static_cast<std::size_t>(chunk_size);
  const auto stride = static_cast<std::size_t>(chunk_size - overlap);
  std::vector<TokenWindow> windows;
  for (std::size_t begin = 0;; begin += stride) {
    windows.push_back({begin, std::min(begin + size, token_count)});
    if (begin + size >= token_count) break;
  }
  return windows;
}

double MlmBinaryLoss(double p_yes, int label) {
  const double p = std::clamp(p_yes, kProbabilityClamp, 1.0 - kProbabilityClamp);
  return label != 0 ? -std::log(p) : -std::log1p(-p);
}

double Sigmoid(double x) {
  if (x >= 0) return 1.0 / (1.0 + std::exp(-x));
  const double e = std::exp(x);
  return e / (1.0 + e);
}

Eigen::VectorXd ToyFeatures(const Eigen::VectorXd &question,
                            const Eigen::VectorXd &answer,
                            const Eigen::VectorXd &fused_mean) {
  const auto d = question.size();
  Eigen::VectorXd x(4 * d);
  x << question, answer, fused_mean, answer.cwiseProduct(fused_mean);
  return x;
}

double ToyScore(const ToyScorerParams &params, const PromptChunk &chunk,
                const EmbeddingProvider &provider) {
  const int d = provider.dim();
  if (params.weight.size() != 4 * d)
    throw Error(ErrorCode::kDimMismatch,
                "toy scorer expects dim " + std::to_string(params.dim()) +
                    ", provider has " + std::to_string(d));
  Eigen::VectorXd mean = Eigen::VectorXd::Zero(d);
  if (chunk.fused && chunk.fused->cols() > 0) {
    if (chunk.fused->rows() != d)
      throw Error(ErrorCode::kDimMismatch, "fused embeddings have wrong dim");
    mean = chunk.fused->rowwise().mean();
  }
  Eigen::VectorXd q = provider.embed_text(chunk.question).values.cast<double>();
  Eigen::VectorXd a = provider.embed_text(chunk.answer).values.cast<double>();
  return Sigmoid(params.weight.dot(ToyFeatures(q, a, mean)) + params.bias);
}

ToyScorer::ToyScorer(ToyScorerParams params, const EmbeddingProvider &provider)
    : params_(std::move(params)), provider_(provider) {
  if (params_.weight.size() != 4 * provider_.dim())
    throw Error(ErrorCode::kDimMismatch, "toy scorer / provider dim mismatch");
}

double ToyScorer::Score(const PromptChunk &chunk) const {
  return ToyScore(params_, chunk, provider_);
}

double CollateChunks(std::span<const double> per_chunk, Collation rule) {
  if (per_chunk.empty())
    throw Error(ErrorCode::kEmptyList, "no chunk scores to collate");
  if (rule == Collation::kMax)
    return *std::max_element(per_chunk.begin(), per_chunk.end());
  double sum = 0.0;
  for (double v : per_chunk) sum += v;
  return sum / static_cast<double>(per_chunk.size());
}

int SelectAnswer(std::span<const double> scores) {
  if (scores.size() != kAnswersPerQuestion)
    throw Error(ErrorCode::kWrongArity,
                "expected 4 scores, got " + std::to_string(scores.size()));
  int best = 0;
  for (int i = 1; i < static_cast<int>(scores.size()); ++i)
    if (scores[i] > scores[best]) best = i;
  return best;
}

EvalInputs MakeEvalInputs(PlanIndex plans, EmbeddingStore store) {
  EvalInputs inputs{std::move(plans), std::move(store), {}};
  for (const auto &[video, plan] : inputs.plans)
    inputs.transcripts[video] = PlanContextTranscript(plan);
  return inputs;
}

EmbeddingStore EmbedPlans(const PlanIndex &plans, const EmbeddingProvider &provider) {
  EmbeddingStore store(provider.dim());
  for (const auto &[video, plan] : plans) {
    for (const FrameSample &frame : plan.frames) {
      store.insert(provider.embed_frame(video, frame.timestamp));
      EmbeddingVector text = provider.embed_text(frame.transcript);
      text.key = frame.turn == kFallbackTurn ? FallbackTextKey(video, frame.timestamp)
                                             : TurnTextKey(video, frame.turn);
      store.insert(std::move(text));
    }
  }
  return store;
}

Eigen::MatrixXd FusedInputs(const SamplePlan &plan, const EmbeddingStore &store,
                            double alpha) {
  const int d = store.dim();
  Eigen::MatrixXd z(d, static_cast<Eigen::Index>(plan.frames.size()));
  for (std::size_t f = 0; f < plan.frames.size(); ++f) {
    const FrameSample &frame = plan.frames[f];
    const std::string vision_key = FrameKey(plan.video_id, frame.timestamp);
    const std::string text_key =
        frame.turn == kFallbackTurn ? FallbackTextKey(plan.video_id, frame.timestamp)
                                    : TurnTextKey(plan.video_id, frame.turn);
    const EmbeddingVector *vision = store.find(vision_key);
    if (vision == nullptr)
      throw Error(ErrorCode::kMissingEmbedding, "no embedding '" + vision_key + "'");
    const EmbeddingVector *text = store.find(text_key);
    if (text == nullptr)
      throw Error(ErrorCode::kMissingEmbedding, "no embedding '" + text_key + "'");
    z.col(static_cast<Eigen::Index>(f)) =
        Fuse(vision->values.cast<double>(), text->values.cast<double>(), alpha);
  }
  return z;
}

namespace {

std::string JoinTokens(const std::vector<std::string> &tokens, TokenWindow w) {
  std::string out;
  for (std::size_t i = w.begin; i < w.end; ++i) {
    if (i != w.begin) out.push_back(' ');
    out += tokens[i];
  }
  return out;
}

InstanceResult EvaluateOne(const QAInstance &qa, const EvalInputs &inputs,
                           const AdapterParams<double> &adapter,
                           const Scorer &scorer, const EvalOptions &options) {
  InstanceResult result;
  result.qa_id = qa.qa_id;
  result.video_id = qa.video_id;
  result.gold = qa.gold_index;

  auto plan = inputs.plans.find(qa.video_id);
  if (plan == inputs.plans.end()) {
    result.skipped = true;
    result.skip_reason = "MissingPlan: no plan for video '" + qa.video_id + "'";
    return result;
  }
  std::shared_ptr<const Eigen::MatrixXd> fused;
  try {
    Eigen::MatrixXd z = FusedInputs(plan->second, inputs.store, options.fusion.alpha);
    fused = std::make_shared<const Eigen::MatrixXd>(AdapterApply(adapter, z));
  } catch (const Error &e) {
    if (e.code() != ErrorCode::kMissingEmbedding) throw;
    result.skipped = true;
    result.skip_reason = e.what();
    return result;
  }

  std::string context;
  if (auto it = inputs.transcripts.find(qa.video_id); it != inputs.transcripts.end())
    context = it->second;
  const std::vector<std::string> tokens = SplitWhitespace(context);
  const std::vector<TokenWindow> windows =
      ChunkTranscript(tokens.size(), options.chunk_size, options.overlap);

  std::array<double, kAnswersPerQuestion> p{};
  for (int j = 0; j < static_cast<int>(kAnswersPerQuestion); ++j) {
    ScoreRecord record;
    record.qa_id = qa.qa_id;
    record.answer_index = j;
    for (std::size_t c = 0; c < windows.size(); ++c) {
      PromptChunk chunk;
      chunk.qa_id = qa.qa_id;
      chunk.answer_index = j;
      chunk.chunk_index = static_cast<int>(c);
      chunk.question = qa.question;
      chunk.answer = qa.answers[j];
      chunk.transcript_window = JoinTokens(tokens, windows[c]);
      chunk.fused = fused;
      record.per_chunk.push_back(scorer.Score(chunk));
    }
    record.p_yes = CollateChunks(record.per_chunk, options.collation);
    p[j] = record.p_yes;
    result.scores.push_back(std::move(record));
  }
  result.predicted = SelectAnswer(p);
  return result;
}

}  // namespace

EvalReport Evaluate(std::span<const QAInstance> instances,
                    const EvalInputs &inputs,
                    const AdapterParams<double> &adapter, const Scorer &scorer,
                    const EvalOptions &options) {
  ValidateFusionConfig(options.fusion);
  ValidateAdapter(adapter);
  if (adapter.dim() != inputs.store.dim())
    throw Error(ErrorCode::kDimMismatch,
                "adapter dim " + std::to_string(adapter.dim()) +
                    " vs store dim " + std::to_string(inputs.store.dim()));
  ChunkTranscript(0, options.chunk_size, options.overlap);  // validates

  std::vector<InstanceResult> results(instances.size());
  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::mutex failure_mu;
  auto worker = [&] {
    for (std::size_t i = next++; i < instances.size(); i = next++) {
      try {
        results[i] = EvaluateOne(instances[i], inputs, adapter, scorer, options);
      } catch (...) {
        std::lock_guard<std::mutex> lock(failure_mu);
        if (!failure) failure = std::current_exception();
        next = instances.size();
      }
    }
  };
  const int workers = std::max(1, options.workers);
  if (workers == 1) {
    worker();
  } else {
    std::vector<std::jthread> pool;
    for (int w = 0; w < workers; ++w) pool.emplace_back(worker);
  }
  if (failure) std::rethrow_exception(failure);

  EvalReport report;
  for (InstanceResult &r : results) {
    if (r.skipped) {
      ++report.skipped;
    } else {
      ++report.n;
      VideoTally &tally = report.per_video[r.video_id];
      ++tally.n;
      if (r.predicted == r.gold) {
        ++report.correct;
        ++tally.correct;
      }
    }
    report.instances.push_back(std::move(r));
  }
  report.accuracy = report.n == 0 ? 0.0
                                  : static_cast<double>(report.correct) /
                                        static_cast<double>(report.n);
  return report;
}

}  // namespace stsvlcc
