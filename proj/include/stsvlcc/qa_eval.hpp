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

// Multiple-choice scoring. Each candidate answer is scored independently as
// the probability that its answer mask reads "yes"; long transcripts are cut
// into overlapping windows, scored per window and collated.

#ifndef STSVLCC_QA_EVAL_HPP_
#define STSVLCC_QA_EVAL_HPP_

#include <array>
#include <map>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "stsvlcc/corpus_io.hpp"
#include "stsvlcc/embeddings.hpp"
#include "stsvlcc/fusion.hpp"
#include "stsvlcc/sampler.hpp"

namespace stsvlcc {

struct TokenWindow {
  std::size_t begin = 0;
  std::size_t end = 0;  // exclusive

  std::size_t size() const { return end - begin; }
  bool operator==(const TokenWindow &) const = default;
};

/// Windows of `chunk_size` tokens advancing by chunk_size - overlap. Zero
/// tokens yield a single empty window. Throws kInvalidChunking.
std::vector<TokenWindow> ChunkTranscript(std::size_t token_count,
                                         int chunk_size, int overlap);

inline constexpr double kProbabilityClamp = 1e-7;

/// Negative log-likelihood of a yes/no answer mask, p clamped to
/// [1e-7, 1 - 1e-7].
double MlmBinaryLoss(double p_yes, int label);

struct PromptChunk {
  std::string qa_id;
  int answer_index = 0;
  int chunk_index = 0;
  std::string question;
  std::string answer;
  std::string transcript_window;
  // Adapter outputs, one column per sampled frame (d x F).
  std::shared_ptr<const Eigen::MatrixXd> fused;
};

// Toy scorer: p = sigmoid(w . [q, a, m, a*m] + b0), with q, a the question and
// answer text embeddings and m the mean adapter output over frames. The
// elementwise a*m block is what lets frame content separate the candidates.
struct ToyScorerParams {
  Eigen::VectorXd weight;  // 4d
  double bias = 0.0;

  int dim() const { return static_cast<int>(weight.size() / 4); }
  static ToyScorerParams Zero(int dim) {
    return {Eigen::VectorXd::Zero(4 * dim), 0.0};
  }
};

Eigen::VectorXd ToyFeatures(const Eigen::VectorXd &question,
                            const Eigen::VectorXd &answer,
                            const Eigen::VectorXd &fused_mean);

double Sigmoid(double x);

double ToyScore(const ToyScorerParams &params, const PromptChunk &chunk,
                const EmbeddingProvider &provider);

class Scorer {
 public:
  virtual ~Scorer() = default;
  // p_yes for one prompt window. Must be safe to call concurrently.
  virtual double Score(const PromptChunk &chunk) const = 0;
};

class ToyScorer final : public Scorer {
 public:
  ToyScorer(ToyScorerParams params, const EmbeddingProvider &provider);
  double Score(const PromptChunk &chunk) const override;

 private:
  ToyScorerParams params_;
  const EmbeddingProvider &provider_;
};

enum class Collation { kMean, kMax };

double CollateChunks(std::span<const double> per_chunk, Collation rule);

/// argmax over exactly four scores, lowest index on ties. Throws kWrongArity.
int SelectAnswer(std::span<const double> scores);

using PlanIndex = std::map<std::string, SamplePlan>;

// Everything evaluation reads besides the model: per-video plans, the keyed
// embedding store (frames and turn texts) and per-video prompt context.
struct EvalInputs {
  PlanIndex plans;
  EmbeddingStore store;
  std::map<std::string, std::string> transcripts;

  bool operator==(const EvalInputs &) const = default;
};

/// Context transcripts default to the plan's own turn transcripts.
EvalInputs MakeEvalInputs(PlanIndex plans, EmbeddingStore store);

/// One vision record per frame and one text record per turn (per frame for
/// fallback frames), keyed as FusedInputs expects.
EmbeddingStore EmbedPlans(const PlanIndex &plans, const EmbeddingProvider &provider);

/// Pre-adapter fused inputs for one plan (d x F). Throws kMissingEmbedding.
Eigen::MatrixXd FusedInputs(const SamplePlan &plan, const EmbeddingStore &store,
                            double alpha);

struct EvalOptions {
  FusionConfig fusion;
  int chunk_size = 256;
  int overlap = 64;
  Collation collation = Collation::kMean;
  int workers = 1;
};

struct ScoreRecord {
  std::string qa_id;
  int answer_index = 0;
  double p_yes = 0.0;
  std::vector<double> per_chunk;
};

struct InstanceResult {
  std::string qa_id;
  std::string video_id;
  int gold = 0;
  int predicted = -1;
  bool skipped = false;
  std::string skip_reason;
  std::vector<ScoreRecord> scores;
};

struct VideoTally {
  std::size_t n = 0;
  std::size_t correct = 0;
};

struct EvalReport {
  std::size_t n = 0;  // scored instances
  std::size_t correct = 0;
  std::size_t skipped = 0;
  double accuracy = 0.0;
  std::map<std::string, VideoTally> per_video;
  std::vector<InstanceResult> instances;
};

/// Scores all four answers of every instance and tallies accuracy. Instances
/// with a missing plan or embedding are skipped and counted, never dropped.
EvalReport Evaluate(std::span<const QAInstance> instances,
                    const EvalInputs &inputs,
                    const AdapterParams<double> &adapter, const Scorer &scorer,
                    const EvalOptions &options);

}  // namespace stsvlcc

#endif  // STSVLCC_QA_EVAL_HPP_
