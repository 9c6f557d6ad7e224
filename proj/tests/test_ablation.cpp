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

#include <cmath>
#include <mutex>
#include <random>

#include "pipeline.hpp"
#include "stsvlcc/ablation.hpp"
#include "test_util.hpp"

namespace stsvlcc {
namespace {

struct AblationSetup {
  testing::Fixture fixture = testing::MakeFixture({.seed = 31, .videos = 16, .prefix = "ab", .dim = 8});
  SyntheticProvider provider{8, 8};
  std::vector<QAInstance> instances = fixture.instances();
  PlanIndex plans = testing::BuildFixturePlans(fixture, {.total_frames = 4}, false);
  EvalInputs inputs = MakeEvalInputs(plans, EmbedPlans(plans, provider));
};

TEST(ApplyPerturbation, NoneIsIdentity) {
  AblationSetup s;
  PerturbedInputs p = ApplyPerturbation({}, s.inputs, nullptr);
  EXPECT_EQ(p.inputs, s.inputs);
  EXPECT_TRUE(p.missing_substitute_keys.empty());
}

TEST(ApplyPerturbation, BlankZeroesVisionOnly) {
  AblationSetup s;
  PerturbedInputs p = ApplyPerturbation({PerturbationKind::kBlankVideo}, s.inputs, nullptr);
  EXPECT_EQ(p.inputs.plans, s.inputs.plans);
  EXPECT_EQ(p.inputs.transcripts, s.inputs.transcripts);
  ASSERT_EQ(p.inputs.store.size(), s.inputs.store.size());
  for (const auto &[key, vec] : p.inputs.store.entries()) {
    const EmbeddingVector &orig = *s.inputs.store.find(key);
    if (vec.modality == Modality::kVision)
      EXPECT_TRUE(vec.values.isZero(0.0)) << key;
    else
      EXPECT_EQ(vec, orig);
  }
  // Fused input reduces to (1 - alpha) times the text embedding.
  const SamplePlan &plan = s.plans.begin()->second;
  Eigen::MatrixXd z = FusedInputs(plan, p.inputs.store, 0.3);
  for (std::size_t f = 0; f < plan.frames.size(); ++f) {
    const FrameSample &frame = plan.frames[f];
    std::string key = frame.turn == kFallbackTurn ? FallbackTextKey(plan.video_id, frame.timestamp)
                                                  : TurnTextKey(plan.video_id, frame.turn);
    Eigen::VectorXd t = s.inputs.store.find(key)->values.cast<double>();
    EXPECT_TRUE(z.col(static_cast<Eigen::Index>(f)).isApprox(0.7 * t, 1e-12));
  }
}

TEST(ApplyPerturbation, GibberishReplacesEveryTranscriptSurface) {
  AblationSetup s;
  EXPECT_ERROR_CODE(ApplyPerturbation({PerturbationKind::kGibberishTranscript}, s.inputs, nullptr),
                    ErrorCode::kInvalidArgument);
  PerturbedInputs p = ApplyPerturbation({PerturbationKind::kGibberishTranscript}, s.inputs, &s.provider);
  Eigen::VectorXf g = s.provider.embed_text(kGibberishWord).values;
  for (const auto &[video, plan] : p.inputs.plans) {
    EXPECT_EQ(p.inputs.transcripts.at(video), "gibberish");
    for (const FrameSample &f : plan.frames) EXPECT_EQ(f.transcript, "gibberish");
    EXPECT_EQ(plan.frames.size(), s.plans.at(video).frames.size());
  }
  for (const auto &[key, vec] : p.inputs.store.entries()) {
    if (vec.modality == Modality::kText)
      EXPECT_EQ(vec.values, g);
    else
      EXPECT_EQ(vec, *s.inputs.store.find(key));
  }
}

class WindowRecorder final : public Scorer {
 public:
  double Score(const PromptChunk &chunk) const override {
    std::lock_guard<std::mutex> lock(mu_);
    windows.push_back(chunk.transcript_window);
    return 0.5;
  }
  mutable std::vector<std::string> windows;

 private:
  mutable std::mutex mu_;
};

TEST(ApplyPerturbation, GibberishChunkWindowsAreTheWord) {
  AblationSetup s;
  PerturbedInputs p = ApplyPerturbation({PerturbationKind::kGibberishTranscript}, s.inputs, &s.provider);
  WindowRecorder recorder;
  EvalOptions options;
  options.chunk_size = 3;
  options.overlap = 1;
  Evaluate(s.instances, p.inputs, AdapterParams<double>::Identity(8), recorder, options);
  ASSERT_EQ(recorder.windows.size(), 4 * s.instances.size());
  for (const std::string &w : recorder.windows) EXPECT_EQ(w, "gibberish");
}

TEST(ApplyPerturbation, SubstituteSwapsFrameVectors) {
  AblationSetup s;
  EXPECT_ERROR_CODE(ApplyPerturbation({PerturbationKind::kSubstituteVideo}, s.inputs, nullptr),
                    ErrorCode::kInvalidArgument);
  SyntheticProvider other(99, 8);
  EmbeddingStore sub = EmbedPlans(s.plans, other);
  const std::string victim = s.instances[0].video_id;
  const std::string dropped = FrameKey(victim, s.plans.at(victim).frames[0].timestamp);
  EmbeddingStore partial(8);
  for (const auto &[key, vec] : sub.entries())
    if (key != dropped) partial.insert(vec);

  PerturbedInputs p =
      ApplyPerturbation({PerturbationKind::kSubstituteVideo, &partial}, s.inputs, nullptr);
  EXPECT_EQ(p.missing_substitute_keys, std::vector<std::string>{dropped});
  EXPECT_FALSE(p.inputs.store.contains(dropped));
  for (const auto &[key, vec] : p.inputs.store.entries()) {
    if (vec.modality == Modality::kVision)
      EXPECT_EQ(vec.values, sub.find(key)->values);
    else
      EXPECT_EQ(vec, *s.inputs.store.find(key));
  }
  EvalReport r = Evaluate(s.instances, p.inputs, AdapterParams<double>::Identity(8),
                          ToyScorer(ToyScorerParams::Zero(8), s.provider), {});
  EXPECT_EQ(r.skipped, 1u);
  EXPECT_TRUE(r.instances[0].skipped);

  EmbeddingStore wrong_dim(4);
  EXPECT_ERROR_CODE(ApplyPerturbation({PerturbationKind::kSubstituteVideo, &wrong_dim}, s.inputs, nullptr),
                    ErrorCode::kDimMismatch);
}

TEST(PerturbationName, Names) {
  EXPECT_EQ(PerturbationName(PerturbationKind::kNone), "none");
  EXPECT_EQ(PerturbationName(PerturbationKind::kSubstituteVideo), "substitute_video");
  EXPECT_EQ(PerturbationName(PerturbationKind::kBlankVideo), "blank_video");
  EXPECT_EQ(PerturbationName(PerturbationKind::kGibberishTranscript), "gibberish_transcript");
}

// --- Deltas -----------------------------------------------------------------

TEST(DeltaReport, PublishedRows) {
  struct Row {
    double base, defaced, blank, gibberish, d1, d2, d3;
  };
  const Row rows[] = {{82.06, 78.97, 76.34, 76.68, 3.09, 5.72, 5.38},
                      {78.17, 76.57, 78.40, 74.29, 1.60, -0.23, 3.88}};
  for (const Row &row : rows) {
    AblationReport r = DeltaReport(row.base, row.defaced, row.blank, row.gibberish);
    EXPECT_EQ(r.unit, AccuracyUnit::kPercent);
    ASSERT_TRUE(r.delta1.has_value());
    EXPECT_NEAR(*r.delta1, row.d1, 0.005);
    EXPECT_NEAR(r.delta2, row.d2, 0.005);
    EXPECT_NEAR(r.delta3, row.d3, 0.005);
  }
}

TEST(DeltaReport, EqualInputsGiveZero) {
  AblationReport r = DeltaReport(0.4, 0.4, 0.4, 0.4);
  EXPECT_EQ(r.unit, AccuracyUnit::kFraction);
  EXPECT_EQ(*r.delta1, 0.0);
  EXPECT_EQ(r.delta2, 0.0);
  EXPECT_EQ(r.delta3, 0.0);
}

TEST(DeltaReport, DefacedOptional) {
  AblationReport r = DeltaReport(0.8, std::nullopt, 0.5, 0.7);
  EXPECT_FALSE(r.delta1.has_value());
  EXPECT_NEAR(r.delta2, 0.3, 1e-15);
  EXPECT_NEAR(r.delta3, 0.1, 1e-15);
}

TEST(DeltaReport, UnitsAndRanges) {
  EXPECT_ERROR_CODE(DeltaReport(82.0, 0.78, 76.0, 76.0), ErrorCode::kUnitMismatch);
  EXPECT_ERROR_CODE(DeltaReport(82.0, std::nullopt, 76.0, 76.0, AccuracyUnit::kFraction),
                    ErrorCode::kUnitMismatch);
  EXPECT_EQ(DeltaReport(0.8, std::nullopt, 0.5, 0.7, AccuracyUnit::kPercent).unit,
            AccuracyUnit::kPercent);
  EXPECT_ERROR_CODE(DeltaReport(-0.1, std::nullopt, 0.5, 0.5), ErrorCode::kInvalidArgument);
  EXPECT_ERROR_CODE(DeltaReport(100.5, std::nullopt, 50, 50), ErrorCode::kInvalidArgument);
  EXPECT_ERROR_CODE(DeltaReport(std::nan(""), std::nullopt, 0.5, 0.5), ErrorCode::kInvalidArgument);
}

TEST(DeltaReport, DifferencesProperty) {
  std::mt19937_64 rng(4);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  for (int trial = 0; trial < 500; ++trial) {
    double b = unit(rng), d = unit(rng), k = unit(rng), g = unit(rng);
    AblationReport r = DeltaReport(b, d, k, g, AccuracyUnit::kFraction);
    EXPECT_EQ(*r.delta1, b - d);
    EXPECT_EQ(r.delta2, b - k);
    EXPECT_EQ(r.delta3, b - g);
  }
}

// --- Runs -------------------------------------------------------------------

ToyScorerParams RandomScorer(int d, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> n(0.0, 1.0);
  ToyScorerParams p = ToyScorerParams::Zero(d);
  for (Eigen::Index i = 0; i < p.weight.size(); ++i) p.weight[i] = n(rng);
  return p;
}

std::vector<double> AllScores(const EvalReport &r) {
  std::vector<double> out;
  for (const InstanceResult &inst : r.instances)
    for (const ScoreRecord &s : inst.scores) out.push_back(s.p_yes);
  return out;
}

TEST(RunAblation, BlankIgnoresFrameStoreContent) {
  AblationSetup s;
  ToyScorer scorer(RandomScorer(8, 3), s.provider);
  SyntheticProvider other(123, 8);
  EmbeddingStore mixed(8);
  EmbeddingStore alt = EmbedPlans(s.plans, other);
  for (const auto &[key, vec] : s.inputs.store.entries())
    mixed.insert(vec.modality == Modality::kVision ? *alt.find(key) : vec);
  EvalInputs swapped = MakeEvalInputs(s.plans, mixed);

  auto adapter = AdapterParams<double>::NearIdentity(8, 0.1, 2);
  AblationRun a = RunAblation(s.instances, s.inputs, adapter, scorer, {}, s.provider);
  AblationRun b = RunAblation(s.instances, swapped, adapter, scorer, {}, s.provider);
  EXPECT_EQ(AllScores(a.blank), AllScores(b.blank));
  EXPECT_NE(AllScores(a.base), AllScores(b.base));
  EXPECT_FALSE(a.defaced.has_value());
  EXPECT_EQ(a.report.unit, AccuracyUnit::kFraction);
  EXPECT_EQ(a.report.delta2, a.base.accuracy - a.blank.accuracy);
}

TEST(RunAblation, GibberishIgnoresOriginalTranscripts) {
  AblationSetup s;
  ToyScorer scorer(RandomScorer(8, 5), s.provider);
  EvalInputs rewritten = s.inputs;
  for (auto &[video, plan] : rewritten.plans)
    for (FrameSample &f : plan.frames) f.transcript = "something else entirely";
  for (auto &[video, text] : rewritten.transcripts) text = "other words here and there";
  for (const auto &[key, vec] : s.inputs.store.entries()) {
    if (vec.modality != Modality::kText) continue;
    EmbeddingVector changed = s.provider.embed_text("unrelated " + key);
    changed.key = key;
    rewritten.store.insert(changed);
  }
  auto adapter = AdapterParams<double>::Identity(8);
  AblationRun a = RunAblation(s.instances, s.inputs, adapter, scorer, {}, s.provider);
  AblationRun b = RunAblation(s.instances, rewritten, adapter, scorer, {}, s.provider);
  EXPECT_EQ(AllScores(a.gibberish), AllScores(b.gibberish));
  EXPECT_NE(AllScores(a.base), AllScores(b.base));
}

TEST(RunAblation, SubstituteRunReported) {
  AblationSetup s;
  ToyScorer scorer(RandomScorer(8, 6), s.provider);
  SyntheticProvider other(77, 8);
  EmbeddingStore sub = EmbedPlans(s.plans, other);
  AblationRun r = RunAblation(s.instances, s.inputs, AdapterParams<double>::Identity(8), scorer,
                              {}, s.provider, &sub);
  ASSERT_TRUE(r.defaced.has_value());
  ASSERT_TRUE(r.report.delta1.has_value());
  EXPECT_EQ(*r.report.delta1, r.base.accuracy - r.defaced->accuracy);
  EXPECT_TRUE(r.missing_substitute_keys.empty());
  EXPECT_EQ(r.defaced->n, s.instances.size());
}

TEST(RunAblation, PlantedDirectionality) {
  testing::PlantedResult r = testing::RunPlanted({}, true);
  ASSERT_TRUE(r.ablation.has_value());
  const AblationReport &rep = r.ablation->report;
  EXPECT_GE(rep.delta2, 0.3);
  EXPECT_LE(std::abs(rep.delta3), 0.05);
}

}  // namespace
}  // namespace stsvlcc
