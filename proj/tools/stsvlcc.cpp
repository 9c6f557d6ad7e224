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

// stsvlcc: batch pipeline driver.
//
//   stsvlcc turns build | plan build | embed synth | fit | eval | ablate |
//           report deltas | check gradients
//
// Exit codes: 0 success, 1 usage/config error, 2 data error, 3 internal
// invariant violation.

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "CLI11.hpp"
#include "stsvlcc/ablation.hpp"
#include "stsvlcc/checkpoint.hpp"
#include "stsvlcc/corpus_io.hpp"
#include "stsvlcc/embeddings.hpp"
#include "stsvlcc/external_scorer.hpp"
#include "stsvlcc/gradient_check.hpp"
#include "stsvlcc/qa_eval.hpp"
#include "stsvlcc/sampler.hpp"
#include "stsvlcc/serialization.hpp"
#include "stsvlcc/training.hpp"
#include "stsvlcc/turns.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace stsvlcc;

namespace {

constexpr int kExitUsage = 1;
constexpr int kExitData = 2;
constexpr int kExitInternal = 3;

struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Failure tied to an input file.
struct DataError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

class Logger {
 public:
  void set_json(bool json) { json_ = json; }

  void Info(const std::string &event, const json &fields = json::object()) const {
    Emit("info", event, fields);
  }
  void Warn(const std::string &event, const json &fields = json::object()) const {
    Emit("warning", event, fields);
  }
  void Error(const std::string &event, const json &fields = json::object()) const {
    Emit("error", event, fields);
  }

 private:
  void Emit(const char *level, const std::string &event, const json &fields) const {
    if (json_) {
      json line = fields;
      line["level"] = level;
      line["event"] = event;
      std::cerr << line.dump() << '\n';
      return;
    }
    std::cerr << "[" << level << "] " << event;
    for (const auto &[k, v] : fields.items())
      std::cerr << " " << k << "=" << (v.is_string() ? v.get<std::string>() : v.dump());
    std::cerr << '\n';
  }
  bool json_ = false;
};

Logger g_log;

// ---------------------------------------------------------------------------
// Configuration

struct PipelineConfig {
  std::uint64_t seed = 0;
  struct {
    std::string manifest, vtt_dir, rttm_dir, durations, turns, plans,
        substitute_store, checkpoint_dir, output, inject;
    std::vector<std::string> stores;
  } paths;
  SamplerConfig sampler;
  double merge_gap = kDefaultMergeGap;
  FusionConfig fusion;
  bool normalize = true;  // unit-norm provider outputs
  int chunk_size = 256;
  int overlap = 64;
  std::string collation = "mean";
  std::string scorer = "builtin";
  double timeout = 30.0;
  FitOptions fit;
  int workers = 1;
};

json ConfigToJson(const PipelineConfig &c) {
  return {
      {"config_version", 1},
      {"seed", c.seed},
      {"paths",
       {{"manifest", c.paths.manifest},
        {"vtt_dir", c.paths.vtt_dir},
        {"rttm_dir", c.paths.rttm_dir},
        {"durations", c.paths.durations},
        {"turns", c.paths.turns},
        {"plans", c.paths.plans},
        {"stores", c.paths.stores},
        {"substitute_store", c.paths.substitute_store},
        {"checkpoint_dir", c.paths.checkpoint_dir},
        {"inject", c.paths.inject},
        {"output", c.paths.output}}},
      {"sampler",
       {{"total_frames", c.sampler.total_frames},
        {"merge_gap", c.merge_gap},
        {"fallback_window", c.sampler.fallback_window}}},
      {"fusion", {{"alpha", c.fusion.alpha}, {"d", c.fusion.dim}, {"normalize", c.normalize}}},
      {"eval",
       {{"chunk_size", c.chunk_size},
        {"overlap", c.overlap},
        {"collation", c.collation},
        {"scorer", c.scorer},
        {"timeout", c.timeout},
        {"workers", c.workers}}},
      {"fit",
       {{"steps", c.fit.steps},
        {"learning_rate", c.fit.learning_rate},
        {"momentum", c.fit.momentum},
        {"init_sigma", c.fit.init_sigma}}},
  };
}

template <typename T>
void Take(const json &obj, const char *key, T *target) {
  auto it = obj.find(key);
  if (it == obj.end()) return;
  try {
    *target = it->get<T>();
  } catch (const json::exception &) {
    throw ConfigError(std::string("config key '") + key + "' has the wrong type");
  }
}

void CheckKeys(const json &obj, std::initializer_list<const char *> allowed,
               const std::string &where) {
  for (const auto &[key, value] : obj.items()) {
    bool ok = false;
    for (const char *a : allowed) ok = ok || key == a;
    if (!ok) throw ConfigError("unknown config key '" + where + key + "'");
  }
}

PipelineConfig LoadConfig(const std::string &path) {
  PipelineConfig c;
  if (path.empty()) return c;
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read config '" + path + "'");
  json root = json::parse(in, nullptr, false);
  if (root.is_discarded() || !root.is_object())
    throw ConfigError("config '" + path + "' is not a JSON object");
  if (root.value("config_version", 0) != 1)
    throw ConfigError("config '" + path + "' must declare config_version: 1");
  CheckKeys(root, {"config_version", "seed", "paths", "sampler", "fusion", "eval", "fit"}, "");
  Take(root, "seed", &c.seed);
  const json empty = json::object();
  const json &p = root.value("paths", empty).is_object() ? root["paths"] : empty;
  CheckKeys(p, {"manifest", "vtt_dir", "rttm_dir", "durations", "turns", "plans", "stores",
                "substitute_store", "checkpoint_dir", "inject", "output"},
            "paths.");
  Take(p, "manifest", &c.paths.manifest);
  Take(p, "vtt_dir", &c.paths.vtt_dir);
  Take(p, "rttm_dir", &c.paths.rttm_dir);
  Take(p, "durations", &c.paths.durations);
  Take(p, "turns", &c.paths.turns);
  Take(p, "plans", &c.paths.plans);
  Take(p, "stores", &c.paths.stores);
  Take(p, "substitute_store", &c.paths.substitute_store);
  Take(p, "checkpoint_dir", &c.paths.checkpoint_dir);
  Take(p, "inject", &c.paths.inject);
  Take(p, "output", &c.paths.output);
  if (root.contains("sampler")) {
    const json &s = root["sampler"];
    CheckKeys(s, {"total_frames", "merge_gap", "fallback_window"}, "sampler.");
    Take(s, "total_frames", &c.sampler.total_frames);
    Take(s, "merge_gap", &c.merge_gap);
    Take(s, "fallback_window", &c.sampler.fallback_window);
  }
  if (root.contains("fusion")) {
    const json &f = root["fusion"];
    CheckKeys(f, {"alpha", "d", "normalize"}, "fusion.");
    Take(f, "alpha", &c.fusion.alpha);
    Take(f, "d", &c.fusion.dim);
    Take(f, "normalize", &c.normalize);
  }
  if (root.contains("eval")) {
    const json &e = root["eval"];
    CheckKeys(e, {"chunk_size", "overlap", "collation", "scorer", "timeout", "workers"}, "eval.");
    Take(e, "chunk_size", &c.chunk_size);
    Take(e, "overlap", &c.overlap);
    Take(e, "collation", &c.collation);
    Take(e, "scorer", &c.scorer);
    Take(e, "timeout", &c.timeout);
    Take(e, "workers", &c.workers);
  }
  if (root.contains("fit")) {
    const json &f = root["fit"];
    CheckKeys(f, {"steps", "learning_rate", "momentum", "init_sigma"}, "fit.");
    Take(f, "steps", &c.fit.steps);
    Take(f, "learning_rate", &c.fit.learning_rate);
    Take(f, "momentum", &c.fit.momentum);
    Take(f, "init_sigma", &c.fit.init_sigma);
  }
  return c;
}

// Flag values parsed by CLI11; applied on top of the config file.
struct Overrides {
  std::optional<std::uint64_t> seed;
  std::optional<std::string> manifest, vtt_dir, rttm_dir, durations, turns, plans,
      substitute_store, checkpoint_dir, output, inject, collation, scorer;
  std::vector<std::string> stores;
  std::optional<int> frames, dim, chunk_size, overlap, steps, workers;
  std::optional<double> merge_gap, fallback_window, alpha, timeout, lr, momentum;
  bool no_normalize = false;
};

template <typename T>
void Apply(const std::optional<T> &value, T *target) {
  if (value) *target = *value;
}

PipelineConfig Resolve(const std::string &config_path, const Overrides &o) {
  PipelineConfig c = LoadConfig(config_path);
  Apply(o.seed, &c.seed);
  Apply(o.manifest, &c.paths.manifest);
  Apply(o.vtt_dir, &c.paths.vtt_dir);
  Apply(o.rttm_dir, &c.paths.rttm_dir);
  Apply(o.durations, &c.paths.durations);
  Apply(o.turns, &c.paths.turns);
  Apply(o.plans, &c.paths.plans);
  Apply(o.substitute_store, &c.paths.substitute_store);
  Apply(o.checkpoint_dir, &c.paths.checkpoint_dir);
  Apply(o.output, &c.paths.output);
  Apply(o.inject, &c.paths.inject);
  Apply(o.collation, &c.collation);
  Apply(o.scorer, &c.scorer);
  if (!o.stores.empty()) c.paths.stores = o.stores;
  Apply(o.frames, &c.sampler.total_frames);
  Apply(o.dim, &c.fusion.dim);
  Apply(o.chunk_size, &c.chunk_size);
  Apply(o.overlap, &c.overlap);
  Apply(o.steps, &c.fit.steps);
  Apply(o.workers, &c.workers);
  Apply(o.merge_gap, &c.merge_gap);
  Apply(o.fallback_window, &c.sampler.fallback_window);
  Apply(o.alpha, &c.fusion.alpha);
  Apply(o.timeout, &c.timeout);
  Apply(o.lr, &c.fit.learning_rate);
  Apply(o.momentum, &c.fit.momentum);
  if (o.no_normalize) c.normalize = false;

  if (c.sampler.total_frames < 1) throw ConfigError("sampler.total_frames must be >= 1");
  if (c.merge_gap < 0) throw ConfigError("sampler.merge_gap must be >= 0");
  if (c.sampler.fallback_window < 0) throw ConfigError("sampler.fallback_window must be >= 0");
  if (!(c.fusion.alpha >= 0 && c.fusion.alpha <= 1)) throw ConfigError("fusion.alpha must lie in [0, 1]");
  if (c.fusion.dim < 1) throw ConfigError("fusion.d must be >= 1");
  if (c.overlap < 0 || c.chunk_size <= c.overlap)
    throw ConfigError("eval.chunk_size must exceed eval.overlap >= 0");
  if (c.collation != "mean" && c.collation != "max")
    throw ConfigError("eval.collation must be 'mean' or 'max'");
  if (c.workers < 1) throw ConfigError("workers must be >= 1");
  if (c.fit.steps < 0) throw ConfigError("fit.steps must be >= 0");
  return c;
}

void RequirePath(const std::string &value, const char *name) {
  if (value.empty()) throw ConfigError(std::string("missing required path: ") + name);
}

// ---------------------------------------------------------------------------
// File helpers

std::string ReadText(const std::string &path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot read '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void WriteText(const std::string &path, const std::string &text) {
  if (auto parent = fs::path(path).parent_path(); !parent.empty())
    fs::create_directories(parent);
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw DataError("cannot write '" + path + "'");
  out << text;
  if (!out) throw DataError("write to '" + path + "' failed");
}

// Every artifact gets its resolved configuration next to it.
void WriteResolvedConfig(const PipelineConfig &c, const std::string &output) {
  WriteText(output + ".config.json", ConfigToJson(c).dump(2) + "\n");
}

// Wraps library errors raised while reading `path` so the path is reported.
template <typename Fn>
auto WithPath(const std::string &path, Fn &&fn) -> decltype(fn()) {
  try {
    return fn();
  } catch (const stsvlcc::Error &e) {
    throw DataError(path + ": " + e.what());
  }
}

std::vector<VideoMeta> LoadDurations(const std::string &path) {
  std::string text = ReadText(path);
  return WithPath(path, [&] { return ParseDurations(text); });
}

std::vector<Cue> LoadCues(const std::string &vtt_dir, const std::string &video, bool warn_missing) {
  if (vtt_dir.empty()) return {};
  const std::string path = (fs::path(vtt_dir) / (video + ".vtt")).string();
  if (!fs::exists(path)) {
    if (warn_missing) g_log.Warn("missing_transcript", {{"video_id", video}, {"path", path}});
    return {};
  }
  std::string text = ReadText(path);
  return WithPath(path, [&] { return ParseVtt(text); });
}

PlanIndex LoadPlans(const std::string &path) {
  std::string text = ReadText(path);
  return WithPath(path, [&] { return ParsePlansJsonl(text); });
}

std::vector<QAInstance> LoadInstances(const std::string &path) {
  std::string text = ReadText(path);
  return WithPath(path, [&] { return LoadManifest(text); });
}

EmbeddingStore LoadStores(const std::vector<std::string> &paths) {
  if (paths.empty()) throw ConfigError("missing required path: stores");
  std::optional<EmbeddingStore> merged;
  for (const std::string &path : paths) {
    if (!fs::exists(path)) throw DataError("cannot read store '" + path + "'");
    EmbeddingStore store = WithPath(path, [&] { return ReadStoreFile(path); });
    if (!merged) {
      merged = std::move(store);
      continue;
    }
    if (store.dim() != merged->dim())
      throw DataError(path + ": store dim " + std::to_string(store.dim()) +
                      " differs from " + std::to_string(merged->dim()));
    for (const auto &[key, vec] : store.entries()) merged->insert(vec);
  }
  return std::move(*merged);
}

std::vector<Injection> LoadInjections(const std::string &path, const SyntheticProvider &provider) {
  std::vector<Injection> out;
  if (path.empty()) return out;
  std::string text = ReadText(path);
  std::size_t line_no = 0;
  std::istringstream lines(text);
  std::string line;
  while (std::getline(lines, line)) {
    ++line_no;
    if (CollapseWhitespace(line).empty()) continue;
    json obj = json::parse(line, nullptr, false);
    try {
      if (obj.is_discarded()) throw json::other_error::create(501, "invalid JSON", nullptr);
      Injection inj;
      inj.video_id = obj.at("video_id").get<std::string>();
      inj.start = obj.at("start").get<double>();
      inj.end = obj.at("end").get<double>();
      inj.direction = provider.embed_text(obj.at("text").get<std::string>()).values;
      inj.weight = obj.value("weight", 0.5f);
      out.push_back(std::move(inj));
    } catch (const json::exception &e) {
      throw DataError(path + ": line " + std::to_string(line_no) + ": " + e.what());
    }
  }
  return out;
}

Collation ParseCollation(const std::string &name) {
  return name == "max" ? Collation::kMax : Collation::kMean;
}

EvalOptions MakeEvalOptions(const PipelineConfig &c, double alpha, int dim) {
  EvalOptions options;
  options.fusion.alpha = alpha;
  options.fusion.dim = dim;
  options.chunk_size = c.chunk_size;
  options.overlap = c.overlap;
  options.collation = ParseCollation(c.collation);
  options.workers = c.workers;
  return options;
}

struct LoadedModel {
  AdapterCheckpoint adapter;
  ToyScorerParams scorer;
};

LoadedModel LoadModel(const std::string &dir) {
  RequirePath(dir, "checkpoint_dir");
  const std::string adapter_path = (fs::path(dir) / "adapter.ckpt").string();
  const std::string scorer_path = (fs::path(dir) / "scorer.ckpt").string();
  LoadedModel m;
  m.adapter = WithPath(adapter_path, [&] { return LoadAdapterCheckpoint(adapter_path); });
  m.scorer = WithPath(scorer_path, [&] { return LoadScorerCheckpoint(scorer_path); });
  return m;
}

void EmitJson(const PipelineConfig &c, const json &doc) {
  const std::string text = doc.dump(2) + "\n";
  if (c.paths.output.empty()) {
    std::cout << text;
    return;
  }
  WriteText(c.paths.output, text);
  WriteResolvedConfig(c, c.paths.output);
}

// ---------------------------------------------------------------------------
// Subcommands

int CmdTurnsBuild(const PipelineConfig &c) {
  RequirePath(c.paths.durations, "durations");
  RequirePath(c.paths.rttm_dir, "rttm_dir");
  RequirePath(c.paths.output, "output");
  std::string out;
  for (const VideoMeta &meta : LoadDurations(c.paths.durations)) {
    const std::string rttm_path = (fs::path(c.paths.rttm_dir) / (meta.video_id + ".rttm")).string();
    std::string rttm_text = ReadText(rttm_path);
    RttmResult rttm = WithPath(rttm_path, [&] { return ParseRttm(rttm_text); });
    for (const Warning &w : rttm.warnings)
      g_log.Warn("rttm_segment_skipped", {{"path", rttm_path}, {"line", w.line}, {"reason", w.message}});
    std::vector<Cue> cues = LoadCues(c.paths.vtt_dir, meta.video_id, true);
    TurnSet turns = BuildTurns(rttm.segments, cues, meta, c.merge_gap);
    for (const Warning &w : turns.warnings)
      g_log.Warn("segment_dropped", {{"video_id", meta.video_id}, {"reason", w.message}});
    g_log.Info("turns", {{"video_id", meta.video_id}, {"K", turns.size()}});
    out += TurnsToJsonl(turns);
  }
  WriteText(c.paths.output, out);
  WriteResolvedConfig(c, c.paths.output);
  return 0;
}

int CmdPlanBuild(const PipelineConfig &c) {
  RequirePath(c.paths.durations, "durations");
  RequirePath(c.paths.turns, "turns");
  RequirePath(c.paths.output, "output");
  std::vector<VideoMeta> videos = LoadDurations(c.paths.durations);
  std::string turns_text = ReadText(c.paths.turns);
  auto turns_by_video = WithPath(c.paths.turns, [&] { return ParseTurnsJsonl(turns_text); });

  std::vector<SamplePlan> plans;
  for (const VideoMeta &meta : videos) {
    TurnSet set;
    set.video_id = meta.video_id;
    set.video_duration = meta.duration;
    if (auto it = turns_by_video.find(meta.video_id); it != turns_by_video.end())
      set.turns = it->second;
    for (const SpeakingTurn &turn : set.turns)
      if (turn.start < 0 || turn.end > meta.duration + 1e-3)
        throw DataError(c.paths.turns + ": turn of '" + meta.video_id + "' exceeds the video");
    std::vector<Cue> cues = set.turns.empty() ? LoadCues(c.paths.vtt_dir, meta.video_id, false)
                                              : std::vector<Cue>{};
    SamplePlan plan = BuildPlan(set, cues, c.sampler);
    g_log.Info("plan", {{"video_id", meta.video_id}, {"frames", plan.frames.size()},
                        {"used_fallback", plan.used_fallback}});
    plans.push_back(std::move(plan));
  }
  WriteText(c.paths.output, PlansToJsonl(plans));
  WriteResolvedConfig(c, c.paths.output);
  return 0;
}

int CmdEmbedSynth(const PipelineConfig &c) {
  RequirePath(c.paths.plans, "plans");
  RequirePath(c.paths.output, "output");
  PlanIndex plans = LoadPlans(c.paths.plans);
  SyntheticProvider plain(c.seed, c.fusion.dim, {}, c.normalize);
  SyntheticProvider provider(c.seed, c.fusion.dim, LoadInjections(c.paths.inject, plain),
                             c.normalize);

  EmbeddingStore store = EmbedPlans(plans, provider);
  if (auto parent = fs::path(c.paths.output).parent_path(); !parent.empty())
    fs::create_directories(parent);
  WithPath(c.paths.output, [&] { WriteStoreFile(store, c.paths.output); });
  WriteResolvedConfig(c, c.paths.output);
  g_log.Info("store_written", {{"path", c.paths.output}, {"records", store.size()}, {"d", store.dim()}});
  return 0;
}

int CmdFit(const PipelineConfig &c) {
  RequirePath(c.paths.manifest, "manifest");
  RequirePath(c.paths.plans, "plans");
  RequirePath(c.paths.checkpoint_dir, "checkpoint_dir");
  std::vector<QAInstance> instances = LoadInstances(c.paths.manifest);
  EmbeddingStore store = LoadStores(c.paths.stores);
  EvalInputs inputs = MakeEvalInputs(LoadPlans(c.paths.plans), std::move(store));
  const int d = inputs.store.dim();
  SyntheticProvider provider(c.seed, d, {}, c.normalize);

  ExampleBuildResult built = BuildTrainingExamples(instances, inputs, provider, c.fusion.alpha);
  for (const std::string &reason : built.skipped) g_log.Warn("instance_skipped", {{"reason", reason}});
  if (built.examples.empty()) throw DataError(c.paths.manifest + ": no usable training instances");

  FitOptions options = c.fit;
  options.seed = c.seed;
  FitResult fit = Fit(built.examples, d, options);

  fs::create_directories(c.paths.checkpoint_dir);
  SaveAdapterCheckpoint({fit.params.adapter, c.fusion.alpha},
                        (fs::path(c.paths.checkpoint_dir) / "adapter.ckpt").string());
  SaveScorerCheckpoint(fit.params.scorer,
                       (fs::path(c.paths.checkpoint_dir) / "scorer.ckpt").string());
  WriteResolvedConfig(c, (fs::path(c.paths.checkpoint_dir) / "fit").string());

  const auto &curve = fit.loss_curve;
  std::printf("fit: %zu examples, %d steps, d=%d\n", built.examples.size(), options.steps, d);
  const std::size_t stride = std::max<std::size_t>(1, curve.size() / 10);
  for (std::size_t i = 0; i < curve.size(); i += stride)
    std::printf("  step %5zu  loss %.6f\n", i, curve[i]);
  std::printf("  final       loss %.6f\n", curve.back());
  return 0;
}

std::unique_ptr<Scorer> MakeScorer(const PipelineConfig &c, const LoadedModel &model,
                                   const EmbeddingProvider &provider) {
  if (c.scorer == "builtin") return std::make_unique<ToyScorer>(model.scorer, provider);
  return std::make_unique<ExternalScorer>(c.scorer, c.timeout);
}

void ReportSkipped(const EvalReport &report) {
  for (const InstanceResult &r : report.instances)
    if (r.skipped) g_log.Warn("instance_skipped", {{"qa_id", r.qa_id}, {"reason", r.skip_reason}});
}

int CmdEval(const PipelineConfig &c) {
  RequirePath(c.paths.manifest, "manifest");
  RequirePath(c.paths.plans, "plans");
  std::vector<QAInstance> instances = LoadInstances(c.paths.manifest);
  EvalInputs inputs = MakeEvalInputs(LoadPlans(c.paths.plans), LoadStores(c.paths.stores));
  LoadedModel model = LoadModel(c.paths.checkpoint_dir);
  const int d = inputs.store.dim();
  if (model.adapter.params.dim() != d)
    throw DataError("checkpoint dim " + std::to_string(model.adapter.params.dim()) +
                    " does not match store dim " + std::to_string(d));
  SyntheticProvider provider(c.seed, d, {}, c.normalize);
  auto scorer = MakeScorer(c, model, provider);
  EvalReport report = Evaluate(instances, inputs, model.adapter.params, *scorer,
                               MakeEvalOptions(c, model.adapter.alpha, d));
  ReportSkipped(report);
  g_log.Info("eval", {{"n", report.n}, {"accuracy", report.accuracy}, {"skipped", report.skipped}});
  EmitJson(c, EvalReportToJson(report));
  return 0;
}

int CmdAblate(const PipelineConfig &c) {
  RequirePath(c.paths.manifest, "manifest");
  RequirePath(c.paths.plans, "plans");
  std::vector<QAInstance> instances = LoadInstances(c.paths.manifest);
  EvalInputs inputs = MakeEvalInputs(LoadPlans(c.paths.plans), LoadStores(c.paths.stores));
  LoadedModel model = LoadModel(c.paths.checkpoint_dir);
  const int d = inputs.store.dim();
  if (model.adapter.params.dim() != d)
    throw DataError("checkpoint dim does not match store dim");
  std::optional<EmbeddingStore> substitute;
  if (!c.paths.substitute_store.empty())
    substitute = LoadStores({c.paths.substitute_store});
  SyntheticProvider provider(c.seed, d, {}, c.normalize);
  auto scorer = MakeScorer(c, model, provider);
  AblationRun run = RunAblation(instances, inputs, model.adapter.params, *scorer,
                                MakeEvalOptions(c, model.adapter.alpha, d), provider,
                                substitute ? &*substitute : nullptr);
  for (const std::string &key : run.missing_substitute_keys)
    g_log.Warn("MissingSubstituteKey", {{"key", key}});

  json doc = AblationReportToJson(run.report);
  doc["n"] = {{"base", run.base.n},
              {"defaced", run.defaced ? json(run.defaced->n) : json(nullptr)},
              {"blank", run.blank.n},
              {"gibberish", run.gibberish.n}};
  doc["config"] = ConfigToJson(c);
  doc["config"]["paths"].erase("output");
  EmitJson(c, doc);
  return 0;
}

int CmdReportDeltas(const PipelineConfig &c, double base, std::optional<double> defaced,
                    double blank, double gibberish, const std::string &unit_name) {
  AccuracyUnit unit = AccuracyUnit::kAuto;
  if (unit_name == "fraction") unit = AccuracyUnit::kFraction;
  else if (unit_name == "percent") unit = AccuracyUnit::kPercent;
  else if (unit_name != "auto") throw ConfigError("--unit must be auto, fraction or percent");
  AblationReport report;
  try {
    report = DeltaReport(base, defaced, blank, gibberish, unit);
  } catch (const stsvlcc::Error &e) {
    throw ConfigError(e.what());
  }
  char line[128];
  auto fmt = [](const std::optional<double> &v) {
    char buf[32];
    if (!v) return std::string("n/a");
    std::snprintf(buf, sizeof(buf), "%.2f", *v);
    return std::string(buf);
  };
  std::snprintf(line, sizeof(line), "\u0394 = (%s, %s, %s)\n", fmt(report.delta1).c_str(),
                fmt(report.delta2).c_str(), fmt(report.delta3).c_str());
  // The summary goes to stdout unless stdout already carries the JSON.
  std::fputs(line, c.paths.output.empty() ? stderr : stdout);
  EmitJson(c, AblationReportToJson(report));
  return 0;
}

int CmdCheckGradients(const PipelineConfig &c, const std::vector<int> &dims, double tolerance,
                      int examples_per_dim) {
  bool all_pass = true;
  for (int d : dims) {
    if (d < 1) throw ConfigError("--dim must be >= 1");
    std::mt19937_64 rng(c.seed + static_cast<std::uint64_t>(d));
    std::normal_distribution<double> normal(0.0, 1.0);
    auto random_vec = [&](int n, double scale) {
      Eigen::VectorXd v(n);
      for (int i = 0; i < n; ++i) v[i] = scale * normal(rng);
      return v;
    };
    std::vector<TrainingExample> examples;
    for (int e = 0; e < examples_per_dim; ++e) {
      TrainingExample ex;
      ex.fused_input_mean = random_vec(d, 1.0);
      ex.question = random_vec(d, 1.0);
      for (auto &a : ex.answers) a = random_vec(d, 1.0);
      ex.gold = e % 4;
      examples.push_back(std::move(ex));
    }
    JointParams params;
    params.adapter = AdapterParams<double>::NearIdentity(d, 0.3, c.seed);
    params.adapter.bias = random_vec(d, 0.3);
    params.scorer.weight = random_vec(4 * d, 0.5);
    params.scorer.bias = 0.1;
    GradientCheckOptions options;
    options.seed = c.seed;
    if (d > 32) options.max_coordinates = 2048;
    GradientCheckReport r =
        GradientCheck(MakeJointLoss(examples, d), params.Flatten(), tolerance, options);
    std::printf("d=%-4d coords=%-6zu max_rel_error=%.3e %s\n", d, r.coordinates_checked,
                r.max_rel_error, r.pass ? "PASS" : "FAIL");
    all_pass = all_pass && r.pass;
  }
  return all_pass ? 0 : kExitInternal;
}

}  // namespace

int main(int argc, char **argv) {
  CLI::App app{"Speaking-turn sampling and vision-language fusion pipeline"};
  app.require_subcommand(1);
  std::string config_path;
  bool log_json = false;
  Overrides o;
  app.add_option("--config", config_path, "JSON pipeline configuration (config_version 1)");
  app.add_flag("--log-json", log_json, "Emit one JSON object per log event on stderr");

  auto add_seed = [&](CLI::App *cmd) {
    cmd->add_option("--seed", o.seed, "Provider/initialization seed");
    cmd->add_flag("--no-normalize", o.no_normalize, "Keep provider embeddings at their raw norm");
  };
  auto add_out = [&](CLI::App *cmd) { cmd->add_option("-o,--out", o.output, "Output path"); };
  auto add_eval_inputs = [&](CLI::App *cmd) {
    cmd->add_option("--manifest", o.manifest, "QA manifest (JSONL)");
    cmd->add_option("--plans", o.plans, "Sample plans (JSONL)");
    cmd->add_option("--store", o.stores, "STVE embedding store (repeatable)");
    add_seed(cmd);
  };
  auto add_model = [&](CLI::App *cmd) {
    cmd->add_option("--checkpoint-dir", o.checkpoint_dir, "Directory with adapter.ckpt and scorer.ckpt");
    cmd->add_option("--scorer", o.scorer, "builtin, tcp://host:port or exec:<command>");
    cmd->add_option("--timeout", o.timeout, "External scorer timeout in seconds");
    cmd->add_option("--chunk-size", o.chunk_size, "Transcript window size in tokens");
    cmd->add_option("--overlap", o.overlap, "Tokens shared by consecutive windows");
    cmd->add_option("--collation", o.collation, "mean or max over windows");
    cmd->add_option("--workers", o.workers, "Parallel evaluation workers");
  };

  auto *turns = app.add_subcommand("turns", "Speaking-turn construction");
  turns->require_subcommand(1);
  auto *turns_build = turns->add_subcommand("build", "VTT + RTTM + durations -> turns JSONL");
  turns_build->add_option("--durations", o.durations, "'<video_id> <seconds>' per line");
  turns_build->add_option("--rttm-dir", o.rttm_dir, "Directory of <video_id>.rttm");
  turns_build->add_option("--vtt-dir", o.vtt_dir, "Directory of <video_id>.vtt");
  turns_build->add_option("--merge-gap", o.merge_gap, "Merge segments separated by at most this many seconds");
  add_out(turns_build);

  auto *plan = app.add_subcommand("plan", "Frame sample plans");
  plan->require_subcommand(1);
  auto *plan_build = plan->add_subcommand("build", "turns + durations -> SamplePlan JSONL");
  plan_build->add_option("--turns", o.turns, "Turns JSONL");
  plan_build->add_option("--durations", o.durations, "'<video_id> <seconds>' per line");
  plan_build->add_option("--vtt-dir", o.vtt_dir, "Transcripts for fallback windows");
  plan_build->add_option("-M,--frames", o.frames, "Frame budget per video");
  plan_build->add_option("--fallback-window", o.fallback_window, "Fallback transcript half-window (s)");
  add_out(plan_build);

  auto *embed = app.add_subcommand("embed", "Embedding stores");
  embed->require_subcommand(1);
  auto *embed_synth = embed->add_subcommand("synth", "plan + seed -> STVE store from the synthetic provider");
  embed_synth->add_option("--plans", o.plans, "Sample plans (JSONL)");
  embed_synth->add_option("--dim", o.dim, "Embedding dimension");
  embed_synth->add_option("--inject", o.inject, "Planted-signal JSONL {video_id,start,end,text,weight}");
  add_seed(embed_synth);
  add_out(embed_synth);

  auto *fit = app.add_subcommand("fit", "Train adapter + toy scorer -> checkpoints");
  add_eval_inputs(fit);
  fit->add_option("--checkpoint-dir", o.checkpoint_dir, "Output directory for checkpoints");
  fit->add_option("--alpha", o.alpha, "Vision weight in the fusion");
  fit->add_option("--steps", o.steps, "Gradient steps");
  fit->add_option("--lr", o.lr, "Step size");
  fit->add_option("--momentum", o.momentum, "Momentum in [0, 1)");

  auto *eval = app.add_subcommand("eval", "Evaluate -> EvalReport JSON");
  add_eval_inputs(eval);
  add_model(eval);
  add_out(eval);

  auto *ablate = app.add_subcommand("ablate", "Evaluate under each perturbation -> AblationReport JSON");
  add_eval_inputs(ablate);
  add_model(ablate);
  ablate->add_option("--substitute-store", o.substitute_store, "Frame embeddings of defaced videos");
  add_out(ablate);

  auto *report = app.add_subcommand("report", "Reports");
  report->require_subcommand(1);
  auto *deltas = report->add_subcommand("deltas", "Four accuracies -> ablation deltas");
  double acc_base = 0, acc_blank = 0, acc_gibberish = 0;
  std::optional<double> acc_defaced;
  std::string unit = "auto";
  deltas->add_option("--base", acc_base, "Accuracy with correct inputs")->required();
  deltas->add_option("--defaced", acc_defaced, "Accuracy with defaced video");
  deltas->add_option("--blank", acc_blank, "Accuracy with blank video embeddings")->required();
  deltas->add_option("--gibberish", acc_gibberish, "Accuracy with gibberish transcript")->required();
  deltas->add_option("--unit", unit, "auto, fraction or percent");
  add_out(deltas);

  auto *check = app.add_subcommand("check", "Self checks");
  check->require_subcommand(1);
  auto *gradients = check->add_subcommand("gradients", "Finite-difference check of the joint loss");
  std::vector<int> dims = {2, 8, 32};
  double tolerance = 1e-4;
  int examples = 6;
  gradients->add_option("--dim", dims, "Embedding dims to check");
  gradients->add_option("--tolerance", tolerance, "Max relative error");
  gradients->add_option("--examples", examples, "Random instances per dim");
  add_seed(gradients);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError &e) {
    int rc = app.exit(e);
    return rc == 0 ? 0 : kExitUsage;
  }
  g_log.set_json(log_json);

  try {
    PipelineConfig c = Resolve(config_path, o);
    if (*turns_build) return CmdTurnsBuild(c);
    if (*plan_build) return CmdPlanBuild(c);
    if (*embed_synth) return CmdEmbedSynth(c);
    if (*fit) return CmdFit(c);
    if (*eval) return CmdEval(c);
    if (*ablate) return CmdAblate(c);
    if (*deltas) return CmdReportDeltas(c, acc_base, acc_defaced, acc_blank, acc_gibberish, unit);
    if (*gradients) return CmdCheckGradients(c, dims, tolerance, examples);
  } catch (const ConfigError &e) {
    g_log.Error("config_error", {{"message", e.what()}});
    return kExitUsage;
  } catch (const DataError &e) {
    g_log.Error("data_error", {{"message", e.what()}});
    return kExitData;
  } catch (const stsvlcc::Error &e) {
    g_log.Error("data_error", {{"message", e.what()}});
    return kExitData;
  } catch (const std::exception &e) {
    g_log.Error("internal_error", {{"message", e.what()}});
    return kExitInternal;
  }
  return kExitUsage;
}
