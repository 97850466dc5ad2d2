// Copyright 2026 The emgspeech Authors. All Rights Reserved.
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

#include "commands.hpp"

#include "provenance.hpp"

#include "emgspeech/clustering.hpp"
#include "emgspeech/ctc.hpp"
#include "emgspeech/dsp.hpp"
#include "emgspeech/error.hpp"
#include "emgspeech/metrics.hpp"
#include "emgspeech/parallel.hpp"
#include "emgspeech/probe.hpp"
#include "emgspeech/quantizer.hpp"
#include "emgspeech/rng.hpp"
#include "emgspeech/signal_io.hpp"
#include "emgspeech/spd.hpp"
#include "emgspeech/synth.hpp"
#include "emgspeech/tds.hpp"
#include "emgspeech/trainer.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <map>
#include <set>
#include <sstream>

namespace emgspeech::cli {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

// ---------------------------------------------------------------------------
// Shared plumbing
// ---------------------------------------------------------------------------

void RequireManifest(const Context& ctx) {
  if (ctx.manifest.empty()) throw Error(ErrorCode::kConfig, ctx.subcommand + " needs --manifest");
}

void RequireOut(const Context& ctx) {
  if (ctx.out.empty()) throw Error(ErrorCode::kConfig, ctx.subcommand + " needs --out");
}

fs::path Absolute(const fs::path& p) { return fs::absolute(p).lexically_normal(); }

std::string RelativeTo(const fs::path& target, const fs::path& base) {
  return Absolute(target).lexically_relative(Absolute(base)).generic_string();
}

struct Inputs {
  Manifest manifest;
  Provenance provenance;
};

Inputs Open(const Context& ctx) {
  RequireManifest(ctx);
  RequireOut(ctx);
  Inputs in{Manifest::Load(ctx.manifest), Provenance(ctx.subcommand, ctx.effective, ctx.config.seed)};
  in.manifest.CheckSplits();
  in.provenance.AddInput("manifest", ctx.manifest);
  return in;
}

/// Copy of `u` whose paths resolve relative to `out`.
Utterance Rebase(const Manifest& m, Utterance u, const fs::path& out) {
  if (!u.recording.empty()) u.recording = RelativeTo(m.Resolve(u.recording), out);
  for (auto& [key, path] : u.features) path = RelativeTo(m.Resolve(path), out);
  for (auto& [key, path] : u.labels) path = RelativeTo(m.Resolve(path), out);
  return u;
}

Manifest RebasedManifest(const Manifest& in, const fs::path& out) {
  Manifest m;
  m.root = out;
  m.electrodes = in.electrodes;
  m.vocab = in.vocab;
  for (const auto& u : in.utterances) m.utterances.push_back(Rebase(in, u, out));
  return m;
}

void WriteText(const fs::path& path, const std::string& text) {
  fs::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorCode::kIo, "cannot write " + path.string());
  out << text;
}

void WriteJson(const fs::path& path, const json& j) { WriteText(path, j.dump(2) + "\n"); }

std::string Num(double value) {
  std::ostringstream s;
  s.precision(9);
  s << value;
  return s.str();
}

Vocabulary TargetVocabulary(VocabKind kind, const Manifest& manifest) {
  if (kind == VocabKind::kUnits100) return Vocabulary::Units100();
  if (manifest.vocab.kind() == VocabKind::kPhonemes) return manifest.vocab;
  return Vocabulary::DefaultPhonemes();
}

std::string TargetKey(VocabKind kind) { return kind == VocabKind::kUnits100 ? "units" : "phonemes"; }

const std::string& FeaturePath(const Utterance& u, const std::string& key) {
  const auto it = u.features.find(key);
  if (it == u.features.end()) {
    throw Error(ErrorCode::kInvalidArgument, "utterance " + u.id + " has no '" + key + "' features");
  }
  return it->second;
}

const std::string& LabelPath(const Utterance& u, const std::string& key) {
  const auto it = u.labels.find(key);
  if (it == u.labels.end()) {
    throw Error(ErrorCode::kInvalidArgument, "utterance " + u.id + " has no '" + key + "' labels");
  }
  return it->second;
}

FeatureSequence LoadFeatures(const Manifest& m, const Utterance& u, const std::string& key, Provenance& prov) {
  const std::string& rel = FeaturePath(u, key);
  prov.AddInput(rel, m.Resolve(rel));
  const bool emg = key == "diag-e" || key == "vec-e" || key == "vec-b";
  return LoadFeatureSequence(m.Resolve(rel), emg ? std::optional<std::uint32_t>(m.electrodes) : std::nullopt);
}

LabelSequence LoadLabels(const Manifest& m, const Utterance& u, const std::string& key,
                         const Vocabulary& vocab, Provenance& prov) {
  const std::string& rel = LabelPath(u, key);
  prov.AddInput(rel, m.Resolve(rel));
  LabelSequence labels = LoadLabelSequence(m.Resolve(rel));
  if (labels.vocab != vocab.kind()) {
    throw Error(ErrorCode::kInvalidArgument, "utterance " + u.id + ": labels use vocabulary " +
                                                 std::string(VocabKindName(labels.vocab)) + ", expected " +
                                                 std::string(VocabKindName(vocab.kind())));
  }
  labels.Validate(vocab);
  return labels;
}

std::vector<const Utterance*> WithFeature(const std::vector<const Utterance*>& list, const std::string& key) {
  std::vector<const Utterance*> out;
  for (const auto* u : list) {
    if (u->features.count(key)) out.push_back(u);
  }
  return out;
}

struct LabelledSet {
  std::vector<const Utterance*> utterances;
  std::vector<SequenceExample> examples;
  std::uint32_t bands = 0;
};

LabelledSet LoadExamples(const Manifest& m, Split split, const std::string& feature_key,
                         const std::string& label_key, const Vocabulary& vocab, Provenance& prov) {
  LabelledSet set;
  for (const auto* u : WithFeature(m.InSplit(split), feature_key)) {
    const FeatureSequence f = LoadFeatures(m, *u, feature_key, prov);
    set.bands = f.bands;
    set.examples.push_back({f.frames, LoadLabels(m, *u, label_key, vocab, prov).symbols});
    set.utterances.push_back(u);
  }
  return set;
}

std::string VocoderCommand(const std::string& pattern, const std::string& units, const std::string& wav) {
  std::string cmd = pattern;
  for (const auto& [key, value] : {std::pair<std::string, std::string>{"{units}", units}, {"{wav}", wav}}) {
    for (std::size_t pos = cmd.find(key); pos != std::string::npos; pos = cmd.find(key, pos + value.size())) {
      cmd.replace(pos, key.size(), value);
    }
  }
  return cmd;
}

Checkpoint OpenCheckpoint(const Context& ctx, const Vocabulary& vocab, Provenance& prov) {
  if (ctx.checkpoint.empty()) throw Error(ErrorCode::kConfig, ctx.subcommand + " needs --checkpoint");
  prov.AddInput("checkpoint", ctx.checkpoint);
  Checkpoint ck = LoadCheckpoint(ctx.checkpoint);
  if (ck.vocab_hash != vocab.Hash() || ck.model.arch().classes != vocab.size() + 1) {
    throw Error(ErrorCode::kConfig, "checkpoint was trained on a different vocabulary than target '" +
                                        std::string(VocabKindName(vocab.kind())) + "'");
  }
  return ck;
}

MatrixXfR ConcatRows(const std::vector<MatrixXfR>& parts, Eigen::Index cols) {
  Eigen::Index rows = 0;
  for (const auto& p : parts) rows += p.rows();
  MatrixXfR out(rows, cols);
  Eigen::Index at = 0;
  for (const auto& p : parts) {
    out.middleRows(at, p.rows()) = p;
    at += p.rows();
  }
  return out;
}

}  // namespace

// ---------------------------------------------------------------------------
// preprocess
// ---------------------------------------------------------------------------

void RunPreprocess(const Context& ctx) {
  auto [in, prov] = Open(ctx);
  const PipelineConfig& c = ctx.config;
  Manifest out = RebasedManifest(in, ctx.out);
  std::vector<std::size_t> todo;
  for (std::size_t i = 0; i < in.utterances.size(); ++i) {
    const auto& u = in.utterances[i];
    if (u.recording.empty()) continue;
    prov.AddInput(u.recording, in.Resolve(u.recording));
    todo.push_back(i);
  }
  ParallelFor(todo.size(), c.Workers(), [&](std::size_t n) {
    const std::size_t i = todo[n];
    const Utterance& u = in.utterances[i];
    Recording rec = LoadRecording(in.Resolve(u.recording));
    if (c.subtract_reference && !rec.reference_channel.empty()) rec = SubtractReference(rec);
    FilterSpec spec = c.filter;
    spec.fs = rec.fs;
    rec = Bandpass(rec, spec);
    const std::string rel = "recordings/" + u.id + ".emg";
    SaveRecording(rec, ctx.out / rel);
    out.utterances[i].recording = rel;
  });
  out.Save(ctx.out / "manifest.json");
  prov.Write(ctx.out);
}

// ---------------------------------------------------------------------------
// features
// ---------------------------------------------------------------------------

void RunFeatures(const Context& ctx) {
  auto [in, prov] = Open(ctx);
  const PipelineConfig& c = ctx.config;
  const std::string key(FeatureKindName(c.feature));
  Manifest out = RebasedManifest(in, ctx.out);
  std::vector<std::size_t> todo;
  for (std::size_t i = 0; i < in.utterances.size(); ++i) {
    const auto& u = in.utterances[i];
    if (u.recording.empty()) continue;
    prov.AddInput(u.recording, in.Resolve(u.recording));
    todo.push_back(i);
  }
  const BandLayout layout = c.band_layout == BandMode::kLog5 ? BandLayout::Log5() : BandLayout::Lin31();
  ParallelFor(todo.size(), c.Workers(), [&](std::size_t n) {
    const std::size_t i = todo[n];
    const Utterance& u = in.utterances[i];
    const Recording rec = LoadRecording(in.Resolve(u.recording));
    if (!rec.reference_channel.empty()) {
      throw Error(ErrorCode::kInvalidArgument,
                  "recording " + u.id + " still carries its reference channel; run preprocess first");
    }
    if (rec.channels() != in.electrodes) {
      throw Error(ErrorCode::kDimensionMismatch, "recording " + u.id + " has " + std::to_string(rec.channels()) +
                                                     " channels, manifest declares " +
                                                     std::to_string(in.electrodes));
    }
    FeatureSequence seq;
    seq.kind = c.feature;
    seq.electrodes = in.electrodes;
    seq.hop_ms = c.hop_ms;
    std::vector<MatrixXfR> parts;
    Eigen::Index dim = 0;
    for (const Recording& segment : SplitSegments(rec)) {
      if (c.feature == FeatureKind::kVecB) {
        const double window = c.BandWindowMs();
        if (segment.length() < FrameGeometry::FromMs(segment.fs, c.hop_ms, window).window) continue;
        FeatureSequence bands = EmgBandPower(segment, layout, c.hop_ms, window);
        seq.window_ms = window;
        seq.bands = bands.bands;
        dim = bands.frames.cols();
        parts.push_back(std::move(bands.frames));
        continue;
      }
      if (segment.length() < FrameGeometry::FromMs(segment.fs, c.hop_ms, c.window_ms).window) continue;
      seq.window_ms = c.window_ms;
      const auto frames = Frame(segment, c.hop_ms, c.window_ms);
      dim = c.feature == FeatureKind::kDiagE ? static_cast<Eigen::Index>(in.electrodes)
                                             : static_cast<Eigen::Index>(in.electrodes) * in.electrodes;
      MatrixXfR block(static_cast<Eigen::Index>(frames.size()), dim);
      for (std::size_t t = 0; t < frames.size(); ++t) {
        const CovFrame cov = Covariance(frames[t], c.ridge_rel);
        const Eigen::VectorXd row = c.feature == FeatureKind::kDiagE ? DiagPower(cov) : VecCov(cov);
        block.row(static_cast<Eigen::Index>(t)) = row.transpose().cast<float>();
      }
      parts.push_back(std::move(block));
    }
    seq.frames = ConcatRows(parts, dim);
    if (seq.frames.rows() == 0) {
      throw Error(ErrorCode::kInvalidArgument, "recording " + u.id + " is shorter than one analysis window");
    }
    const std::string rel = "features/" + u.id + "." + key + ".feat";
    SaveFeatureSequence(seq, ctx.out / rel);
    out.utterances[i].features[key] = rel;
  });
  out.Save(ctx.out / "manifest.json");
  prov.Write(ctx.out);
}

// ---------------------------------------------------------------------------
// cluster-eval
// ---------------------------------------------------------------------------

void RunClusterEval(const Context& ctx) {
  auto [in, prov] = Open(ctx);
  const PipelineConfig& c = ctx.config;
  std::vector<const Utterance*> items;
  for (const auto& u : in.utterances) {
    if (u.gesture && !u.recording.empty()) items.push_back(&u);
  }
  if (items.empty()) throw Error(ErrorCode::kInvalidArgument, "manifest has no gesture recordings");

  std::vector<CovFrame> covs(items.size());
  for (const auto* u : items) prov.AddInput(u->recording, in.Resolve(u->recording));
  ParallelFor(items.size(), c.Workers(), [&](std::size_t i) {
    Recording rec = LoadRecording(in.Resolve(items[i]->recording));
    if (c.subtract_reference && !rec.reference_channel.empty()) rec = SubtractReference(rec);
    if (c.cluster_bandpass) {
      FilterSpec spec = c.filter;
      spec.fs = rec.fs;
      rec = Bandpass(rec, spec);
    }
    covs[i] = Covariance(rec.samples, c.ridge_rel);
  });

  std::map<std::string, std::vector<std::size_t>> groups;
  for (std::size_t i = 0; i < items.size(); ++i) {
    groups[c.cluster_per_subject ? items[i]->subject : std::string("all")].push_back(i);
  }

  json report;
  report["per_subject"] = c.cluster_per_subject;
  report["items"] = items.size();
  std::vector<std::int32_t> cluster_of(items.size(), -1);
  std::map<std::string, std::vector<std::int32_t>> clusters_by_metric;
  for (const auto& metric_name : c.cluster_metrics) {
    const ClusterMetric metric =
        metric_name == "geodesic" ? ClusterMetric::kGeodesic : ClusterMetric::kEuclideanDiagonal;
    json metric_report;
    double sum = 0.0;
    for (const auto& [subject, members] : groups) {
      std::set<std::int32_t> gestures;
      for (auto i : members) gestures.insert(*items[i]->gesture);
      const std::vector<std::int32_t> gesture_ids(gestures.begin(), gestures.end());
      GestureSet set;
      set.k = static_cast<std::int32_t>(gesture_ids.size());
      for (auto i : members) {
        const auto label = std::lower_bound(gesture_ids.begin(), gesture_ids.end(), *items[i]->gesture) -
                           gesture_ids.begin();
        set.items.push_back({covs[i], static_cast<std::int32_t>(label)});
      }
      set.Validate();
      const Eigen::MatrixXd distances = DistanceMatrix(set, metric, c.Workers());
      KMedoidsOptions options;
      options.k = static_cast<std::size_t>(set.k);
      options.seed = c.seed;
      options.max_iter = c.cluster_max_iter;
      const KMedoidsResult result = KMedoids(distances, options);
      const AccuracyReport acc = ClusterAccuracy(result.assignment, set.Labels());
      for (std::size_t n = 0; n < members.size(); ++n) cluster_of[members[n]] = result.assignment[n];
      json confusion = json::array();
      for (Eigen::Index r = 0; r < acc.confusion.rows(); ++r) {
        json row = json::array();
        for (Eigen::Index col = 0; col < acc.confusion.cols(); ++col) row.push_back(acc.confusion(r, col));
        confusion.push_back(row);
      }
      json medoid_ids = json::array();
      for (auto m : result.medoids) medoid_ids.push_back(items[members[m]]->id);
      json cluster_to_gesture = json::array();
      for (auto label : acc.cluster_to_label) {
        cluster_to_gesture.push_back(label >= 0 && label < set.k ? gesture_ids[static_cast<std::size_t>(label)] : -1);
      }
      metric_report["subjects"][subject] = {{"accuracy", acc.accuracy},
                                            {"confusion", confusion},
                                            {"gestures", gesture_ids},
                                            {"cluster_to_gesture", cluster_to_gesture},
                                            {"medoids", medoid_ids},
                                            {"cost", result.cost},
                                            {"swap_iterations", result.swap_iterations}};
      sum += acc.accuracy;
    }
    metric_report["mean_accuracy"] = sum / static_cast<double>(groups.size());
    report["metrics"][metric_name] = metric_report;
    clusters_by_metric[metric_name] = cluster_of;

    // PCA over the coordinates in which the metric is Euclidean.
    Eigen::MatrixXd coords;
    for (std::size_t i = 0; i < items.size(); ++i) {
      const Eigen::VectorXd row =
          metric == ClusterMetric::kGeodesic ? LogCholeskyCoords(Cholesky(covs[i])) : DiagPower(covs[i]);
      if (i == 0) coords.resize(static_cast<Eigen::Index>(items.size()), row.size());
      coords.row(static_cast<Eigen::Index>(i)) = row.transpose();
    }
    if (items.size() >= 3) {
      const PcaEmbedding pca = PcaEmbed2d(coords);
      if (pca.rank_deficient) std::cerr << "warning: " << metric_name << " features have rank < 2\n";
      std::ostringstream csv;
      csv.precision(9);
      csv << "id,subject,gesture,cluster,x,y\n";
      for (std::size_t i = 0; i < items.size(); ++i) {
        csv << items[i]->id << ',' << items[i]->subject << ',' << *items[i]->gesture << ',' << cluster_of[i] << ','
            << pca.coords(static_cast<Eigen::Index>(i), 0) << ',' << pca.coords(static_cast<Eigen::Index>(i), 1)
            << '\n';
      }
      WriteText(ctx.out / ("pca_" + metric_name + ".csv"), csv.str());
      report["metrics"][metric_name]["pca_explained_variance"] = {pca.explained_variance(0),
                                                                  pca.explained_variance(1)};
    }
  }
  WriteJson(ctx.out / "cluster_report.json", report);
  prov.Write(ctx.out);
}

// ---------------------------------------------------------------------------
// probe
// ---------------------------------------------------------------------------

void RunProbe(const Context& ctx) {
  auto [in, prov] = Open(ctx);
  const PipelineConfig& c = ctx.config;
  const std::string target = ctx.target_flag.value_or(c.probe_target);
  const FeatureKind target_kind = ParseFeatureKind(target);
  if (target_kind == FeatureKind::kVecE && !c.allow_vec_e) {
    throw Error(ErrorCode::kConfig, "probing vec-e is ill-posed; set probe.allow_vec_e to enable it");
  }
  if (c.probe_inputs.empty()) throw Error(ErrorCode::kConfig, "probe.inputs is empty");

  // Targets are shared by every layer; load them once per split.
  struct SplitData {
    std::vector<const Utterance*> utterances;
    std::vector<MatrixXfR> targets;
  };
  std::map<Split, SplitData> data;
  for (Split split : {Split::kTrain, Split::kVal, Split::kTest}) {
    auto& d = data[split];
    for (const auto* u : WithFeature(in.InSplit(split), target)) {
      bool has_all = true;
      for (const auto& key : c.probe_inputs) has_all = has_all && u->features.count(key) > 0;
      if (!has_all) continue;
      d.utterances.push_back(u);
      d.targets.push_back(LoadFeatures(in, *u, target, prov).frames);
    }
  }
  if (data[Split::kTrain].utterances.empty()) throw Error(ErrorCode::kInvalidArgument, "no training utterances to probe");
  if (data[Split::kTest].utterances.empty()) throw Error(ErrorCode::kInvalidArgument, "no test utterances to probe");

  auto stack = [&](Split split, const std::string& key, Eigen::MatrixXd& x, Eigen::MatrixXd& y) {
    const auto& d = data[split];
    std::vector<MatrixXfR> inputs;
    for (std::size_t i = 0; i < d.utterances.size(); ++i) {
      MatrixXfR frames = LoadFeatures(in, *d.utterances[i], key, prov).frames;
      if (frames.rows() != d.targets[i].rows()) {
        throw Error(ErrorCode::kSizeMismatch, "length mismatch in utterance " + d.utterances[i]->id + ": " + key +
                                                  " has " + std::to_string(frames.rows()) + " frames, " + target +
                                                  " has " + std::to_string(d.targets[i].rows()));
      }
      inputs.push_back(std::move(frames));
    }
    if (d.utterances.empty()) {
      x.resize(0, 0);
      y.resize(0, 0);
      return;
    }
    x = ConcatRows(inputs, inputs.front().cols()).cast<double>();
    y = ConcatRows(d.targets, d.targets.front().cols()).cast<double>();
  };

  std::vector<ProbeSplit> layers(c.probe_inputs.size());
  for (std::size_t l = 0; l < c.probe_inputs.size(); ++l) {
    const auto& key = c.probe_inputs[l];
    stack(Split::kTrain, key, layers[l].x_train, layers[l].y_train);
    stack(Split::kVal, key, layers[l].x_val, layers[l].y_val);
    stack(Split::kTest, key, layers[l].x_test, layers[l].y_test);
    if (layers[l].x_train.rows() * 10 < layers[l].x_train.cols()) {
      std::cerr << "warning: " << key << " has fewer than d/10 training frames\n";
    }
  }
  const auto reports = LayerSweep(layers, c.lambda_grid, c.Workers());

  json j;
  j["target"] = target;
  j["aggregation"] = "per-dimension Pearson r over pooled test frames, then unweighted mean";
  for (std::size_t l = 0; l < reports.size(); ++l) {
    const auto& r = reports[l];
    json per_dim = json::array();
    for (Eigen::Index d = 0; d < r.per_dim_r.size(); ++d) {
      if (std::isnan(r.per_dim_r(d))) {
        per_dim.push_back(nullptr);
      } else {
        per_dim.push_back(r.per_dim_r(d));
      }
    }
    j["layers"].push_back({{"layer_id", l},
                           {"input", c.probe_inputs[l]},
                           {"mean_r", r.mean_r},
                           {"n_test_frames", r.n_test_frames},
                           {"excluded_dims", r.excluded_dims},
                           {"per_dim_r", per_dim}});
  }
  WriteText(ctx.out / "probe_report.csv", ProbeReportsCsv(reports));
  WriteJson(ctx.out / "probe_report.json", j);
  prov.Write(ctx.out);
}

// ---------------------------------------------------------------------------
// quantize
// ---------------------------------------------------------------------------

void RunQuantize(const Context& ctx) {
  auto [in, prov] = Open(ctx);
  const PipelineConfig& c = ctx.config;
  const std::string& key = c.quantize_input;
  std::vector<MatrixXfR> train;
  for (const auto* u : WithFeature(in.InSplit(Split::kTrain), key)) train.push_back(LoadFeatures(in, *u, key, prov).frames);
  if (train.empty()) throw Error(ErrorCode::kInvalidArgument, "no training utterances with '" + key + "' features");
  const MatrixXdR frames = ConcatRows(train, train.front().cols()).cast<double>();

  KMeansOptions options;
  options.k = c.codebook_size;
  options.seed = c.seed;
  options.max_iter = c.kmeans_max_iter;
  options.tol = c.kmeans_tol;
  options.workers = c.Workers();
  const KMeansResult fit = FitCodebook(frames, options);
  SaveCodebook(fit.codebook, ctx.out / "codebook.cb");

  Manifest out = RebasedManifest(in, ctx.out);
  for (std::size_t i = 0; i < in.utterances.size(); ++i) {
    const auto& u = in.utterances[i];
    if (!u.features.count(key)) continue;
    const MatrixXdR x = LoadFeatures(in, u, key, prov).frames.cast<double>();
    const LabelSequence units = Quantize(fit.codebook, x, c.collapse_repeats, c.Workers());
    const std::string rel = "labels/" + u.id + ".units.lab";
    SaveLabelSequence(units, ctx.out / rel);
    EmitUnitTranscript(units, ctx.out / ("labels/" + u.id + ".units.txt"));
    out.utterances[i].labels["units"] = rel;
  }
  out.Save(ctx.out / "manifest.json");
  WriteJson(ctx.out / "quantize_report.json", {{"k", c.codebook_size},
                                               {"input", key},
                                               {"train_frames", frames.rows()},
                                               {"iterations", fit.iterations},
                                               {"inertia_trace", fit.inertia_trace}});
  prov.Write(ctx.out);
}

// ---------------------------------------------------------------------------
// train / decode / eval
// ---------------------------------------------------------------------------

void RunTrain(const Context& ctx) {
  auto [in, prov] = Open(ctx);
  const PipelineConfig& c = ctx.config;
  const std::string key(FeatureKindName(c.feature));
  const Vocabulary vocab = TargetVocabulary(c.target, in);
  const std::string label_key = TargetKey(c.target);
  const LabelledSet train = LoadExamples(in, Split::kTrain, key, label_key, vocab, prov);
  const LabelledSet val = LoadExamples(in, Split::kVal, key, label_key, vocab, prov);
  if (train.examples.empty()) throw Error(ErrorCode::kInvalidArgument, "no training utterances");

  TdsArch arch;
  arch.d_in = static_cast<std::size_t>(train.examples.front().features.cols());
  arch.hidden = c.hidden;
  arch.blocks = c.blocks;
  arch.kernel = c.kernel;
  arch.classes = vocab.size() + 1;
  arch.kind = c.feature;
  arch.electrodes = in.electrodes;
  arch.bands = train.bands;
  TdsModel<float> model(arch);
  model.InitializeRandom(Rng::Derive(c.seed, 1));
  TrainConfig tc = c.train;
  tc.workers = c.Workers();
  const TrainResult result = Train(std::move(model), train.examples, val.examples, tc);

  SaveCheckpoint(result.best, vocab.Hash(), c.seed, ctx.out / "model.ckpt");
  WriteText(ctx.out / "metrics.csv", TrainingMetricsCsv(result.history));
  WriteJson(ctx.out / "train_summary.json",
            {{"best_epoch", result.best_epoch},
             {"epochs_run", result.history.size()},
             {"diverged", result.diverged},
             {"parameters", result.best.params().size()},
             {"receptive_field", arch.ReceptiveField()},
             {"train_error_rate", ErrorRate(result.best, train.examples, tc.workers)},
             {"val_error_rate", val.examples.empty() ? json(nullptr)
                                                     : json(ErrorRate(result.best, val.examples, tc.workers))}});
  prov.Write(ctx.out);
}

void RunDecode(const Context& ctx) {
  auto [in, prov] = Open(ctx);
  const PipelineConfig& c = ctx.config;
  const std::string key(FeatureKindName(c.feature));
  const Vocabulary vocab = TargetVocabulary(c.target, in);
  const Checkpoint ck = OpenCheckpoint(ctx, vocab, prov);
  const std::string pred_key = TargetKey(c.target) + "-pred";

  Manifest out = RebasedManifest(in, ctx.out);
  std::vector<std::size_t> todo;
  std::vector<SequenceExample> examples;
  for (std::size_t i = 0; i < in.utterances.size(); ++i) {
    if (!in.utterances[i].features.count(key)) continue;
    todo.push_back(i);
    examples.push_back({LoadFeatures(in, in.utterances[i], key, prov).frames, {}});
  }
  const auto decoded = DecodeAll(ck.model, examples, c.Workers());
  std::string commands;
  for (std::size_t n = 0; n < todo.size(); ++n) {
    const Utterance& u = in.utterances[todo[n]];
    LabelSequence labels{decoded[n], vocab.kind()};
    const std::string rel = "decoded/" + u.id + "." + TargetKey(c.target) + ".lab";
    SaveLabelSequence(labels, ctx.out / rel);
    out.utterances[todo[n]].labels[pred_key] = rel;
    if (vocab.kind() == VocabKind::kUnits100) {
      const std::string txt = "decoded/" + u.id + ".units.txt";
      EmitUnitTranscript(labels, ctx.out / txt);
      commands += VocoderCommand(c.vocoder_command, txt, "audio/" + u.id + ".wav") + "\n";
    }
  }
  out.Save(ctx.out / "manifest.json");
  if (!commands.empty()) {
    // Synthesis is left to an external vocoder; print what to run.
    WriteText(ctx.out / "vocoder_commands.txt", commands);
    std::cout << commands;
  }
  prov.Write(ctx.out);
}

void RunEval(const Context& ctx) {
  auto [in, prov] = Open(ctx);
  const PipelineConfig& c = ctx.config;
  const std::string key(FeatureKindName(c.feature));
  const Vocabulary vocab = TargetVocabulary(c.target, in);
  const std::string label_key = TargetKey(c.target);

  std::vector<const Utterance*> utterances;
  std::vector<std::vector<std::int32_t>> targets;
  std::vector<std::vector<std::int32_t>> predictions;
  if (!ctx.checkpoint.empty()) {
    const Checkpoint ck = OpenCheckpoint(ctx, vocab, prov);
    const LabelledSet test = LoadExamples(in, Split::kTest, key, label_key, vocab, prov);
    utterances = test.utterances;
    for (const auto& e : test.examples) targets.push_back(e.target);
    predictions = DecodeAll(ck.model, test.examples, c.Workers());
  } else {
    // Score predictions written by `decode`.
    for (const auto* u : in.InSplit(Split::kTest)) {
      if (!u->labels.count(label_key + "-pred")) continue;
      utterances.push_back(u);
      targets.push_back(LoadLabels(in, *u, label_key, vocab, prov).symbols);
      predictions.push_back(LoadLabels(in, *u, label_key + "-pred", vocab, prov).symbols);
    }
  }
  if (utterances.empty()) throw Error(ErrorCode::kInvalidArgument, "no test utterances to evaluate");
  const ErrorReport report = ComputeErrorRate(targets, predictions);
  json j = json::parse(report.ToJson(c.target == VocabKind::kUnits100 ? "uer" : "per"));
  j["error_rate"] = report.aggregate;
  j["target"] = label_key;
  for (std::size_t i = 0; i < utterances.size(); ++i) {
    const auto& e = report.per_utterance[i];
    j["per_utterance"].push_back(
        {{"id", utterances[i]->id}, {"edits", e.edits}, {"target_len", e.target_len}, {"rate", e.rate}});
  }
  WriteJson(ctx.out / "eval_report.json", j);
  std::cout << (c.target == VocabKind::kUnits100 ? "UER " : "PER ") << Num(100.0 * report.aggregate) << "%\n";
  prov.Write(ctx.out);
}

// ---------------------------------------------------------------------------
// synth
// ---------------------------------------------------------------------------

void RunSynth(const Context& ctx) {
  RequireOut(ctx);
  const PipelineConfig& c = ctx.config;
  Provenance prov(ctx.subcommand, ctx.effective, c.seed);
  Manifest m;
  m.root = ctx.out;
  m.vocab = Vocabulary::Units100();

  if (c.synth_task == "seq") {
    SynthSpec spec;
    spec.seed = c.seed;
    spec.electrodes = c.seq.electrodes;
    spec.k = c.seq.vocab;
    spec.sep = c.seq.sep;
    spec.noise = c.seq.noise;
    spec.min_len = c.seq.min_len;
    spec.max_len = c.seq.max_len;
    spec.utterances = c.seq.train;
    const SeqTask task = GenSeqTask(spec);
    m.electrodes = spec.electrodes;
    const std::vector<std::pair<Split, std::vector<SequenceExample>>> splits = {
        {Split::kTrain, task.examples},
        {Split::kVal, GenSeqExamples(spec, task.templates, Rng::Derive(c.seed, 2), c.seq.val)},
        {Split::kTest, GenSeqExamples(spec, task.templates, Rng::Derive(c.seed, 3), c.seq.test)}};
    for (const auto& [split, examples] : splits) {
      for (std::size_t i = 0; i < examples.size(); ++i) {
        char id[32];
        std::snprintf(id, sizeof id, "%s%04zu", std::string(SplitName(split)).c_str(), i);
        FeatureSequence f;
        f.frames = examples[i].features;
        f.kind = FeatureKind::kDiagE;
        f.electrodes = spec.electrodes;
        Utterance u;
        u.id = id;
        u.split = split;
        u.subject = "synth";
        u.features["diag-e"] = "features/" + u.id + ".diag-e.feat";
        u.labels["units"] = "labels/" + u.id + ".units.lab";
        SaveFeatureSequence(f, ctx.out / u.features["diag-e"]);
        SaveLabelSequence({examples[i].target, VocabKind::kUnits100}, ctx.out / u.labels["units"]);
        m.utterances.push_back(u);
      }
    }
  } else {
    m.electrodes = c.gesture.electrodes;
    for (std::size_t s = 0; s < c.gesture.subjects; ++s) {
      SynthSpec spec;
      spec.seed = Rng::Derive(c.seed, s);
      spec.electrodes = c.gesture.electrodes;
      spec.k = c.gesture.classes;
      spec.n_per_class = c.gesture.repetitions;
      spec.sep = c.gesture.sep;
      spec.noise = c.gesture.noise;
      const GestureSet set = GenGestureSet(spec);
      char subject[16];
      std::snprintf(subject, sizeof subject, "s%02zu", s + 1);
      std::vector<Utterance> made(set.items.size());
      ParallelFor(set.items.size(), c.Workers(), [&](std::size_t i) {
        Recording rec;
        rec.samples = SampleSignal(set.items[i].cov, c.gesture.samples, Rng::Derive(spec.seed, 1000 + i));
        rec.fs = 5000.0;
        for (std::uint32_t v = 1; v <= spec.electrodes; ++v) rec.channel_ids.push_back(std::to_string(v));
        rec.segments = {{0, static_cast<std::int64_t>(c.gesture.samples)}};
        char id[48];
        std::snprintf(id, sizeof id, "%s_g%02d_r%02zu", subject, set.items[i].label, i % spec.n_per_class);
        Utterance u;
        u.id = id;
        u.subject = subject;
        u.gesture = set.items[i].label;
        u.recording = "recordings/" + u.id + ".emg";
        SaveRecording(rec, ctx.out / u.recording);
        made[i] = u;
      });
      for (auto& u : made) m.utterances.push_back(std::move(u));
    }
  }
  m.Save(ctx.out / "manifest.json");
  prov.Write(ctx.out);
}

// ---------------------------------------------------------------------------
// report
// ---------------------------------------------------------------------------

namespace {

std::vector<std::string> CsvLines(const fs::path& path) {
  std::ifstream in(path);
  std::vector<std::string> lines;
  for (std::string line; std::getline(in, line);) {
    if (!line.empty()) lines.push_back(line);
  }
  return lines;
}

json ReadJson(const fs::path& path) {
  std::ifstream in(path);
  try {
    return json::parse(in);
  } catch (const json::parse_error& e) {
    throw Error(ErrorCode::kIo, path.string() + ": " + e.what());
  }
}

}  // namespace

void RunReport(const Context& ctx) {
  RequireOut(ctx);
  if (ctx.inputs.empty()) throw Error(ErrorCode::kConfig, "report needs one or more run directories");
  Provenance prov(ctx.subcommand, ctx.effective, ctx.config.seed);
  json summary;
  std::vector<ErrorReport> runs;
  std::string probe_csv;
  std::string training_csv;
  std::string cluster_csv = "run,metric,mean_accuracy\n";
  std::string runs_csv = "run,error_rate,mean_of_rates\n";
  for (std::size_t r = 0; r < ctx.inputs.size(); ++r) {
    const fs::path dir = ctx.inputs[r];
    if (!fs::is_directory(dir)) throw Error(ErrorCode::kIo, "run directory " + dir.string() + " does not exist");
    const std::string run = std::to_string(r);
    json entry{{"run", r}, {"dir", dir.filename().string()}};
    bool found = false;
    if (fs::exists(dir / "eval_report.json")) {
      prov.AddInput(run + "/eval_report.json", dir / "eval_report.json");
      const json e = ReadJson(dir / "eval_report.json");
      ErrorReport er;
      er.aggregate = e.at("error_rate").get<double>();
      er.mean_of_rates = e.at("mean_of_rates").get<double>();
      runs.push_back(er);
      entry["error_rate"] = er.aggregate;
      runs_csv += run + "," + Num(er.aggregate) + "," + Num(er.mean_of_rates) + "\n";
      found = true;
    }
    if (fs::exists(dir / "cluster_report.json")) {
      prov.AddInput(run + "/cluster_report.json", dir / "cluster_report.json");
      const json cl = ReadJson(dir / "cluster_report.json");
      for (const auto& [metric, body] : cl.at("metrics").items()) {
        entry["cluster"][metric] = body.at("mean_accuracy");
        cluster_csv += run + "," + metric + "," + Num(body.at("mean_accuracy").get<double>()) + "\n";
      }
      found = true;
    }
    if (fs::exists(dir / "probe_report.csv")) {
      prov.AddInput(run + "/probe_report.csv", dir / "probe_report.csv");
      const auto lines = CsvLines(dir / "probe_report.csv");
      if (probe_csv.empty() && !lines.empty()) probe_csv = "run," + lines.front() + "\n";
      for (std::size_t i = 1; i < lines.size(); ++i) probe_csv += run + "," + lines[i] + "\n";
      found = true;
    }
    if (fs::exists(dir / "metrics.csv")) {
      prov.AddInput(run + "/metrics.csv", dir / "metrics.csv");
      const auto lines = CsvLines(dir / "metrics.csv");
      if (training_csv.empty() && !lines.empty()) training_csv = "run," + lines.front() + "\n";
      for (std::size_t i = 1; i < lines.size(); ++i) training_csv += run + "," + lines[i] + "\n";
      found = true;
    }
    if (!found) throw Error(ErrorCode::kInvalidArgument, dir.string() + " holds no reports");
    summary["runs"].push_back(entry);
  }
  if (!runs.empty()) {
    const RunSummary s = SummarizeRuns(runs);
    summary["error_rate"] = {{"mean", s.mean}, {"stddev", s.stddev}, {"runs", s.aggregates.size()}};
    WriteText(ctx.out / "error_rates.csv", runs_csv);
  }
  if (!probe_csv.empty()) WriteText(ctx.out / "probe_layers.csv", probe_csv);
  if (!training_csv.empty()) WriteText(ctx.out / "training_curves.csv", training_csv);
  if (summary.contains("runs") && cluster_csv.find('\n') + 1 < cluster_csv.size()) {
    WriteText(ctx.out / "cluster_accuracy.csv", cluster_csv);
  }
  WriteJson(ctx.out / "report.json", summary);
  prov.Write(ctx.out);
}

}  // namespace emgspeech::cli
