/*
 * Copyright 2026 The wcprank Authors.
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     https://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

// Command-line driver: data generation, labeling, training, evaluation,
// prediction and the experiment sweeps.

#include <cstdio>
#include <filesystem>
#include <optional>
#include <string>

#include "CLI11.hpp"
#include "json.hpp"
#include "wcprank/features.h"
#include "wcprank/io.h"
#include "wcprank/labeling.h"
#include "wcprank/metrics.h"
#include "wcprank/pipeline.h"
#include "wcprank/ranker.h"

namespace fs = std::filesystem;
using namespace wcprank;

namespace {

constexpr const char* kConfigFile = "config.json";
constexpr const char* kEventsFile = "events.csv";
constexpr const char* kLabelsFile = "labels.csv";

std::string Join(const std::string& dir, const std::string& name) {
  return (fs::path(dir) / name).string();
}

struct CommonOptions {
  std::string config_path;
  std::optional<std::uint64_t> seed;
  int threads = 1;
};

pipeline::ExperimentConfig ResolveConfig(const CommonOptions& o) {
  pipeline::ExperimentConfig c;
  if (!o.config_path.empty()) c = pipeline::LoadConfig(o.config_path);
  if (o.seed) c.seed = *o.seed;
  c.threads = o.threads;
  c.Validate();
  return c;
}

// Config saved by `generate` next to the data; the thread count always
// comes from the command line.
pipeline::ExperimentConfig DirConfig(const std::string& dir, int threads) {
  auto c = pipeline::LoadConfig(Join(dir, kConfigFile));
  c.threads = threads;
  return c.Resolved();
}

void EnsureDir(const std::string& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  Require(!ec, "cannot create directory " + dir);
}

struct Splits {
  std::vector<synth::DecisionEvent> train, valid, test;
};

Splits SplitEvents(const pipeline::ExperimentConfig& c,
                   const std::vector<synth::DecisionEvent>& events) {
  const auto split = pipeline::SplitQueries(pipeline::EventIds(events), c.split, c.seed);
  return {pipeline::SelectEvents(events, split.train),
          pipeline::SelectEvents(events, split.valid),
          pipeline::SelectEvents(events, split.test)};
}

std::vector<synth::DecisionEvent> LoadLabelableEvents(const std::string& dir) {
  return synth::LabelableEvents(io::ParseEventsCsv(io::ReadFile(Join(dir, kEventsFile))));
}

int CmdGenerate(const CommonOptions& o, const std::string& out) {
  const auto c = ResolveConfig(o);
  EnsureDir(out);
  const auto data = pipeline::GenerateDataset(c);
  io::WriteFile(Join(out, kConfigFile), pipeline::ConfigToJson(c));
  io::WriteFile(Join(out, "stations.csv"), io::StationsCsv(data.world));
  io::WriteFile(Join(out, "journeys.csv"), io::JourneysCsv(data.journeys));
  io::WriteFile(Join(out, kEventsFile), io::EventsCsv(data.events));
  const auto stats = pipeline::CandidateDistributionStats(data.events);
  std::printf("generated %zu stations, %zu journeys, %zu events (%.2f%% without candidates)\n",
              data.world.stations.size(), data.journeys.size(), data.events.size(),
              stats.pct_zero);
  return 0;
}

int CmdLabel(const std::string& in, const std::string& source, int threads) {
  const auto c = DirConfig(in, threads);
  const auto events = LoadLabelableEvents(in);
  labeling::LabelConfig lc;
  lc.topsis = c.topsis;
  lc.em = c.em;
  lc.grades = c.grades;
  lc.source = source == "topsis" ? labeling::LabelSource::kTopsis
                                 : labeling::LabelSource::kEmSmoothed;
  const auto out = labeling::LabelEvents(events, lc);
  io::WriteFile(Join(in, kLabelsFile), io::LabelsCsv(out.labels));
  if (lc.source == labeling::LabelSource::kEmSmoothed) {
    const auto& m = out.em_model;
    nlohmann::json j = {{"k", m.k},
                        {"pi", m.pi},
                        {"alpha", m.alpha},
                        {"beta", m.beta},
                        {"log_likelihood", m.log_likelihood},
                        {"iterations", m.iterations}};
    io::WriteFile(Join(in, "em_model.json"), j.dump(2) + "\n");
  }
  std::printf("labeled %zu events, %zu candidates\n", events.size(), out.labels.size());
  return 0;
}

int CmdTrain(const std::string& in, const std::string& objective,
             const std::string& feature_set, const std::string& model_out,
             int threads) {
  auto c = DirConfig(in, threads);
  c.train.objective = ranker::ParseObjective(objective);
  const auto events = LoadLabelableEvents(in);
  const auto labels = io::ParseLabelsCsv(io::ReadFile(Join(in, kLabelsFile)));
  const Splits s = SplitEvents(c, events);
  const auto encoder =
      features::FeatureEncoder::Fit(s.train, features::ParseFeatureSet(feature_set));
  const auto train = pipeline::MakeRankingDataset(s.train, labels, encoder);
  const auto valid = pipeline::MakeRankingDataset(s.valid, labels, encoder);
  const auto test = pipeline::MakeRankingDataset(s.test, labels, encoder);
  const std::vector<io::FeaturePart> parts = {
      {"train", &train}, {"valid", &valid}, {"test", &test}};
  io::WriteFile(Join(in, "features.csv"), io::FeaturesCsv(parts));
  auto model = ranker::Train(train, valid, c.train);
  model.preprocessing = encoder.ToJson();
  io::WriteFile(model_out, model.ToJson());
  const auto& best = model.history[static_cast<std::size_t>(model.best_iteration)];
  std::printf("trained %d rounds, best iteration %d (valid NDCG@%d %.4f)\n",
              model.rounds_trained, model.best_iteration, c.train.eval_k,
              best.valid_ndcg);
  return 0;
}

int CmdEvaluate(const std::string& in, const std::string& model_path,
                const std::string& report_path, const std::string& split_name,
                int threads) {
  const auto c = DirConfig(in, threads);
  const auto model = ranker::GbdtRankerModel::FromJson(io::ReadFile(model_path));
  Require(!model.preprocessing.empty(), "model file lacks preprocessing");
  const auto encoder = features::FeatureEncoder::FromJson(model.preprocessing);
  const auto events = LoadLabelableEvents(in);
  const auto labels = io::ParseLabelsCsv(io::ReadFile(Join(in, kLabelsFile)));
  const Splits s = SplitEvents(c, events);
  const auto& chosen = split_name == "train"   ? s.train
                       : split_name == "valid" ? s.valid
                                               : s.test;
  const auto data = pipeline::MakeRankingDataset(chosen, labels, encoder);
  const auto scores = model.Predict(data.features, threads);
  const auto report = metrics::EvaluateRanking(scores, data.labels, data.query_offsets);
  io::WriteFile(report_path, pipeline::ReportToJson(report));
  std::printf("%s: NDCG@10 %.4f  MRR %.4f over %zu queries\n", split_name.c_str(),
              report.ndcg.at(10), report.mrr, report.num_queries);
  return 0;
}

int CmdPredict(const std::string& in, const std::string& model_path,
               const std::string& out_path, int threads) {
  const auto model = ranker::GbdtRankerModel::FromJson(io::ReadFile(model_path));
  Require(!model.preprocessing.empty(), "model file lacks preprocessing");
  const auto encoder = features::FeatureEncoder::FromJson(model.preprocessing);
  const auto events = LoadLabelableEvents(in);
  const auto x = encoder.Transform(events);
  const auto scores = model.Predict(x, threads);
  std::string out = "event_id,candidate_station_id,score,rank\n";
  std::size_t row = 0;
  for (const auto& e : events) {
    const std::size_t n = e.candidates.size();
    std::vector<std::size_t> order(n);
    for (std::size_t j = 0; j < n; ++j) order[j] = j;
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
      return scores[row + a] > scores[row + b];
    });
    std::vector<std::size_t> rank(n);
    for (std::size_t p = 0; p < n; ++p) rank[order[p]] = p + 1;
    for (std::size_t j = 0; j < n; ++j) {
      char buf[32];
      std::snprintf(buf, sizeof(buf), "%.9g", scores[row + j]);
      out += std::to_string(e.event_id.value) + ',' +
             std::to_string(e.candidates[j].station_id.value) + ',' + buf + ',' +
             std::to_string(rank[j]) + '\n';
    }
    row += n;
  }
  io::WriteFile(out_path, out);
  std::printf("scored %zu candidates in %zu events\n", row, events.size());
  return 0;
}

int CmdCorrelate(const std::string& in, const std::string& out_path, int threads) {
  const auto c = DirConfig(in, threads);
  const auto events = LoadLabelableEvents(in);
  const Splits s = SplitEvents(c, events);
  const auto encoder = features::FeatureEncoder::Fit(s.train, features::FeatureSet::kFull);
  const auto x = encoder.Transform(s.train);
  const auto corr = features::PearsonCorrelation(x);
  std::vector<std::vector<double>> matrix(corr.num_cols);
  for (std::size_t i = 0; i < corr.num_cols; ++i) {
    for (std::size_t j = 0; j < corr.num_cols; ++j) matrix[i].push_back(corr.At(i, j));
  }
  nlohmann::json j = {{"features", x.names},
                      {"degenerate", corr.degenerate},
                      {"matrix", matrix}};
  io::WriteFile(out_path, j.dump(1) + "\n");
  return 0;
}

void WriteReport(const std::string& out_dir, const std::string& stem,
                 const std::string& json, const std::string& csv) {
  EnsureDir(out_dir);
  io::WriteFile(Join(out_dir, stem + ".json"), json);
  if (!csv.empty()) io::WriteFile(Join(out_dir, stem + ".csv"), csv);
  std::printf("wrote %s\n", Join(out_dir, stem + ".json").c_str());
}

void AddCommon(CLI::App* cmd, CommonOptions& o, bool with_config) {
  if (with_config) {
    cmd->add_option("--config", o.config_path, "Experiment config (JSON)")
        ->check(CLI::ExistingFile);
    cmd->add_option("--seed", o.seed, "Seed overriding the config");
  }
  cmd->add_option("--threads", o.threads, "Worker threads (results do not depend on it)")
      ->check(CLI::PositiveNumber);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Ranking of charging pads for energy-trading EVs"};
  app.require_subcommand(1);
  CommonOptions o;
  std::string in, out, model, report, objective = "lambdarank", feature_set = "full",
                                       source = "em", split = "test";

  auto* gen = app.add_subcommand("generate", "Simulate a world and write CSVs");
  AddCommon(gen, o, true);
  gen->add_option("--out", out, "Output directory")->required();

  auto* label = app.add_subcommand("label", "Build graded labels for events.csv");
  AddCommon(label, o, false);
  label->add_option("--in", in, "Data directory")->required()->check(CLI::ExistingDirectory);
  label->add_option("--source", source, "Label source")
      ->check(CLI::IsMember({"em", "topsis"}));

  auto* train = app.add_subcommand("train", "Train a ranker on a labeled directory");
  AddCommon(train, o, false);
  train->add_option("--in", in, "Data directory")->required()->check(CLI::ExistingDirectory);
  train->add_option("--objective", objective, "Objective")
      ->check(CLI::IsMember({"lambdarank", "pairwise", "pairwise_logistic"}));
  train->add_option("--features", feature_set, "Feature set")
      ->check(CLI::IsMember({"full", "candidate_only"}));
  train->add_option("--model-out", model, "Model file")->required();

  auto* eval = app.add_subcommand("evaluate", "Evaluate a model on a split");
  AddCommon(eval, o, false);
  eval->add_option("--in", in, "Data directory")->required()->check(CLI::ExistingDirectory);
  eval->add_option("--model", model, "Model file")->required()->check(CLI::ExistingFile);
  eval->add_option("--report", report, "Report file (JSON)")->required();
  eval->add_option("--split", split, "Split to evaluate")
      ->check(CLI::IsMember({"train", "valid", "test"}));

  auto* predict = app.add_subcommand("predict", "Score every candidate in events.csv");
  AddCommon(predict, o, false);
  predict->add_option("--in", in, "Data directory")->required()->check(CLI::ExistingDirectory);
  predict->add_option("--model", model, "Model file")->required()->check(CLI::ExistingFile);
  predict->add_option("--out", out, "Scores CSV")->required();

  auto* correlate = app.add_subcommand("correlate", "Pearson correlation of features");
  AddCommon(correlate, o, false);
  correlate->add_option("--in", in, "Data directory")->required()->check(CLI::ExistingDirectory);
  correlate->add_option("--out", out, "Output JSON")->required();

  auto* sweep_radius = app.add_subcommand("sweep-radius", "Candidate radius sweep");
  AddCommon(sweep_radius, o, true);
  sweep_radius->add_option("--out", out, "Output directory")->required();

  auto* sweep_soc = app.add_subcommand("sweep-soc", "Provider cutoff sweep");
  AddCommon(sweep_soc, o, true);
  sweep_soc->add_option("--out", out, "Output directory")->required();

  auto* ablate = app.add_subcommand("ablate", "Label source x feature set ablation");
  AddCommon(ablate, o, true);
  ablate->add_option("--out", out, "Output directory")->required();

  auto* crossval = app.add_subcommand("crossval", "Query-level K-fold cross-validation");
  AddCommon(crossval, o, true);
  crossval->add_option("--out", out, "Output directory")->required();

  CLI11_PARSE(app, argc, argv);

  try {
    if (*gen) return CmdGenerate(o, out);
    if (*label) return CmdLabel(in, source, o.threads);
    if (*train) return CmdTrain(in, objective, feature_set, model, o.threads);
    if (*eval) return CmdEvaluate(in, model, report, split, o.threads);
    if (*predict) return CmdPredict(in, model, out, o.threads);
    if (*correlate) return CmdCorrelate(in, out, o.threads);
    if (*sweep_radius) {
      const auto rows = pipeline::RunSensitivityRadius(ResolveConfig(o));
      WriteReport(out, "sweep_radius", pipeline::RadiusReportJson(rows),
                  pipeline::RadiusReportCsv(rows));
      return 0;
    }
    if (*sweep_soc) {
      const auto rows = pipeline::RunSensitivitySoc(ResolveConfig(o));
      WriteReport(out, "sweep_soc", pipeline::SocReportJson(rows),
                  pipeline::SocReportCsv(rows));
      return 0;
    }
    if (*ablate) {
      const auto rows = pipeline::RunAblation(ResolveConfig(o));
      WriteReport(out, "ablation", pipeline::AblationReportJson(rows),
                  pipeline::AblationReportCsv(rows));
      return 0;
    }
    if (*crossval) {
      const auto rows = pipeline::RunCrossValidation(ResolveConfig(o));
      WriteReport(out, "crossval", pipeline::CrossValidationReportJson(rows), "");
      return 0;
    }
  } catch (const std::exception& e) {
    std::fprintf(stderr, "wcprank: error: %s\n", e.what());
    return 1;
  }
  return 1;
}
