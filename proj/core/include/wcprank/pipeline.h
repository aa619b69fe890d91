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

#ifndef WCPRANK_PIPELINE_H_
#define WCPRANK_PIPELINE_H_

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "wcprank/features.h"
#include "wcprank/geo.h"
#include "wcprank/labeling.h"
#include "wcprank/metrics.h"
#include "wcprank/ranker.h"
#include "wcprank/synth.h"

namespace wcprank::pipeline {

struct SplitFractions {
  double train = 0.70;
  double valid = 0.15;
  double test = 0.15;
};

// Ablation variants: label source x feature set.
struct Variant {
  labeling::LabelSource labels = labeling::LabelSource::kEmSmoothed;
  features::FeatureSet features = features::FeatureSet::kFull;
};

// "topsis_full", "topsis_candidate_only", "em_candidate_only", "em_full".
std::string VariantTag(const Variant& variant);
Variant ParseVariant(const std::string& tag);
// The four variants in report order.
std::vector<Variant> AblationVariants();

struct ExperimentConfig {
  std::uint64_t seed = 42;
  synth::WorldConfig world;
  synth::RoleConfig roles;
  geo::SearchConfig search;
  labeling::TopsisConfig topsis;
  labeling::EmConfig em;
  labeling::GradeConfig grades;
  ranker::TrainConfig train;
  SplitFractions split;
  int k_folds = 5;
  std::string ablation_variant = "em_full";
  std::vector<double> radius_sweep = {1.0, 2.0, 3.0, 5.0, 10.0};
  std::vector<double> provider_cutoff_sweep = {0.85, 0.90, 0.95};
  int threads = 1;

  void Validate() const;
  // Copies `threads` and the seed into the per-module configs.
  ExperimentConfig Resolved() const;
};

// JSON mirroring the field names above. Missing keys keep their defaults;
// unknown keys are rejected.
std::string ConfigToJson(const ExperimentConfig& config);
ExperimentConfig ConfigFromJson(const std::string& text);
ExperimentConfig LoadConfig(const std::string& path);

// --- splits --------------------------------------------------------------------

struct QuerySplit {
  std::vector<EventId> train;
  std::vector<EventId> valid;
  std::vector<EventId> test;
};

// Seeded shuffle, then contiguous slices of rounded sizes; every split keeps
// at least one event.
QuerySplit SplitQueries(std::span<const EventId> event_ids,
                        const SplitFractions& fractions, std::uint64_t seed);

// K disjoint folds whose sizes differ by at most one; the first n mod K folds
// take the extra event.
std::vector<std::vector<EventId>> KfoldQueries(std::span<const EventId> event_ids,
                                               int k, std::uint64_t seed);

// --- candidate statistics ------------------------------------------------------

struct CandidateStats {
  std::size_t num_events = 0;
  double mean = 0.0;
  double median = 0.0;
  double p90 = 0.0;
  double p95 = 0.0;
  double pct_zero = 0.0;
  double pct_le3 = 0.0;
  double pct_le5 = 0.0;
  double pct_le10 = 0.0;
};

// Nearest-rank percentiles over per-event candidate counts.
CandidateStats CandidateDistributionStats(std::span<const int> counts);
CandidateStats CandidateDistributionStats(
    std::span<const synth::DecisionEvent> events);

// --- end-to-end stages -----------------------------------------------------------

struct Dataset {
  synth::World world;
  std::vector<synth::Journey> journeys;
  std::vector<synth::DecisionEvent> events;  // including zero-candidate ones
};

// World, journeys with roles, and decision events.
Dataset GenerateDataset(const ExperimentConfig& config);

std::vector<EventId> EventIds(std::span<const synth::DecisionEvent> events);

// Picks the events of `ids`, preserving the order of `ids`.
std::vector<synth::DecisionEvent> SelectEvents(
    std::span<const synth::DecisionEvent> events, std::span<const EventId> ids);

// Ranking dataset over `events`, whose labels are looked up in `labels`
// (matched on event and station id).
ranker::RankingDataset MakeRankingDataset(
    std::span<const synth::DecisionEvent> events,
    std::span<const labeling::CandidateLabel> labels,
    const features::FeatureEncoder& encoder);

struct VariantResult {
  std::string tag;
  ranker::GbdtRankerModel model;
  metrics::RankingReport test;
  features::FeatureEncoder encoder;
  int em_components = 0;
};

// Labels the (labelable) events, splits them, fits features on the training
// split, trains and evaluates on the test split.
VariantResult RunVariant(const ExperimentConfig& config,
                         std::span<const synth::DecisionEvent> events,
                         const Variant& variant);

struct RadiusRow {
  double radius_km = 0.0;
  CandidateStats stats;
  std::size_t labelable_events = 0;
  metrics::RankingReport test;
  int best_iteration = 0;
};

std::vector<RadiusRow> RunSensitivityRadius(const ExperimentConfig& config);

struct SocRow {
  double provider_cutoff = 0.0;
  double provider_share_pct = 0.0;  // journeys
  double consumer_share_pct = 0.0;
  std::size_t labelable_events = 0;
  metrics::RankingReport test;
  int best_iteration = 0;
};

std::vector<SocRow> RunSensitivitySoc(const ExperimentConfig& config);

struct AblationRow {
  std::string tag;
  metrics::RankingReport test;
  int best_iteration = 0;
};

std::vector<AblationRow> RunAblation(const ExperimentConfig& config);

struct FoldResult {
  int fold = 0;
  metrics::RankingReport test;
  int best_iteration = 0;
};

// Query-level K-fold: each fold is the test set once; the next fold serves as
// validation and the rest train.
std::vector<FoldResult> RunCrossValidation(const ExperimentConfig& config);

// --- reports -------------------------------------------------------------------

std::string ReportToJson(const metrics::RankingReport& report);
std::string RadiusReportJson(std::span<const RadiusRow> rows);
std::string RadiusReportCsv(std::span<const RadiusRow> rows);
std::string SocReportJson(std::span<const SocRow> rows);
std::string SocReportCsv(std::span<const SocRow> rows);
std::string AblationReportJson(std::span<const AblationRow> rows);
std::string AblationReportCsv(std::span<const AblationRow> rows);
std::string CrossValidationReportJson(std::span<const FoldResult> rows);

}  // namespace wcprank::pipeline

#endif  // WCPRANK_PIPELINE_H_
