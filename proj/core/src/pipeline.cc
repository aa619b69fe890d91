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

#include "wcprank/pipeline.h"

#include <algorithm>
#include <cmath>
#include <unordered_map>

#include "json.hpp"
#include "wcprank/io.h"
#include "wcprank/random.h"

namespace wcprank::pipeline {
namespace {

using nlohmann::json;

constexpr std::uint64_t kSaltSplit = 51;
constexpr std::uint64_t kSaltFold = 52;

struct Simulation {
  synth::World world;
  std::vector<synth::Journey> journeys;  // roles not yet assigned
};

Simulation Simulate(const ExperimentConfig& c) {
  Simulation s;
  s.world = synth::GenerateWorld(c.world, c.seed);
  s.journeys =
      synth::SimulateJourneys(s.world, c.world.num_journeys, c.seed, c.threads);
  return s;
}

labeling::LabelConfig LabelConfigFor(const ExperimentConfig& c,
                                     labeling::LabelSource source) {
  labeling::LabelConfig lc;
  lc.topsis = c.topsis;
  lc.em = c.em;
  lc.grades = c.grades;
  lc.source = source;
  return lc;
}

VariantResult TrainAndEvaluate(const ExperimentConfig& c,
                               std::span<const synth::DecisionEvent> events,
                               std::span<const labeling::CandidateLabel> labels,
                               features::FeatureSet feature_set) {
  const auto ids = EventIds(events);
  const QuerySplit split = SplitQueries(ids, c.split, c.seed);
  const auto train_events = SelectEvents(events, split.train);
  const auto valid_events = SelectEvents(events, split.valid);
  const auto test_events = SelectEvents(events, split.test);

  VariantResult out;
  out.encoder = features::FeatureEncoder::Fit(train_events, feature_set);
  const auto train = MakeRankingDataset(train_events, labels, out.encoder);
  const auto valid = MakeRankingDataset(valid_events, labels, out.encoder);
  const auto test = MakeRankingDataset(test_events, labels, out.encoder);
  out.model = ranker::Train(train, valid, c.train);
  out.model.preprocessing = out.encoder.ToJson();
  const auto scores = out.model.Predict(test.features, c.threads);
  out.test = metrics::EvaluateRanking(scores, test.labels, test.query_offsets);
  return out;
}

json ReportJson(const metrics::RankingReport& r) {
  json ndcg = json::object();
  json recall = json::object();
  for (const auto& [k, v] : r.ndcg) ndcg[std::to_string(k)] = v;
  for (const auto& [k, v] : r.recall) recall[std::to_string(k)] = v;
  return {{"num_queries", r.num_queries},
          {"ndcg_queries", r.ndcg_queries},
          {"recall_queries", r.recall_queries},
          {"ndcg", ndcg},
          {"recall", recall},
          {"mrr", r.mrr}};
}

json StatsJson(const CandidateStats& s) {
  return {{"num_events", s.num_events}, {"mean", s.mean},
          {"median", s.median},         {"p90", s.p90},
          {"p95", s.p95},               {"pct_zero", s.pct_zero},
          {"pct_le3", s.pct_le3},       {"pct_le5", s.pct_le5},
          {"pct_le10", s.pct_le10}};
}

std::string MetricsHeader() {
  std::string h;
  for (int k : metrics::DefaultCutoffs()) h += ",ndcg@" + std::to_string(k);
  for (int k : metrics::DefaultCutoffs()) h += ",recall@" + std::to_string(k);
  return h + ",mrr";
}

std::string MetricsFields(const metrics::RankingReport& r) {
  std::string out;
  for (int k : metrics::DefaultCutoffs()) out += ',' + io::FormatDouble(r.ndcg.at(k));
  for (int k : metrics::DefaultCutoffs()) {
    out += ',' + io::FormatDouble(r.recall.at(k));
  }
  return out + ',' + io::FormatDouble(r.mrr);
}

}  // namespace

std::string VariantTag(const Variant& v) {
  const std::string labels =
      v.labels == labeling::LabelSource::kEmSmoothed ? "em" : "topsis";
  return labels + "_" + features::FeatureSetName(v.features);
}

Variant ParseVariant(const std::string& tag) {
  for (const auto& v : AblationVariants()) {
    if (VariantTag(v) == tag) return v;
  }
  throw ContractError("unknown ablation variant: " + tag);
}

std::vector<Variant> AblationVariants() {
  using labeling::LabelSource;
  using features::FeatureSet;
  return {{LabelSource::kTopsis, FeatureSet::kFull},
          {LabelSource::kTopsis, FeatureSet::kCandidateOnly},
          {LabelSource::kEmSmoothed, FeatureSet::kCandidateOnly},
          {LabelSource::kEmSmoothed, FeatureSet::kFull}};
}

QuerySplit SplitQueries(std::span<const EventId> event_ids,
                        const SplitFractions& fractions, std::uint64_t seed) {
  const std::size_t n = event_ids.size();
  Require(n >= 3, "SplitQueries: need at least one event per split");
  Require(fractions.train > 0.0 && fractions.valid > 0.0 && fractions.test > 0.0 &&
              std::abs(fractions.train + fractions.valid + fractions.test - 1.0) <
                  1e-9,
          "SplitQueries: fractions must be positive and sum to 1");
  std::vector<EventId> ids(event_ids.begin(), event_ids.end());
  std::sort(ids.begin(), ids.end());
  Require(std::adjacent_find(ids.begin(), ids.end()) == ids.end(),
          "SplitQueries: duplicate event id");
  Rng rng = Rng::Stream(seed, 0, kSaltSplit);
  rng.Shuffle(std::span(ids));

  const auto nd = static_cast<double>(n);
  auto n_train = static_cast<std::size_t>(std::llround(nd * fractions.train));
  n_train = std::clamp<std::size_t>(n_train, 1, n - 2);
  auto n_valid = static_cast<std::size_t>(std::llround(nd * fractions.valid));
  n_valid = std::clamp<std::size_t>(n_valid, 1, n - n_train - 1);

  QuerySplit out;
  const auto b = ids.begin();
  const auto t = static_cast<std::ptrdiff_t>(n_train);
  const auto v = static_cast<std::ptrdiff_t>(n_train + n_valid);
  out.train.assign(b, b + t);
  out.valid.assign(b + t, b + v);
  out.test.assign(b + v, ids.end());
  std::sort(out.train.begin(), out.train.end());
  std::sort(out.valid.begin(), out.valid.end());
  std::sort(out.test.begin(), out.test.end());
  return out;
}

std::vector<std::vector<EventId>> KfoldQueries(std::span<const EventId> event_ids,
                                               int k, std::uint64_t seed) {
  Require(k >= 2, "KfoldQueries: K must be >= 2");
  const std::size_t n = event_ids.size();
  Require(n >= static_cast<std::size_t>(k), "KfoldQueries: more folds than events");
  std::vector<EventId> ids(event_ids.begin(), event_ids.end());
  std::sort(ids.begin(), ids.end());
  Require(std::adjacent_find(ids.begin(), ids.end()) == ids.end(),
          "KfoldQueries: duplicate event id");
  Rng rng = Rng::Stream(seed, 0, kSaltFold);
  rng.Shuffle(std::span(ids));
  const std::size_t folds = static_cast<std::size_t>(k);
  std::vector<std::vector<EventId>> out(folds);
  std::size_t pos = 0;
  for (std::size_t f = 0; f < folds; ++f) {
    const std::size_t size = n / folds + (f < n % folds ? 1 : 0);
    out[f].assign(ids.begin() + static_cast<std::ptrdiff_t>(pos),
                  ids.begin() + static_cast<std::ptrdiff_t>(pos + size));
    std::sort(out[f].begin(), out[f].end());
    pos += size;
  }
  return out;
}

CandidateStats CandidateDistributionStats(std::span<const int> counts) {
  Require(!counts.empty(), "CandidateDistributionStats: no events");
  std::vector<int> sorted(counts.begin(), counts.end());
  std::sort(sorted.begin(), sorted.end());
  const std::size_t n = sorted.size();
  const auto nearest_rank = [&](double pct) {
    auto rank = static_cast<std::size_t>(std::ceil(pct / 100.0 * static_cast<double>(n)));
    rank = std::clamp<std::size_t>(rank, 1, n);
    return static_cast<double>(sorted[rank - 1]);
  };
  const auto pct_at_most = [&](int limit) {
    const auto c = std::upper_bound(sorted.begin(), sorted.end(), limit) - sorted.begin();
    return 100.0 * static_cast<double>(c) / static_cast<double>(n);
  };
  CandidateStats s;
  s.num_events = n;
  double total = 0.0;
  for (int c : sorted) total += c;
  s.mean = total / static_cast<double>(n);
  s.median = nearest_rank(50.0);
  s.p90 = nearest_rank(90.0);
  s.p95 = nearest_rank(95.0);
  s.pct_zero = pct_at_most(0);
  s.pct_le3 = pct_at_most(3);
  s.pct_le5 = pct_at_most(5);
  s.pct_le10 = pct_at_most(10);
  return s;
}

CandidateStats CandidateDistributionStats(
    std::span<const synth::DecisionEvent> events) {
  std::vector<int> counts;
  counts.reserve(events.size());
  for (const auto& e : events) counts.push_back(static_cast<int>(e.candidates.size()));
  return CandidateDistributionStats(counts);
}

Dataset GenerateDataset(const ExperimentConfig& config) {
  config.Validate();
  Simulation sim = Simulate(config);
  synth::AssignRoles(sim.journeys, config.roles, config.seed, config.threads);
  Dataset d;
  d.events = synth::BuildDecisionEvents(sim.journeys, sim.world, config.search,
                                        config.threads);
  d.world = std::move(sim.world);
  d.journeys = std::move(sim.journeys);
  return d;
}

std::vector<EventId> EventIds(std::span<const synth::DecisionEvent> events) {
  std::vector<EventId> ids;
  ids.reserve(events.size());
  for (const auto& e : events) ids.push_back(e.event_id);
  return ids;
}

std::vector<synth::DecisionEvent> SelectEvents(
    std::span<const synth::DecisionEvent> events, std::span<const EventId> ids) {
  std::unordered_map<EventId, std::size_t> index;
  for (std::size_t i = 0; i < events.size(); ++i) index[events[i].event_id] = i;
  std::vector<synth::DecisionEvent> out;
  out.reserve(ids.size());
  for (const auto& id : ids) {
    const auto it = index.find(id);
    Require(it != index.end(), "SelectEvents: unknown event id");
    out.push_back(events[it->second]);
  }
  return out;
}

ranker::RankingDataset MakeRankingDataset(
    std::span<const synth::DecisionEvent> events,
    std::span<const labeling::CandidateLabel> labels,
    const features::FeatureEncoder& encoder) {
  // Labels of one event are contiguous.
  std::unordered_map<EventId, std::pair<std::size_t, std::size_t>> ranges;
  for (std::size_t i = 0; i < labels.size();) {
    std::size_t j = i;
    while (j < labels.size() && labels[j].event_id == labels[i].event_id) ++j;
    Require(ranges.emplace(labels[i].event_id, std::make_pair(i, j)).second,
            "MakeRankingDataset: labels of an event are not contiguous");
    i = j;
  }
  ranker::RankingDataset d;
  d.features = encoder.Transform(events);
  for (const auto& e : events) {
    Require(e.HasCandidates(), "MakeRankingDataset: event without candidates");
    const auto it = ranges.find(e.event_id);
    Require(it != ranges.end(), "MakeRankingDataset: event has no labels");
    const auto [begin, end] = it->second;
    Require(end - begin == e.candidates.size(),
            "MakeRankingDataset: label count differs from candidate count");
    for (std::size_t j = 0; j < e.candidates.size(); ++j) {
      const auto& label = labels[begin + j];
      Require(label.station_id == e.candidates[j].station_id,
              "MakeRankingDataset: label/candidate station mismatch");
      d.labels.push_back(label.grade);
      d.item_ids.push_back(label.station_id);
    }
    d.query_offsets.push_back(d.labels.size());
    d.query_ids.push_back(e.event_id);
  }
  return d;
}

VariantResult RunVariant(const ExperimentConfig& config,
                         std::span<const synth::DecisionEvent> events,
                         const Variant& variant) {
  const ExperimentConfig c = config.Resolved();
  const auto labeled = labeling::LabelEvents(events, LabelConfigFor(c, variant.labels));
  VariantResult out = TrainAndEvaluate(c, events, labeled.labels, variant.features);
  out.tag = VariantTag(variant);
  out.em_components = labeled.em_model.k;
  return out;
}

std::vector<RadiusRow> RunSensitivityRadius(const ExperimentConfig& config) {
  config.Validate();
  const ExperimentConfig c = config.Resolved();
  Simulation sim = Simulate(c);
  synth::AssignRoles(sim.journeys, c.roles, c.seed, c.threads);
  std::vector<RadiusRow> rows;
  for (double radius : c.radius_sweep) {
    geo::SearchConfig search = c.search;
    search.r_max_km = radius;
    auto events = synth::BuildDecisionEvents(sim.journeys, sim.world, search, c.threads);
    RadiusRow row;
    row.radius_km = radius;
    row.stats = CandidateDistributionStats(events);
    const auto labelable = synth::LabelableEvents(std::move(events));
    row.labelable_events = labelable.size();
    const auto result = RunVariant(c, labelable, {});
    row.test = result.test;
    row.best_iteration = result.model.best_iteration;
    rows.push_back(std::move(row));
  }
  return rows;
}

std::vector<SocRow> RunSensitivitySoc(const ExperimentConfig& config) {
  config.Validate();
  const ExperimentConfig c = config.Resolved();
  const Simulation sim = Simulate(c);
  std::vector<SocRow> rows;
  for (double cutoff : c.provider_cutoff_sweep) {
    synth::RoleConfig roles = c.roles;
    roles.provider_cutoff = cutoff;
    roles.Validate();
    auto journeys = sim.journeys;
    synth::AssignRoles(journeys, roles, c.seed, c.threads);
    SocRow row;
    row.provider_cutoff = cutoff;
    const auto providers = std::count_if(
        journeys.begin(), journeys.end(),
        [](const synth::Journey& j) { return j.role == Role::kProvider; });
    row.provider_share_pct =
        100.0 * static_cast<double>(providers) / static_cast<double>(journeys.size());
    row.consumer_share_pct = 100.0 - row.provider_share_pct;
    const auto labelable = synth::LabelableEvents(
        synth::BuildDecisionEvents(journeys, sim.world, c.search, c.threads));
    row.labelable_events = labelable.size();
    const auto result = RunVariant(c, labelable, {});
    row.test = result.test;
    row.best_iteration = result.model.best_iteration;
    rows.push_back(std::move(row));
  }
  return rows;
}

std::vector<AblationRow> RunAblation(const ExperimentConfig& config) {
  config.Validate();
  const ExperimentConfig c = config.Resolved();
  const Dataset data = GenerateDataset(c);
  const auto events = synth::LabelableEvents(data.events);
  // Labels depend only on the source, so each source is labeled once.
  const auto topsis =
      labeling::LabelEvents(events, LabelConfigFor(c, labeling::LabelSource::kTopsis));
  const auto em = labeling::LabelEvents(
      events, LabelConfigFor(c, labeling::LabelSource::kEmSmoothed));
  std::vector<AblationRow> rows;
  for (const auto& v : AblationVariants()) {
    const auto& labels =
        v.labels == labeling::LabelSource::kTopsis ? topsis.labels : em.labels;
    const auto result = TrainAndEvaluate(c, events, labels, v.features);
    rows.push_back({VariantTag(v), result.test, result.model.best_iteration});
  }
  return rows;
}

std::vector<FoldResult> RunCrossValidation(const ExperimentConfig& config) {
  config.Validate();
  const ExperimentConfig c = config.Resolved();
  const Dataset data = GenerateDataset(c);
  const auto events = synth::LabelableEvents(data.events);
  const Variant variant = ParseVariant(c.ablation_variant);
  const auto labeled = labeling::LabelEvents(events, LabelConfigFor(c, variant.labels));
  const auto folds = KfoldQueries(EventIds(events), c.k_folds, c.seed);
  std::vector<FoldResult> out;
  for (int f = 0; f < c.k_folds; ++f) {
    const auto valid_fold = static_cast<std::size_t>((f + 1) % c.k_folds);
    std::vector<EventId> train_ids;
    for (std::size_t g = 0; g < folds.size(); ++g) {
      if (g == static_cast<std::size_t>(f) || g == valid_fold) continue;
      train_ids.insert(train_ids.end(), folds[g].begin(), folds[g].end());
    }
    std::sort(train_ids.begin(), train_ids.end());
    const auto train_events = SelectEvents(events, train_ids);
    const auto encoder = features::FeatureEncoder::Fit(train_events, variant.features);
    const auto train = MakeRankingDataset(train_events, labeled.labels, encoder);
    const auto valid = MakeRankingDataset(SelectEvents(events, folds[valid_fold]),
                                          labeled.labels, encoder);
    const auto test = MakeRankingDataset(
        SelectEvents(events, folds[static_cast<std::size_t>(f)]), labeled.labels,
        encoder);
    const auto model = ranker::Train(train, valid, c.train);
    const auto scores = model.Predict(test.features, c.threads);
    out.push_back({f, metrics::EvaluateRanking(scores, test.labels, test.query_offsets),
                   model.best_iteration});
  }
  return out;
}

std::string ReportToJson(const metrics::RankingReport& report) {
  return ReportJson(report).dump(2) + "\n";
}

std::string RadiusReportJson(std::span<const RadiusRow> rows) {
  json out = json::array();
  for (const auto& r : rows) {
    out.push_back({{"radius_km", r.radius_km},
                   {"candidates", StatsJson(r.stats)},
                   {"labelable_events", r.labelable_events},
                   {"best_iteration", r.best_iteration},
                   {"test", ReportJson(r.test)}});
  }
  return out.dump(2) + "\n";
}

std::string RadiusReportCsv(std::span<const RadiusRow> rows) {
  std::string out =
      "radius_km,num_events,mean,median,p90,p95,pct_zero,pct_le3,pct_le5,"
      "pct_le10,labelable_events" +
      MetricsHeader() + ",best_iteration\n";
  for (const auto& r : rows) {
    const auto& s = r.stats;
    out += io::FormatDouble(r.radius_km) + ',' + std::to_string(s.num_events) + ',' +
           io::FormatDouble(s.mean) + ',' + io::FormatDouble(s.median) + ',' +
           io::FormatDouble(s.p90) + ',' + io::FormatDouble(s.p95) + ',' +
           io::FormatDouble(s.pct_zero) + ',' + io::FormatDouble(s.pct_le3) + ',' +
           io::FormatDouble(s.pct_le5) + ',' + io::FormatDouble(s.pct_le10) + ',' +
           std::to_string(r.labelable_events) + MetricsFields(r.test) + ',' +
           std::to_string(r.best_iteration) + '\n';
  }
  return out;
}

std::string SocReportJson(std::span<const SocRow> rows) {
  json out = json::array();
  for (const auto& r : rows) {
    out.push_back({{"provider_cutoff", r.provider_cutoff},
                   {"provider_share_pct", r.provider_share_pct},
                   {"consumer_share_pct", r.consumer_share_pct},
                   {"labelable_events", r.labelable_events},
                   {"best_iteration", r.best_iteration},
                   {"test", ReportJson(r.test)}});
  }
  return out.dump(2) + "\n";
}

std::string SocReportCsv(std::span<const SocRow> rows) {
  std::string out = "provider_cutoff,provider_share_pct,consumer_share_pct,"
                    "labelable_events" +
                    MetricsHeader() + ",best_iteration\n";
  for (const auto& r : rows) {
    out += io::FormatDouble(r.provider_cutoff) + ',' +
           io::FormatDouble(r.provider_share_pct) + ',' +
           io::FormatDouble(r.consumer_share_pct) + ',' +
           std::to_string(r.labelable_events) + MetricsFields(r.test) + ',' +
           std::to_string(r.best_iteration) + '\n';
  }
  return out;
}

std::string AblationReportJson(std::span<const AblationRow> rows) {
  json out = json::array();
  for (const auto& r : rows) {
    out.push_back({{"variant", r.tag},
                   {"best_iteration", r.best_iteration},
                   {"test", ReportJson(r.test)}});
  }
  return out.dump(2) + "\n";
}

std::string AblationReportCsv(std::span<const AblationRow> rows) {
  std::string out = "variant" + MetricsHeader() + ",best_iteration\n";
  for (const auto& r : rows) {
    out += r.tag + MetricsFields(r.test) + ',' + std::to_string(r.best_iteration) + '\n';
  }
  return out;
}

std::string CrossValidationReportJson(std::span<const FoldResult> rows) {
  json folds = json::array();
  for (const auto& r : rows) {
    folds.push_back({{"fold", r.fold},
                     {"best_iteration", r.best_iteration},
                     {"test", ReportJson(r.test)}});
  }
  json avg = json::object();
  if (!rows.empty()) {
    const auto n = static_cast<double>(rows.size());
    json ndcg = json::object(), recall = json::object();
    for (int k : metrics::DefaultCutoffs()) {
      double a = 0.0, b = 0.0;
      for (const auto& r : rows) {
        a += r.test.ndcg.at(k);
        b += r.test.recall.at(k);
      }
      ndcg[std::to_string(k)] = a / n;
      recall[std::to_string(k)] = b / n;
    }
    double m = 0.0;
    for (const auto& r : rows) m += r.test.mrr;
    avg = {{"ndcg", ndcg}, {"recall", recall}, {"mrr", m / n}};
  }
  return json{{"folds", folds}, {"mean", avg}}.dump(2) + "\n";
}

}  // namespace wcprank::pipeline
