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

#include <fstream>
#include <set>
#include <sstream>

#include "json.hpp"
#include "wcprank/io.h"
#include "wcprank/pipeline.h"

namespace wcprank::pipeline {
namespace {

using nlohmann::json;

// Reads known keys from a JSON object and rejects anything else.
class ObjectReader {
 public:
  ObjectReader(const json& j, std::string where) : j_(j), where_(std::move(where)) {
    Require(j_.is_object(), "config: " + where_ + " must be an object");
  }

  template <typename T>
  void Get(const std::string& key, T& out) {
    used_.insert(key);
    if (!j_.contains(key)) return;
    try {
      out = j_.at(key).get<T>();
    } catch (const json::exception&) {
      throw ContractError("config: bad value for " + Path(key));
    }
  }

  const json* Child(const std::string& key) {
    used_.insert(key);
    return j_.contains(key) ? &j_.at(key) : nullptr;
  }

  std::string Path(const std::string& key) const {
    return where_.empty() ? key : where_ + "." + key;
  }

  void Finish() const {
    for (const auto& [key, value] : j_.items()) {
      Require(used_.contains(key), "config: unknown key " + Path(key));
    }
  }

 private:
  const json& j_;
  std::string where_;
  std::set<std::string> used_;
};

std::string ImportanceName(labeling::Importance level) {
  switch (level) {
    case labeling::Importance::kLow:
      return "low";
    case labeling::Importance::kMedium:
      return "medium";
    case labeling::Importance::kHigh:
      return "high";
  }
  return "medium";
}

labeling::Importance ParseImportance(const std::string& name) {
  if (name == "low") return labeling::Importance::kLow;
  if (name == "medium") return labeling::Importance::kMedium;
  if (name == "high") return labeling::Importance::kHigh;
  throw ContractError("config: unknown importance level " + name);
}

using LevelTable =
    std::array<std::array<labeling::Importance, labeling::kNumCriteria>,
               labeling::kNumRegimes>;

json LevelsToJson(const LevelTable& t) {
  json out = json::array();
  for (const auto& row : t) {
    json r = json::array();
    for (auto level : row) r.push_back(ImportanceName(level));
    out.push_back(r);
  }
  return out;
}

LevelTable LevelsFromJson(const json& j, const std::string& where) {
  Require(j.is_array() && j.size() == labeling::kNumRegimes,
          "config: " + where + " needs one row per regime");
  LevelTable t{};
  for (std::size_t g = 0; g < t.size(); ++g) {
    Require(j[g].is_array() && j[g].size() == labeling::kNumCriteria,
            "config: " + where + " needs one level per criterion");
    for (std::size_t c = 0; c < t[g].size(); ++c) {
      t[g][c] = ParseImportance(j[g][c].get<std::string>());
    }
  }
  return t;
}

json TfnToJson(const labeling::TriangularFuzzyNumber& t) {
  return json::array({t.a, t.b, t.c});
}

void ReadTfn(ObjectReader& r, const std::string& key,
             labeling::TriangularFuzzyNumber& t) {
  std::vector<double> v{t.a, t.b, t.c};
  r.Get(key, v);
  Require(v.size() == 3 && v[0] <= v[1] && v[1] <= v[2],
          "config: " + r.Path(key) + " must be an ordered triple");
  t = {v[0], v[1], v[2]};
}

json ToJson(const ExperimentConfig& c) {
  json models = json::array();
  for (const auto& m : c.world.models) {
    models.push_back({{"model_id", m.model_id},
                      {"battery_capacity_wh", m.battery_capacity_wh},
                      {"range_km", m.range_km}});
  }
  const auto& w = c.world;
  const auto& t = c.topsis;
  return {
      {"seed", c.seed},
      {"world",
       {{"num_stations", w.num_stations},
        {"num_evs", w.num_evs},
        {"num_journeys", w.num_journeys},
        {"bbox",
         {{"lat_min", w.bbox.lat_min},
          {"lat_max", w.bbox.lat_max},
          {"lon_min", w.bbox.lon_min},
          {"lon_max", w.bbox.lon_max}}},
        {"models", models},
        {"num_hotspots", w.num_hotspots},
        {"hotspot_sigma_km", w.hotspot_sigma_km},
        {"station_hotspot_share", w.station_hotspot_share},
        {"trip_hotspot_share", w.trip_hotspot_share},
        {"trip_sigma_km", w.trip_sigma_km},
        {"max_trip_km", w.max_trip_km},
        {"loop_trip_probability", w.loop_trip_probability},
        {"min_displacement_km", w.min_displacement_km},
        {"start_time", w.start_time},
        {"simulated_days", w.simulated_days}}},
      {"roles",
       {{"soc_th_pct", c.roles.soc_th_pct},
        {"soc_target_pct", c.roles.soc_target_pct},
        {"soc_min_pct", c.roles.soc_min_pct},
        {"e_min_trade_wh", c.roles.e_min_trade_wh},
        {"p_mid", c.roles.p_mid},
        {"p_high", c.roles.p_high},
        {"consumer_cutoff", c.roles.consumer_cutoff},
        {"mid_cutoff", c.roles.mid_cutoff},
        {"provider_cutoff", c.roles.provider_cutoff}}},
      {"search",
       {{"min_count", c.search.min_count},
        {"r_start_km", c.search.r_start_km},
        {"r_step_km", c.search.r_step_km},
        {"r_max_km", c.search.r_max_km}}},
      {"topsis",
       {{"epsilon", t.epsilon},
        {"tfn_high", TfnToJson(t.tfn_high)},
        {"tfn_medium", TfnToJson(t.tfn_medium)},
        {"tfn_low", TfnToJson(t.tfn_low)},
        {"regime_low", TfnToJson(t.regime_low)},
        {"regime_medium", TfnToJson(t.regime_medium)},
        {"regime_high", TfnToJson(t.regime_high)},
        {"degenerate_value", t.degenerate_value},
        {"single_candidate_score", t.single_candidate_score},
        {"consumer_levels", LevelsToJson(t.consumer_levels)},
        {"provider_levels", LevelsToJson(t.provider_levels)}}},
      {"em",
       {{"m_step", labeling::MStepName(c.em.m_step)},
        {"clip_delta", c.em.clip_delta},
        {"tolerance", c.em.tolerance},
        {"max_iterations", c.em.max_iterations},
        {"k_min", c.em.k_min},
        {"k_max", c.em.k_max},
        {"shape_min", c.em.shape_min},
        {"shape_max", c.em.shape_max}}},
      {"grades", {{"max_grade", c.grades.max_grade}, {"kappa", c.grades.kappa}}},
      {"train",
       {{"num_rounds", c.train.num_rounds},
        {"learning_rate", c.train.learning_rate},
        {"max_leaves", c.train.max_leaves},
        {"max_depth", c.train.max_depth},
        {"min_samples_leaf", c.train.min_samples_leaf},
        {"l2_leaf", c.train.l2_leaf},
        {"row_subsample", c.train.row_subsample},
        {"feature_subsample", c.train.feature_subsample},
        {"early_stopping_rounds", c.train.early_stopping_rounds},
        {"eval_k", c.train.eval_k},
        {"objective", ranker::ObjectiveName(c.train.objective)},
        {"sigmoid_scale", c.train.sigmoid_scale}}},
      {"split",
       {{"train", c.split.train}, {"valid", c.split.valid}, {"test", c.split.test}}},
      {"k_folds", c.k_folds},
      {"ablation_variant", c.ablation_variant},
      {"radius_sweep", c.radius_sweep},
      {"provider_cutoff_sweep", c.provider_cutoff_sweep},
  };
}

void ReadWorld(const json& j, synth::WorldConfig& w) {
  ObjectReader r(j, "world");
  r.Get("num_stations", w.num_stations);
  r.Get("num_evs", w.num_evs);
  r.Get("num_journeys", w.num_journeys);
  if (const json* b = r.Child("bbox")) {
    ObjectReader br(*b, "world.bbox");
    br.Get("lat_min", w.bbox.lat_min);
    br.Get("lat_max", w.bbox.lat_max);
    br.Get("lon_min", w.bbox.lon_min);
    br.Get("lon_max", w.bbox.lon_max);
    br.Finish();
  }
  if (const json* m = r.Child("models")) {
    Require(m->is_array() && !m->empty(), "config: world.models must be a non-empty array");
    w.models.clear();
    for (const auto& item : *m) {
      synth::EvModel model;
      ObjectReader mr(item, "world.models[]");
      mr.Get("model_id", model.model_id);
      mr.Get("battery_capacity_wh", model.battery_capacity_wh);
      mr.Get("range_km", model.range_km);
      mr.Finish();
      w.models.push_back(model);
    }
  }
  r.Get("num_hotspots", w.num_hotspots);
  r.Get("hotspot_sigma_km", w.hotspot_sigma_km);
  r.Get("station_hotspot_share", w.station_hotspot_share);
  r.Get("trip_hotspot_share", w.trip_hotspot_share);
  r.Get("trip_sigma_km", w.trip_sigma_km);
  r.Get("max_trip_km", w.max_trip_km);
  r.Get("loop_trip_probability", w.loop_trip_probability);
  r.Get("min_displacement_km", w.min_displacement_km);
  r.Get("start_time", w.start_time);
  r.Get("simulated_days", w.simulated_days);
  r.Finish();
}

void ReadTopsis(const json& j, labeling::TopsisConfig& t) {
  ObjectReader r(j, "topsis");
  r.Get("epsilon", t.epsilon);
  ReadTfn(r, "tfn_high", t.tfn_high);
  ReadTfn(r, "tfn_medium", t.tfn_medium);
  ReadTfn(r, "tfn_low", t.tfn_low);
  ReadTfn(r, "regime_low", t.regime_low);
  ReadTfn(r, "regime_medium", t.regime_medium);
  ReadTfn(r, "regime_high", t.regime_high);
  r.Get("degenerate_value", t.degenerate_value);
  r.Get("single_candidate_score", t.single_candidate_score);
  if (const json* l = r.Child("consumer_levels")) {
    t.consumer_levels = LevelsFromJson(*l, "topsis.consumer_levels");
  }
  if (const json* l = r.Child("provider_levels")) {
    t.provider_levels = LevelsFromJson(*l, "topsis.provider_levels");
  }
  r.Finish();
}

void ReadTrain(const json& j, ranker::TrainConfig& t) {
  ObjectReader r(j, "train");
  r.Get("num_rounds", t.num_rounds);
  r.Get("learning_rate", t.learning_rate);
  r.Get("max_leaves", t.max_leaves);
  r.Get("max_depth", t.max_depth);
  r.Get("min_samples_leaf", t.min_samples_leaf);
  r.Get("l2_leaf", t.l2_leaf);
  r.Get("row_subsample", t.row_subsample);
  r.Get("feature_subsample", t.feature_subsample);
  r.Get("early_stopping_rounds", t.early_stopping_rounds);
  r.Get("eval_k", t.eval_k);
  std::string objective = ranker::ObjectiveName(t.objective);
  r.Get("objective", objective);
  t.objective = ranker::ParseObjective(objective);
  r.Get("sigmoid_scale", t.sigmoid_scale);
  r.Finish();
}

}  // namespace

void ExperimentConfig::Validate() const {
  Require(world.num_stations >= 1 && world.num_evs >= 1 && world.num_journeys >= 1,
          "config: world sizes must be positive");
  roles.Validate();
  Require(search.min_count >= 1 && search.r_start_km > 0.0 &&
              search.r_step_km > 0.0 && search.r_max_km >= search.r_start_km,
          "config: invalid search radius parameters");
  grades.Validate();
  Require(em.k_min >= 1 && em.k_max >= em.k_min && em.max_iterations >= 1,
          "config: invalid EM parameters");
  train.Validate();
  const double total = split.train + split.valid + split.test;
  Require(split.train > 0.0 && split.valid > 0.0 && split.test > 0.0 &&
              std::abs(total - 1.0) < 1e-9,
          "config: split fractions must be positive and sum to 1");
  Require(k_folds >= 2, "config: k_folds must be >= 2");
  ParseVariant(ablation_variant);
  Require(!radius_sweep.empty(), "config: radius_sweep must not be empty");
  for (double r : radius_sweep) {
    Require(r >= search.r_start_km, "config: sweep radius below r_start_km");
  }
  Require(!provider_cutoff_sweep.empty(),
          "config: provider_cutoff_sweep must not be empty");
  Require(threads >= 1, "config: threads must be >= 1");
}

ExperimentConfig ExperimentConfig::Resolved() const {
  ExperimentConfig c = *this;
  c.em.threads = threads;
  c.em.seed = seed;
  c.train.threads = threads;
  c.train.seed = seed;
  return c;
}

std::string ConfigToJson(const ExperimentConfig& config) {
  return ToJson(config).dump(2) + "\n";
}

ExperimentConfig ConfigFromJson(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::exception& e) {
    throw ContractError(std::string("config: malformed JSON: ") + e.what());
  }
  ExperimentConfig c;
  ObjectReader r(j, "");
  r.Get("seed", c.seed);
  if (const json* w = r.Child("world")) ReadWorld(*w, c.world);
  if (const json* x = r.Child("roles")) {
    ObjectReader rr(*x, "roles");
    rr.Get("soc_th_pct", c.roles.soc_th_pct);
    rr.Get("soc_target_pct", c.roles.soc_target_pct);
    rr.Get("soc_min_pct", c.roles.soc_min_pct);
    rr.Get("e_min_trade_wh", c.roles.e_min_trade_wh);
    rr.Get("p_mid", c.roles.p_mid);
    rr.Get("p_high", c.roles.p_high);
    rr.Get("consumer_cutoff", c.roles.consumer_cutoff);
    rr.Get("mid_cutoff", c.roles.mid_cutoff);
    rr.Get("provider_cutoff", c.roles.provider_cutoff);
    rr.Finish();
  }
  if (const json* x = r.Child("search")) {
    ObjectReader sr(*x, "search");
    sr.Get("min_count", c.search.min_count);
    sr.Get("r_start_km", c.search.r_start_km);
    sr.Get("r_step_km", c.search.r_step_km);
    sr.Get("r_max_km", c.search.r_max_km);
    sr.Finish();
  }
  if (const json* x = r.Child("topsis")) ReadTopsis(*x, c.topsis);
  if (const json* x = r.Child("em")) {
    ObjectReader er(*x, "em");
    std::string m_step = labeling::MStepName(c.em.m_step);
    er.Get("m_step", m_step);
    c.em.m_step = labeling::ParseMStep(m_step);
    er.Get("clip_delta", c.em.clip_delta);
    er.Get("tolerance", c.em.tolerance);
    er.Get("max_iterations", c.em.max_iterations);
    er.Get("k_min", c.em.k_min);
    er.Get("k_max", c.em.k_max);
    er.Get("shape_min", c.em.shape_min);
    er.Get("shape_max", c.em.shape_max);
    er.Finish();
  }
  if (const json* x = r.Child("grades")) {
    ObjectReader gr(*x, "grades");
    gr.Get("max_grade", c.grades.max_grade);
    gr.Get("kappa", c.grades.kappa);
    gr.Finish();
  }
  if (const json* x = r.Child("train")) ReadTrain(*x, c.train);
  if (const json* x = r.Child("split")) {
    ObjectReader sr(*x, "split");
    sr.Get("train", c.split.train);
    sr.Get("valid", c.split.valid);
    sr.Get("test", c.split.test);
    sr.Finish();
  }
  r.Get("k_folds", c.k_folds);
  r.Get("ablation_variant", c.ablation_variant);
  r.Get("radius_sweep", c.radius_sweep);
  r.Get("provider_cutoff_sweep", c.provider_cutoff_sweep);
  r.Finish();
  c.Validate();
  return c;
}

ExperimentConfig LoadConfig(const std::string& path) {
  return ConfigFromJson(io::ReadFile(path));
}

}  // namespace wcprank::pipeline
