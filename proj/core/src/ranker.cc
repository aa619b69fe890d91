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

#include "wcprank/ranker.h"

#include <algorithm>
#include <cmath>
#include <unordered_set>

#include "json.hpp"
#include "wcprank/metrics.h"
#include "wcprank/parallel.h"

namespace wcprank::ranker {
namespace {

using nlohmann::json;

constexpr std::uint64_t kSaltTree = 41;
constexpr const char* kFormat = "wcprank-gbdt";
constexpr int kFormatVersion = 1;

json NodeToJson(const std::vector<TreeNode>& nodes, int i) {
  const TreeNode& n = nodes[i];
  if (n.IsLeaf()) return {{"leaf", n.value}, {"count", n.count}};
  return {{"feature", n.feature},     {"threshold", n.threshold},
          {"gain", n.gain},           {"count", n.count},
          {"left", NodeToJson(nodes, n.left)},
          {"right", NodeToJson(nodes, n.right)}};
}

int NodeFromJson(const json& j, std::vector<TreeNode>& nodes) {
  const int index = static_cast<int>(nodes.size());
  nodes.emplace_back();
  TreeNode node;
  node.count = j.value("count", std::int64_t{0});
  if (j.contains("leaf")) {
    node.value = j.at("leaf").get<double>();
  } else {
    node.feature = j.at("feature").get<int>();
    Require(node.feature >= 0, "model: negative split feature");
    node.threshold = j.at("threshold").get<double>();
    node.gain = j.value("gain", 0.0);
    node.left = NodeFromJson(j.at("left"), nodes);
    node.right = NodeFromJson(j.at("right"), nodes);
  }
  nodes[index] = node;
  return index;
}

json ConfigToJson(const TrainConfig& c) {
  return {{"num_rounds", c.num_rounds},
          {"learning_rate", c.learning_rate},
          {"max_leaves", c.max_leaves},
          {"max_depth", c.max_depth},
          {"min_samples_leaf", c.min_samples_leaf},
          {"l2_leaf", c.l2_leaf},
          {"row_subsample", c.row_subsample},
          {"feature_subsample", c.feature_subsample},
          {"early_stopping_rounds", c.early_stopping_rounds},
          {"eval_k", c.eval_k},
          {"objective", ObjectiveName(c.objective)},
          {"sigmoid_scale", c.sigmoid_scale},
          {"seed", c.seed}};
}

TrainConfig ConfigFromJson(const json& j) {
  TrainConfig c;
  c.num_rounds = j.at("num_rounds").get<int>();
  c.learning_rate = j.at("learning_rate").get<double>();
  c.max_leaves = j.at("max_leaves").get<int>();
  c.max_depth = j.at("max_depth").get<int>();
  c.min_samples_leaf = j.at("min_samples_leaf").get<int>();
  c.l2_leaf = j.at("l2_leaf").get<double>();
  c.row_subsample = j.at("row_subsample").get<double>();
  c.feature_subsample = j.at("feature_subsample").get<double>();
  c.early_stopping_rounds = j.at("early_stopping_rounds").get<int>();
  c.eval_k = j.at("eval_k").get<int>();
  c.objective = ParseObjective(j.at("objective").get<std::string>());
  c.sigmoid_scale = j.at("sigmoid_scale").get<double>();
  c.seed = j.at("seed").get<std::uint64_t>();
  return c;
}

}  // namespace

void RankingDataset::Validate(int max_grade) const {
  Require(!query_offsets.empty() && query_offsets.front() == 0 &&
              query_offsets.back() == labels.size(),
          "RankingDataset: query offsets do not cover the rows");
  for (std::size_t q = 0; q + 1 < query_offsets.size(); ++q) {
    Require(query_offsets[q + 1] > query_offsets[q],
            "RankingDataset: empty query");
  }
  Require(features.num_rows == labels.size(),
          "RankingDataset: feature rows and labels differ");
  Require(query_ids.empty() || query_ids.size() == num_queries(),
          "RankingDataset: one id per query expected");
  for (int y : labels) {
    Require(y >= 0 && y <= max_grade, "RankingDataset: label out of range");
  }
}

std::string ObjectiveName(Objective objective) {
  return objective == Objective::kLambdaRank ? "lambdarank" : "pairwise_logistic";
}

Objective ParseObjective(const std::string& name) {
  if (name == "lambdarank") return Objective::kLambdaRank;
  if (name == "pairwise" || name == "pairwise_logistic") {
    return Objective::kPairwiseLogistic;
  }
  throw ContractError("unknown objective: " + name);
}

void TrainConfig::Validate() const {
  Require(num_rounds >= 1, "TrainConfig: num_rounds must be >= 1");
  Require(learning_rate > 0.0, "TrainConfig: learning_rate must be positive");
  Require(max_leaves >= 2, "TrainConfig: max_leaves must be >= 2");
  Require(max_depth >= 1, "TrainConfig: max_depth must be >= 1");
  Require(min_samples_leaf >= 1, "TrainConfig: min_samples_leaf must be >= 1");
  Require(l2_leaf >= 0.0, "TrainConfig: l2_leaf must be non-negative");
  Require(row_subsample > 0.0 && row_subsample <= 1.0,
          "TrainConfig: row_subsample must lie in (0, 1]");
  Require(feature_subsample > 0.0 && feature_subsample <= 1.0,
          "TrainConfig: feature_subsample must lie in (0, 1]");
  Require(early_stopping_rounds >= 1,
          "TrainConfig: early_stopping_rounds must be >= 1");
  Require(eval_k >= 1, "TrainConfig: eval_k must be >= 1");
  Require(sigmoid_scale > 0.0, "TrainConfig: sigmoid_scale must be positive");
  Require(threads >= 1, "TrainConfig: threads must be >= 1");
}

double GbdtRankerModel::PredictRow(std::span<const double> row) const {
  Require(row.size() == num_features, "predict: feature arity mismatch");
  double s = 0.0;
  for (const auto& tree : trees) s += config.learning_rate * tree.Predict(row);
  return s;
}

std::vector<double> GbdtRankerModel::Predict(const features::FeatureMatrix& rows,
                                             int threads) const {
  Require(rows.num_cols == num_features, "predict: feature arity mismatch");
  std::vector<double> out(rows.num_rows);
  ParallelFor(rows.num_rows, threads,
              [&](std::size_t r) { out[r] = PredictRow(rows.Row(r)); });
  return out;
}

std::string GbdtRankerModel::ToJson() const {
  json j;
  j["format"] = kFormat;
  j["version"] = kFormatVersion;
  j["objective"] = ObjectiveName(config.objective);
  j["learning_rate"] = config.learning_rate;
  j["best_iteration"] = best_iteration;
  j["rounds_trained"] = rounds_trained;
  j["num_features"] = num_features;
  j["feature_names"] = feature_names;
  j["config"] = ConfigToJson(config);
  json history_json = json::array();
  for (const auto& h : history) {
    history_json.push_back({{"round", h.round},
                            {"train_ndcg", h.train_ndcg},
                            {"valid_ndcg", h.valid_ndcg}});
  }
  j["history"] = std::move(history_json);
  json trees_json = json::array();
  for (const auto& t : trees) trees_json.push_back(NodeToJson(t.nodes(), 0));
  j["trees"] = std::move(trees_json);
  if (!preprocessing.empty()) j["preprocessing"] = json::parse(preprocessing);
  return j.dump(1);
}

GbdtRankerModel GbdtRankerModel::FromJson(const std::string& text) {
  try {
    const json j = json::parse(text);
    Require(j.value("format", std::string()) == kFormat,
            "model: not a wcprank model file");
    GbdtRankerModel m;
    m.config = ConfigFromJson(j.at("config"));
    m.best_iteration = j.at("best_iteration").get<int>();
    m.rounds_trained = j.at("rounds_trained").get<int>();
    m.num_features = j.at("num_features").get<std::size_t>();
    m.feature_names = j.at("feature_names").get<std::vector<std::string>>();
    for (const auto& h : j.at("history")) {
      m.history.push_back({h.at("round").get<int>(), h.at("train_ndcg").get<double>(),
                           h.at("valid_ndcg").get<double>()});
    }
    for (const auto& t : j.at("trees")) {
      std::vector<TreeNode> nodes;
      NodeFromJson(t, nodes);
      for (const auto& n : nodes) {
        Require(n.IsLeaf() || static_cast<std::size_t>(n.feature) < m.num_features,
                "model: split feature out of range");
      }
      m.trees.emplace_back(std::move(nodes));
    }
    if (j.contains("preprocessing")) m.preprocessing = j.at("preprocessing").dump();
    return m;
  } catch (const json::exception& e) {
    throw ContractError(std::string("model: malformed JSON: ") + e.what());
  }
}

GbdtRankerModel Train(const RankingDataset& train, const RankingDataset& valid,
                      const TrainConfig& config) {
  config.Validate();
  Require(train.num_rows() > 0 && train.num_queries() > 0,
          "Train: empty training set");
  Require(valid.num_rows() > 0 && valid.num_queries() > 0,
          "Train: empty validation set");
  Require(train.features.num_cols == valid.features.num_cols,
          "Train: train and validation arity differ");
  const int max_label = std::max(
      *std::max_element(train.labels.begin(), train.labels.end()),
      *std::max_element(valid.labels.begin(), valid.labels.end()));
  train.Validate(std::max(max_label, 0));
  valid.Validate(std::max(max_label, 0));
  if (!train.query_ids.empty() && !valid.query_ids.empty()) {
    const std::unordered_set<EventId> seen(train.query_ids.begin(),
                                           train.query_ids.end());
    for (const auto& id : valid.query_ids) {
      Require(!seen.contains(id), "Train: train and validation share a query");
    }
  }

  GbdtRankerModel model;
  model.config = config;
  model.num_features = train.features.num_cols;
  model.feature_names = train.features.names;

  const ColumnIndex index(train.features);
  std::vector<double> train_scores(train.num_rows(), 0.0);
  std::vector<double> valid_scores(valid.num_rows(), 0.0);
  std::vector<double> gradient(train.num_rows());

  const auto evaluate = [&](int round) {
    RoundMetrics m;
    m.round = round;
    m.train_ndcg = metrics::MeanNdcg(train_scores, train.labels,
                                     train.query_offsets, config.eval_k);
    m.valid_ndcg = metrics::MeanNdcg(valid_scores, valid.labels,
                                     valid.query_offsets, config.eval_k);
    model.history.push_back(m);
    return m.valid_ndcg;
  };

  double best = evaluate(0);
  int best_round = 0;
  int since_best = 0;
  for (int round = 1; round <= config.num_rounds; ++round) {
    const Lambdas lambdas =
        ComputeLambdas(train_scores, train.labels, train.query_offsets,
                       config.objective, config.sigmoid_scale, config.threads);
    for (std::size_t r = 0; r < gradient.size(); ++r) {
      gradient[r] = -lambdas.lambda[r];
    }
    Rng rng = Rng::Stream(config.seed, static_cast<std::uint64_t>(round), kSaltTree);
    model.trees.push_back(
        FitTree(train.features, index, gradient, lambdas.hessian, config, rng));
    const RegressionTree& tree = model.trees.back();
    ParallelFor(train.num_rows(), config.threads, [&](std::size_t r) {
      train_scores[r] += config.learning_rate * tree.Predict(train.features.Row(r));
    });
    ParallelFor(valid.num_rows(), config.threads, [&](std::size_t r) {
      valid_scores[r] += config.learning_rate * tree.Predict(valid.features.Row(r));
    });
    model.rounds_trained = round;
    const double score = evaluate(round);
    if (score > best) {
      best = score;
      best_round = round;
      since_best = 0;
    } else if (++since_best >= config.early_stopping_rounds) {
      break;
    }
  }
  model.best_iteration = best_round;
  model.trees.resize(static_cast<std::size_t>(best_round));
  return model;
}

}  // namespace wcprank::ranker
