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

#ifndef WCPRANK_RANKER_H_
#define WCPRANK_RANKER_H_

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "wcprank/common.h"
#include "wcprank/features.h"
#include "wcprank/random.h"

namespace wcprank::ranker {

// Rows grouped into queries; query q owns rows
// [query_offsets[q], query_offsets[q + 1]).
struct RankingDataset {
  features::FeatureMatrix features;
  std::vector<int> labels;
  std::vector<std::size_t> query_offsets{0};
  std::vector<EventId> query_ids;
  std::vector<StationId> item_ids;  // optional, one per row

  std::size_t num_queries() const { return query_offsets.size() - 1; }
  std::size_t num_rows() const { return labels.size(); }
  void Validate(int max_grade) const;
};

enum class Objective { kLambdaRank, kPairwiseLogistic };

std::string ObjectiveName(Objective objective);
// Accepts "lambdarank", "pairwise" and "pairwise_logistic".
Objective ParseObjective(const std::string& name);

struct TrainConfig {
  int num_rounds = 500;
  double learning_rate = 0.05;
  int max_leaves = 31;
  int max_depth = 8;
  int min_samples_leaf = 20;
  double l2_leaf = 1.0;
  double row_subsample = 0.8;
  double feature_subsample = 0.8;
  int early_stopping_rounds = 50;
  int eval_k = 10;
  Objective objective = Objective::kLambdaRank;
  double sigmoid_scale = 1.0;
  std::uint64_t seed = 0;
  int threads = 1;  // never affects results

  void Validate() const;
};

inline constexpr double kHessianFloor = 1e-12;

// Per-row lambdas and their second-order weights. `lambda` points in the
// direction that improves the ranking: a relevant document receives a
// positive value (lambda = -dLoss/ds). Within a query the lambdas sum to
// exactly zero.
struct Lambdas {
  std::vector<double> lambda;
  std::vector<double> hessian;
};

Lambdas ComputeLambdas(std::span<const double> scores,
                       std::span<const int> labels,
                       std::span<const std::size_t> query_offsets,
                       Objective objective, double sigma, int threads = 1);

// Sum over preference pairs (y_i > y_j) of log(1 + exp(-sigma (s_i - s_j))).
double PairwiseLogisticLoss(std::span<const double> scores,
                            std::span<const int> labels,
                            std::span<const std::size_t> query_offsets,
                            double sigma);

// --- regression trees ----------------------------------------------------------

struct TreeNode {
  int feature = -1;  // -1 for leaves
  double threshold = 0.0;  // x <= threshold goes left
  int left = -1;
  int right = -1;
  double value = 0.0;  // leaf output
  double gain = 0.0;
  std::int64_t count = 0;

  bool IsLeaf() const { return feature < 0; }
};

class RegressionTree {
 public:
  RegressionTree() : nodes_(1) {}
  explicit RegressionTree(std::vector<TreeNode> nodes);

  double Predict(std::span<const double> row) const;
  const std::vector<TreeNode>& nodes() const { return nodes_; }
  int num_leaves() const;
  int depth() const;

 private:
  std::vector<TreeNode> nodes_;  // node 0 is the root
};

// Every feature column as (row, value) entries sorted by (value, row). Built
// once per training matrix and reused by every tree.
class ColumnIndex {
 public:
  struct Entry {
    std::uint32_t row;
    double value;
  };

  explicit ColumnIndex(const features::FeatureMatrix& x);
  std::span<const Entry> Sorted(std::size_t feature) const {
    return {entries_.data() + feature * num_rows_, num_rows_};
  }

 private:
  std::size_t num_rows_ = 0;
  std::vector<Entry> entries_;
};

// Fits one second-order regression tree leaf-wise. `gradient` is the loss
// gradient (leaf value -G / (H + l2)). Row and feature subsamples are drawn
// from `rng`.
RegressionTree FitTree(const features::FeatureMatrix& x,
                       const ColumnIndex& index,
                       std::span<const double> gradient,
                       std::span<const double> hessian,
                       const TrainConfig& config, Rng& rng);

RegressionTree FitTree(const features::FeatureMatrix& x,
                       std::span<const double> gradient,
                       std::span<const double> hessian,
                       const TrainConfig& config, Rng& rng);

// --- ensemble -------------------------------------------------------------------

struct RoundMetrics {
  int round = 0;  // 0 is the empty ensemble
  double train_ndcg = 0.0;
  double valid_ndcg = 0.0;
};

struct GbdtRankerModel {
  std::vector<RegressionTree> trees;
  TrainConfig config;
  int best_iteration = 0;
  int rounds_trained = 0;
  std::vector<RoundMetrics> history;
  std::size_t num_features = 0;
  std::vector<std::string> feature_names;
  // Opaque JSON object carried along for the caller (e.g. fitted
  // preprocessing); empty when absent.
  std::string preprocessing;

  double PredictRow(std::span<const double> row) const;
  std::vector<double> Predict(const features::FeatureMatrix& rows,
                              int threads = 1) const;

  std::string ToJson() const;
  static GbdtRankerModel FromJson(const std::string& text);
};

GbdtRankerModel Train(const RankingDataset& train, const RankingDataset& valid,
                      const TrainConfig& config);

}  // namespace wcprank::ranker

#endif  // WCPRANK_RANKER_H_
