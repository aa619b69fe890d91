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

#include <cmath>
#include <numeric>

#include <gtest/gtest.h>

#include "wcprank/metrics.h"
#include "wcprank/random.h"
#include "wcprank/ranker.h"

namespace wcprank::ranker {
namespace {

// --- lambdas ---------------------------------------------------------------------

TEST(Lambdas, EqualLabelsGiveNothing) {
  const std::vector<double> s = {0.3, -1.0, 2.0};
  const std::vector<int> y = {2, 2, 2};
  const std::vector<std::size_t> off = {0, 3};
  for (auto obj : {Objective::kLambdaRank, Objective::kPairwiseLogistic}) {
    const auto l = ComputeLambdas(s, y, off, obj, 1.0);
    for (std::size_t i = 0; i < 3; ++i) {
      EXPECT_EQ(l.lambda[i], 0.0);
      EXPECT_EQ(l.hessian[i], kHessianFloor);
    }
  }
}

TEST(Lambdas, LambdaRankTwoDocHandValue) {
  const std::vector<double> s = {0.0, 0.0};
  const std::vector<int> y = {1, 0};
  const std::vector<std::size_t> off = {0, 2};
  const double delta = 1.0 - 1.0 / std::log2(3.0);
  const auto l = ComputeLambdas(s, y, off, Objective::kLambdaRank, 1.0);
  EXPECT_NEAR(l.lambda[0], 0.184535, 1e-6);
  EXPECT_NEAR(l.lambda[0], 0.5 * delta, 1e-9);
  EXPECT_NEAR(l.lambda[1], -0.5 * delta, 1e-9);
  EXPECT_NEAR(l.hessian[0], 0.25 * delta, 1e-9);
}

TEST(Lambdas, PairwiseTwoDocHandValue) {
  const std::vector<double> s = {0.0, 0.0};
  const std::vector<int> y = {1, 0};
  const std::vector<std::size_t> off = {0, 2};
  const auto l = ComputeLambdas(s, y, off, Objective::kPairwiseLogistic, 1.0);
  EXPECT_NEAR(l.lambda[0], 0.5, 1e-12);
  EXPECT_NEAR(l.lambda[1], -0.5, 1e-12);
}

TEST(Lambdas, PairwiseMatchesFiniteDifferences) {
  Rng rng(1);
  const std::vector<std::size_t> off = {0, 3};
  for (int t = 0; t < 500; ++t) {
    std::vector<double> s(3);
    std::vector<int> y(3);
    for (int j = 0; j < 3; ++j) {
      s[j] = rng.Normal(0, 2);
      y[j] = static_cast<int>(rng.UniformIndex(4));
    }
    const double sigma = rng.Uniform(0.5, 2.0);
    const auto l = ComputeLambdas(s, y, off, Objective::kPairwiseLogistic, sigma);
    for (int j = 0; j < 3; ++j) {
      const double h = 1e-5;
      auto sp = s, sm = s;
      sp[j] += h;
      sm[j] -= h;
      const double fd = (PairwiseLogisticLoss(sp, y, off, sigma) -
                         PairwiseLogisticLoss(sm, y, off, sigma)) / (2 * h);
      const double scale = std::max(std::abs(fd), std::abs(l.lambda[j]));
      if (scale > 1e-8) EXPECT_LE(std::abs(fd + l.lambda[j]) / scale, 1e-5);
    }
  }
}

TEST(Lambdas, QuerySumsAreExactlyZeroAndThreadInvariant) {
  Rng rng(2);
  std::vector<double> s;
  std::vector<int> y;
  std::vector<std::size_t> off = {0};
  for (int q = 0; q < 200; ++q) {
    const std::size_t n = 1 + rng.UniformIndex(25);
    for (std::size_t j = 0; j < n; ++j) {
      s.push_back(rng.Normal());
      y.push_back(static_cast<int>(rng.UniformIndex(4)));
    }
    off.push_back(y.size());
  }
  for (auto obj : {Objective::kLambdaRank, Objective::kPairwiseLogistic}) {
    const auto a = ComputeLambdas(s, y, off, obj, 1.0, 1);
    const auto b = ComputeLambdas(s, y, off, obj, 1.0, 4);
    EXPECT_EQ(a.lambda, b.lambda);
    EXPECT_EQ(a.hessian, b.hessian);
    for (std::size_t q = 0; q + 1 < off.size(); ++q) {
      double sum = 0.0;
      for (std::size_t i = off[q]; i < off[q + 1]; ++i) {
        sum += a.lambda[i];
        EXPECT_GE(a.hessian[i], kHessianFloor);
      }
      EXPECT_EQ(sum, 0.0);
    }
  }
}

TEST(Objective, NamesRoundTrip) {
  EXPECT_EQ(ParseObjective("lambdarank"), Objective::kLambdaRank);
  EXPECT_EQ(ParseObjective("pairwise"), Objective::kPairwiseLogistic);
  EXPECT_EQ(ParseObjective(ObjectiveName(Objective::kPairwiseLogistic)),
            Objective::kPairwiseLogistic);
  EXPECT_THROW(ParseObjective("listnet"), ContractError);
}

// --- trees -----------------------------------------------------------------------

TrainConfig ExactConfig() {
  TrainConfig c;
  c.min_samples_leaf = 1;
  c.row_subsample = 1.0;
  c.feature_subsample = 1.0;
  c.l2_leaf = 1.0;
  return c;
}

features::FeatureMatrix Matrix(std::size_t rows, std::size_t cols, std::vector<double> v) {
  features::FeatureMatrix m;
  m.num_rows = rows;
  m.num_cols = cols;
  m.values = std::move(v);
  for (std::size_t c = 0; c < cols; ++c) m.names.push_back("f" + std::to_string(c));
  return m;
}

TEST(Tree, ZeroGradientsGiveZeroLeaf) {
  const auto x = Matrix(4, 1, {1, 2, 3, 4});
  const std::vector<double> g(4, 0.0), h(4, 1.0);
  Rng rng(1);
  const auto t = FitTree(x, g, h, ExactConfig(), rng);
  ASSERT_EQ(t.nodes().size(), 1u);
  EXPECT_EQ(t.nodes()[0].value, 0.0);
}

TEST(Tree, SeparatingFeatureSplitsAtMidpoint) {
  // Feature 0 separates the gradient signs; feature 1 does not.
  const auto x = Matrix(4, 2, {1, 4, 2, 1, 3, 3, 4, 2});
  const std::vector<double> g = {-1, -1, 1, 1}, h(4, 1.0);
  // Candidate gains, hand enumerated: f0 @2.5 -> 4/3; f1 best -> 1/2.
  Rng rng(1);
  const auto t = FitTree(x, g, h, ExactConfig(), rng);
  const auto& root = t.nodes()[0];
  EXPECT_EQ(root.feature, 0);
  EXPECT_EQ(root.threshold, 2.5);
  EXPECT_NEAR(root.gain, 4.0 / 3.0, 1e-12);
  EXPECT_NEAR(t.Predict(std::vector<double>{1, 0}), 2.0 / 3.0, 1e-12);
  EXPECT_NEAR(t.Predict(std::vector<double>{4, 0}), -2.0 / 3.0, 1e-12);
}

TEST(Tree, MinLeafEqualToRowsForbidsSplits) {
  const auto x = Matrix(4, 1, {1, 2, 3, 4});
  const std::vector<double> g = {-1, -2, 1, 0.5}, h = {1, 1, 2, 1};
  TrainConfig c = ExactConfig();
  c.min_samples_leaf = 4;
  Rng rng(1);
  const auto t = FitTree(x, g, h, c, rng);
  ASSERT_EQ(t.nodes().size(), 1u);
  EXPECT_NEAR(t.nodes()[0].value, 1.5 / 6.0, 1e-15);
}

TEST(Tree, RespectsLeafAndDepthLimits) {
  Rng data(4);
  const std::size_t n = 2000;
  std::vector<double> v(n * 3), g(n), h(n, 1.0);
  for (double& e : v) e = data.Uniform();
  for (std::size_t i = 0; i < n; ++i) g[i] = std::sin(10 * v[i * 3]) + v[i * 3 + 1];
  const auto x = Matrix(n, 3, v);
  for (int leaves : {2, 7, 31}) {
    for (int depth : {1, 3, 8}) {
      TrainConfig c = ExactConfig();
      c.max_leaves = leaves;
      c.max_depth = depth;
      c.min_samples_leaf = 20;
      Rng rng(5);
      const auto t = FitTree(x, g, h, c, rng);
      EXPECT_LE(t.num_leaves(), leaves);
      EXPECT_LE(t.depth(), depth);
      for (const auto& node : t.nodes()) {
        if (node.IsLeaf()) EXPECT_GE(node.count, 20);
      }
    }
  }
}

TEST(Tree, ThreadCountDoesNotChangeTree) {
  Rng data(6);
  const std::size_t n = 3000;
  std::vector<double> v(n * 6), g(n), h(n);
  for (double& e : v) e = std::round(data.Uniform() * 50);  // many ties
  for (std::size_t i = 0; i < n; ++i) {
    g[i] = data.Normal();
    h[i] = data.Uniform(0.1, 1);
  }
  const auto x = Matrix(n, 6, v);
  TrainConfig a;
  TrainConfig b;
  b.threads = 4;
  Rng ra(9), rb(9);
  const auto ta = FitTree(x, g, h, a, ra);
  const auto tb = FitTree(x, g, h, b, rb);
  ASSERT_EQ(ta.nodes().size(), tb.nodes().size());
  for (std::size_t i = 0; i < ta.nodes().size(); ++i) {
    EXPECT_EQ(ta.nodes()[i].feature, tb.nodes()[i].feature);
    EXPECT_EQ(ta.nodes()[i].threshold, tb.nodes()[i].threshold);
    EXPECT_EQ(ta.nodes()[i].value, tb.nodes()[i].value);
  }
}

// --- ensemble --------------------------------------------------------------------

TEST(Predict, EmptyEnsembleScoresZero) {
  GbdtRankerModel m;
  m.num_features = 2;
  const auto x = Matrix(3, 2, {1, 2, 3, 4, 5, 6});
  EXPECT_EQ(m.Predict(x), (std::vector<double>{0, 0, 0}));
}

TEST(Predict, HandTraversal) {
  // root: f1 <= 0.5 ? (f0 <= 2 ? 1.0 : -2.0) : 4.0
  std::vector<TreeNode> nodes(5);
  nodes[0] = {1, 0.5, 1, 2, 0, 1, 3};
  nodes[1] = {0, 2.0, 3, 4, 0, 1, 2};
  nodes[2].value = 4.0;
  nodes[3].value = 1.0;
  nodes[4].value = -2.0;
  GbdtRankerModel m;
  m.num_features = 2;
  m.config.learning_rate = 0.1;
  m.trees.emplace_back(nodes);
  const auto x = Matrix(4, 2, {1, 0, 3, 0.5, 0, 0.6, 1, 0});
  const auto s = m.Predict(x);
  EXPECT_DOUBLE_EQ(s[0], 0.1 * 1.0);
  EXPECT_DOUBLE_EQ(s[1], 0.1 * -2.0);
  EXPECT_DOUBLE_EQ(s[2], 0.1 * 4.0);
  EXPECT_EQ(s[3], s[0]);
}

RankingDataset MonotoneDataset(std::uint64_t seed, std::size_t queries, std::int64_t id_base) {
  Rng rng(seed);
  RankingDataset d;
  d.features.num_cols = 3;
  d.features.names = {"signal", "noise_a", "noise_b"};
  for (std::size_t q = 0; q < queries; ++q) {
    const std::size_t n = 4 + rng.UniformIndex(8);
    for (std::size_t j = 0; j < n; ++j) {
      const double s = rng.Uniform();
      d.features.values.insert(d.features.values.end(), {s, rng.Uniform(), rng.Uniform()});
      d.labels.push_back(static_cast<int>(s * 4.0));
    }
    d.query_offsets.push_back(d.labels.size());
    d.query_ids.push_back(EventId{id_base + static_cast<std::int64_t>(q)});
  }
  d.features.num_rows = d.labels.size();
  return d;
}

TEST(Train, LearnsMonotoneSignal) {
  const auto train = MonotoneDataset(1, 300, 0);
  const auto valid = MonotoneDataset(2, 80, 10000);
  const auto test = MonotoneDataset(3, 80, 20000);
  TrainConfig c;
  c.num_rounds = 50;
  c.learning_rate = 0.1;
  const auto m = Train(train, valid, c);
  const auto s = m.Predict(test.features);
  EXPECT_GE(metrics::MeanNdcg(s, test.labels, test.query_offsets, 10), 0.99);
}

TEST(Train, ConstantValidationLabelsStopAfterFirstRound) {
  const auto train = MonotoneDataset(1, 100, 0);
  auto valid = MonotoneDataset(2, 30, 10000);
  std::fill(valid.labels.begin(), valid.labels.end(), 1);
  TrainConfig c;
  c.num_rounds = 100;
  c.early_stopping_rounds = 1;
  const auto m = Train(train, valid, c);
  EXPECT_EQ(m.rounds_trained, 1);
  EXPECT_EQ(m.best_iteration, 0);
  EXPECT_TRUE(m.trees.empty());
}

TEST(Train, BestIterationIsValidationArgmax) {
  const auto train = MonotoneDataset(4, 150, 0);
  const auto valid = MonotoneDataset(5, 40, 10000);
  TrainConfig c;
  c.num_rounds = 80;
  c.early_stopping_rounds = 10;
  const auto m = Train(train, valid, c);
  ASSERT_EQ(m.history.size(), static_cast<std::size_t>(m.rounds_trained) + 1);
  EXPECT_EQ(m.trees.size(), static_cast<std::size_t>(m.best_iteration));
  const double best = m.history[m.best_iteration].valid_ndcg;
  for (const auto& h : m.history) EXPECT_LE(h.valid_ndcg, best);
  EXPECT_GE(best, m.history.back().valid_ndcg);
}

TEST(Train, SameSeedIsBitIdenticalAcrossThreadCounts) {
  const auto train = MonotoneDataset(6, 200, 0);
  const auto valid = MonotoneDataset(7, 50, 10000);
  TrainConfig c;
  c.num_rounds = 30;
  c.seed = 77;
  const auto a = Train(train, valid, c).ToJson();
  c.threads = 4;
  EXPECT_EQ(a, Train(train, valid, c).ToJson());
  c.seed = 78;
  EXPECT_NE(a, Train(train, valid, c).ToJson());
}

TEST(Train, RejectsSharedQueries) {
  const auto train = MonotoneDataset(1, 20, 0);
  const auto valid = MonotoneDataset(2, 20, 10);
  EXPECT_THROW(Train(train, valid, {}), ContractError);
}

TEST(Model, JsonRoundTripPreservesScores) {
  const auto train = MonotoneDataset(8, 100, 0);
  const auto valid = MonotoneDataset(9, 30, 10000);
  TrainConfig c;
  c.num_rounds = 20;
  auto m = Train(train, valid, c);
  m.preprocessing = R"({"note":"opaque"})";
  const auto back = GbdtRankerModel::FromJson(m.ToJson());
  EXPECT_EQ(back.ToJson(), m.ToJson());
  EXPECT_EQ(back.Predict(valid.features), m.Predict(valid.features));
  EXPECT_EQ(back.best_iteration, m.best_iteration);
  EXPECT_EQ(back.feature_names, m.feature_names);
  EXPECT_THROW(GbdtRankerModel::FromJson(R"({"format":"other"})"), ContractError);
}

}  // namespace
}  // namespace wcprank::ranker
