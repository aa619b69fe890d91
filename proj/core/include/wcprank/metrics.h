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

#ifndef WCPRANK_METRICS_H_
#define WCPRANK_METRICS_H_

#include <cstddef>
#include <map>
#include <optional>
#include <span>
#include <vector>

namespace wcprank::metrics {

inline constexpr int kDefaultRelevanceThreshold = 1;

// Gain 2^rel - 1, discount log2(position + 1) with 1-based positions.
double DcgAtK(std::span<const int> labels_in_order, int k);
double IdealDcgAtK(std::span<const int> labels, int k);

// NDCG@k for labels listed in predicted order. Empty when the ideal DCG is
// zero; such queries are excluded from aggregation.
std::optional<double> NdcgAtK(std::span<const int> labels_in_order, int k);

// Fraction of relevant items (label >= tau) found in the top k. Empty if the
// query has no relevant item.
std::optional<double> RecallAtK(std::span<const int> labels_in_order, int k,
                                int tau = kDefaultRelevanceThreshold);

// Reciprocal rank of the first relevant item. Empty if none is relevant.
std::optional<double> ReciprocalRank(std::span<const int> labels_in_order,
                                     int tau = kDefaultRelevanceThreshold);

// Reorders labels by descending score, ties by ascending position.
std::vector<int> LabelsInPredictedOrder(std::span<const double> scores,
                                        std::span<const int> labels);

// Accumulates per-query values; excluded (empty) queries are counted
// separately.
class MeanAccumulator {
 public:
  void Add(std::optional<double> value);
  double Mean() const { return included_ > 0 ? sum_ / included_ : 0.0; }
  std::size_t included() const { return included_; }
  std::size_t excluded() const { return excluded_; }

 private:
  double sum_ = 0.0;
  std::size_t included_ = 0;
  std::size_t excluded_ = 0;
};

// {1, 3, 5, 10}
std::span<const int> DefaultCutoffs();

struct RankingReport {
  std::map<int, double> ndcg;
  std::map<int, double> recall;
  double mrr = 0.0;
  std::size_t num_queries = 0;
  std::size_t ndcg_queries = 0;    // queries with nonzero ideal DCG
  std::size_t recall_queries = 0;  // queries with at least one relevant item
};

// Evaluates grouped scores. `query_offsets` has num_queries + 1 entries.
RankingReport EvaluateRanking(std::span<const double> scores,
                              std::span<const int> labels,
                              std::span<const std::size_t> query_offsets,
                              std::span<const int> cutoffs = DefaultCutoffs(),
                              int tau = kDefaultRelevanceThreshold);

// Mean NDCG@k over queries with nonzero ideal DCG.
double MeanNdcg(std::span<const double> scores, std::span<const int> labels,
                std::span<const std::size_t> query_offsets, int k);

}  // namespace wcprank::metrics

#endif  // WCPRANK_METRICS_H_
