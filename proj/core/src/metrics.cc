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

#include "wcprank/metrics.h"

#include <algorithm>
#include <array>
#include <cmath>
#include <numeric>

#include "wcprank/common.h"

namespace wcprank::metrics {
namespace {

double Gain(int label) { return std::exp2(static_cast<double>(label)) - 1.0; }

double Discount(std::size_t position) {
  return 1.0 / std::log2(static_cast<double>(position) + 2.0);
}

}  // namespace

double DcgAtK(std::span<const int> labels_in_order, int k) {
  Require(k >= 1, "DcgAtK: k must be >= 1");
  const std::size_t limit =
      std::min(labels_in_order.size(), static_cast<std::size_t>(k));
  double dcg = 0.0;
  for (std::size_t i = 0; i < limit; ++i) {
    dcg += Gain(labels_in_order[i]) * Discount(i);
  }
  return dcg;
}

double IdealDcgAtK(std::span<const int> labels, int k) {
  std::vector<int> sorted(labels.begin(), labels.end());
  std::sort(sorted.begin(), sorted.end(), std::greater<>());
  return DcgAtK(sorted, k);
}

std::optional<double> NdcgAtK(std::span<const int> labels_in_order, int k) {
  const double ideal = IdealDcgAtK(labels_in_order, k);
  if (ideal <= 0.0) return std::nullopt;
  return DcgAtK(labels_in_order, k) / ideal;
}

std::optional<double> RecallAtK(std::span<const int> labels_in_order, int k,
                                int tau) {
  Require(k >= 1, "RecallAtK: k must be >= 1");
  std::size_t relevant = 0;
  std::size_t hits = 0;
  for (std::size_t i = 0; i < labels_in_order.size(); ++i) {
    if (labels_in_order[i] >= tau) {
      ++relevant;
      if (i < static_cast<std::size_t>(k)) ++hits;
    }
  }
  if (relevant == 0) return std::nullopt;
  return static_cast<double>(hits) / static_cast<double>(relevant);
}

std::optional<double> ReciprocalRank(std::span<const int> labels_in_order,
                                     int tau) {
  for (std::size_t i = 0; i < labels_in_order.size(); ++i) {
    if (labels_in_order[i] >= tau) return 1.0 / static_cast<double>(i + 1);
  }
  return std::nullopt;
}

std::vector<int> LabelsInPredictedOrder(std::span<const double> scores,
                                        std::span<const int> labels) {
  Require(scores.size() == labels.size(),
          "LabelsInPredictedOrder: size mismatch");
  std::vector<std::size_t> order(scores.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return scores[a] > scores[b];
  });
  std::vector<int> out(order.size());
  for (std::size_t i = 0; i < order.size(); ++i) out[i] = labels[order[i]];
  return out;
}

void MeanAccumulator::Add(std::optional<double> value) {
  if (value) {
    sum_ += *value;
    ++included_;
  } else {
    ++excluded_;
  }
}

std::span<const int> DefaultCutoffs() {
  static constexpr std::array<int, 4> kCutoffs = {1, 3, 5, 10};
  return kCutoffs;
}

RankingReport EvaluateRanking(std::span<const double> scores,
                              std::span<const int> labels,
                              std::span<const std::size_t> query_offsets,
                              std::span<const int> cutoffs, int tau) {
  Require(scores.size() == labels.size(), "EvaluateRanking: size mismatch");
  Require(!query_offsets.empty() && query_offsets.back() == labels.size(),
          "EvaluateRanking: query offsets do not cover the rows");
  std::map<int, MeanAccumulator> ndcg, recall;
  MeanAccumulator mrr;
  const std::size_t num_queries = query_offsets.size() - 1;
  for (std::size_t q = 0; q < num_queries; ++q) {
    const std::size_t begin = query_offsets[q];
    const std::size_t n = query_offsets[q + 1] - begin;
    const auto ordered = LabelsInPredictedOrder(scores.subspan(begin, n),
                                                labels.subspan(begin, n));
    for (int k : cutoffs) {
      ndcg[k].Add(NdcgAtK(ordered, k));
      recall[k].Add(RecallAtK(ordered, k, tau));
    }
    mrr.Add(ReciprocalRank(ordered, tau));
  }
  RankingReport report;
  report.num_queries = num_queries;
  for (int k : cutoffs) {
    report.ndcg[k] = ndcg[k].Mean();
    report.recall[k] = recall[k].Mean();
    report.ndcg_queries = ndcg[k].included();
    report.recall_queries = recall[k].included();
  }
  report.mrr = mrr.Mean();
  return report;
}

double MeanNdcg(std::span<const double> scores, std::span<const int> labels,
                std::span<const std::size_t> query_offsets, int k) {
  MeanAccumulator acc;
  for (std::size_t q = 0; q + 1 < query_offsets.size(); ++q) {
    const std::size_t begin = query_offsets[q];
    const std::size_t n = query_offsets[q + 1] - begin;
    acc.Add(NdcgAtK(LabelsInPredictedOrder(scores.subspan(begin, n),
                                           labels.subspan(begin, n)),
                    k));
  }
  return acc.Mean();
}

}  // namespace wcprank::metrics
