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

#include <algorithm>
#include <cmath>
#include <numeric>

#include "wcprank/parallel.h"
#include "wcprank/ranker.h"

namespace wcprank::ranker {
namespace {

// Lambdas are accumulated as integers in units of 2^-40 so that the +/- pair
// contributions cancel exactly within a query.
constexpr double kFixedScale = 1099511627776.0;  // 2^40

double Gain(int label) { return std::exp2(static_cast<double>(label)) - 1.0; }
double Discount(std::size_t pos) {
  return 1.0 / std::log2(static_cast<double>(pos) + 2.0);
}

void QueryLambdas(std::span<const double> s, std::span<const int> y,
                  Objective objective, double sigma, std::span<double> lambda,
                  std::span<double> hessian) {
  const std::size_t n = s.size();
  std::fill(lambda.begin(), lambda.end(), 0.0);
  std::fill(hessian.begin(), hessian.end(), kHessianFloor);
  if (n < 2) return;

  std::vector<std::size_t> position;
  double inv_idcg = 0.0;
  if (objective == Objective::kLambdaRank) {
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) { return s[a] > s[b]; });
    position.resize(n);
    for (std::size_t p = 0; p < n; ++p) position[order[p]] = p;
    std::vector<int> ideal(y.begin(), y.end());
    std::sort(ideal.begin(), ideal.end(), std::greater<>());
    double idcg = 0.0;
    for (std::size_t p = 0; p < n; ++p) idcg += Gain(ideal[p]) * Discount(p);
    if (idcg <= 0.0) return;
    inv_idcg = 1.0 / idcg;
  }

  std::vector<std::int64_t> fixed(n, 0);
  std::vector<double> h(n, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      if (y[i] <= y[j]) continue;
      double weight = 1.0;
      if (objective == Objective::kLambdaRank) {
        weight = std::abs((Gain(y[i]) - Gain(y[j])) *
                          (Discount(position[i]) - Discount(position[j]))) *
                 inv_idcg;
      }
      const double rho = 1.0 / (1.0 + std::exp(sigma * (s[i] - s[j])));
      const auto q =
          static_cast<std::int64_t>(std::llround(sigma * rho * weight * kFixedScale));
      fixed[i] += q;
      fixed[j] -= q;
      const double second = sigma * sigma * rho * (1.0 - rho) * weight;
      h[i] += second;
      h[j] += second;
    }
  }
  for (std::size_t i = 0; i < n; ++i) {
    lambda[i] = static_cast<double>(fixed[i]) / kFixedScale;
    hessian[i] = std::max(h[i], kHessianFloor);
  }
}

void CheckGroups(std::span<const double> scores, std::span<const int> labels,
                 std::span<const std::size_t> offsets) {
  Require(scores.size() == labels.size(), "lambdas: size mismatch");
  Require(!offsets.empty() && offsets.front() == 0 &&
              offsets.back() == labels.size(),
          "lambdas: query offsets do not cover the rows");
  for (std::size_t q = 0; q + 1 < offsets.size(); ++q) {
    Require(offsets[q + 1] > offsets[q], "lambdas: empty query");
  }
  for (double s : scores) Require(std::isfinite(s), "lambdas: non-finite score");
}

}  // namespace

Lambdas ComputeLambdas(std::span<const double> scores,
                       std::span<const int> labels,
                       std::span<const std::size_t> query_offsets,
                       Objective objective, double sigma, int threads) {
  CheckGroups(scores, labels, query_offsets);
  Lambdas out;
  out.lambda.resize(scores.size());
  out.hessian.resize(scores.size());
  ParallelFor(query_offsets.size() - 1, threads, [&](std::size_t q) {
    const std::size_t begin = query_offsets[q];
    const std::size_t n = query_offsets[q + 1] - begin;
    QueryLambdas(scores.subspan(begin, n), labels.subspan(begin, n), objective,
                 sigma, std::span(out.lambda).subspan(begin, n),
                 std::span(out.hessian).subspan(begin, n));
  });
  return out;
}

double PairwiseLogisticLoss(std::span<const double> scores,
                            std::span<const int> labels,
                            std::span<const std::size_t> query_offsets,
                            double sigma) {
  CheckGroups(scores, labels, query_offsets);
  double loss = 0.0;
  for (std::size_t q = 0; q + 1 < query_offsets.size(); ++q) {
    for (std::size_t i = query_offsets[q]; i < query_offsets[q + 1]; ++i) {
      for (std::size_t j = query_offsets[q]; j < query_offsets[q + 1]; ++j) {
        if (labels[i] <= labels[j]) continue;
        loss += std::log1p(std::exp(-sigma * (scores[i] - scores[j])));
      }
    }
  }
  return loss;
}

}  // namespace wcprank::ranker
