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
#include <limits>

#include "wcprank/labeling.h"

namespace wcprank::labeling {
namespace {

double LevelCentroid(Importance level, const TopsisConfig& config) {
  switch (level) {
    case Importance::kLow:
      return config.tfn_low.Centroid();
    case Importance::kMedium:
      return config.tfn_medium.Centroid();
    case Importance::kHigh:
      return config.tfn_high.Centroid();
  }
  return 0.0;
}

}  // namespace

RegimeTable TopsisConfig::RegimeWeights(Role role) const {
  const auto& levels = role == Role::kProvider ? provider_levels : consumer_levels;
  RegimeTable table{};
  for (int g = 0; g < kNumRegimes; ++g) {
    double total = 0.0;
    for (int c = 0; c < kNumCriteria; ++c) {
      table[g][c] = LevelCentroid(levels[g][c], *this);
      total += table[g][c];
    }
    for (double& w : table[g]) w /= total;
  }
  return table;
}

std::vector<CriteriaVector> NormalizeEvent(
    std::span<const synth::Candidate> candidates, const TopsisConfig& config) {
  Require(!candidates.empty(), "NormalizeEvent: event has no candidates");
  const std::size_t n = candidates.size();
  std::vector<CriteriaVector> out(n);

  const auto criterion = [&](std::size_t j, int c) {
    switch (c) {
      case 0:
        return candidates[j].distance_km;
      case 1:
        return candidates[j].charging_speed_kw;
      default:
        return candidates[j].popularity;
    }
  };

  for (int c = 0; c < kNumCriteria; ++c) {
    double lo = std::numeric_limits<double>::infinity();
    double hi = -lo;
    for (std::size_t j = 0; j < n; ++j) {
      lo = std::min(lo, criterion(j, c));
      hi = std::max(hi, criterion(j, c));
    }
    const bool degenerate = hi == lo;
    for (std::size_t j = 0; j < n; ++j) {
      double v;
      if (degenerate) {
        v = config.degenerate_value;
      } else {
        v = (criterion(j, c) - lo) / (hi - lo + config.epsilon);
        if (c == 0) v = 1.0 - v;  // distance is a cost
      }
      out[j][c] = std::clamp(v, 0.0, 1.0);
    }
  }
  return out;
}

double TransactionPressure(double soc_e, Role role) {
  const double soc = std::clamp(soc_e, 0.0, 1.0);
  return role == Role::kConsumer ? 1.0 - soc : soc;
}

double TriangularMembership(double x, const TriangularFuzzyNumber& t) {
  if (x < t.a || x > t.c) return 0.0;
  if (x == t.b) return 1.0;
  if (x < t.b) return t.b > t.a ? (x - t.a) / (t.b - t.a) : 1.0;
  return t.c > t.b ? (t.c - x) / (t.c - t.b) : 1.0;
}

std::array<double, kNumRegimes> RegimeMemberships(double pressure,
                                                  const TopsisConfig& config) {
  return {TriangularMembership(pressure, config.regime_low),
          TriangularMembership(pressure, config.regime_medium),
          TriangularMembership(pressure, config.regime_high)};
}

CriteriaVector EventWeights(Role role, double pressure,
                            const TopsisConfig& config) {
  const auto mu = RegimeMemberships(pressure, config);
  const RegimeTable table = config.RegimeWeights(role);
  CriteriaVector w{};
  double total = 0.0;
  for (int c = 0; c < kNumCriteria; ++c) {
    for (int g = 0; g < kNumRegimes; ++g) w[c] += mu[g] * table[g][c];
    total += w[c];
  }
  Require(total > 0.0, "EventWeights: pressure outside every regime");
  for (double& v : w) v /= total;
  return w;
}

TopsisResult TopsisFromNormalized(std::vector<CriteriaVector> normalized,
                                  const CriteriaVector& weights,
                                  const TopsisConfig& config) {
  Require(!normalized.empty(), "TopsisFromNormalized: no candidates");
  TopsisResult r;
  const std::size_t n = normalized.size();
  r.normalized = std::move(normalized);
  r.weights = weights;
  r.weighted.resize(n);
  r.ideal.fill(-std::numeric_limits<double>::infinity());
  r.anti_ideal.fill(std::numeric_limits<double>::infinity());
  for (std::size_t j = 0; j < n; ++j) {
    for (int c = 0; c < kNumCriteria; ++c) {
      const double v = weights[c] * r.normalized[j][c];
      r.weighted[j][c] = v;
      r.ideal[c] = std::max(r.ideal[c], v);
      r.anti_ideal[c] = std::min(r.anti_ideal[c], v);
    }
  }
  r.distance_to_ideal.resize(n);
  r.distance_to_anti_ideal.resize(n);
  r.closeness.resize(n);
  for (std::size_t j = 0; j < n; ++j) {
    double plus = 0.0;
    double minus = 0.0;
    for (int c = 0; c < kNumCriteria; ++c) {
      const double dp = r.weighted[j][c] - r.ideal[c];
      const double dm = r.weighted[j][c] - r.anti_ideal[c];
      plus += dp * dp;
      minus += dm * dm;
    }
    plus = std::sqrt(plus);
    minus = std::sqrt(minus);
    r.distance_to_ideal[j] = plus;
    r.distance_to_anti_ideal[j] = minus;
    const double denom = plus + minus;
    r.closeness[j] = denom > 0.0 ? std::clamp(minus / denom, 0.0, 1.0)
                                 : config.single_candidate_score;
  }
  return r;
}

TopsisResult TopsisScore(const synth::DecisionEvent& event,
                         const TopsisConfig& config) {
  const double pressure = TransactionPressure(event.soc_e, event.role);
  return TopsisFromNormalized(NormalizeEvent(event.candidates, config),
                              EventWeights(event.role, pressure, config),
                              config);
}

}  // namespace wcprank::labeling
