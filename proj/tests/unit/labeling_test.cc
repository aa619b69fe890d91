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

#include <gtest/gtest.h>

#include "wcprank/labeling.h"
#include "wcprank/random.h"

namespace wcprank::labeling {
namespace {

synth::Candidate Cand(std::int64_t id, double km, double kw, double pop) {
  return {StationId{id}, km, kw, pop};
}

// --- TOPSIS ---------------------------------------------------------------------

TEST(Normalize, ConstantCriterionIsHalf) {
  const std::vector<synth::Candidate> c = {Cand(1, 2, 10, 0.1), Cand(2, 2, 20, 0.2),
                                           Cand(3, 2, 30, 0.3)};
  const auto n = NormalizeEvent(c, {});
  for (const auto& v : n) EXPECT_EQ(v[0], 0.5);
  EXPECT_NEAR(n[0][1], 0.0, 1e-9);
  EXPECT_NEAR(n[1][1], 0.5, 1e-9);
  EXPECT_NEAR(n[2][1], 1.0, 1e-9);
}

TEST(Normalize, DistanceIsInverted) {
  const std::vector<synth::Candidate> c = {Cand(1, 1, 10, 0.1), Cand(2, 3, 10, 0.1)};
  const auto n = NormalizeEvent(c, {});
  EXPECT_NEAR(n[0][0], 1.0, 1e-9);
  EXPECT_NEAR(n[1][0], 0.0, 1e-9);
}

TEST(Pressure, RoleBranchesAndClipping) {
  EXPECT_EQ(TransactionPressure(0.0, Role::kConsumer), 1.0);
  EXPECT_EQ(TransactionPressure(0.8, Role::kProvider), 0.8);
  EXPECT_EQ(TransactionPressure(1.2, Role::kConsumer), 0.0);
}

TEST(Memberships, HandValues) {
  const TopsisConfig c;
  auto m = RegimeMemberships(0.0, c);
  EXPECT_EQ(m[0], 1.0);
  EXPECT_EQ(m[1], 0.0);
  EXPECT_EQ(m[2], 0.0);
  m = RegimeMemberships(0.5, c);
  EXPECT_EQ(m[0], 0.0);
  EXPECT_EQ(m[1], 1.0);
  EXPECT_EQ(m[2], 0.0);
  m = RegimeMemberships(0.375, c);
  EXPECT_DOUBLE_EQ(m[0], 0.25);
  EXPECT_DOUBLE_EQ(m[1], 0.5);
  EXPECT_EQ(m[2], 0.0);
}

TEST(Weights, LowRegimeCollapse) {
  const TopsisConfig c;
  for (Role role : {Role::kConsumer, Role::kProvider}) {
    const auto w = EventWeights(role, 0.0, c);
    const auto row = c.RegimeWeights(role)[0];
    for (int k = 0; k < kNumCriteria; ++k) EXPECT_NEAR(w[k], row[k], 1e-15);
  }
}

TEST(Weights, ConsumerBlendAtThreeEighths) {
  // Centroids: high 2.6/3, medium 0.5, low 0.3.
  const double hi = 2.6 / 3.0, med = 0.5;
  const double low_row[3] = {med, hi, med};
  const double med_row[3] = {med, med, hi};
  double blend[3], total = 0.0;
  for (int k = 0; k < 3; ++k) {
    blend[k] = 0.25 * low_row[k] / (2 * med + hi) + 0.5 * med_row[k] / (2 * med + hi);
    total += blend[k];
  }
  const auto w = EventWeights(Role::kConsumer, 0.375, {});
  for (int k = 0; k < 3; ++k) EXPECT_NEAR(w[k], blend[k] / total, 1e-12);
}

TEST(Weights, SumToOneEverywhere) {
  for (Role role : {Role::kConsumer, Role::kProvider}) {
    for (int i = 0; i <= 400; ++i) {
      const auto w = EventWeights(role, i / 400.0, {});
      EXPECT_NEAR(w[0] + w[1] + w[2], 1.0, 1e-12);
      for (double v : w) EXPECT_GT(v, 0.0);
    }
  }
}

TEST(Topsis, IdealAndAntiIdeal) {
  const auto r = TopsisFromNormalized({{1, 1, 1}, {0, 0, 0}}, {1.0 / 3, 1.0 / 3, 1.0 / 3}, {});
  EXPECT_EQ(r.closeness[0], 1.0);
  EXPECT_EQ(r.closeness[1], 0.0);
}

TEST(Topsis, SingleCandidateIsHalf) {
  synth::DecisionEvent e;
  e.candidates = {Cand(1, 0.4, 50, 0.3)};
  EXPECT_EQ(TopsisScore(e, {}).closeness[0], 0.5);
}

TEST(Topsis, DominatingCandidateScoresHighest) {
  Rng rng(12);
  for (int t = 0; t < 300; ++t) {
    synth::DecisionEvent e;
    e.role = rng.Bernoulli(0.5) ? Role::kProvider : Role::kConsumer;
    e.soc_e = rng.Uniform();
    e.candidates.push_back(Cand(0, 0.1, 200, 1.0));
    const int n = 1 + static_cast<int>(rng.UniformIndex(10));
    for (int j = 1; j <= n; ++j) {
      e.candidates.push_back(Cand(j, rng.Uniform(0.1, 5), rng.Uniform(7, 200), rng.Uniform()));
    }
    const auto r = TopsisScore(e, {});
    EXPECT_EQ(*std::max_element(r.closeness.begin(), r.closeness.end()), r.closeness[0]);
    for (double c : r.closeness) {
      EXPECT_GE(c, 0.0);
      EXPECT_LE(c, 1.0);
    }
  }
}

// --- EM --------------------------------------------------------------------------

std::vector<double> Mixture(std::uint64_t seed, std::size_t n) {
  Rng rng(seed);
  std::vector<double> x(n);
  for (double& v : x) v = rng.Bernoulli(0.5) ? rng.Beta(2, 8) : rng.Beta(8, 2);
  return x;
}

TEST(Em, SingleComponentMatchesMomentFit) {
  Rng rng(2);
  std::vector<double> x(3000);
  for (double& v : x) v = rng.Beta(3, 5);
  const EmConfig config;
  const auto m = EmFit(x, 1, config);
  ASSERT_EQ(m.k, 1);
  EXPECT_EQ(m.pi[0], 1.0);
  EXPECT_EQ(m.Responsibilities(0.3)[0], 1.0);
  const auto c = ClipScores(x, config.clip_delta);
  const double mean = std::accumulate(c.begin(), c.end(), 0.0) / c.size();
  double var = 0.0;
  for (double v : c) var += (v - mean) * (v - mean);
  var /= c.size();
  const double conc = mean * (1 - mean) / var - 1.0;
  EXPECT_NEAR(m.alpha[0], mean * conc, 1e-6 * mean * conc);
  EXPECT_NEAR(m.beta[0], (1 - mean) * conc, 1e-6 * (1 - mean) * conc);
}

TEST(Em, RecoversTwoComponentMixture) {
  const auto m = EmFit(Mixture(7, 5000), 2, {});
  const int lo = m.Mean(0) < m.Mean(1) ? 0 : 1;
  EXPECT_NEAR(m.Mean(lo), 0.2, 0.05);
  EXPECT_NEAR(m.Mean(1 - lo), 0.8, 0.05);
  EXPECT_NEAR(m.pi[lo], 0.5, 0.05);
  EXPECT_NEAR(m.pi[1 - lo], 0.5, 0.05);
}

TEST(Em, ConstantScoresConverge) {
  const std::vector<double> x(500, 0.5);
  for (int k : {1, 2, 3}) {
    const auto m = EmFit(x, k, {});
    for (int c = 0; c < k; ++c) {
      EXPECT_TRUE(std::isfinite(m.alpha[c]) && std::isfinite(m.beta[c]));
      EXPECT_NEAR(m.Mean(c), 0.5, 1e-6);
    }
    EXPECT_TRUE(std::isfinite(m.log_likelihood));
  }
}

TEST(Em, GuardedStepsNeverDecreaseLikelihood) {
  for (MStepMethod method : {MStepMethod::kGuardedMoments, MStepMethod::kGuardedNewton}) {
    EmConfig config;
    config.m_step = method;
    for (int s = 0; s < 10; ++s) {
      // Point masses at the clip bounds alongside a smooth bulk.
      Rng rng(40 + s);
      std::vector<double> x(4000);
      for (double& v : x) {
        const double u = rng.Uniform();
        v = u < 0.1 ? 0.0 : (u < 0.2 ? 1.0 : rng.Beta(2, 3));
      }
      for (int k = 2; k <= 4; ++k) {
        const auto m = EmFit(x, k, config);
        for (std::size_t i = 1; i < m.log_likelihood_trace.size(); ++i) {
          EXPECT_GE(m.log_likelihood_trace[i] - m.log_likelihood_trace[i - 1], -1e-9);
        }
      }
    }
  }
}

TEST(Em, ThreadCountDoesNotChangeFit) {
  const auto x = Mixture(3, 20000);
  EmConfig a, b;
  b.threads = 4;
  const auto ma = EmFit(x, 3, a);
  const auto mb = EmFit(x, 3, b);
  EXPECT_EQ(ma.log_likelihood_trace, mb.log_likelihood_trace);
  EXPECT_EQ(ma.alpha, mb.alpha);
  EXPECT_EQ(ma.beta, mb.beta);
  EXPECT_EQ(ma.pi, mb.pi);
}

TEST(SelectK, BimodalPicksTwo) {
  EXPECT_EQ(SelectK(Mixture(7, 5000), {}), 2);
}

TEST(SelectK, ForcedRange) {
  EmConfig c;
  c.k_min = c.k_max = 2;
  EXPECT_EQ(SelectK(Mixture(8, 2000), c), 2);
}

TEST(SelectK, UnimodalDataStaysAtFloor) {
  Rng rng(5);
  std::vector<double> x(5000);
  for (double& v : x) v = rng.Beta(5, 5);
  const EmConfig config;
  const auto m = SelectModel(x, config);
  EXPECT_EQ(m.k, 2);
  EXPECT_NEAR(m.Mean(0), 0.5, 0.1);
  EXPECT_NEAR(m.Mean(1), 0.5, 0.1);
}

TEST(SelectK, BicPenalizesParameters) {
  EmModel m;
  m.k = 2;
  m.log_likelihood = 100.0;
  EXPECT_DOUBLE_EQ(Bic(m, 1000), -200.0 + 5.0 * std::log(1000.0));
}

TEST(Smooth, SingleComponentIsUniform) {
  const auto m = EmFit(Mixture(1, 1000), 1, {});
  const std::vector<double> r = {0.1, 0.5, 0.9, 0.3};
  const auto s = EmSmooth(m, r, {});
  for (double v : s.smoothed) EXPECT_NEAR(v, m.Mean(0), 1e-12);
  for (double v : s.soft) EXPECT_NEAR(v, 0.25, 1e-12);
}

TEST(Smooth, WeightedMeanOfComponentMeans) {
  // Mirror-image components have equal density at 0.5, so gamma = pi there.
  EmModel m;
  m.k = 2;
  m.pi = {0.25, 0.75};
  m.alpha = {2, 8};
  m.beta = {8, 2};
  const std::vector<double> r = {0.5};
  EXPECT_NEAR(EmSmooth(m, r, {}).smoothed[0], 0.65, 1e-12);
}

TEST(Smooth, SoftRelevanceSumsToOne) {
  const auto m = EmFit(Mixture(2, 3000), 3, {});
  Rng rng(4);
  for (int t = 0; t < 100; ++t) {
    std::vector<double> r(1 + rng.UniformIndex(20));
    for (double& v : r) v = rng.Uniform();
    const auto s = EmSmooth(m, r, {});
    EXPECT_NEAR(std::accumulate(s.soft.begin(), s.soft.end(), 0.0), 1.0, 1e-9);
  }
}

// --- grades ----------------------------------------------------------------------

std::vector<StationId> Ids(std::size_t n) {
  std::vector<StationId> ids(n);
  for (std::size_t i = 0; i < n; ++i) ids[i] = StationId{static_cast<std::int64_t>(i)};
  return ids;
}

TEST(Grades, FiveDistinctValues) {
  const std::vector<double> p = {0.1, 0.5, 0.3, 0.05, 0.05 + 1e-3};
  // Rank order: 0.5, 0.3, 0.1, 0.051, 0.05.
  EXPECT_EQ(GradedLabels(p, p, Ids(5), {}), (std::vector<int>{1, 3, 2, 0, 0}));
}

TEST(Grades, SmallEvents) {
  const std::vector<double> one = {0.2};
  EXPECT_EQ(GradedLabels(one, one, Ids(1), {}), (std::vector<int>{3}));
  const std::vector<double> two = {0.2, 0.7};
  EXPECT_EQ(GradedLabels(two, two, Ids(2), {}), (std::vector<int>{0, 3}));
}

TEST(Grades, TiesFallBackToSecondaryThenStationId) {
  const std::vector<double> p = {0.5, 0.5, 0.5};
  const std::vector<double> r = {0.1, 0.9, 0.1};
  EXPECT_EQ(GradedLabels(p, r, Ids(3), {}), (std::vector<int>{1, 3, 0}));
}

TEST(Grades, InvariantUnderIncreasingTransforms) {
  Rng rng(6);
  for (int t = 0; t < 300; ++t) {
    const std::size_t n = 1 + rng.UniformIndex(30);
    std::vector<double> p(n), tp(n);
    for (std::size_t j = 0; j < n; ++j) {
      p[j] = rng.Uniform();
      tp[j] = std::exp(4.0 * p[j]) + p[j] * p[j] * p[j];
    }
    const auto g = GradedLabels(p, p, Ids(n), {});
    EXPECT_EQ(g, GradedLabels(tp, tp, Ids(n), {}));
    EXPECT_EQ(g[static_cast<std::size_t>(std::max_element(p.begin(), p.end()) - p.begin())], 3);
  }
}

TEST(Grades, RejectsBadThresholds) {
  GradeConfig c;
  c.kappa = {0.7, 0.4, 0.9};
  const std::vector<double> p = {0.1};
  EXPECT_THROW(GradedLabels(p, p, Ids(1), c), ContractError);
}

// --- end to end ------------------------------------------------------------------

std::vector<synth::DecisionEvent> RandomEvents(std::uint64_t seed, int count) {
  Rng rng(seed);
  std::vector<synth::DecisionEvent> events;
  for (int e = 0; e < count; ++e) {
    synth::DecisionEvent ev;
    ev.event_id = EventId{e};
    ev.role = rng.Bernoulli(0.3) ? Role::kProvider : Role::kConsumer;
    ev.soc_e = rng.Uniform();
    const int n = 1 + static_cast<int>(rng.UniformIndex(15));
    for (int j = 0; j < n; ++j) {
      ev.candidates.push_back(Cand(j + 1, rng.Uniform(0.05, 6), rng.Uniform(7, 150),
                                   rng.Uniform()));
    }
    events.push_back(ev);
  }
  return events;
}

TEST(LabelEvents, TopsisSourceGradesRawCloseness) {
  const auto events = RandomEvents(1, 200);
  LabelConfig c;
  c.source = LabelSource::kTopsis;
  const auto out = LabelEvents(events, c);
  std::size_t pos = 0;
  for (const auto& e : events) {
    const auto r = TopsisScore(e, c.topsis).closeness;
    std::vector<StationId> ids;
    for (const auto& cand : e.candidates) ids.push_back(cand.station_id);
    const auto g = GradedLabels(r, r, ids, c.grades);
    for (std::size_t j = 0; j < r.size(); ++j, ++pos) {
      EXPECT_EQ(out.labels[pos].event_id, e.event_id);
      EXPECT_EQ(out.labels[pos].topsis_r, r[j]);
      EXPECT_EQ(out.labels[pos].grade, g[j]);
    }
  }
  EXPECT_EQ(out.em_model.k, 0);
}

TEST(LabelEvents, EmSourceIsDeterministicAndGradesTopCandidate) {
  const auto events = RandomEvents(2, 300);
  LabelConfig c;
  const auto a = LabelEvents(events, c);
  c.em.threads = 3;
  const auto b = LabelEvents(events, c);
  ASSERT_EQ(a.labels.size(), b.labels.size());
  EXPECT_GE(a.em_model.k, c.em.k_min);
  std::size_t pos = 0;
  for (const auto& e : events) {
    int top = 0;
    double sum = 0.0;
    for (std::size_t j = 0; j < e.candidates.size(); ++j, ++pos) {
      EXPECT_EQ(a.labels[pos].grade, b.labels[pos].grade);
      EXPECT_EQ(a.labels[pos].r_hat, b.labels[pos].r_hat);
      top = std::max(top, a.labels[pos].grade);
      sum += a.labels[pos].p_soft;
    }
    EXPECT_EQ(top, 3);
    EXPECT_NEAR(sum, 1.0, 1e-9);
  }
}

TEST(LabelEvents, RejectsZeroCandidateEvents) {
  auto events = RandomEvents(3, 20);
  events[4].candidates.clear();
  EXPECT_THROW(LabelEvents(events, {}), ContractError);
}

}  // namespace
}  // namespace wcprank::labeling
