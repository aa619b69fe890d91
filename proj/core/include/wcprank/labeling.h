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

#ifndef WCPRANK_LABELING_H_
#define WCPRANK_LABELING_H_

#include <array>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "wcprank/common.h"
#include "wcprank/synth.h"

namespace wcprank::labeling {

// Criterion order used throughout: distance, speed, availability.
inline constexpr int kNumCriteria = 3;
using CriteriaVector = std::array<double, kNumCriteria>;

enum class Regime { kLow = 0, kMedium = 1, kHigh = 2 };
inline constexpr int kNumRegimes = 3;

struct TriangularFuzzyNumber {
  double a = 0.0;
  double b = 0.0;
  double c = 0.0;

  double Centroid() const { return (a + b + c) / 3.0; }
};

enum class Importance { kLow, kMedium, kHigh };

// Regime-level criterion profile for one role: [regime][criterion].
using RegimeTable = std::array<CriteriaVector, kNumRegimes>;

struct TopsisConfig {
  double epsilon = 1e-9;
  TriangularFuzzyNumber tfn_high{0.7, 0.9, 1.0};
  TriangularFuzzyNumber tfn_medium{0.3, 0.5, 0.7};
  TriangularFuzzyNumber tfn_low{0.1, 0.3, 0.5};
  TriangularFuzzyNumber regime_low{0.0, 0.0, 0.5};
  TriangularFuzzyNumber regime_medium{0.25, 0.5, 0.75};
  TriangularFuzzyNumber regime_high{0.5, 1.0, 1.0};
  double degenerate_value = 0.5;
  double single_candidate_score = 0.5;

  // Linguistic levels per (role, regime, criterion).
  std::array<std::array<Importance, kNumCriteria>, kNumRegimes> consumer_levels{{
      {Importance::kMedium, Importance::kHigh, Importance::kMedium},
      {Importance::kMedium, Importance::kMedium, Importance::kHigh},
      {Importance::kHigh, Importance::kMedium, Importance::kHigh},
  }};
  std::array<std::array<Importance, kNumCriteria>, kNumRegimes> provider_levels{{
      {Importance::kHigh, Importance::kMedium, Importance::kLow},
      {Importance::kMedium, Importance::kHigh, Importance::kMedium},
      {Importance::kLow, Importance::kHigh, Importance::kHigh},
  }};

  // Defuzzified (centroid) and row-normalized regime weights.
  RegimeTable RegimeWeights(Role role) const;
};

// Per-event min-max scaling; distance is inverted so every output is
// benefit-type in [0, 1]. A criterion constant within the event maps to
// degenerate_value for every candidate.
std::vector<CriteriaVector> NormalizeEvent(
    std::span<const synth::Candidate> candidates, const TopsisConfig& config);

// Urgency in [0,1]: 1 - soc for consumers, soc for providers.
double TransactionPressure(double soc_e, Role role);

// Triangular membership with flat shoulders where a == b or b == c.
double TriangularMembership(double x, const TriangularFuzzyNumber& t);

std::array<double, kNumRegimes> RegimeMemberships(double pressure,
                                                  const TopsisConfig& config);

CriteriaVector EventWeights(Role role, double pressure,
                            const TopsisConfig& config);

struct TopsisResult {
  std::vector<CriteriaVector> normalized;
  std::vector<CriteriaVector> weighted;
  CriteriaVector weights{};
  CriteriaVector ideal{};
  CriteriaVector anti_ideal{};
  std::vector<double> distance_to_ideal;
  std::vector<double> distance_to_anti_ideal;
  std::vector<double> closeness;
};

// Closeness from already normalized criteria and event weights.
TopsisResult TopsisFromNormalized(std::vector<CriteriaVector> normalized,
                                  const CriteriaVector& weights,
                                  const TopsisConfig& config);

TopsisResult TopsisScore(const synth::DecisionEvent& event,
                         const TopsisConfig& config);

// --- Beta-mixture smoothing --------------------------------------------------

// Beta shape update inside the M-step.
enum class MStepMethod {
  kMoments,         // responsibility-weighted method of moments
  kGuardedMoments,  // moments, kept only if the component objective does not drop
  kGuardedNewton    // guarded moments, then Newton on the weighted likelihood
};

// "moments", "guarded_moments", "guarded_newton".
std::string MStepName(MStepMethod method);
MStepMethod ParseMStep(const std::string& name);

struct EmConfig {
  MStepMethod m_step = MStepMethod::kGuardedMoments;
  double clip_delta = 1e-4;
  double tolerance = 1e-6;
  int max_iterations = 200;
  int k_min = 2;
  int k_max = 5;
  double shape_min = 0.05;
  double shape_max = 500.0;
  std::uint64_t seed = 0;
  int threads = 1;
};

struct EmModel {
  int k = 0;
  std::vector<double> pi;
  std::vector<double> alpha;
  std::vector<double> beta;
  double log_likelihood = 0.0;
  int iterations = 0;
  std::vector<double> log_likelihood_trace;  // one entry per E-step

  double Mean(int component) const {
    return alpha[component] / (alpha[component] + beta[component]);
  }
  // Posterior responsibilities for a (clipped) score.
  std::vector<double> Responsibilities(double score) const;
  double LogDensity(double score) const;
};

double BetaLogPdf(double x, double a, double b);

std::vector<double> ClipScores(std::span<const double> scores, double delta);

// Fits a K-component Beta mixture to pooled scores by EM. Scores are clipped
// to [delta, 1 - delta] internally.
EmModel EmFit(std::span<const double> scores, int k, const EmConfig& config);

double Bic(const EmModel& model, std::size_t n);

// Fits every K in [k_min, k_max] and returns the fit with the lowest BIC.
EmModel SelectModel(std::span<const double> scores, const EmConfig& config);
int SelectK(std::span<const double> scores, const EmConfig& config);

struct SoftRelevance {
  std::vector<double> smoothed;  // r_hat per candidate
  std::vector<double> soft;      // normalized over the event
};

SoftRelevance EmSmooth(const EmModel& model, std::span<const double> scores,
                       const EmConfig& config);

// --- grades ------------------------------------------------------------------

struct GradeConfig {
  int max_grade = 3;
  std::vector<double> kappa = {0.4, 0.7, 0.9};

  void Validate() const;
};

// Ranks candidates by descending `primary`, ties by descending `secondary`,
// then ascending station id; maps normalized rank scores to grades.
std::vector<int> GradedLabels(std::span<const double> primary,
                              std::span<const double> secondary,
                              std::span<const StationId> station_ids,
                              const GradeConfig& config);

// --- end-to-end label construction -------------------------------------------

enum class LabelSource { kEmSmoothed, kTopsis };

struct CandidateLabel {
  EventId event_id;
  StationId station_id;
  double topsis_r = 0.0;
  double r_hat = 0.0;
  double p_soft = 0.0;
  int grade = 0;
};

struct LabelConfig {
  TopsisConfig topsis;
  EmConfig em;
  GradeConfig grades;
  LabelSource source = LabelSource::kEmSmoothed;
};

struct LabelOutput {
  std::vector<CandidateLabel> labels;  // event order, candidate order
  EmModel em_model;                    // empty when source == kTopsis
};

// Events must all have candidates.
LabelOutput LabelEvents(std::span<const synth::DecisionEvent> events,
                        const LabelConfig& config);

}  // namespace wcprank::labeling

#endif  // WCPRANK_LABELING_H_
