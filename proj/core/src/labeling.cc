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
#include <numeric>

#include "wcprank/labeling.h"
#include "wcprank/parallel.h"

namespace wcprank::labeling {

void GradeConfig::Validate() const {
  Require(max_grade >= 1, "GradeConfig: max_grade must be >= 1");
  Require(kappa.size() == static_cast<std::size_t>(max_grade),
          "GradeConfig: need one threshold per nonzero grade");
  for (std::size_t g = 0; g < kappa.size(); ++g) {
    Require(kappa[g] > 0.0 && kappa[g] <= 1.0,
            "GradeConfig: thresholds must lie in (0, 1]");
    Require(g == 0 || kappa[g] > kappa[g - 1],
            "GradeConfig: thresholds must be strictly increasing");
  }
}

std::vector<int> GradedLabels(std::span<const double> primary,
                              std::span<const double> secondary,
                              std::span<const StationId> station_ids,
                              const GradeConfig& config) {
  const std::size_t n = primary.size();
  Require(secondary.size() == n && station_ids.size() == n,
          "GradedLabels: input lengths differ");
  config.Validate();

  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    if (primary[a] != primary[b]) return primary[a] > primary[b];
    if (secondary[a] != secondary[b]) return secondary[a] > secondary[b];
    return station_ids[a] < station_ids[b];
  });

  const double denom = static_cast<double>(std::max<std::size_t>(n, 2) - 1);
  std::vector<int> grades(n, 0);
  for (std::size_t rank = 0; rank < n; ++rank) {
    const double q = 1.0 - static_cast<double>(rank) / denom;
    int grade = 0;
    for (int g = config.max_grade; g >= 1; --g) {
      if (q >= config.kappa[g - 1]) {
        grade = g;
        break;
      }
    }
    grades[order[rank]] = grade;
  }
  return grades;
}

LabelOutput LabelEvents(std::span<const synth::DecisionEvent> events,
                        const LabelConfig& config) {
  config.grades.Validate();
  const std::size_t num_events = events.size();
  std::vector<std::size_t> offsets(num_events + 1, 0);
  for (std::size_t e = 0; e < num_events; ++e) {
    Require(events[e].HasCandidates(),
            "LabelEvents: zero-candidate events must be excluded");
    offsets[e + 1] = offsets[e] + events[e].candidates.size();
  }

  std::vector<double> closeness(offsets.back());
  ParallelFor(num_events, config.em.threads, [&](std::size_t e) {
    const auto result = TopsisScore(events[e], config.topsis);
    std::copy(result.closeness.begin(), result.closeness.end(),
              closeness.begin() + static_cast<std::ptrdiff_t>(offsets[e]));
  });

  LabelOutput out;
  if (config.source == LabelSource::kEmSmoothed) {
    out.em_model = SelectModel(closeness, config.em);
  }

  out.labels.resize(offsets.back());
  ParallelFor(num_events, config.em.threads, [&](std::size_t e) {
    const auto& event = events[e];
    const std::size_t n = event.candidates.size();
    const std::span<const double> r(closeness.data() + offsets[e], n);
    SoftRelevance soft;
    if (config.source == LabelSource::kEmSmoothed) {
      soft = EmSmooth(out.em_model, r, config.em);
    } else {
      soft.smoothed.assign(r.begin(), r.end());
      const double total = std::accumulate(r.begin(), r.end(), 0.0);
      soft.soft.resize(n);
      for (std::size_t j = 0; j < n; ++j) {
        soft.soft[j] = total > 0.0 ? r[j] / total : 1.0 / static_cast<double>(n);
      }
    }
    std::vector<StationId> ids(n);
    for (std::size_t j = 0; j < n; ++j) ids[j] = event.candidates[j].station_id;
    const std::vector<int> grades =
        config.source == LabelSource::kEmSmoothed
            ? GradedLabels(soft.soft, r, ids, config.grades)
            : GradedLabels(r, r, ids, config.grades);
    for (std::size_t j = 0; j < n; ++j) {
      auto& label = out.labels[offsets[e] + j];
      label.event_id = event.event_id;
      label.station_id = ids[j];
      label.topsis_r = r[j];
      label.r_hat = soft.smoothed[j];
      label.p_soft = soft.soft[j];
      label.grade = grades[j];
    }
  });
  return out;
}

}  // namespace wcprank::labeling
