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

#include "wcprank/geo.h"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <unordered_set>

namespace wcprank::geo {
namespace {

constexpr double kDegToRad = std::numbers::pi / 180.0;

}  // namespace

bool GeoPoint::IsValid() const {
  return std::isfinite(lat) && std::isfinite(lon) && lat >= -90.0 &&
         lat <= 90.0 && lon >= -180.0 && lon <= 180.0;
}

double HaversineKm(const GeoPoint& a, const GeoPoint& b) {
  const double phi1 = a.lat * kDegToRad;
  const double phi2 = b.lat * kDegToRad;
  const double dphi = phi2 - phi1;
  const double dlambda = (b.lon - a.lon) * kDegToRad;
  const double s1 = std::sin(dphi / 2.0);
  const double s2 = std::sin(dlambda / 2.0);
  double h = s1 * s1 + std::cos(phi1) * std::cos(phi2) * s2 * s2;
  h = std::clamp(h, 0.0, 1.0);
  return 2.0 * kEarthRadiusKm * std::atan2(std::sqrt(h), std::sqrt(1.0 - h));
}

SearchResult FindCandidates(const GeoPoint& location,
                            std::span<const StationRef> stations,
                            const SearchConfig& config) {
  Require(config.min_count >= 1, "FindCandidates: min_count must be >= 1");
  Require(config.r_start_km > 0.0 && config.r_start_km <= config.r_max_km,
          "FindCandidates: need 0 < r_start <= r_max");
  Require(config.r_step_km > 0.0, "FindCandidates: r_step must be positive");

  SearchResult result;
  // Distances do not depend on the radius, so compute them once.
  std::vector<CandidateHit> all;
  all.reserve(stations.size());
  for (const auto& station : stations) {
    all.push_back({station.station_id, HaversineKm(location, station.location)});
  }
  std::sort(all.begin(), all.end(), [](const auto& x, const auto& y) {
    if (x.distance_km != y.distance_km) return x.distance_km < y.distance_km;
    return x.station_id < y.station_id;
  });
  // Remove repeated ids, keeping the nearest occurrence.
  std::vector<CandidateHit> unique;
  unique.reserve(all.size());
  std::unordered_set<StationId> seen;
  for (const auto& hit : all) {
    if (seen.insert(hit.station_id).second) unique.push_back(hit);
  }

  const auto count_within = [&](double radius) {
    return static_cast<std::size_t>(
        std::upper_bound(unique.begin(), unique.end(), radius,
                         [](double r, const CandidateHit& h) {
                           return r < h.distance_km;
                         }) -
        unique.begin());
  };

  double radius = config.r_start_km;
  for (int step = 1;; ++step) {
    if (count_within(radius) >= static_cast<std::size_t>(config.min_count)) {
      break;
    }
    const double next = config.r_start_km + step * config.r_step_km;
    if (next > config.r_max_km + 1e-12) {
      radius = config.r_max_km;
      break;
    }
    radius = next;
  }
  result.radius_km = radius;
  result.hits.assign(unique.begin(), unique.begin() + count_within(radius));
  return result;
}

}  // namespace wcprank::geo
