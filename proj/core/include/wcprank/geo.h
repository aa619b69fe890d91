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

#ifndef WCPRANK_GEO_H_
#define WCPRANK_GEO_H_

#include <span>
#include <vector>

#include "wcprank/common.h"

namespace wcprank::geo {

inline constexpr double kEarthRadiusKm = 6371.0;

// Latitude/longitude in degrees.
struct GeoPoint {
  double lat = 0.0;
  double lon = 0.0;

  bool IsValid() const;
};

struct StationRef {
  StationId station_id;
  GeoPoint location;
};

// Great-circle distance on a sphere of radius kEarthRadiusKm.
double HaversineKm(const GeoPoint& a, const GeoPoint& b);

struct SearchConfig {
  int min_count = 3;
  double r_start_km = 1.0;
  double r_step_km = 1.0;
  double r_max_km = 10.0;
};

struct CandidateHit {
  StationId station_id;
  double distance_km = 0.0;
};

struct SearchResult {
  std::vector<CandidateHit> hits;  // ascending by (distance, station_id)
  double radius_km = 0.0;          // radius at which the search stopped
};

// Adaptive-radius search: grows the radius from r_start in r_step increments
// (capped at r_max) until at least min_count distinct stations lie within it
// (inclusive boundary). Returns whatever is inside r_max when the count is
// never met, possibly nothing.
SearchResult FindCandidates(const GeoPoint& location,
                            std::span<const StationRef> stations,
                            const SearchConfig& config = {});

}  // namespace wcprank::geo

#endif  // WCPRANK_GEO_H_
