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
#include <numbers>
#include <set>

#include <gtest/gtest.h>

#include "wcprank/geo.h"
#include "wcprank/random.h"

namespace wcprank::geo {
namespace {

// Great-circle distance by the atan2 (Vincenty, spherical) form.
double OracleKm(const GeoPoint& a, const GeoPoint& b) {
  const double d2r = std::numbers::pi / 180.0;
  const double p1 = a.lat * d2r, p2 = b.lat * d2r, dl = (b.lon - a.lon) * d2r;
  const double x = std::cos(p2) * std::sin(dl);
  const double y = std::cos(p1) * std::sin(p2) - std::sin(p1) * std::cos(p2) * std::cos(dl);
  const double z = std::sin(p1) * std::sin(p2) + std::cos(p1) * std::cos(p2) * std::cos(dl);
  return kEarthRadiusKm * std::atan2(std::hypot(x, y), z);
}

// A point `km` due north of `origin`.
GeoPoint North(const GeoPoint& origin, double km) {
  return {origin.lat + km / kEarthRadiusKm * 180.0 / std::numbers::pi, origin.lon};
}

const GeoPoint kOrigin{41.88, -87.63};

TEST(Haversine, IdenticalPointsAreZero) {
  EXPECT_EQ(HaversineKm(kOrigin, kOrigin), 0.0);
}

TEST(Haversine, AntipodalArc) {
  EXPECT_NEAR(HaversineKm({0, 0}, {0, 180}), 20015.087, 0.01);
}

TEST(Haversine, MatchesIndependentOracle) {
  const GeoPoint a{41.8781, -87.6298};
  const GeoPoint b{41.9000, -87.6500};
  const double expect = OracleKm(a, b);
  EXPECT_NEAR(HaversineKm(a, b), expect, 1e-6 * expect);
}

TEST(Haversine, RandomPairsAgreeWithOracleAndAreSymmetric) {
  Rng rng(5);
  for (int i = 0; i < 2000; ++i) {
    const GeoPoint a{rng.Uniform(-80, 80), rng.Uniform(-180, 180)};
    const GeoPoint b{rng.Uniform(-80, 80), rng.Uniform(-180, 180)};
    const double d = HaversineKm(a, b);
    EXPECT_NEAR(d, OracleKm(a, b), 1e-6 * std::max(1.0, d));
    EXPECT_EQ(d, HaversineKm(b, a));
  }
}

TEST(FindCandidates, ImmediateSatisfaction) {
  const std::vector<StationRef> s = {{StationId{1}, North(kOrigin, 0.5)}};
  SearchConfig c;
  c.min_count = 1;
  const auto r = FindCandidates(kOrigin, s, c);
  ASSERT_EQ(r.hits.size(), 1u);
  EXPECT_EQ(r.hits[0].station_id, StationId{1});
  EXPECT_EQ(r.radius_km, 1.0);
}

TEST(FindCandidates, NothingWithinMaxRadius) {
  const std::vector<StationRef> s = {{StationId{1}, North(kOrigin, 12.0)}};
  const auto r = FindCandidates(kOrigin, s);
  EXPECT_TRUE(r.hits.empty());
  EXPECT_EQ(r.radius_km, 10.0);
}

TEST(FindCandidates, RadiusExpandsUntilMinCount) {
  const std::vector<StationRef> s = {{StationId{3}, North(kOrigin, 2.5)},
                                     {StationId{1}, North(kOrigin, 0.5)},
                                     {StationId{2}, North(kOrigin, 1.5)},
                                     {StationId{4}, North(kOrigin, 3.5)}};
  const auto r = FindCandidates(kOrigin, s);
  EXPECT_EQ(r.radius_km, 3.0);
  ASSERT_EQ(r.hits.size(), 3u);
  EXPECT_EQ(r.hits[0].station_id, StationId{1});
  EXPECT_EQ(r.hits[1].station_id, StationId{2});
  EXPECT_EQ(r.hits[2].station_id, StationId{3});
  EXPECT_NEAR(r.hits[2].distance_km, 2.5, 1e-9);
}

TEST(FindCandidates, ReturnsPartialSetAtMaxRadius) {
  const std::vector<StationRef> s = {{StationId{1}, North(kOrigin, 4.0)},
                                     {StationId{2}, North(kOrigin, 9.0)}};
  const auto r = FindCandidates(kOrigin, s);
  EXPECT_EQ(r.hits.size(), 2u);
  EXPECT_EQ(r.radius_km, 10.0);
}

TEST(FindCandidates, DuplicatesRemovedAndTiesByStationId) {
  const GeoPoint p = North(kOrigin, 0.3);
  const std::vector<StationRef> s = {{StationId{9}, p}, {StationId{4}, p}, {StationId{9}, p}};
  SearchConfig c;
  c.min_count = 1;
  const auto r = FindCandidates(kOrigin, s, c);
  ASSERT_EQ(r.hits.size(), 2u);
  EXPECT_EQ(r.hits[0].station_id, StationId{4});
  EXPECT_EQ(r.hits[1].station_id, StationId{9});
}

TEST(FindCandidates, RejectsInvalidConfig) {
  SearchConfig c;
  c.min_count = 0;
  EXPECT_THROW(FindCandidates(kOrigin, {}, c), ContractError);
  c = {};
  c.r_start_km = 11.0;
  EXPECT_THROW(FindCandidates(kOrigin, {}, c), ContractError);
}

// Property: sorted, within the stopping radius, and monotone in r_max.
TEST(FindCandidates, RandomLayoutsSatisfyContract) {
  Rng rng(17);
  for (int t = 0; t < 200; ++t) {
    std::vector<StationRef> s;
    const int n = static_cast<int>(rng.UniformIndex(40));
    for (int i = 0; i < n; ++i) {
      s.push_back({StationId{i}, {kOrigin.lat + rng.Uniform(-0.1, 0.1),
                                  kOrigin.lon + rng.Uniform(-0.12, 0.12)}});
    }
    std::size_t previous = 0;
    for (double r_max : {1.0, 2.0, 3.0, 5.0, 10.0}) {
      SearchConfig c;
      c.r_max_km = r_max;
      const auto r = FindCandidates(kOrigin, s, c);
      EXPECT_GE(r.hits.size(), previous);
      previous = r.hits.size();
      for (std::size_t i = 0; i < r.hits.size(); ++i) {
        EXPECT_LE(r.hits[i].distance_km, r.radius_km);
        if (i > 0) {
          const auto& a = r.hits[i - 1];
          const auto& b = r.hits[i];
          EXPECT_TRUE(a.distance_km < b.distance_km ||
                      (a.distance_km == b.distance_km && a.station_id < b.station_id));
        }
      }
      if (r.radius_km < r_max) EXPECT_GE(r.hits.size(), 3u);
    }
  }
}

}  // namespace
}  // namespace wcprank::geo
