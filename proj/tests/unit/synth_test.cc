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
#include <map>

#include <gtest/gtest.h>

#include "wcprank/io.h"
#include "wcprank/random.h"
#include "wcprank/synth.h"

namespace wcprank::synth {
namespace {

WorldConfig SmallWorld() {
  WorldConfig c;
  c.num_stations = 60;
  c.num_evs = 40;
  c.num_journeys = 300;
  return c;
}

EvModel Model60k() { return {4, 60000.0, 400.0}; }

TEST(World, SameSeedGivesIdenticalWorlds) {
  const auto a = GenerateWorld(SmallWorld(), 9);
  const auto b = GenerateWorld(SmallWorld(), 9);
  EXPECT_EQ(io::StationsCsv(a), io::StationsCsv(b));
  ASSERT_EQ(a.fleet.size(), b.fleet.size());
  for (std::size_t i = 0; i < a.fleet.size(); ++i) {
    EXPECT_EQ(a.fleet[i].model.model_id, b.fleet[i].model.model_id);
  }
  EXPECT_NE(io::StationsCsv(a), io::StationsCsv(GenerateWorld(SmallWorld(), 10)));
}

TEST(World, StationsInsideBoundingBox) {
  const auto w = GenerateWorld(SmallWorld(), 1);
  const auto& box = w.config.bbox;
  for (const auto& s : w.stations) {
    EXPECT_GE(s.location.lat, box.lat_min);
    EXPECT_LE(s.location.lat, box.lat_max);
    EXPECT_GE(s.location.lon, box.lon_min);
    EXPECT_LE(s.location.lon, box.lon_max);
    for (double p : s.popularity) {
      EXPECT_GE(p, 0.0);
      EXPECT_LE(p, 1.0);
    }
  }
}

TEST(World, FleetModelsAreUniform) {
  WorldConfig c = SmallWorld();
  c.num_evs = 9000;
  const auto w = GenerateWorld(c, 4);
  std::map<int, int> counts;
  for (const auto& ev : w.fleet) ++counts[ev.model.model_id];
  ASSERT_EQ(counts.size(), 9u);
  const double sigma = std::sqrt(9000.0 * (1.0 / 9.0) * (8.0 / 9.0));
  for (const auto& [id, n] : counts) EXPECT_NEAR(n, 1000.0, 3.0 * sigma) << "model " << id;
}

TEST(World, RejectsEmptyStationSet) {
  WorldConfig c = SmallWorld();
  c.num_stations = 0;
  EXPECT_THROW(GenerateWorld(c, 1), ContractError);
}

TEST(Energy, SegmentDecrementIsExact) {
  const auto step = DriveSegment(50000.0, 10.0, Model60k());
  EXPECT_DOUBLE_EQ(step.consumed_wh, 1500.0);
  EXPECT_DOUBLE_EQ(step.energy_after_wh, 48500.0);
  EXPECT_EQ(step.recharge_wh, 0.0);
}

TEST(Energy, RechargeBelowThreshold) {
  // 15000 Wh (25%) minus 3600 Wh lands at 19%.
  const auto step = DriveSegment(15000.0, 24.0, Model60k());
  EXPECT_DOUBLE_EQ(step.energy_after_wh, 60000.0);
  EXPECT_DOUBLE_EQ(step.recharge_wh, 60000.0 - 11400.0);
}

TEST(Energy, AvailableProviderAndDeficit) {
  RoleConfig c;
  EXPECT_EQ(AvailableEnergyWh(30.0, 12345.0, c), 0.0);
  EXPECT_DOUBLE_EQ(AvailableEnergyWh(50.0, 60000.0, c), 12000.0);
  EXPECT_DOUBLE_EQ(AvailableEnergyWh(20.0, 60000.0, c), -6000.0);
  EXPECT_EQ(ProviderEnergyWh(5000.0, 8000.0), 0.0);
  EXPECT_EQ(ProviderEnergyWh(20000.0, 5000.0), 15000.0);
  EXPECT_EQ(ProviderEnergyWh(0.0, 0.0), 0.0);
  EXPECT_EQ(ConsumerDeficitWh(60000.0, 60000.0, c), 0.0);
  EXPECT_EQ(ConsumerDeficitWh(45000.0, 60000.0, c), 15000.0);
  EXPECT_EQ(ConsumerDeficitWh(61000.0, 60000.0, c), 0.0);
}

TEST(Journeys, EnergyInvariantsHold) {
  const auto w = GenerateWorld(SmallWorld(), 2);
  const auto journeys = SimulateJourneys(w, 300, 2);
  ASSERT_FALSE(journeys.empty());
  for (const auto& j : journeys) {
    ASSERT_GE(j.waypoints.size(), 2u);
    EXPECT_EQ(j.segment_km.size(), j.waypoints.size() - 1);
    const double cap = j.model.battery_capacity_wh;
    for (std::size_t i = 0; i < j.waypoints.size(); ++i) {
      const auto& wp = j.waypoints[i];
      EXPECT_GE(wp.energy_wh, 0.0);
      EXPECT_LE(wp.energy_wh, cap);
      if (i == 0) continue;
      const auto& prev = j.waypoints[i - 1];
      EXPECT_GE(wp.timestamp, prev.timestamp);
      if (wp.recharge_wh == 0.0) {
        EXPECT_NEAR(prev.energy_wh - wp.energy_wh,
                    j.model.ConsumptionWhPerKm() * j.segment_km[i - 1], 1e-6);
      } else {
        EXPECT_EQ(wp.energy_wh, cap);
      }
    }
  }
}

TEST(Journeys, LoopJourneysAreNotEmitted) {
  WorldConfig c = SmallWorld();
  c.loop_trip_probability = 1.0;
  const auto w = GenerateWorld(c, 3);
  EXPECT_TRUE(SimulateJourneys(w, 100, 3).empty());
}

TEST(Journeys, ThreadCountDoesNotChangeOutput) {
  const auto w = GenerateWorld(SmallWorld(), 5);
  EXPECT_EQ(io::JourneysCsv(SimulateJourneys(w, 300, 5, 1)),
            io::JourneysCsv(SimulateJourneys(w, 300, 5, 4)));
}

TEST(Roles, PiecewiseRule) {
  RoleConfig c;
  for (double draw : {0.0, 0.5, 0.999}) {
    EXPECT_EQ(RoleFromSurplusRatio(0.95, draw, c), Role::kProvider);
    EXPECT_EQ(RoleFromSurplusRatio(0.20, draw, c), Role::kConsumer);
    EXPECT_EQ(RoleFromSurplusRatio(0.30, draw, c), Role::kConsumer);
  }
  EXPECT_EQ(RoleFromSurplusRatio(0.5, 0.49, c), Role::kProvider);
  EXPECT_EQ(RoleFromSurplusRatio(0.5, 0.51, c), Role::kConsumer);
  EXPECT_EQ(RoleFromSurplusRatio(0.8, 0.79, c), Role::kProvider);
  EXPECT_EQ(RoleFromSurplusRatio(0.8, 0.81, c), Role::kConsumer);
}

Journey StaticJourney(double capacity_wh, double energy_wh) {
  Journey j;
  j.journey_id = JourneyId{7};
  j.model = {1, capacity_wh, 300.0};
  j.waypoints.push_back({0, {41.9, -87.7}, energy_wh, 0.0, 0.0});
  return j;
}

TEST(Roles, ProviderBelowMinimumTradeGetsZeroQuantity) {
  RoleConfig c;
  c.p_mid = 1.0;  // make the mid band deterministic
  // Surplus 14000 - 0.3 * 20000 = 8000 Wh, ratio 0.4.
  const auto a = AssignRoleAndQuantity(StaticJourney(20000.0, 14000.0), c, 1);
  EXPECT_EQ(a.role, Role::kProvider);
  EXPECT_DOUBLE_EQ(a.surplus_ratio, 0.4);
  EXPECT_EQ(a.quantity_wh, 0.0);
}

TEST(Roles, ConsumerQuantityIsDeficit) {
  RoleConfig c;
  const auto a = AssignRoleAndQuantity(StaticJourney(60000.0, 15000.0), c, 1);
  EXPECT_EQ(a.role, Role::kConsumer);
  EXPECT_EQ(a.quantity_wh, 45000.0);
}

TEST(Roles, CutoffChangesOnlyAffectTheUpperBands) {
  const auto w = GenerateWorld(SmallWorld(), 6);
  auto low = SimulateJourneys(w, 300, 6);
  auto high = low;
  RoleConfig a, b;
  a.provider_cutoff = 0.85;
  b.provider_cutoff = 0.95;
  AssignRoles(low, a, 6);
  AssignRoles(high, b, 6);
  for (std::size_t i = 0; i < low.size(); ++i) {
    const double r = low[i].surplus_ratio;
    if (r <= 0.70 || r > 0.95) EXPECT_EQ(low[i].role, high[i].role);
  }
}

TEST(Events, FloorToHalfHour) {
  const std::int64_t day = 1704067200;
  EXPECT_EQ(FloorToInterval(day + 8 * 3600 + 17 * 60 + 5), day + 8 * 3600);
  EXPECT_EQ(FloorToInterval(day + 8 * 3600 + 30 * 60), day + 8 * 3600 + 1800);
}

TEST(Events, CellsCoverAllCommunityAreas) {
  BoundingBox box;
  EXPECT_EQ(CellOf({box.lat_min, box.lon_min}, box).community_area, 1);
  EXPECT_EQ(CellOf({box.lat_max, box.lon_max}, box).community_area, 77);
  Rng rng(8);
  for (int i = 0; i < 1000; ++i) {
    const auto cell = CellOf({rng.Uniform(box.lat_min, box.lat_max),
                              rng.Uniform(box.lon_min, box.lon_max)}, box);
    EXPECT_EQ(cell.community_area, cell.row * kGridCols + cell.col + 1);
    EXPECT_GE(cell.community_area, 1);
    EXPECT_LE(cell.community_area, 77);
  }
}

TEST(Events, OneEventPerWaypointSharingRoleAndQuantity) {
  const auto w = GenerateWorld(SmallWorld(), 7);
  auto journeys = SimulateJourneys(w, 200, 7);
  AssignRoles(journeys, {}, 7);
  const auto events = BuildDecisionEvents(journeys, w, {});
  std::size_t total = 0;
  for (const auto& j : journeys) total += j.waypoints.size();
  ASSERT_EQ(events.size(), total);
  std::size_t e = 0;
  for (const auto& j : journeys) {
    for (const auto& wp : j.waypoints) {
      const auto& ev = events[e];
      EXPECT_EQ(ev.event_id, EventId{static_cast<std::int64_t>(e)});
      EXPECT_EQ(ev.journey_id, j.journey_id);
      EXPECT_EQ(ev.role, j.role);
      EXPECT_EQ(ev.quantity_wh, j.quantity_wh);
      EXPECT_EQ(ev.timestamp, FloorToInterval(wp.timestamp));
      EXPECT_GE(ev.soc_e, 0.0);
      EXPECT_LE(ev.soc_e, 1.0);
      ++e;
    }
  }
  EXPECT_EQ(io::EventsCsv(events), io::EventsCsv(BuildDecisionEvents(journeys, w, {}, 4)));
}

TEST(Events, FarAwayStationsGiveZeroCandidateEvents) {
  World w;
  Station s;
  s.station_id = StationId{1};
  s.location = {41.0, -86.0};
  w.stations.push_back(s);
  Journey j = StaticJourney(60000.0, 30000.0);
  j.waypoints.push_back({600, {41.95, -87.7}, 29000.0, 1000.0, 0.0});
  j.segment_km = {5.0};
  const std::vector<Journey> journeys = {j};
  const auto events = BuildDecisionEvents(journeys, w, {});
  ASSERT_EQ(events.size(), 2u);
  EXPECT_FALSE(events[0].HasCandidates());
  EXPECT_TRUE(LabelableEvents(events).empty());
}

}  // namespace
}  // namespace wcprank::synth
