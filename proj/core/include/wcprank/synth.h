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

#ifndef WCPRANK_SYNTH_H_
#define WCPRANK_SYNTH_H_

#include <array>
#include <cstdint>
#include <span>
#include <vector>

#include "wcprank/common.h"
#include "wcprank/geo.h"

namespace wcprank::synth {

using geo::GeoPoint;

struct EvModel {
  int model_id = 1;  // 1..9
  double battery_capacity_wh = 60000.0;
  double range_km = 400.0;

  double ConsumptionWhPerKm() const { return battery_capacity_wh / range_km; }
};

// The nine vehicle types of the synthetic fleet.
std::vector<EvModel> DefaultEvModels();

struct Station {
  StationId station_id;
  GeoPoint location;
  double charging_speed_kw = 22.0;
  int ports = 1;
  std::array<double, 24> popularity{};  // hourly, each in [0, 1]
};

struct Ev {
  EvId ev_id;
  EvModel model;
};

struct BoundingBox {
  double lat_min = 41.64;
  double lat_max = 42.02;
  double lon_min = -87.94;
  double lon_max = -87.52;
};

struct WorldConfig {
  int num_stations = 200;
  int num_evs = 300;
  int num_journeys = 5000;
  BoundingBox bbox;
  std::vector<EvModel> models = DefaultEvModels();
  // Demand hotspots shared by stations and trip endpoints.
  int num_hotspots = 2;
  double hotspot_sigma_km = 0.4;
  double station_hotspot_share = 0.35;
  double trip_hotspot_share = 0.2;
  double trip_sigma_km = 2.0;
  double max_trip_km = 25.0;
  double loop_trip_probability = 0.03;
  double min_displacement_km = 0.5;
  // Unix seconds of the first simulated day.
  std::int64_t start_time = 1704067200;  // 2024-01-01T00:00:00Z
  int simulated_days = 365;
};

struct World {
  WorldConfig config;
  std::vector<Station> stations;
  std::vector<Ev> fleet;
  std::vector<GeoPoint> hotspots;

  std::vector<geo::StationRef> StationRefs() const;
  const Station& StationById(StationId id) const;
};

World GenerateWorld(const WorldConfig& config, std::uint64_t seed);

// --- energy accounting -----------------------------------------------------

struct RoleConfig {
  double soc_th_pct = 30.0;
  double soc_target_pct = 100.0;
  double soc_min_pct = 20.0;  // kept for completeness; the deficit ignores it
  double e_min_trade_wh = 10000.0;
  double p_mid = 0.50;
  double p_high = 0.80;
  double consumer_cutoff = 0.30;
  double mid_cutoff = 0.70;
  double provider_cutoff = 0.90;

  void Validate() const;
};

// Energy above the safety threshold; negative below it.
double AvailableEnergyWh(double soc_pct, double capacity_wh,
                         const RoleConfig& config);
double ProviderEnergyWh(double available_wh, double travel_need_wh);
double ConsumerDeficitWh(double energy_wh, double capacity_wh,
                         const RoleConfig& config);

// --- journeys ----------------------------------------------------------------

struct Waypoint {
  std::int64_t timestamp = 0;  // unix seconds
  GeoPoint location;
  double energy_wh = 0.0;
  double cumulative_consumption_wh = 0.0;
  double recharge_wh = 0.0;  // synthetic top-up applied on arrival
};

struct Journey {
  JourneyId journey_id;
  EvId ev_id;
  EvModel model;
  GeoPoint origin;
  GeoPoint destination;
  std::vector<Waypoint> waypoints;
  std::vector<double> segment_km;  // waypoints.size() - 1 entries
  Role role = Role::kConsumer;
  double quantity_wh = 0.0;
  double surplus_ratio = 0.0;

  double TotalKm() const;
};

struct SegmentStep {
  double consumed_wh = 0.0;
  double recharge_wh = 0.0;
  double energy_after_wh = 0.0;
};

inline constexpr double kRechargeThresholdFraction = 0.20;

// Drives one segment. A level under the recharge threshold on arrival is
// reset to full capacity.
SegmentStep DriveSegment(double energy_wh, double segment_km,
                         const EvModel& model);

std::vector<Journey> SimulateJourneys(const World& world, int n_journeys,
                                      std::uint64_t seed, int threads = 1);

// --- roles -------------------------------------------------------------------

struct RoleAssignment {
  Role role = Role::kConsumer;
  double quantity_wh = 0.0;
  double surplus_ratio = 0.0;
};

// Piecewise rule on the surplus ratio; `draw` is a uniform [0,1) variate
// consumed only in the probabilistic bands.
Role RoleFromSurplusRatio(double r, double draw, const RoleConfig& config);

// Journey-level role and quantity from the origin energy state. The random
// draw comes from a stream keyed by (seed, journey_id).
RoleAssignment AssignRoleAndQuantity(const Journey& journey,
                                     const RoleConfig& config,
                                     std::uint64_t seed);

void AssignRoles(std::span<Journey> journeys, const RoleConfig& config,
                 std::uint64_t seed, int threads = 1);

// --- decision events ---------------------------------------------------------

inline constexpr int kDecisionIntervalMinutes = 30;
inline constexpr int kGridRows = 7;
inline constexpr int kGridCols = 11;

struct GridCell {
  int row = 0;
  int col = 0;
  int community_area = 1;  // row * kGridCols + col + 1, in 1..77
};

GridCell CellOf(const GeoPoint& point, const BoundingBox& bbox);

std::int64_t FloorToInterval(std::int64_t timestamp);

struct Candidate {
  StationId station_id;
  double distance_km = 0.0;
  double charging_speed_kw = 0.0;
  double popularity = 0.0;
};

struct DecisionEvent {
  EventId event_id;
  EvId ev_id;
  JourneyId journey_id;
  std::int64_t timestamp = 0;  // start of the 30-minute bucket
  GeoPoint location;
  int community_area = 1;
  Role role = Role::kConsumer;
  double soc_e = 0.0;
  double energy_wh = 0.0;
  double capacity_wh = 0.0;
  double quantity_wh = 0.0;
  int model_id = 1;
  std::vector<Candidate> candidates;

  bool HasCandidates() const { return !candidates.empty(); }
};

// One event per waypoint with candidates attached by the adaptive search.
// Zero-candidate events are returned (ids stay stable) but callers must drop
// them before labeling.
std::vector<DecisionEvent> BuildDecisionEvents(
    std::span<const Journey> journeys, const World& world,
    const geo::SearchConfig& search, int threads = 1);

std::vector<DecisionEvent> LabelableEvents(std::vector<DecisionEvent> events);

}  // namespace wcprank::synth

#endif  // WCPRANK_SYNTH_H_
