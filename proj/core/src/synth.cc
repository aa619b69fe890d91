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

#include "wcprank/synth.h"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>
#include <stdexcept>

#include "wcprank/parallel.h"
#include "wcprank/random.h"

namespace wcprank::synth {
namespace {

// Stream salts. Each consumer of randomness owns a salt so that adding draws
// in one place never shifts another.
constexpr std::uint64_t kSaltHotspot = 11;
constexpr std::uint64_t kSaltStation = 12;
constexpr std::uint64_t kSaltFleet = 13;
constexpr std::uint64_t kSaltTrip = 21;
constexpr std::uint64_t kSaltRole = 31;

constexpr double kKmPerDegLat = 111.32;

GeoPoint OffsetKm(const GeoPoint& p, double north_km, double east_km) {
  const double km_per_deg_lon =
      kKmPerDegLat * std::cos(p.lat * std::numbers::pi / 180.0);
  return {p.lat + north_km / kKmPerDegLat, p.lon + east_km / km_per_deg_lon};
}

GeoPoint ClampToBox(GeoPoint p, const BoundingBox& box) {
  p.lat = std::clamp(p.lat, box.lat_min, box.lat_max);
  p.lon = std::clamp(p.lon, box.lon_min, box.lon_max);
  return p;
}

GeoPoint UniformInBox(Rng& rng, const BoundingBox& box) {
  return {rng.Uniform(box.lat_min, box.lat_max),
          rng.Uniform(box.lon_min, box.lon_max)};
}

GeoPoint DrawLocation(Rng& rng, const World& world, double hotspot_share,
                      double sigma_km) {
  const auto& box = world.config.bbox;
  if (!world.hotspots.empty() && rng.Bernoulli(hotspot_share)) {
    const auto& center = world.hotspots[rng.UniformIndex(world.hotspots.size())];
    return ClampToBox(
        OffsetKm(center, rng.Normal(0.0, sigma_km), rng.Normal(0.0, sigma_km)),
        box);
  }
  return UniformInBox(rng, box);
}

std::array<double, 24> PopularityProfile(Rng& rng) {
  // Morning and evening bumps plus noise, min-max scaled to [0, 1].
  const double morning_amp = rng.Uniform(0.5, 1.0);
  const double evening_amp = rng.Uniform(0.5, 1.0);
  const double morning_width = rng.Uniform(1.5, 3.0);
  const double evening_width = rng.Uniform(1.5, 3.0);
  const double base = rng.Uniform(0.0, 0.2);
  std::array<double, 24> profile{};
  for (int h = 0; h < 24; ++h) {
    const double dm = (h - 8.5) / morning_width;
    const double de = (h - 17.5) / evening_width;
    profile[h] = base + morning_amp * std::exp(-0.5 * dm * dm) +
                 evening_amp * std::exp(-0.5 * de * de) + rng.Normal(0.0, 0.08);
  }
  const auto [lo, hi] = std::minmax_element(profile.begin(), profile.end());
  const double min = *lo;
  const double span = *hi - *lo;
  for (double& v : profile) v = span > 0.0 ? (v - min) / span : 0.5;
  return profile;
}

double StartHour(Rng& rng) {
  // Commute-shaped departure times.
  double hour = rng.Bernoulli(0.5) ? rng.Normal(8.5, 2.0) : rng.Normal(17.0, 2.5);
  hour = std::fmod(hour, 24.0);
  if (hour < 0.0) hour += 24.0;
  return hour;
}

}  // namespace

std::vector<EvModel> DefaultEvModels() {
  return {
      {1, 40000.0, 270.0},  {2, 50000.0, 320.0},  {3, 58000.0, 350.0},
      {4, 60000.0, 400.0},  {5, 64000.0, 420.0},  {6, 75000.0, 480.0},
      {7, 77000.0, 450.0},  {8, 82000.0, 500.0},  {9, 100000.0, 560.0},
  };
}

std::vector<geo::StationRef> World::StationRefs() const {
  std::vector<geo::StationRef> refs;
  refs.reserve(stations.size());
  for (const auto& s : stations) refs.push_back({s.station_id, s.location});
  return refs;
}

const Station& World::StationById(StationId id) const {
  // Stations are generated with ids 1..N in order.
  const auto index = static_cast<std::size_t>(id.value - 1);
  if (index < stations.size() && stations[index].station_id == id) {
    return stations[index];
  }
  for (const auto& s : stations) {
    if (s.station_id == id) return s;
  }
  throw ContractError("unknown station id " + std::to_string(id.value));
}

World GenerateWorld(const WorldConfig& config, std::uint64_t seed) {
  Require(config.num_stations > 0, "GenerateWorld: num_stations must be > 0");
  Require(config.num_evs > 0, "GenerateWorld: num_evs must be > 0");
  Require(config.num_journeys > 0, "GenerateWorld: num_journeys must be > 0");
  Require(!config.models.empty(), "GenerateWorld: empty model table");
  Require(config.bbox.lat_min < config.bbox.lat_max &&
              config.bbox.lon_min < config.bbox.lon_max,
          "GenerateWorld: degenerate bounding box");
  for (const auto& m : config.models) {
    Require(m.battery_capacity_wh > 0.0 && m.range_km > 0.0,
            "GenerateWorld: model capacity and range must be positive");
    Require(m.model_id >= 1 && m.model_id <= 9,
            "GenerateWorld: model_id must be in 1..9");
  }

  World world;
  world.config = config;

  Rng hotspot_rng = Rng::Stream(seed, 0, kSaltHotspot);
  const auto& box = config.bbox;
  const double lat_pad = 0.2 * (box.lat_max - box.lat_min);
  const double lon_pad = 0.2 * (box.lon_max - box.lon_min);
  const BoundingBox inner{box.lat_min + lat_pad, box.lat_max - lat_pad,
                          box.lon_min + lon_pad, box.lon_max - lon_pad};
  for (int i = 0; i < config.num_hotspots; ++i) {
    world.hotspots.push_back(UniformInBox(hotspot_rng, inner));
  }

  static constexpr std::array<double, 6> kSpeedsKw = {7.2, 11.0, 22.0,
                                                      50.0, 100.0, 150.0};
  world.stations.reserve(config.num_stations);
  for (int i = 0; i < config.num_stations; ++i) {
    Rng rng = Rng::Stream(seed, static_cast<std::uint64_t>(i), kSaltStation);
    Station s;
    s.station_id = StationId(i + 1);
    s.location = DrawLocation(rng, world, config.station_hotspot_share,
                              config.hotspot_sigma_km);
    s.charging_speed_kw = kSpeedsKw[rng.UniformIndex(kSpeedsKw.size())];
    s.ports = 1 + static_cast<int>(rng.UniformIndex(6));
    s.popularity = PopularityProfile(rng);
    world.stations.push_back(s);
  }

  world.fleet.reserve(config.num_evs);
  for (int i = 0; i < config.num_evs; ++i) {
    Rng rng = Rng::Stream(seed, static_cast<std::uint64_t>(i), kSaltFleet);
    world.fleet.push_back(
        {EvId(i + 1), config.models[rng.UniformIndex(config.models.size())]});
  }
  return world;
}

// --- energy accounting -----------------------------------------------------

void RoleConfig::Validate() const {
  Require(consumer_cutoff > 0.0 && consumer_cutoff < mid_cutoff &&
              mid_cutoff <= provider_cutoff && provider_cutoff <= 1.0,
          "RoleConfig: need 0 < consumer_cutoff < mid_cutoff <= "
          "provider_cutoff <= 1");
  Require(p_mid >= 0.0 && p_mid <= 1.0 && p_high >= 0.0 && p_high <= 1.0,
          "RoleConfig: probabilities must lie in [0, 1]");
  Require(e_min_trade_wh >= 0.0, "RoleConfig: e_min_trade_wh must be >= 0");
}

double AvailableEnergyWh(double soc_pct, double capacity_wh,
                         const RoleConfig& config) {
  const double energy = soc_pct / 100.0 * capacity_wh;
  const double threshold = config.soc_th_pct / 100.0 * capacity_wh;
  return energy - threshold;
}

double ProviderEnergyWh(double available_wh, double travel_need_wh) {
  return std::max(0.0, available_wh - travel_need_wh);
}

double ConsumerDeficitWh(double energy_wh, double capacity_wh,
                         const RoleConfig& config) {
  return std::max(0.0, config.soc_target_pct / 100.0 * capacity_wh - energy_wh);
}

// --- journeys ----------------------------------------------------------------

double Journey::TotalKm() const {
  return std::accumulate(segment_km.begin(), segment_km.end(), 0.0);
}

SegmentStep DriveSegment(double energy_wh, double segment_km,
                         const EvModel& model) {
  SegmentStep step;
  step.consumed_wh = model.ConsumptionWhPerKm() * segment_km;
  double after = energy_wh - step.consumed_wh;
  const double capacity = model.battery_capacity_wh;
  if (after < kRechargeThresholdFraction * capacity) {
    step.recharge_wh = capacity - after;
    after = capacity;
  }
  step.energy_after_wh = after;
  return step;
}

std::vector<Journey> SimulateJourneys(const World& world, int n_journeys,
                                      std::uint64_t seed, int threads) {
  Require(n_journeys >= 0, "SimulateJourneys: negative journey count");
  const auto& cfg = world.config;
  const std::size_t num_evs = world.fleet.size();
  Require(num_evs > 0, "SimulateJourneys: empty fleet");

  const std::size_t base = static_cast<std::size_t>(n_journeys) / num_evs;
  const std::size_t extra = static_cast<std::size_t>(n_journeys) % num_evs;
  std::vector<std::vector<Journey>> per_ev(num_evs);

  ParallelFor(num_evs, threads, [&](std::size_t ev_index) {
    const Ev& ev = world.fleet[ev_index];
    Rng rng = Rng::Stream(seed, static_cast<std::uint64_t>(ev.ev_id.value),
                          kSaltTrip);
    const std::size_t count = base + (ev_index < extra ? 1 : 0);
    const std::size_t first_id = ev_index * base + std::min(ev_index, extra);
    const double capacity = ev.model.battery_capacity_wh;

    double energy = rng.Uniform(0.2, 1.0) * capacity;
    GeoPoint position = DrawLocation(rng, world, cfg.trip_hotspot_share,
                                     cfg.trip_sigma_km);
    const double mean_gap_days =
        static_cast<double>(cfg.simulated_days) / std::max<std::size_t>(count, 1);
    double day = std::floor(rng.Uniform(0.0, mean_gap_days));
    std::int64_t not_before = cfg.start_time;

    auto& out = per_ev[ev_index];
    out.reserve(count);
    for (std::size_t k = 0; k < count; ++k) {
      const JourneyId journey_id(static_cast<std::int64_t>(first_id + k));
      const GeoPoint origin = position;
      GeoPoint destination;
      if (rng.Bernoulli(cfg.loop_trip_probability)) {
        destination = origin;
      } else {
        destination = DrawLocation(rng, world, cfg.trip_hotspot_share,
                                   cfg.trip_sigma_km);
        for (int attempt = 0; attempt < 8 &&
                              geo::HaversineKm(origin, destination) > cfg.max_trip_km;
             ++attempt) {
          destination = DrawLocation(rng, world, cfg.trip_hotspot_share,
                                     cfg.trip_sigma_km);
        }
      }
      const double hour = StartHour(rng);
      std::int64_t start =
          cfg.start_time + static_cast<std::int64_t>(day * 86400.0 + hour * 3600.0);
      start = std::max(start, not_before);
      day += 1.0 + std::floor(
          rng.Uniform(0.0, std::max(0.0, 2.0 * mean_gap_days - 2.0)));

      const int num_waypoints = 2 + static_cast<int>(rng.UniformIndex(5));
      const double speed_kmh = rng.Uniform(18.0, 35.0);

      // Loop journeys are drawn (keeping streams aligned) but not emitted.
      if (geo::HaversineKm(origin, destination) < cfg.min_displacement_km) {
        continue;
      }

      Journey j;
      j.journey_id = journey_id;
      j.ev_id = ev.ev_id;
      j.model = ev.model;
      j.origin = origin;
      j.destination = destination;

      std::vector<GeoPoint> points;
      points.push_back(origin);
      const double north =
          (destination.lat - origin.lat) * kKmPerDegLat;
      const double east = (destination.lon - origin.lon) * kKmPerDegLat *
                          std::cos(origin.lat * std::numbers::pi / 180.0);
      const double length = std::hypot(north, east);
      for (int i = 1; i + 1 < num_waypoints; ++i) {
        double t = static_cast<double>(i) / (num_waypoints - 1);
        t += rng.Uniform(-0.1, 0.1) / (num_waypoints - 1);
        const double side = rng.Normal(0.0, 0.3);
        GeoPoint p{origin.lat + t * (destination.lat - origin.lat),
                   origin.lon + t * (destination.lon - origin.lon)};
        if (length > 0.0) p = OffsetKm(p, -east / length * side, north / length * side);
        points.push_back(ClampToBox(p, cfg.bbox));
      }
      points.push_back(destination);

      std::int64_t clock = start;
      double cumulative = 0.0;
      j.waypoints.push_back({clock, points[0], energy, 0.0, 0.0});
      for (std::size_t i = 1; i < points.size(); ++i) {
        const double km = geo::HaversineKm(points[i - 1], points[i]);
        j.segment_km.push_back(km);
        const SegmentStep step = DriveSegment(energy, km, ev.model);
        cumulative += step.consumed_wh;
        energy = step.energy_after_wh;
        clock += static_cast<std::int64_t>(km / speed_kmh * 3600.0);
        if (i + 1 < points.size()) {
          clock += static_cast<std::int64_t>(rng.Uniform(2.0, 15.0) * 60.0);
        }
        j.waypoints.push_back({clock, points[i], energy, cumulative,
                               step.recharge_wh});
      }
      not_before = clock + 600;
      position = destination;
      out.push_back(std::move(j));
    }
  });

  std::vector<Journey> journeys;
  for (auto& v : per_ev) {
    for (auto& j : v) journeys.push_back(std::move(j));
  }
  std::sort(journeys.begin(), journeys.end(),
            [](const Journey& a, const Journey& b) {
              return a.journey_id < b.journey_id;
            });
  return journeys;
}

// --- roles -------------------------------------------------------------------

Role RoleFromSurplusRatio(double r, double draw, const RoleConfig& config) {
  if (r <= config.consumer_cutoff) return Role::kConsumer;
  if (r <= config.mid_cutoff) {
    return draw < config.p_mid ? Role::kProvider : Role::kConsumer;
  }
  if (r <= config.provider_cutoff) {
    return draw < config.p_high ? Role::kProvider : Role::kConsumer;
  }
  return Role::kProvider;
}

RoleAssignment AssignRoleAndQuantity(const Journey& journey,
                                     const RoleConfig& config,
                                     std::uint64_t seed) {
  Require(!journey.waypoints.empty(), "AssignRoleAndQuantity: no waypoints");
  const double capacity = journey.model.battery_capacity_wh;
  const double energy = journey.waypoints.front().energy_wh;
  const double soc_pct = 100.0 * energy / capacity;
  const double travel_need =
      journey.model.ConsumptionWhPerKm() * journey.TotalKm();
  const double surplus =
      ProviderEnergyWh(AvailableEnergyWh(soc_pct, capacity, config), travel_need);

  RoleAssignment out;
  out.surplus_ratio = std::min(1.0, surplus / capacity);
  // Always draw once so that changing the cutoffs cannot shift the stream.
  Rng rng = Rng::Stream(
      seed, static_cast<std::uint64_t>(journey.journey_id.value), kSaltRole);
  const double draw = rng.Uniform();
  out.role = RoleFromSurplusRatio(out.surplus_ratio, draw, config);

  double quantity;
  if (out.role == Role::kProvider) {
    quantity = std::max(0.0, surplus);
    if (quantity < config.e_min_trade_wh) quantity = 0.0;
  } else {
    quantity = ConsumerDeficitWh(std::min(energy, capacity), capacity, config);
  }
  out.quantity_wh = std::round(quantity * 100.0) / 100.0;
  return out;
}

void AssignRoles(std::span<Journey> journeys, const RoleConfig& config,
                 std::uint64_t seed, int threads) {
  config.Validate();
  ParallelFor(journeys.size(), threads, [&](std::size_t i) {
    const RoleAssignment a = AssignRoleAndQuantity(journeys[i], config, seed);
    journeys[i].role = a.role;
    journeys[i].quantity_wh = a.quantity_wh;
    journeys[i].surplus_ratio = a.surplus_ratio;
  });
}

// --- decision events ---------------------------------------------------------

GridCell CellOf(const GeoPoint& point, const BoundingBox& bbox) {
  const double fy = (point.lat - bbox.lat_min) / (bbox.lat_max - bbox.lat_min);
  const double fx = (point.lon - bbox.lon_min) / (bbox.lon_max - bbox.lon_min);
  GridCell cell;
  cell.row = std::clamp(static_cast<int>(std::floor(fy * kGridRows)), 0,
                        kGridRows - 1);
  cell.col = std::clamp(static_cast<int>(std::floor(fx * kGridCols)), 0,
                        kGridCols - 1);
  cell.community_area = cell.row * kGridCols + cell.col + 1;
  return cell;
}

std::int64_t FloorToInterval(std::int64_t timestamp) {
  constexpr std::int64_t kInterval = kDecisionIntervalMinutes * 60;
  std::int64_t q = timestamp / kInterval;
  if (timestamp % kInterval < 0) --q;
  return q * kInterval;
}

std::vector<DecisionEvent> BuildDecisionEvents(
    std::span<const Journey> journeys, const World& world,
    const geo::SearchConfig& search, int threads) {
  std::vector<std::size_t> offsets(journeys.size() + 1, 0);
  for (std::size_t i = 0; i < journeys.size(); ++i) {
    offsets[i + 1] = offsets[i] + journeys[i].waypoints.size();
  }
  const auto refs = world.StationRefs();
  std::vector<DecisionEvent> events(offsets.back());

  ParallelFor(journeys.size(), threads, [&](std::size_t ji) {
    const Journey& j = journeys[ji];
    const double capacity = j.model.battery_capacity_wh;
    for (std::size_t w = 0; w < j.waypoints.size(); ++w) {
      const Waypoint& wp = j.waypoints[w];
      DecisionEvent& e = events[offsets[ji] + w];
      e.event_id = EventId(static_cast<std::int64_t>(offsets[ji] + w));
      e.ev_id = j.ev_id;
      e.journey_id = j.journey_id;
      e.timestamp = FloorToInterval(wp.timestamp);
      e.location = wp.location;
      e.community_area = CellOf(wp.location, world.config.bbox).community_area;
      e.role = j.role;
      e.energy_wh = wp.energy_wh;
      e.capacity_wh = capacity;
      e.soc_e = std::clamp(wp.energy_wh / capacity, 0.0, 1.0);
      e.quantity_wh = j.quantity_wh;
      e.model_id = j.model.model_id;

      const int hour =
          static_cast<int>(((e.timestamp % 86400) + 86400) % 86400 / 3600);
      const auto found = geo::FindCandidates(wp.location, refs, search);
      e.candidates.reserve(found.hits.size());
      for (const auto& hit : found.hits) {
        const Station& s = world.StationById(hit.station_id);
        e.candidates.push_back({hit.station_id, hit.distance_km,
                                s.charging_speed_kw, s.popularity[hour]});
      }
    }
  });
  return events;
}

std::vector<DecisionEvent> LabelableEvents(std::vector<DecisionEvent> events) {
  std::erase_if(events, [](const DecisionEvent& e) { return !e.HasCandidates(); });
  return events;
}

}  // namespace wcprank::synth
