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

#include "wcprank/io.h"

#include <charconv>
#include <chrono>
#include <cstdio>
#include <fstream>
#include <map>
#include <sstream>
#include <unordered_set>

namespace wcprank::io {
namespace {

std::vector<std::string> SplitFields(const std::string& line) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (true) {
    const std::size_t comma = line.find(',', start);
    out.push_back(line.substr(start, comma - start));
    if (comma == std::string::npos) break;
    start = comma + 1;
  }
  return out;
}

std::vector<std::string> Lines(const std::string& text) {
  std::vector<std::string> lines;
  std::istringstream in(text);
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (!line.empty()) lines.push_back(std::move(line));
  }
  return lines;
}

// Column lookup by header name.
class Table {
 public:
  Table(const std::string& text, const std::string& what) : what_(what) {
    auto lines = Lines(text);
    Require(!lines.empty(), what_ + ": missing header");
    const auto header = SplitFields(lines[0]);
    for (std::size_t i = 0; i < header.size(); ++i) columns_[header[i]] = i;
    for (std::size_t i = 1; i < lines.size(); ++i) {
      rows_.push_back(SplitFields(lines[i]));
      Require(rows_.back().size() == header.size(),
              what_ + ": wrong field count on line " + std::to_string(i + 1));
    }
  }

  std::size_t size() const { return rows_.size(); }

  const std::string& Field(std::size_t row, const std::string& name) const {
    const auto it = columns_.find(name);
    Require(it != columns_.end(), what_ + ": missing column " + name);
    return rows_[row][it->second];
  }

  double Double(std::size_t row, const std::string& name) const {
    const std::string& s = Field(row, name);
    double v = 0.0;
    const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    Require(ec == std::errc() && ptr == s.data() + s.size(),
            what_ + ": bad number '" + s + "' in column " + name);
    return v;
  }

  std::int64_t Int(std::size_t row, const std::string& name) const {
    const std::string& s = Field(row, name);
    std::int64_t v = 0;
    const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    Require(ec == std::errc() && ptr == s.data() + s.size(),
            what_ + ": bad integer '" + s + "' in column " + name);
    return v;
  }

 private:
  std::string what_;
  std::map<std::string, std::size_t> columns_;
  std::vector<std::vector<std::string>> rows_;
};

Role ParseRole(const std::string& s) {
  if (s == "P") return Role::kProvider;
  if (s == "C") return Role::kConsumer;
  throw ContractError("events.csv: unknown role '" + s + "'");
}

}  // namespace

std::string FormatDouble(double value) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.6f", value);
  // Avoid "-0.000000".
  if (std::string_view(buf) == "-0.000000") return "0.000000";
  return buf;
}

std::string FormatTimestamp(std::int64_t unix_seconds) {
  using namespace std::chrono;
  const sys_seconds t{seconds{unix_seconds}};
  const sys_days day = floor<days>(t);
  const year_month_day ymd{day};
  const hh_mm_ss hms{t - day};
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%04d-%02u-%02uT%02d:%02d:%02dZ",
                static_cast<int>(ymd.year()), static_cast<unsigned>(ymd.month()),
                static_cast<unsigned>(ymd.day()),
                static_cast<int>(hms.hours().count()),
                static_cast<int>(hms.minutes().count()),
                static_cast<int>(hms.seconds().count()));
  return buf;
}

std::int64_t ParseTimestamp(const std::string& text) {
  using namespace std::chrono;
  int y = 0;
  unsigned mo = 0, d = 0, h = 0, mi = 0, s = 0;
  char z = 0;
  const int n = std::sscanf(text.c_str(), "%d-%u-%uT%u:%u:%u%c", &y, &mo, &d,
                            &h, &mi, &s, &z);
  Require(n == 7 && z == 'Z' && h < 24 && mi < 60 && s < 60,
          "bad timestamp '" + text + "'");
  const year_month_day ymd{year{y}, month{mo}, day{d}};
  Require(ymd.ok(), "bad timestamp '" + text + "'");
  const sys_seconds t = sys_days{ymd} + hours{h} + minutes{mi} + seconds{s};
  return t.time_since_epoch().count();
}

std::string ReadFile(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  Require(in.good(), "cannot open " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void WriteFile(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  Require(out.good(), "cannot write " + path);
  out << content;
  out.close();
  Require(!out.fail(), "failed writing " + path);
}

std::string StationsCsv(const synth::World& world) {
  std::string out = "station_id,lat,lon,charging_speed_kw,ports";
  for (int h = 0; h < 24; ++h) {
    char buf[8];
    std::snprintf(buf, sizeof(buf), ",p%02d", h);
    out += buf;
  }
  out += '\n';
  for (const auto& s : world.stations) {
    out += std::to_string(s.station_id.value) + ',' + FormatDouble(s.location.lat) +
           ',' + FormatDouble(s.location.lon) + ',' +
           FormatDouble(s.charging_speed_kw) + ',' + std::to_string(s.ports);
    for (double p : s.popularity) out += ',' + FormatDouble(p);
    out += '\n';
  }
  return out;
}

std::string JourneysCsv(std::span<const synth::Journey> journeys) {
  std::string out =
      "journey_id,ev_id,model_id,role,quantity_wh,surplus_ratio,total_km,"
      "num_waypoints,start_time\n";
  for (const auto& j : journeys) {
    out += std::to_string(j.journey_id.value) + ',' + std::to_string(j.ev_id.value) +
           ',' + std::to_string(j.model.model_id) + ',' + RoleCode(j.role) + ',' +
           FormatDouble(j.quantity_wh) + ',' + FormatDouble(j.surplus_ratio) + ',' +
           FormatDouble(j.TotalKm()) + ',' + std::to_string(j.waypoints.size()) +
           ',' +
           (j.waypoints.empty() ? std::string()
                                : FormatTimestamp(j.waypoints.front().timestamp)) +
           '\n';
  }
  return out;
}

std::string EventsCsv(std::span<const synth::DecisionEvent> events) {
  std::string out =
      "event_id,ev_id,journey_id,timestamp,lat,lon,community_area,role,soc_e,"
      "energy_wh,capacity_wh,quantity_wh,model_id,candidate_station_id,"
      "distance_km,charging_speed_kw,popularity,candidate_count\n";
  for (const auto& e : events) {
    const std::string prefix =
        std::to_string(e.event_id.value) + ',' + std::to_string(e.ev_id.value) + ',' +
        std::to_string(e.journey_id.value) + ',' + FormatTimestamp(e.timestamp) +
        ',' + FormatDouble(e.location.lat) + ',' + FormatDouble(e.location.lon) +
        ',' + std::to_string(e.community_area) + ',' + RoleCode(e.role) + ',' +
        FormatDouble(e.soc_e) + ',' + FormatDouble(e.energy_wh) + ',' +
        FormatDouble(e.capacity_wh) + ',' + FormatDouble(e.quantity_wh) + ',' +
        std::to_string(e.model_id) + ',';
    const std::string count = std::to_string(e.candidates.size());
    if (e.candidates.empty()) {
      out += prefix + ",,,," + count + '\n';
      continue;
    }
    for (const auto& c : e.candidates) {
      out += prefix + std::to_string(c.station_id.value) + ',' +
             FormatDouble(c.distance_km) + ',' + FormatDouble(c.charging_speed_kw) +
             ',' + FormatDouble(c.popularity) + ',' + count + '\n';
    }
  }
  return out;
}

std::vector<synth::DecisionEvent> ParseEventsCsv(const std::string& text) {
  const Table t(text, "events.csv");
  std::vector<synth::DecisionEvent> events;
  std::unordered_set<EventId> seen;
  for (std::size_t r = 0; r < t.size(); ++r) {
    const EventId id(t.Int(r, "event_id"));
    if (events.empty() || events.back().event_id != id) {
      Require(seen.insert(id).second,
              "events.csv: rows of an event are not contiguous");
      synth::DecisionEvent e;
      e.event_id = id;
      e.ev_id = EvId(t.Int(r, "ev_id"));
      e.journey_id = JourneyId(t.Int(r, "journey_id"));
      e.timestamp = ParseTimestamp(t.Field(r, "timestamp"));
      e.location = {t.Double(r, "lat"), t.Double(r, "lon")};
      e.community_area = static_cast<int>(t.Int(r, "community_area"));
      e.role = ParseRole(t.Field(r, "role"));
      e.soc_e = t.Double(r, "soc_e");
      e.energy_wh = t.Double(r, "energy_wh");
      e.capacity_wh = t.Double(r, "capacity_wh");
      e.quantity_wh = t.Double(r, "quantity_wh");
      e.model_id = static_cast<int>(t.Int(r, "model_id"));
      events.push_back(std::move(e));
    }
    if (t.Field(r, "candidate_station_id").empty()) continue;
    synth::Candidate c;
    c.station_id = StationId(t.Int(r, "candidate_station_id"));
    c.distance_km = t.Double(r, "distance_km");
    c.charging_speed_kw = t.Double(r, "charging_speed_kw");
    c.popularity = t.Double(r, "popularity");
    events.back().candidates.push_back(c);
  }
  for (std::size_t r = 0, e = 0; r < t.size(); ++r) {
    while (events[e].event_id.value != t.Int(r, "event_id")) ++e;
    Require(static_cast<std::size_t>(t.Int(r, "candidate_count")) ==
                events[e].candidates.size(),
            "events.csv: candidate_count disagrees with the candidate rows");
  }
  return events;
}

std::string LabelsCsv(std::span<const labeling::CandidateLabel> labels) {
  std::string out = "event_id,candidate_station_id,topsis_r,r_hat,p_soft,grade\n";
  for (const auto& l : labels) {
    out += std::to_string(l.event_id.value) + ',' +
           std::to_string(l.station_id.value) + ',' + FormatDouble(l.topsis_r) +
           ',' + FormatDouble(l.r_hat) + ',' + FormatDouble(l.p_soft) + ',' +
           std::to_string(l.grade) + '\n';
  }
  return out;
}

std::vector<labeling::CandidateLabel> ParseLabelsCsv(const std::string& text) {
  const Table t(text, "labels.csv");
  std::vector<labeling::CandidateLabel> labels(t.size());
  for (std::size_t r = 0; r < t.size(); ++r) {
    auto& l = labels[r];
    l.event_id = EventId(t.Int(r, "event_id"));
    l.station_id = StationId(t.Int(r, "candidate_station_id"));
    l.topsis_r = t.Double(r, "topsis_r");
    l.r_hat = t.Double(r, "r_hat");
    l.p_soft = t.Double(r, "p_soft");
    l.grade = static_cast<int>(t.Int(r, "grade"));
  }
  return labels;
}

std::string FeaturesCsv(std::span<const FeaturePart> parts) {
  Require(!parts.empty(), "FeaturesCsv: nothing to write");
  std::string out = "event_id,candidate_station_id,split,label";
  for (const auto& name : parts.front().data->features.names) out += ',' + name;
  out += '\n';
  for (const auto& part : parts) {
    const auto& d = *part.data;
    Require(d.features.names == parts.front().data->features.names,
            "FeaturesCsv: parts disagree on columns");
    Require(d.item_ids.size() == d.num_rows() &&
                d.query_ids.size() == d.num_queries(),
            "FeaturesCsv: dataset lacks row identifiers");
    for (std::size_t q = 0; q < d.num_queries(); ++q) {
      for (std::size_t r = d.query_offsets[q]; r < d.query_offsets[q + 1]; ++r) {
        out += std::to_string(d.query_ids[q].value) + ',' +
               std::to_string(d.item_ids[r].value) + ',' + part.split + ',' +
               std::to_string(d.labels[r]);
        for (double v : d.features.Row(r)) out += ',' + FormatDouble(v);
        out += '\n';
      }
    }
  }
  return out;
}

}  // namespace wcprank::io
