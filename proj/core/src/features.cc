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

#include "wcprank/features.h"

#include <algorithm>
#include <array>
#include <chrono>
#include <cmath>
#include <numbers>

#include "json.hpp"
#include "wcprank/labeling.h"

namespace wcprank::features {
namespace {

using nlohmann::json;

constexpr std::array<ColumnSpec, 23> kSchema = {{
    {"distance_km", ColumnKind::kScaled},
    {"charging_speed_kw", ColumnKind::kScaled},
    {"popularity", ColumnKind::kScaled},
    {"capacity_wh", ColumnKind::kScaled},
    {"energy_wh", ColumnKind::kScaled},
    {"soc_e", ColumnKind::kScaled},
    {"pressure", ColumnKind::kScaled},
    {"quantity_wh", ColumnKind::kScaled},
    {"role", ColumnKind::kCategorical},
    {"hour", ColumnKind::kScaled},
    {"day_of_week", ColumnKind::kScaled},
    {"month", ColumnKind::kScaled},
    {"hour_sin", ColumnKind::kCyclic},
    {"hour_cos", ColumnKind::kCyclic},
    {"dow_sin", ColumnKind::kCyclic},
    {"dow_cos", ColumnKind::kCyclic},
    {"month_sin", ColumnKind::kCyclic},
    {"month_cos", ColumnKind::kCyclic},
    {"cell_row", ColumnKind::kScaled},
    {"cell_col", ColumnKind::kScaled},
    {"community_area", ColumnKind::kCategorical},
    {"candidate_count", ColumnKind::kScaled},
    {"model_id", ColumnKind::kCategorical},
}};

constexpr std::size_t kNumCandidateColumns = 3;  // leading schema columns

std::vector<std::string> AllNames() {
  std::vector<std::string> names;
  for (const auto& c : kSchema) names.emplace_back(c.name);
  return names;
}

std::vector<std::size_t> ColumnsOf(FeatureSet set) {
  const std::size_t n =
      set == FeatureSet::kFull ? kSchema.size() : kNumCandidateColumns;
  std::vector<std::size_t> cols(n);
  for (std::size_t i = 0; i < n; ++i) cols[i] = i;
  return cols;
}

std::string RoleCategory(const synth::DecisionEvent& e) {
  return std::string(1, RoleCode(e.role));
}

json EncoderToJson(const LabelEncoder& enc) { return enc.vocabulary(); }

LabelEncoder EncoderFromJson(const json& j) {
  const auto vocab = j.get<std::vector<std::string>>();
  return LabelEncoder::Fit(vocab);
}

}  // namespace

FeatureMatrix::FeatureMatrix(std::size_t rows,
                             std::vector<std::string> column_names)
    : num_rows(rows),
      num_cols(column_names.size()),
      values(rows * column_names.size(), 0.0),
      names(std::move(column_names)) {}

std::vector<double> FeatureMatrix::Column(std::size_t col) const {
  Require(col < num_cols, "FeatureMatrix: column out of range");
  std::vector<double> out(num_rows);
  for (std::size_t r = 0; r < num_rows; ++r) out[r] = At(r, col);
  return out;
}

FeatureMatrix FeatureMatrix::SelectColumns(
    std::span<const std::size_t> columns) const {
  std::vector<std::string> selected;
  for (std::size_t c : columns) {
    Require(c < num_cols, "FeatureMatrix: column out of range");
    selected.push_back(names.empty() ? std::string() : names[c]);
  }
  FeatureMatrix out(num_rows, std::move(selected));
  for (std::size_t r = 0; r < num_rows; ++r) {
    for (std::size_t j = 0; j < columns.size(); ++j) {
      out.At(r, j) = At(r, columns[j]);
    }
  }
  return out;
}

std::pair<double, double> CyclicEncode(double value, double period) {
  Require(period > 0.0, "CyclicEncode: period must be positive");
  const double angle = 2.0 * std::numbers::pi * value / period;
  return {std::sin(angle), std::cos(angle)};
}

// --- Scaler -------------------------------------------------------------------

Scaler::Scaler(std::vector<double> min, std::vector<double> max,
               std::vector<bool> mask)
    : min_(std::move(min)), max_(std::move(max)), mask_(std::move(mask)) {
  Require(min_.size() == max_.size() && min_.size() == mask_.size(),
          "Scaler: inconsistent column counts");
  for (std::size_t c = 0; c < min_.size(); ++c) {
    Require(max_[c] >= min_[c], "Scaler: max below min");
  }
}

Scaler Scaler::Fit(const FeatureMatrix& train, std::vector<bool> mask) {
  Require(train.num_rows > 0, "Scaler: empty training set");
  Require(mask.size() == train.num_cols, "Scaler: mask arity mismatch");
  std::vector<double> lo(train.num_cols), hi(train.num_cols);
  for (std::size_t c = 0; c < train.num_cols; ++c) {
    lo[c] = hi[c] = train.At(0, c);
  }
  for (std::size_t r = 1; r < train.num_rows; ++r) {
    for (std::size_t c = 0; c < train.num_cols; ++c) {
      lo[c] = std::min(lo[c], train.At(r, c));
      hi[c] = std::max(hi[c], train.At(r, c));
    }
  }
  return Scaler(std::move(lo), std::move(hi), std::move(mask));
}

Scaler Scaler::Fit(const FeatureMatrix& train) {
  return Fit(train, std::vector<bool>(train.num_cols, true));
}

double Scaler::Apply(std::size_t col, double x) const {
  if (!mask_[col]) return x;
  if (max_[col] == min_[col]) return 0.5;
  return std::clamp((x - min_[col]) / (max_[col] - min_[col]), 0.0, 1.0);
}

void Scaler::TransformInPlace(FeatureMatrix& rows) const {
  Require(rows.num_cols == mask_.size(), "Scaler: arity mismatch");
  for (std::size_t r = 0; r < rows.num_rows; ++r) {
    for (std::size_t c = 0; c < rows.num_cols; ++c) {
      rows.At(r, c) = Apply(c, rows.At(r, c));
    }
  }
}

FeatureMatrix Scaler::Transform(FeatureMatrix rows) const {
  TransformInPlace(rows);
  return rows;
}

// --- LabelEncoder -----------------------------------------------------------------

LabelEncoder LabelEncoder::Fit(std::span<const std::string> values) {
  LabelEncoder enc;
  enc.vocabulary_.assign(values.begin(), values.end());
  std::sort(enc.vocabulary_.begin(), enc.vocabulary_.end());
  enc.vocabulary_.erase(
      std::unique(enc.vocabulary_.begin(), enc.vocabulary_.end()),
      enc.vocabulary_.end());
  for (std::size_t i = 0; i < enc.vocabulary_.size(); ++i) {
    enc.codes_[enc.vocabulary_[i]] = static_cast<int>(i) + 1;
  }
  return enc;
}

int LabelEncoder::Encode(const std::string& value) const {
  const auto it = codes_.find(value);
  return it == codes_.end() ? kUnseenCode : it->second;
}

// --- correlation ------------------------------------------------------------------

Correlation PearsonCorrelation(const FeatureMatrix& rows) {
  Require(rows.num_rows >= 2, "PearsonCorrelation: need at least 2 rows");
  const std::size_t p = rows.num_cols;
  // Single pass of Welford co-moment updates.
  std::vector<double> mean(p, 0.0);
  std::vector<double> comoment(p * p, 0.0);
  std::vector<double> delta(p);
  for (std::size_t r = 0; r < rows.num_rows; ++r) {
    const double n = static_cast<double>(r + 1);
    for (std::size_t i = 0; i < p; ++i) {
      delta[i] = rows.At(r, i) - mean[i];
      mean[i] += delta[i] / n;
    }
    for (std::size_t i = 0; i < p; ++i) {
      const double after = rows.At(r, i) - mean[i];
      for (std::size_t j = i; j < p; ++j) comoment[i * p + j] += after * delta[j];
    }
  }
  Correlation out;
  out.num_cols = p;
  out.values.assign(p * p, 0.0);
  out.degenerate.assign(p, false);
  for (std::size_t i = 0; i < p; ++i) {
    out.degenerate[i] = !(comoment[i * p + i] > 0.0);
  }
  for (std::size_t i = 0; i < p; ++i) {
    out.values[i * p + i] = 1.0;
    for (std::size_t j = i + 1; j < p; ++j) {
      double v = 0.0;
      if (!out.degenerate[i] && !out.degenerate[j]) {
        v = comoment[i * p + j] /
            std::sqrt(comoment[i * p + i] * comoment[j * p + j]);
        v = std::clamp(v, -1.0, 1.0);
      }
      out.values[i * p + j] = out.values[j * p + i] = v;
    }
  }
  return out;
}

// --- feature vectors ----------------------------------------------------------------

std::span<const ColumnSpec> FullSchema() { return kSchema; }

std::vector<std::string> FeatureNames(FeatureSet set) {
  std::vector<std::string> names;
  for (std::size_t c : ColumnsOf(set)) names.emplace_back(kSchema[c].name);
  return names;
}

std::string FeatureSetName(FeatureSet set) {
  return set == FeatureSet::kFull ? "full" : "candidate_only";
}

FeatureSet ParseFeatureSet(const std::string& name) {
  if (name == "full") return FeatureSet::kFull;
  if (name == "candidate_only") return FeatureSet::kCandidateOnly;
  throw ContractError("unknown feature set: " + name);
}

CalendarParts CalendarOf(std::int64_t unix_seconds) {
  using namespace std::chrono;
  const sys_seconds t{seconds{unix_seconds}};
  const sys_days day = floor<days>(t);
  const auto since_midnight = t - day;
  CalendarParts parts;
  parts.hour = static_cast<double>(since_midnight.count()) / 3600.0;
  parts.day_of_week =
      static_cast<int>(weekday{day}.iso_encoding()) - 1;  // Monday = 0
  parts.month = static_cast<int>(static_cast<unsigned>(year_month_day{day}.month()));
  return parts;
}

FeatureEncoder FeatureEncoder::Fit(
    std::span<const synth::DecisionEvent> train_events, FeatureSet set) {
  Require(!train_events.empty(), "FeatureEncoder: empty training set");
  FeatureEncoder enc;
  enc.set_ = set;
  std::vector<std::string> roles, areas, models;
  for (const auto& e : train_events) {
    roles.push_back(RoleCategory(e));
    areas.push_back(std::to_string(e.community_area));
    models.push_back(std::to_string(e.model_id));
  }
  enc.role_ = LabelEncoder::Fit(roles);
  enc.community_area_ = LabelEncoder::Fit(areas);
  enc.model_id_ = LabelEncoder::Fit(models);

  const FeatureMatrix raw = enc.RawFull(train_events);
  Require(raw.num_rows > 0, "FeatureEncoder: training events have no candidates");
  std::vector<bool> mask(kSchema.size());
  for (std::size_t c = 0; c < kSchema.size(); ++c) {
    mask[c] = kSchema[c].kind == ColumnKind::kScaled;
  }
  enc.scaler_ = Scaler::Fit(raw, std::move(mask));
  return enc;
}

FeatureMatrix FeatureEncoder::RawFull(
    std::span<const synth::DecisionEvent> events) const {
  std::size_t rows = 0;
  for (const auto& e : events) rows += e.candidates.size();
  FeatureMatrix m(rows, AllNames());
  std::size_t r = 0;
  for (const auto& e : events) {
    const CalendarParts cal = CalendarOf(e.timestamp);
    const auto [hs, hc] = CyclicEncode(cal.hour, 24.0);
    const auto [ds, dc] = CyclicEncode(cal.day_of_week, 7.0);
    const auto [ms, mc] = CyclicEncode(cal.month - 1, 12.0);
    const int cell = e.community_area - 1;
    const std::array<double, 20> event_part = {
        e.capacity_wh,
        e.energy_wh,
        e.soc_e,
        labeling::TransactionPressure(e.soc_e, e.role),
        e.quantity_wh,
        static_cast<double>(role_.Encode(RoleCategory(e))),
        cal.hour,
        static_cast<double>(cal.day_of_week),
        static_cast<double>(cal.month),
        hs, hc, ds, dc, ms, mc,
        static_cast<double>(cell / synth::kGridCols),
        static_cast<double>(cell % synth::kGridCols),
        static_cast<double>(community_area_.Encode(std::to_string(e.community_area))),
        static_cast<double>(e.candidates.size()),
        static_cast<double>(model_id_.Encode(std::to_string(e.model_id))),
    };
    for (const auto& c : e.candidates) {
      m.At(r, 0) = c.distance_km;
      m.At(r, 1) = c.charging_speed_kw;
      m.At(r, 2) = c.popularity;
      for (std::size_t k = 0; k < event_part.size(); ++k) {
        m.At(r, kNumCandidateColumns + k) = event_part[k];
      }
      ++r;
    }
  }
  return m;
}

FeatureMatrix FeatureEncoder::Transform(
    std::span<const synth::DecisionEvent> events) const {
  Require(scaler_.mask().size() == kSchema.size(),
          "FeatureEncoder: not fitted");
  FeatureMatrix full = RawFull(events);
  scaler_.TransformInPlace(full);
  if (set_ == FeatureSet::kFull) return full;
  const auto cols = ColumnsOf(set_);
  return full.SelectColumns(cols);
}

std::string FeatureEncoder::ToJson() const {
  json j;
  j["feature_set"] = FeatureSetName(set_);
  j["columns"] = AllNames();
  j["scaler_min"] = scaler_.min();
  j["scaler_max"] = scaler_.max();
  j["scaled"] = scaler_.mask();
  j["vocabulary"] = {{"role", EncoderToJson(role_)},
                     {"community_area", EncoderToJson(community_area_)},
                     {"model_id", EncoderToJson(model_id_)}};
  return j.dump();
}

FeatureEncoder FeatureEncoder::FromJson(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::exception& e) {
    throw ContractError(std::string("FeatureEncoder: bad JSON: ") + e.what());
  }
  Require(j.value("columns", std::vector<std::string>{}) == AllNames(),
          "FeatureEncoder: column schema mismatch");
  FeatureEncoder enc;
  enc.set_ = ParseFeatureSet(j.at("feature_set").get<std::string>());
  enc.scaler_ = Scaler(j.at("scaler_min").get<std::vector<double>>(),
                       j.at("scaler_max").get<std::vector<double>>(),
                       j.at("scaled").get<std::vector<bool>>());
  const auto& v = j.at("vocabulary");
  enc.role_ = EncoderFromJson(v.at("role"));
  enc.community_area_ = EncoderFromJson(v.at("community_area"));
  enc.model_id_ = EncoderFromJson(v.at("model_id"));
  return enc;
}

}  // namespace wcprank::features
