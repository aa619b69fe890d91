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

#ifndef WCPRANK_FEATURES_H_
#define WCPRANK_FEATURES_H_

#include <cstddef>
#include <map>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "wcprank/synth.h"

namespace wcprank::features {

// Dense row-major matrix with named columns.
struct FeatureMatrix {
  std::size_t num_rows = 0;
  std::size_t num_cols = 0;
  std::vector<double> values;
  std::vector<std::string> names;

  FeatureMatrix() = default;
  FeatureMatrix(std::size_t rows, std::vector<std::string> column_names);

  double At(std::size_t row, std::size_t col) const {
    return values[row * num_cols + col];
  }
  double& At(std::size_t row, std::size_t col) {
    return values[row * num_cols + col];
  }
  std::span<const double> Row(std::size_t row) const {
    return {values.data() + row * num_cols, num_cols};
  }
  std::vector<double> Column(std::size_t col) const;
  // Copies the listed columns, in the given order.
  FeatureMatrix SelectColumns(std::span<const std::size_t> columns) const;
};

// (sin(2*pi*value/period), cos(2*pi*value/period)).
std::pair<double, double> CyclicEncode(double value, double period);

// Per-column min-max scaling learned from training rows. Columns not in
// the mask pass through unchanged.
class Scaler {
 public:
  Scaler() = default;
  Scaler(std::vector<double> min, std::vector<double> max,
         std::vector<bool> mask);

  static Scaler Fit(const FeatureMatrix& train, std::vector<bool> mask);
  // Fits every column.
  static Scaler Fit(const FeatureMatrix& train);

  // (x - min) / (max - min), clipped to [0, 1]; constant columns give 0.5.
  double Apply(std::size_t col, double x) const;
  void TransformInPlace(FeatureMatrix& rows) const;
  FeatureMatrix Transform(FeatureMatrix rows) const;

  const std::vector<double>& min() const { return min_; }
  const std::vector<double>& max() const { return max_; }
  const std::vector<bool>& mask() const { return mask_; }

 private:
  std::vector<double> min_;
  std::vector<double> max_;
  std::vector<bool> mask_;
};

inline constexpr int kUnseenCode = 0;

// Lexicographic codes starting at 1; code 0 is reserved for categories not
// seen during fitting.
class LabelEncoder {
 public:
  LabelEncoder() = default;
  static LabelEncoder Fit(std::span<const std::string> values);

  int Encode(const std::string& value) const;
  const std::vector<std::string>& vocabulary() const { return vocabulary_; }

 private:
  std::vector<std::string> vocabulary_;
  std::map<std::string, int> codes_;
};

struct Correlation {
  std::size_t num_cols = 0;
  std::vector<double> values;    // row-major, symmetric
  std::vector<bool> degenerate;  // zero-variance columns

  double At(std::size_t i, std::size_t j) const {
    return values[i * num_cols + j];
  }
};

// Pairwise Pearson correlation. Zero-variance columns correlate 0 with every
// other column and are flagged; the diagonal is always 1.
Correlation PearsonCorrelation(const FeatureMatrix& rows);

// --- event-candidate feature vectors -----------------------------------------

enum class FeatureSet { kFull, kCandidateOnly };

enum class ColumnKind { kScaled, kCyclic, kCategorical };

struct ColumnSpec {
  const char* name;
  ColumnKind kind;
};

// Canonical column order of the full feature vector.
std::span<const ColumnSpec> FullSchema();

// Names of the columns emitted for a feature set, in canonical order.
std::vector<std::string> FeatureNames(FeatureSet set);

// Calendar fields of a UTC timestamp.
struct CalendarParts {
  double hour = 0.0;    // fractional, e.g. 13.5
  int day_of_week = 0;  // Monday = 0
  int month = 1;        // 1..12
};
CalendarParts CalendarOf(std::int64_t unix_seconds);

// Fitted preprocessing: categorical vocabularies and the scaler, both learned
// from training events only.
class FeatureEncoder {
 public:
  FeatureEncoder() = default;

  static FeatureEncoder Fit(std::span<const synth::DecisionEvent> train_events,
                            FeatureSet set);

  // One row per (event, candidate), in event then candidate order.
  FeatureMatrix Transform(std::span<const synth::DecisionEvent> events) const;

  FeatureSet set() const { return set_; }
  std::vector<std::string> names() const { return FeatureNames(set_); }

  std::string ToJson() const;
  static FeatureEncoder FromJson(const std::string& text);

 private:
  FeatureMatrix RawFull(std::span<const synth::DecisionEvent> events) const;

  FeatureSet set_ = FeatureSet::kFull;
  LabelEncoder role_;
  LabelEncoder community_area_;
  LabelEncoder model_id_;
  Scaler scaler_;  // over the full schema
};

std::string FeatureSetName(FeatureSet set);
FeatureSet ParseFeatureSet(const std::string& name);

}  // namespace wcprank::features

#endif  // WCPRANK_FEATURES_H_
