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

#ifndef WCPRANK_IO_H_
#define WCPRANK_IO_H_

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "wcprank/labeling.h"
#include "wcprank/ranker.h"
#include "wcprank/synth.h"

namespace wcprank::io {

// Fixed six-decimal rendering used by every CSV writer.
std::string FormatDouble(double value);

// ISO-8601 UTC, e.g. "2024-01-01T08:30:00Z".
std::string FormatTimestamp(std::int64_t unix_seconds);
std::int64_t ParseTimestamp(const std::string& text);

std::string ReadFile(const std::string& path);
void WriteFile(const std::string& path, const std::string& content);

std::string StationsCsv(const synth::World& world);
std::string JourneysCsv(std::span<const synth::Journey> journeys);

// One row per (event, candidate). Events without candidates get a single row
// with an empty candidate_station_id and candidate_count 0.
std::string EventsCsv(std::span<const synth::DecisionEvent> events);
std::vector<synth::DecisionEvent> ParseEventsCsv(const std::string& text);

std::string LabelsCsv(std::span<const labeling::CandidateLabel> labels);
std::vector<labeling::CandidateLabel> ParseLabelsCsv(const std::string& text);

struct FeaturePart {
  std::string split;
  const ranker::RankingDataset* data = nullptr;
};

// event_id, candidate_station_id, split, label, then the feature columns.
std::string FeaturesCsv(std::span<const FeaturePart> parts);

}  // namespace wcprank::io

#endif  // WCPRANK_IO_H_
