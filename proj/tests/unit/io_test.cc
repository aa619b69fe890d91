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

#include <gtest/gtest.h>

#include "wcprank/io.h"

namespace wcprank::io {
namespace {

TEST(Format, FixedSixDecimals) {
  EXPECT_EQ(FormatDouble(1.5), "1.500000");
  EXPECT_EQ(FormatDouble(-0.0), "0.000000");
  EXPECT_EQ(FormatDouble(-1e-9), "0.000000");
  EXPECT_EQ(FormatDouble(-2.25), "-2.250000");
}

TEST(Timestamp, RoundTrip) {
  EXPECT_EQ(FormatTimestamp(1718409600), "2024-06-15T00:00:00Z");
  for (std::int64_t t : {0LL, 1704067200LL + 13 * 3600 + 59, 1735689599LL}) {
    EXPECT_EQ(ParseTimestamp(FormatTimestamp(t)), t);
  }
  EXPECT_THROW(ParseTimestamp("2024-13-01T00:00:00Z"), ContractError);
  EXPECT_THROW(ParseTimestamp("2024-06-15 00:00:00"), ContractError);
}

synth::DecisionEvent Event(std::int64_t id, int candidates) {
  synth::DecisionEvent e;
  e.event_id = EventId{id};
  e.ev_id = EvId{id % 3};
  e.journey_id = JourneyId{id * 2};
  e.timestamp = 1704067200 + id * 600;
  e.location = {41.8, -87.6};
  e.community_area = 8;
  e.role = id % 2 ? Role::kProvider : Role::kConsumer;
  e.soc_e = 0.375;
  e.capacity_wh = 64000;
  e.energy_wh = 24000;
  e.quantity_wh = id % 2 ? 4000 : 30000;
  e.model_id = 2;
  for (int c = 0; c < candidates; ++c) {
    e.candidates.push_back({StationId{10 + c}, 0.5 * c, 50, 0.25});
  }
  return e;
}

TEST(EventsCsv, RoundTripIncludingEmptyEvents) {
  const std::vector<synth::DecisionEvent> events = {Event(1, 3), Event(2, 0), Event(3, 1)};
  const std::string text = EventsCsv(events);
  const auto back = ParseEventsCsv(text);
  ASSERT_EQ(back.size(), 3u);
  EXPECT_TRUE(back[1].candidates.empty());
  EXPECT_EQ(back[0].candidates.size(), 3u);
  EXPECT_EQ(back[2].role, Role::kProvider);
  EXPECT_EQ(EventsCsv(back), text);
}

TEST(EventsCsv, RejectsMalformedInput) {
  const std::vector<synth::DecisionEvent> events = {Event(1, 2), Event(2, 1)};
  std::vector<std::string> lines;
  const std::string text = EventsCsv(events);
  for (std::size_t a = 0, b; (b = text.find('\n', a)) != std::string::npos; a = b + 1) {
    lines.push_back(text.substr(a, b - a + 1));
  }
  ASSERT_EQ(lines.size(), 4u);
  // Rows of event 1 separated by event 2.
  const std::string swapped = lines[0] + lines[1] + lines[3] + lines[2];
  EXPECT_THROW(ParseEventsCsv(swapped), ContractError);
  EXPECT_THROW(ParseEventsCsv("event_id\n1\n"), ContractError);
}

TEST(LabelsCsv, RoundTrip) {
  std::vector<labeling::CandidateLabel> labels(2);
  labels[0].event_id = EventId{4};
  labels[0].station_id = StationId{9};
  labels[0].grade = 3;
  labels[1].event_id = EventId{4};
  labels[1].station_id = StationId{11};
  labels[1].grade = 0;
  const std::string text = LabelsCsv(labels);
  EXPECT_EQ(LabelsCsv(ParseLabelsCsv(text)), text);
}

}  // namespace
}  // namespace wcprank::io
