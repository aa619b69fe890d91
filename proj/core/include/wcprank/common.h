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

#ifndef WCPRANK_COMMON_H_
#define WCPRANK_COMMON_H_

#include <compare>
#include <cstdint>
#include <functional>
#include <stdexcept>
#include <string>

namespace wcprank {

// Tagged integer identifier. Ids of different kinds do not mix.
template <typename Tag>
struct Id {
  std::int64_t value = 0;

  constexpr Id() = default;
  constexpr explicit Id(std::int64_t v) : value(v) {}
  constexpr auto operator<=>(const Id&) const = default;
};

using StationId = Id<struct StationTag>;
using EvId = Id<struct EvTag>;
using JourneyId = Id<struct JourneyTag>;
using EventId = Id<struct EventTag>;

// Raised when an input violates an operation's documented contract.
class ContractError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

inline void Require(bool condition, const std::string& message) {
  if (!condition) throw ContractError(message);
}

enum class Role { kConsumer, kProvider };

inline char RoleCode(Role role) { return role == Role::kProvider ? 'P' : 'C'; }

}  // namespace wcprank

template <typename Tag>
struct std::hash<wcprank::Id<Tag>> {
  std::size_t operator()(const wcprank::Id<Tag>& id) const noexcept {
    return std::hash<std::int64_t>{}(id.value);
  }
};

#endif  // WCPRANK_COMMON_H_
