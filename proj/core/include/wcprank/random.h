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

#ifndef WCPRANK_RANDOM_H_
#define WCPRANK_RANDOM_H_

#include <cstdint>
#include <random>
#include <span>
#include <vector>

namespace wcprank {

// SplitMix64 finalizer; used to derive independent stream seeds.
std::uint64_t MixSeed(std::uint64_t x);

// Seeded generator whose output is identical on every platform: the engine
// sequence is fixed by the standard and all transforms are implemented here
// rather than through <random> distributions.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(MixSeed(seed)) {}

  // Stream keyed by (seed, key, salt), independent of draw order elsewhere.
  static Rng Stream(std::uint64_t seed, std::uint64_t key,
                    std::uint64_t salt = 0);

  std::uint64_t NextU64() { return engine_(); }
  // Uniform in [0, 1).
  double Uniform();
  double Uniform(double lo, double hi) { return lo + (hi - lo) * Uniform(); }
  // Uniform integer in [0, n).
  std::uint64_t UniformIndex(std::uint64_t n);
  bool Bernoulli(double p) { return Uniform() < p; }
  double Normal();
  double Normal(double mean, double stddev) { return mean + stddev * Normal(); }
  double Gamma(double shape);
  double Beta(double a, double b);

  template <typename T>
  void Shuffle(std::span<T> values) {
    for (std::size_t i = values.size(); i > 1; --i) {
      std::swap(values[i - 1], values[UniformIndex(i)]);
    }
  }

 private:
  std::mt19937_64 engine_;
};

}  // namespace wcprank

#endif  // WCPRANK_RANDOM_H_
