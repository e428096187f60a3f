// Copyright 2026 The Cascade Transfer Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef CASCADE_RNG_HPP_
#define CASCADE_RNG_HPP_

#include <cstdint>
#include <random>
#include <string_view>

namespace cascade {

// All randomness is derived from one master seed through named sub-streams,
// so a stream's draws never depend on how many other streams exist or on
// the order in which workers consume them.
std::uint64_t derive_seed(std::uint64_t master, std::string_view stream,
                          std::uint64_t a = 0, std::uint64_t b = 0);

class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed), seed_(seed) {}
  Rng(std::uint64_t master, std::string_view stream, std::uint64_t a = 0,
      std::uint64_t b = 0)
      : Rng(derive_seed(master, stream, a, b)) {}

  double normal() { return std::normal_distribution<double>(0.0, 1.0)(engine_); }
  double uniform(double lo, double hi) {
    return std::uniform_real_distribution<double>(lo, hi)(engine_);
  }
  // Uniform integer in [lo, hi].
  std::int64_t integer(std::int64_t lo, std::int64_t hi) {
    return std::uniform_int_distribution<std::int64_t>(lo, hi)(engine_);
  }
  std::mt19937_64& engine() { return engine_; }
  std::uint64_t seed() const { return seed_; }

 private:
  std::mt19937_64 engine_;
  std::uint64_t seed_;
};

}  // namespace cascade

#endif  // CASCADE_RNG_HPP_
