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

#ifndef CASCADE_SAMPLER_HPP_
#define CASCADE_SAMPLER_HPP_

#include <cstddef>
#include <cstdint>
#include <vector>

#include "cascade/core.hpp"
#include "cascade/rng.hpp"

namespace cascade {

// Initial conditions shared by training and deployment: integer positions
// drawn uniformly from {px_min..px_max} x {pz_min..pz_max}, velocities
// uniform in [-velocity_range, velocity_range], attitude at rest.
struct InitialStateSampler {
  int px_min = 1;
  int px_max = 8;
  int pz_min = 1;
  int pz_max = 9;
  double velocity_range = 1.0;

  void validate() const;
  FullState draw(Rng& rng) const;
  // Episode i of a batch seeded by `seed` always gets the same state.
  std::vector<FullState> draw_batch(std::uint64_t seed, std::size_t n) const;
};

}  // namespace cascade

#endif  // CASCADE_SAMPLER_HPP_
