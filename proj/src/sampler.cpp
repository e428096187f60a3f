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

#include "cascade/sampler.hpp"

#include "cascade/errors.hpp"

namespace cascade {

void InitialStateSampler::validate() const {
  if (px_min > px_max || pz_min > pz_max)
    throw DomainError("sampler: empty position grid");
  if (!(velocity_range >= 0.0)) throw DomainError("sampler: velocity_range must be >= 0");
}

FullState InitialStateSampler::draw(Rng& rng) const {
  FullState s;
  s.outer.p_x = static_cast<double>(rng.integer(px_min, px_max));
  s.outer.p_z = static_cast<double>(rng.integer(pz_min, pz_max));
  if (velocity_range > 0.0) {
    s.outer.v_x = rng.uniform(-velocity_range, velocity_range);
    s.outer.v_z = rng.uniform(-velocity_range, velocity_range);
  }
  return s;
}

std::vector<FullState> InitialStateSampler::draw_batch(std::uint64_t seed,
                                                       std::size_t n) const {
  std::vector<FullState> out;
  out.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    Rng rng(seed, "initial_state", i);
    out.push_back(draw(rng));
  }
  return out;
}

}  // namespace cascade
