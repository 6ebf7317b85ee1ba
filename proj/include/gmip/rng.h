// Copyright 2026 The gmip Authors
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

#pragma once

#include <array>
#include <cstdint>

// Counter-based random streams (Philox4x32-10). A draw is a pure function of
// (seed, stream, counter), so trials simulated on independent streams are
// reproducible bit-for-bit regardless of evaluation order.
//
// Stream layout, fixed for reproducibility (format version 1):
//   key     = (seed lo32, seed hi32)
//   counter = (block lo32, block hi32, stream lo32, stream hi32)
// Each 128-bit block yields four u32 words; two words make one double.
// Uniforms are u = (top 53 bits + 1/2) / 2^53, in the open interval (0,1).
// Normals are the inverse normal CDF applied to that uniform.

namespace gmip {

std::array<std::uint32_t, 4> philox4x32(std::array<std::uint32_t, 4> counter,
                                        std::array<std::uint32_t, 2> key);

class CounterRng {
 public:
  CounterRng(std::uint64_t seed, std::uint64_t stream);

  std::uint32_t next_u32();
  // Uniform on the open interval (0,1), 53-bit resolution.
  double next_uniform();
  // Standard normal via the inverse-CDF transform of next_uniform().
  double next_normal();
  // Uniform integer in [0, bound) by rejection (unbiased). bound > 0.
  std::uint64_t next_below(std::uint64_t bound);

 private:
  void refill();

  std::uint64_t seed_;
  std::uint64_t stream_;
  std::uint64_t block_ = 0;
  std::array<std::uint32_t, 4> buf_{};
  int pos_ = 4;
};

}  // namespace gmip
