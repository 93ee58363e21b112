// SPDX-License-Identifier: Apache-2.0
//
// swipt-ee — energy-efficient resource allocation for multiuser OFDM downlinks
// with simultaneous wireless information and power transfer
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
// http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.
// ------------------------------------------------------------------------

#ifndef SWIPT_RNG_HPP
#define SWIPT_RNG_HPP

#include <cmath>
#include <cstdint>

namespace swipt {

// Splittable random stream built on splitmix64. A stream is keyed by up to
// three integers (global seed, cell, realization index), so every Monte Carlo
// draw depends only on its key and never on worker count or execution order.
// Sampling avoids std::* distributions on purpose: the output must be
// bit-identical across standard library implementations.
class random_stream
{
  public:
    explicit random_stream(std::uint64_t seed) : state_(mix(seed + golden)) {}

    static random_stream keyed(std::uint64_t seed, std::uint64_t a = 0, std::uint64_t b = 0)
    {
        random_stream s(seed);
        s.state_ = mix(s.state_ ^ mix(a + golden));
        s.state_ = mix(s.state_ ^ mix(b + 2 * golden));
        return s;
    }

    std::uint64_t next_u64()
    {
        state_ += golden;
        return mix(state_);
    }

    // Uniform on [0, 1) with 53 random bits.
    double next_double() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

    double next_uniform(double lo, double hi) { return lo + (hi - lo) * next_double(); }

    // Unit-mean exponential; |H|^2 of a unit-variance Rayleigh amplitude.
    double next_exponential() { return -std::log1p(-next_double()); }

  private:
    static constexpr std::uint64_t golden = 0x9E3779B97F4A7C15ull;

    static std::uint64_t mix(std::uint64_t z)
    {
        z ^= z >> 30;
        z *= 0xBF58476D1CE4E5B9ull;
        z ^= z >> 27;
        z *= 0x94D049BB133111EBull;
        z ^= z >> 31;
        return z;
    }

    std::uint64_t state_;
};

} // namespace swipt

#endif
