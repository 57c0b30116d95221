/*
   Copyright 2026 The wedge-intensity Authors

   Licensed under the Apache License, Version 2.0 (the "License");
   you may not use this file except in compliance with the License.
   You may obtain a copy of the License at

       http://www.apache.org/licenses/LICENSE-2.0

   Unless required by applicable law or agreed to in writing, software
   distributed under the License is distributed on an "AS IS" BASIS,
   WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
   See the License for the specific language governing permissions and
   limitations under the License.
*/

#pragma once

#include <array>
#include <cstdint>

// Philox4x32-10 (Salmon, Moraes, Dror, Shaw 2011), the counter-based
// generator of the Random123 library. A block is a pure function of a 128-bit
// counter and a 64-bit key, so a (seed, path) substream yields the same
// numbers on every platform and in every thread schedule.

namespace wedge::rng {

using Block = std::array<std::uint32_t, 4>;
using Key = std::array<std::uint32_t, 2>;

inline constexpr std::uint32_t kPhiloxM0 = 0xD2511F53u;
inline constexpr std::uint32_t kPhiloxM1 = 0xCD9E8D57u;
inline constexpr std::uint32_t kPhiloxW0 = 0x9E3779B9u;
inline constexpr std::uint32_t kPhiloxW1 = 0xBB67AE85u;

inline Block philox4x32_10(Block ctr, Key key) {
    for (int round = 0; round < 10; ++round) {
        if (round > 0) {
            key[0] += kPhiloxW0;
            key[1] += kPhiloxW1;
        }
        const std::uint64_t p0 = std::uint64_t{kPhiloxM0} * ctr[0];
        const std::uint64_t p1 = std::uint64_t{kPhiloxM1} * ctr[2];
        ctr = {static_cast<std::uint32_t>(p1 >> 32) ^ ctr[1] ^ key[0], static_cast<std::uint32_t>(p1),
               static_cast<std::uint32_t>(p0 >> 32) ^ ctr[3] ^ key[1], static_cast<std::uint32_t>(p0)};
    }
    return ctr;
}

inline Key key_from_seed(std::uint64_t seed) {
    return {static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32)};
}

/// Uniform in [0, 1) with 53 random bits.
inline double unit_interval(std::uint32_t hi, std::uint32_t lo) {
    const std::uint64_t bits = (std::uint64_t{hi} << 32 | lo) >> 11;
    return static_cast<double>(bits) * 0x1.0p-53;
}

/// Uniform random bit generator over one substream: the words of blocks
/// (0, tag, path), (1, tag, path), ... in order. Streams with different
/// (seed, path, tag) never share a counter.
class PhiloxEngine {
public:
    using result_type = std::uint32_t;
    static constexpr result_type min() { return 0; }
    static constexpr result_type max() { return 0xFFFFFFFFu; }

    PhiloxEngine(std::uint64_t seed, std::uint64_t path, std::uint32_t tag)
        : key_(key_from_seed(seed)), tag_(tag), path_lo_(static_cast<std::uint32_t>(path)),
          path_hi_(static_cast<std::uint32_t>(path >> 32)) {}

    result_type operator()() {
        if (used_ == 4) {
            buf_ = philox4x32_10({next_block_++, tag_, path_lo_, path_hi_}, key_);
            used_ = 0;
        }
        return buf_[used_++];
    }

    /// Uniform in [0, 1) from the next two words.
    double unit() {
        const std::uint32_t hi = (*this)();
        return unit_interval(hi, (*this)());
    }

private:
    Key key_;
    std::uint32_t tag_;
    std::uint32_t path_lo_;
    std::uint32_t path_hi_;
    std::uint32_t next_block_ = 0;
    Block buf_{};
    int used_ = 4;
};

}  // namespace wedge::rng
