// SPDX-License-Identifier: Apache-2.0
//
// statmap: statistical radio maps for reliable rate selection
// Copyright (C) 2026 The statmap Authors
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

#ifndef STATMAP_RNG_HPP
#define STATMAP_RNG_HPP

#include <bit>
#include <cstdint>
#include <initializer_list>
#include <random>
#include <string_view>

namespace statmap
{
    // Sub-stream derivation. A root seed is combined with a purpose label and
    // any number of integer identifiers (location bits, user id, path index).
    // Two derivations with the same inputs always produce the same stream.

    constexpr std::uint64_t splitmix64(std::uint64_t x) noexcept
    {
        x += 0x9E3779B97F4A7C15ull;
        x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ull;
        x = (x ^ (x >> 27)) * 0x94D049BB133111EBull;
        return x ^ (x >> 31);
    }

    constexpr std::uint64_t hash_label(std::string_view label) noexcept
    {
        std::uint64_t h = 0xCBF29CE484222325ull; // FNV-1a
        for (char c : label)
        {
            h ^= static_cast<unsigned char>(c);
            h *= 0x100000001B3ull;
        }
        return h;
    }

    constexpr std::uint64_t derive_seed(std::uint64_t root, std::string_view label,
                                        std::initializer_list<std::uint64_t> ids = {}) noexcept
    {
        std::uint64_t h = splitmix64(root ^ splitmix64(hash_label(label)));
        for (std::uint64_t id : ids)
            h = splitmix64(h ^ splitmix64(id + 0x632BE59BD9B4E019ull));
        return h;
    }

    inline std::uint64_t coord_bits(double v) noexcept
    {
        // +0.0 and -0.0 name the same location
        return v == 0.0 ? 0ull : std::bit_cast<std::uint64_t>(v);
    }

    using Engine = std::mt19937_64;

    inline Engine make_engine(std::uint64_t seed) { return Engine(seed); }

    inline double uniform01(Engine &eng)
    {
        // 53 random bits, in [0, 1)
        return static_cast<double>(eng() >> 11) * 0x1.0p-53;
    }
}

#endif
