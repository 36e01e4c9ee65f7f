/**
 * Copyright 2026 The esckit Authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#pragma once

#include <array>
#include <bit>
#include <cstdint>
#include <cstring>
#include <span>
#include <string_view>

namespace esckit {

using Hash32 = std::array<std::uint8_t, 32>;

namespace detail {

// Keccak-256: the original Keccak padding (0x01), not the NIST SHA3 variant
// (0x06). Ethereum's SHA3 opcode and solidity's keccak256 use this flavor.
inline constexpr std::uint64_t kKeccakRoundConstants[24] = {
    0x0000000000000001ULL, 0x0000000000008082ULL, 0x800000000000808aULL,
    0x8000000080008000ULL, 0x000000000000808bULL, 0x0000000080000001ULL,
    0x8000000080008081ULL, 0x8000000000008009ULL, 0x000000000000008aULL,
    0x0000000000000088ULL, 0x0000000080008009ULL, 0x000000008000000aULL,
    0x000000008000808bULL, 0x800000000000008bULL, 0x8000000000008089ULL,
    0x8000000000008003ULL, 0x8000000000008002ULL, 0x8000000000000080ULL,
    0x000000000000800aULL, 0x800000008000000aULL, 0x8000000080008081ULL,
    0x8000000000008080ULL, 0x0000000080000001ULL, 0x8000000080008008ULL,
};

inline constexpr int kKeccakRotations[24] = {
    1,  3,  6,  10, 15, 21, 28, 36, 45, 55, 2,  14,
    27, 41, 56, 8,  25, 43, 62, 18, 39, 61, 20, 44,
};

inline constexpr int kKeccakLaneOrder[24] = {
    10, 7,  11, 17, 18, 3, 5,  16, 8,  21, 24, 4,
    15, 23, 19, 13, 12, 2, 20, 14, 22, 9,  6,  1,
};

inline void keccak_f1600(std::uint64_t a[25]) {
    for (int round = 0; round < 24; ++round) {
        // theta
        std::uint64_t c[5];
        for (int x = 0; x < 5; ++x)
            c[x] = a[x] ^ a[x + 5] ^ a[x + 10] ^ a[x + 15] ^ a[x + 20];
        for (int x = 0; x < 5; ++x) {
            std::uint64_t d = c[(x + 4) % 5] ^ std::rotl(c[(x + 1) % 5], 1);
            for (int y = 0; y < 25; y += 5) a[x + y] ^= d;
        }
        // rho and pi, chained through the lane permutation
        std::uint64_t t = a[1];
        for (int i = 0; i < 24; ++i) {
            int j = kKeccakLaneOrder[i];
            std::uint64_t saved = a[j];
            a[j] = std::rotl(t, kKeccakRotations[i]);
            t = saved;
        }
        // chi
        for (int y = 0; y < 25; y += 5) {
            std::uint64_t row[5];
            for (int x = 0; x < 5; ++x) row[x] = a[y + x];
            for (int x = 0; x < 5; ++x)
                a[y + x] = row[x] ^ (~row[(x + 1) % 5] & row[(x + 2) % 5]);
        }
        // iota
        a[0] ^= kKeccakRoundConstants[round];
    }
}

}  // namespace detail

inline Hash32 keccak256(std::span<const std::uint8_t> data) {
    static_assert(std::endian::native == std::endian::little,
                  "lane packing assumes a little-endian host");
    constexpr std::size_t kRate = 136;  // 1088-bit rate, 512-bit capacity
    std::uint64_t state[25] = {};
    std::size_t offset = 0;

    auto absorb = [&](const std::uint8_t* block) {
        for (std::size_t i = 0; i < kRate / 8; ++i) {
            std::uint64_t lane;
            std::memcpy(&lane, block + 8 * i, 8);
            state[i] ^= lane;
        }
        detail::keccak_f1600(state);
    };

    while (data.size() - offset >= kRate) {
        absorb(data.data() + offset);
        offset += kRate;
    }

    std::uint8_t last[kRate] = {};
    std::size_t tail = data.size() - offset;
    if (tail > 0) std::memcpy(last, data.data() + offset, tail);
    last[tail] ^= 0x01;
    last[kRate - 1] ^= 0x80;
    absorb(last);

    Hash32 out;
    std::memcpy(out.data(), state, out.size());
    return out;
}

inline Hash32 keccak256(std::string_view text) {
    return keccak256(std::span<const std::uint8_t>(
        reinterpret_cast<const std::uint8_t*>(text.data()), text.size()));
}

}  // namespace esckit
