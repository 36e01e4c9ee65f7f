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
#include <compare>
#include <cstdint>
#include <string>
#include <string_view>

#include "esckit/bytes.hpp"
#include "esckit/errors.hpp"
#include "esckit/keccak.hpp"

namespace esckit {

// 20-byte account/contract identifier, rendered as 0x + 40 lowercase hex chars.
struct Address {
    std::array<std::uint8_t, 20> bytes{};

    static Address parse(std::string_view text) {
        if (!text.starts_with("0x") && !text.starts_with("0X"))
            throw EscError(Err::MalformedAddress, "missing 0x prefix");
        Bytes raw = from_hex(text);
        if (raw.size() != 20)
            throw EscError(Err::MalformedAddress,
                           "expected 20 bytes, got " + std::to_string(raw.size()));
        Address a;
        std::copy(raw.begin(), raw.end(), a.bytes.begin());
        return a;
    }

    static Address zero() { return Address{}; }

    std::string hex() const { return "0x" + to_hex(bytes); }

    auto operator<=>(const Address&) const = default;
};

// Deterministic contract address: keccak256(sender ‖ nonce) truncated to the
// trailing 20 bytes. The nonce is minimal big-endian; zero encodes as the
// empty string.
inline Address contract_address(const Address& sender, std::uint64_t nonce) {
    Bytes preimage(sender.bytes.begin(), sender.bytes.end());
    std::array<std::uint8_t, 8> be{};
    int len = 0;
    for (std::uint64_t v = nonce; v != 0; v >>= 8) ++len;
    for (int i = 0; i < len; ++i)
        be[i] = static_cast<std::uint8_t>(nonce >> (8 * (len - 1 - i)));
    preimage.insert(preimage.end(), be.begin(), be.begin() + len);

    Hash32 digest = keccak256(preimage);
    Address out;
    std::copy(digest.begin() + 12, digest.end(), out.bytes.begin());
    return out;
}

}  // namespace esckit
