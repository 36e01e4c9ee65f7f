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
#include <initializer_list>
#include <optional>
#include <string>
#include <string_view>

#include <json.hpp>

#include "esckit/address.hpp"
#include "esckit/errors.hpp"
#include "esckit/fqdn.hpp"
#include "esckit/keccak.hpp"

namespace esckit {

using json = nlohmann::json;

struct Event {
    std::string name;
    json payload;

    bool operator==(const Event&) const = default;
};

// 4-byte interface tag in the ERC-165 style: xor of the leading 4 hash bytes
// of each operation signature.
struct InterfaceId {
    std::array<std::uint8_t, 4> id{};

    static InterfaceId from_signatures(std::initializer_list<std::string_view> sigs) {
        InterfaceId out;
        for (std::string_view sig : sigs) {
            Hash32 h = keccak256(sig);
            for (int i = 0; i < 4; ++i) out.id[i] ^= h[i];
        }
        return out;
    }

    // Tag of the authenticated-contract interface itself.
    static const InterfaceId& esc() {
        static const InterfaceId kId = from_signatures({
            "getFQDN()",
            "getSignature()",
            "setFQDN(string[])",
            "setSignature(string)",
        });
        return kId;
    }

    // Tag of the detection mechanism (supportsInterface(bytes4)).
    static const InterfaceId& detection() {
        static const InterfaceId kId =
            from_signatures({"supportsInterface(bytes4)"});
        return kId;
    }

    static InterfaceId parse(std::string_view hex) {
        Bytes raw = from_hex(hex);
        if (raw.size() != 4)
            throw EscError(Err::MalformedAddress, "interface id must be 4 bytes");
        InterfaceId out;
        std::copy(raw.begin(), raw.end(), out.id.begin());
        return out;
    }

    std::string hex() const { return "0x" + to_hex(id); }

    auto operator<=>(const InterfaceId&) const = default;
};

// Storage and mutation rules of one authenticated contract. Exactly two data
// items live here: the optional FQDN and the opaque endorsement string. The
// contract never inspects the signature; only the owner may write.
struct EscState {
    Address owner;
    std::optional<Fqdn> fqdn;          // absent = one-way binding
    std::optional<std::string> signature;

    std::optional<Fqdn> get_fqdn() const { return fqdn; }
    std::optional<std::string> get_signature() const { return signature; }

    Event set_fqdn(const Address& caller, Fqdn value) {
        if (caller != owner)
            throw EscError(Err::NotOwner, "caller " + caller.hex());
        fqdn = std::move(value);
        return Event{"FQDNChanged", json{{"labels", fqdn->labels()}}};
    }

    Event set_signature(const Address& caller, std::string value) {
        if (caller != owner)
            throw EscError(Err::NotOwner, "caller " + caller.hex());
        if (value.empty())
            throw EscError(Err::EmptySignature);
        signature = std::move(value);
        return Event{"SignatureChanged", json{{"signature", *signature}}};
    }

    bool supports_interface(const InterfaceId& query) const {
        return query == InterfaceId::esc() || query == InterfaceId::detection();
    }
};

}  // namespace esckit
