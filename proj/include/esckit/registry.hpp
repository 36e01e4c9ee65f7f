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
#include <map>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <variant>

#include "esckit/address.hpp"
#include "esckit/errors.hpp"
#include "esckit/esc.hpp"
#include "esckit/fqdn.hpp"
#include "esckit/keccak.hpp"

namespace esckit {

// keccak256 of the canonical dotted lowercase domain, no trailing dot.
struct DomainHash {
    std::array<std::uint8_t, 32> bytes{};

    static DomainHash of(const Fqdn& domain) { return of_canonical(domain.dotted()); }

    static DomainHash of_canonical(std::string_view dotted) {
        DomainHash h;
        h.bytes = keccak256(dotted);
        return h;
    }

    static DomainHash parse(std::string_view hex) {
        Bytes raw = from_hex(hex);
        if (raw.size() != 32)
            throw EscError(Err::BadHashLength,
                           "expected 32 bytes, got " + std::to_string(raw.size()));
        DomainHash h;
        std::copy(raw.begin(), raw.end(), h.bytes.begin());
        return h;
    }

    std::string hex() const { return "0x" + to_hex(bytes); }

    auto operator<=>(const DomainHash&) const = default;
};

// Either the plain domain (hash gets derived) or just the hash, for owners
// who do not want the domain readable on-chain.
using RegistryEntry = std::variant<Fqdn, DomainHash>;

// Domain → contract discovery map. Insertion is open to every account;
// bogus entries are neutralized later, at verification time. No deletion.
struct RegistryState {
    std::map<DomainHash, std::set<Address>> by_hash;
    std::map<std::string, std::set<Address>> by_domain;  // canonical dotted

    // The hash entry is always written; the plain entry only when the caller
    // disclosed the domain. Idempotent.
    Event insert(const RegistryEntry& entry, const Address& contract) {
        json payload{{"contract", contract.hex()}};
        if (const Fqdn* domain = std::get_if<Fqdn>(&entry)) {
            by_domain[domain->dotted()].insert(contract);
            by_hash[DomainHash::of(*domain)].insert(contract);
            payload["domain"] = domain->dotted();
        } else {
            const DomainHash& h = std::get<DomainHash>(entry);
            by_hash[h].insert(contract);
            payload["domain_hash"] = std::get<DomainHash>(entry).hex();
        }
        return Event{"Registered", payload};
    }

    std::set<Address> lookup_by_domain(std::string_view dotted) const {
        Fqdn domain = Fqdn::parse(dotted);  // MalformedDomain on bad input
        auto it = by_domain.find(domain.dotted());
        return it == by_domain.end() ? std::set<Address>{} : it->second;
    }

    std::set<Address> lookup_by_hash(const DomainHash& h) const {
        auto it = by_hash.find(h);
        return it == by_hash.end() ? std::set<Address>{} : it->second;
    }
};

}  // namespace esckit
