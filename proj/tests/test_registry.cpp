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

#include <random>

#include <catch2/catch_amalgamated.hpp>

#include "esckit/ledger.hpp"

using namespace esckit;

namespace {
const Address kOwner = Address::parse("0x00112233445566778899aabbccddeeff00112233");
const Address kAnyone = Address::parse("0xb0b0b0b0b0b0b0b0b0b0b0b0b0b0b0b0b0b0b0b0");

Receipt register_domain(Ledger& l, const Address& caller, const std::string& domain,
                        const Address& contract) {
    return l.send_transaction(Transaction{
        caller, l.registry_address(),
        CallData{"register", {{"contract", contract.hex()}, {"domain", domain}}}});
}

Receipt register_hash(Ledger& l, const Address& caller, const DomainHash& h,
                      const Address& contract) {
    return l.send_transaction(Transaction{
        caller, l.registry_address(),
        CallData{"register", {{"contract", contract.hex()}, {"domain_hash", h.hex()}}}});
}
}  // namespace

TEST_CASE("domain hash is the digest of the canonical dotted name") {
    // frozen from the independent keccak reference
    CHECK(DomainHash::of(Fqdn::parse("example.org")).hex() ==
          "0x2cb5a606192f9567c8d1cb8e1e4349ac424b766efe1406d27b33028b669fb7e4");
    CHECK(DomainHash::of(Fqdn::parse("hq.example.org")).hex() ==
          "0x50cf9128eec4a3180b0b2e15c9249909344dad03a749857d7059dadcfe62d31d");
    CHECK(DomainHash::of(Fqdn::parse("EXAMPLE.org")) ==
          DomainHash::of(Fqdn::parse("example.org")));
    CHECK_THROWS_AS(DomainHash::parse("0xabcd"), EscError);  // BadHashLength
}

TEST_CASE("any account may register; write then read back") {
    Ledger l = Ledger::genesis({kOwner, kAnyone});
    auto [addr, _] = l.deploy_contract(kOwner, ContractKind::Esc);
    Receipt r = register_domain(l, kAnyone, "example.org", addr);
    CHECK(r.ok());
    CHECK(r.gas_used == 100'000);
    CHECK(l.registry().lookup_by_domain("example.org").contains(addr));
}

TEST_CASE("hash-only registration hides the plain domain") {
    Ledger l = Ledger::genesis({kOwner});
    auto [addr, _] = l.deploy_contract(kOwner, ContractKind::Esc);
    DomainHash h = DomainHash::of(Fqdn::parse("example.org"));
    CHECK(register_hash(l, kOwner, h, addr).ok());
    CHECK(l.registry().lookup_by_hash(h).contains(addr));
    CHECK_FALSE(l.registry().lookup_by_domain("example.org").contains(addr));
}

TEST_CASE("registering an unknown contract reverts") {
    Ledger l = Ledger::genesis({kOwner});
    Address ghost = Address::parse("0x3333333333333333333333333333333333333333");
    Receipt r = register_domain(l, kOwner, "example.org", ghost);
    CHECK_FALSE(r.ok());
    CHECK(r.error == "UnknownContract");
}

TEST_CASE("bogus registrations are accepted; filtering happens at verification") {
    Ledger l = Ledger::genesis({kOwner, kAnyone});
    auto [victim, r1] = l.deploy_contract(kOwner, ContractKind::Esc);
    auto [attacker_contract, r2] = l.deploy_contract(kAnyone, ContractKind::Plain);
    CHECK(register_domain(l, kAnyone, "example.org", attacker_contract).ok());
    CHECK(l.registry().lookup_by_domain("example.org").contains(attacker_contract));
}

TEST_CASE("lookups on unknown keys return empty sets") {
    Ledger l = Ledger::genesis({kOwner});
    CHECK(l.registry().lookup_by_domain("nowhere.test").empty());
    DomainHash random_hash = DomainHash::of_canonical("entirely-unregistered");
    CHECK(l.registry().lookup_by_hash(random_hash).empty());
    CHECK_THROWS_AS(l.registry().lookup_by_domain("bad..domain"), EscError);
}

TEST_CASE("multiple contracts per domain are all returned") {
    Ledger l = Ledger::genesis({kOwner});
    auto [a1, r1] = l.deploy_contract(kOwner, ContractKind::Esc);
    auto [a2, r2] = l.deploy_contract(kOwner, ContractKind::Esc);
    register_domain(l, kOwner, "example.org", a1);
    register_domain(l, kOwner, "example.org", a2);
    auto found = l.registry().lookup_by_domain("example.org");
    CHECK(found.size() == 2);
    CHECK(found.contains(a1));
    CHECK(found.contains(a2));
}

TEST_CASE("registration is idempotent") {
    Ledger l = Ledger::genesis({kOwner});
    auto [addr, _] = l.deploy_contract(kOwner, ContractKind::Esc);
    register_domain(l, kOwner, "example.org", addr);
    json once = l.to_json().at("contracts").at(l.registry_address().hex());
    register_domain(l, kOwner, "example.org", addr);
    json twice = l.to_json().at("contracts").at(l.registry_address().hex());
    CHECK(once == twice);
}

TEST_CASE("plain-domain entries always imply hash entries") {
    Ledger l = Ledger::genesis({kOwner});
    std::mt19937_64 rng(13);
    std::vector<Address> contracts;
    for (int i = 0; i < 10; ++i) {
        auto [a, r] = l.deploy_contract(kOwner, ContractKind::Esc);
        contracts.push_back(a);
    }
    const std::vector<std::string> domains{"a.org", "b.org", "c.example.net"};
    for (int i = 0; i < 60; ++i) {
        const std::string& d = domains[rng() % domains.size()];
        const Address& c = contracts[rng() % contracts.size()];
        if (rng() % 3 == 0) {
            register_hash(l, kOwner, DomainHash::of(Fqdn::parse(d)), c);
        } else {
            register_domain(l, kOwner, d, c);
        }
    }
    for (const std::string& d : domains) {
        auto by_domain = l.registry().lookup_by_domain(d);
        auto by_hash = l.registry().lookup_by_hash(DomainHash::of(Fqdn::parse(d)));
        for (const Address& a : by_domain) CHECK(by_hash.contains(a));
    }
}

TEST_CASE("register requires exactly one of domain and hash") {
    Ledger l = Ledger::genesis({kOwner});
    auto [addr, _] = l.deploy_contract(kOwner, ContractKind::Esc);
    Receipt neither = l.send_transaction(Transaction{
        kOwner, l.registry_address(), CallData{"register", {{"contract", addr.hex()}}}});
    CHECK_FALSE(neither.ok());
    Receipt both = l.send_transaction(Transaction{
        kOwner, l.registry_address(),
        CallData{"register",
                 {{"contract", addr.hex()},
                  {"domain", "example.org"},
                  {"domain_hash", DomainHash::of(Fqdn::parse("example.org")).hex()}}}});
    CHECK_FALSE(both.ok());
}

namespace {
// Independent oracle: scan every contract on the ledger for a stored FQDN
// matching the query, then union the registry-only rows.
std::set<Address> scan_oracle(const Ledger& l, const std::string& domain) {
    std::set<Address> out;
    for (const auto& [addr, contract] : l.contracts()) {
        if (contract.kind == ContractKind::Esc && contract.esc.fqdn &&
            contract.esc.fqdn->dotted() == domain)
            out.insert(addr);
    }
    auto it = l.registry().by_domain.find(domain);
    if (it != l.registry().by_domain.end())
        for (const Address& a : it->second) out.insert(a);
    return out;
}
}  // namespace

TEST_CASE("domain lookup equals the full-ledger scan oracle") {
    std::mt19937_64 rng(2024);
    const std::vector<std::string> domains{"one.org", "two.org", "three.net"};
    for (int run = 0; run < 25; ++run) {
        Ledger l = Ledger::genesis({kOwner, kAnyone});
        for (int i = 0; i < 12; ++i) {
            const std::string& d = domains[rng() % domains.size()];
            switch (rng() % 3) {
                case 0: {  // two-way contract, registered by its owner
                    auto [a, r] = l.deploy_contract(kOwner, ContractKind::Esc,
                                                    Fqdn::parse(d));
                    register_domain(l, kOwner, d, a);
                    break;
                }
                case 1: {  // registry-only entry for a domain-less contract
                    auto [a, r] = l.deploy_contract(kAnyone, ContractKind::Plain);
                    register_domain(l, kAnyone, d, a);
                    break;
                }
                case 2: {  // one-way contract, hash-only entry
                    auto [a, r] = l.deploy_contract(kOwner, ContractKind::Esc);
                    register_hash(l, kOwner, DomainHash::of(Fqdn::parse(d)), a);
                    break;
                }
            }
        }
        for (const std::string& d : domains) {
            CAPTURE(run, d);
            REQUIRE(l.registry().lookup_by_domain(d) == scan_oracle(l, d));
        }
    }
}
