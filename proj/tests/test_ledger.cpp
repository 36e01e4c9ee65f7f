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

#include <atomic>
#include <filesystem>
#include <thread>

#include <catch2/catch_amalgamated.hpp>

#include "esckit/ledger.hpp"

using namespace esckit;

namespace {
const Address kAlice = Address::parse("0x00112233445566778899aabbccddeeff00112233");
const Address kBob = Address::parse("0xb0b0b0b0b0b0b0b0b0b0b0b0b0b0b0b0b0b0b0b0");

Ledger fresh() { return Ledger::genesis({kAlice, kBob}); }
}  // namespace

TEST_CASE("deploying twice from one account yields distinct addresses") {
    Ledger l = fresh();
    auto [a1, r1] = l.deploy_contract(kAlice, ContractKind::Esc);
    auto [a2, r2] = l.deploy_contract(kAlice, ContractKind::Esc);
    CHECK(a1 != a2);
    CHECK(l.account_nonce(kAlice) == 2);
}

TEST_CASE("esc deployment consumes the scheduled one million gas") {
    Ledger l = fresh();
    auto [addr, receipt] = l.deploy_contract(kAlice, ContractKind::Esc);
    CHECK(receipt.gas_used == 1'000'000);
    CHECK(receipt.ok());
    CHECK(receipt.created == addr);
}

TEST_CASE("deployed address matches the reference hash computation") {
    Ledger l = fresh();
    auto [addr, receipt] = l.deploy_contract(kAlice, ContractKind::Esc);
    // frozen from the independent keccak reference for (kAlice, nonce 0)
    CHECK(addr.hex() == "0x6c94b190f1a3fd4fc82b06db40943e0119c5e8bc");
}

TEST_CASE("deploy from unknown sender fails") {
    Ledger l = fresh();
    Address stranger = Address::parse("0x1111111111111111111111111111111111111111");
    CHECK_THROWS_MATCHES(l.deploy_contract(stranger, ContractKind::Esc), EscError,
                         Catch::Matchers::Predicate<EscError>([](const EscError& e) {
                             return e.code() == Err::UnknownSender;
                         }));
}

TEST_CASE("predict_address agrees with deployment") {
    Ledger l = fresh();
    Address predicted = Ledger::predict_address(kAlice, l.account_nonce(kAlice));
    auto [addr, receipt] = l.deploy_contract(kAlice, ContractKind::Esc);
    CHECK(predicted == addr);
    CHECK(Ledger::predict_address(kAlice, 3) != Ledger::predict_address(kAlice, 4));
    // frozen reference value for nonce 7
    CHECK(Ledger::predict_address(kAlice, 7).hex() ==
          "0xee83210f76277e5f05c2efaf2de49e153db2602f");
}

TEST_CASE("setSignature transaction succeeds for the owner and emits its event") {
    Ledger l = fresh();
    auto [addr, _] = l.deploy_contract(kAlice, ContractKind::Esc);
    Receipt r = l.send_transaction(Transaction{
        kAlice, addr, CallData{"setSignature", {{"signature", "ecdsa-p256-sha256:AAAA"}}}});
    CHECK(r.ok());
    CHECK(r.gas_used == 120'000);
    REQUIRE(r.events.size() == 1);
    CHECK(r.events[0].name == "SignatureChanged");
    CHECK(l.find_contract(addr)->esc.get_signature() == "ecdsa-p256-sha256:AAAA");
    // event log query surfaces it
    auto log = l.events(addr, "SignatureChanged");
    REQUIRE(log.size() == 1);
    CHECK(log[0].second.payload.at("signature") == "ecdsa-p256-sha256:AAAA");
}

TEST_CASE("transaction to a nonexistent address is rejected") {
    Ledger l = fresh();
    Address nowhere = Address::parse("0x2222222222222222222222222222222222222222");
    CHECK_THROWS_MATCHES(
        l.send_transaction(Transaction{kAlice, nowhere, CallData{"setSignature", {}}}),
        EscError, Catch::Matchers::Predicate<EscError>([](const EscError& e) {
            return e.code() == Err::UnknownTarget;
        }));
}

TEST_CASE("reverted transaction leaves contract storage unchanged, nonce consumed") {
    Ledger l = fresh();
    auto [addr, _] = l.deploy_contract(kAlice, ContractKind::Esc);
    l.send_transaction(Transaction{
        kAlice, addr, CallData{"setSignature", {{"signature", "ecdsa-p256-sha256:AAAA"}}}});
    std::uint64_t nonce_before = l.account_nonce(kBob);
    json state_before = l.to_json().at("contracts");

    Receipt r = l.send_transaction(Transaction{
        kBob, addr, CallData{"setSignature", {{"signature", "intruder"}}}});
    CHECK_FALSE(r.ok());
    CHECK(r.error == "NotOwner");
    CHECK(r.events.empty());
    CHECK(l.find_contract(addr)->esc.get_signature() == "ecdsa-p256-sha256:AAAA");
    CHECK(l.to_json().at("contracts") == state_before);
    CHECK(l.account_nonce(kBob) == nonce_before + 1);
}

TEST_CASE("gas schedule invariants hold for the defaults") {
    GasSchedule g;
    CHECK_NOTHROW(g.validate());
    CHECK(g.deploy_esc >= 900'000);
    CHECK(g.deploy_esc <= 1'000'000);
    CHECK(g.set_signature * 100 >= g.deploy_esc * 8);
    CHECK(g.set_signature * 100 <= g.deploy_esc * 12);

    GasSchedule bad = g;
    bad.deploy_esc = 2'000'000;
    CHECK_THROWS_AS(bad.validate(), EscError);
    bad = g;
    bad.set_signature = 10'000;
    CHECK_THROWS_AS(bad.validate(), EscError);
}

TEST_CASE("state file round-trips and persists") {
    Ledger l = fresh();
    auto [addr, _] = l.deploy_contract(kAlice, ContractKind::Esc,
                                       Fqdn::parse("hq.example.org"));
    l.send_transaction(Transaction{
        kAlice, addr, CallData{"setSignature", {{"signature", "ecdsa-p256-sha256:Zm9v"}}}});
    l.send_transaction(Transaction{
        kAlice, l.registry_address(),
        CallData{"register", {{"contract", addr.hex()}, {"domain", "hq.example.org"}}}});

    json snapshot = l.to_json();
    Ledger reloaded = Ledger::from_json(snapshot);
    CHECK(reloaded.to_json() == snapshot);
    CHECK(reloaded.to_json().dump(2) == snapshot.dump(2));

    auto path = std::filesystem::temp_directory_path() / "esckit_ledger_test.json";
    l.save(path);
    Ledger from_disk = Ledger::load(path);
    CHECK(from_disk.to_json().dump(2) == snapshot.dump(2));
    std::filesystem::remove(path);
}

TEST_CASE("replaying the transaction log reproduces the state bit for bit") {
    Ledger l = fresh();
    auto [a1, r1] = l.deploy_contract(kAlice, ContractKind::Esc,
                                      Fqdn::parse("example.org"));
    auto [a2, r2] = l.deploy_contract(kBob, ContractKind::Plain);
    l.send_transaction(Transaction{
        kAlice, a1, CallData{"setSignature", {{"signature", "rsa-pkcs1-sha256:YmFy"}}}});
    l.send_transaction(Transaction{
        kBob, a1, CallData{"setSignature", {{"signature", "evil"}}}});  // reverts
    l.send_transaction(Transaction{
        kBob, l.registry_address(),
        CallData{"register", {{"contract", a1.hex()}, {"domain", "example.org"}}}});

    json snapshot = l.to_json();
    Ledger replayed = Ledger::replay(snapshot);
    CHECK(replayed.to_json().dump(2) == snapshot.dump(2));
}

TEST_CASE("registry contract exists at the well-known genesis address") {
    Ledger l = fresh();
    CHECK(l.registry_address().hex() == "0xde4a1fd7fd9535fc953ed2be602daaa41767312a");
    const Contract* reg = l.find_contract(l.registry_address());
    REQUIRE(reg != nullptr);
    CHECK(reg->kind == ContractKind::Registry);
}

TEST_CASE("fractional gas prices survive the state file and replay") {
    Ledger l = fresh();
    auto [addr, _] = l.deploy_contract(kAlice, ContractKind::Esc, std::nullopt,
                                       Rational::parse("2.5"));
    l.send_transaction(Transaction{kAlice, addr,
                                   CallData{"setSignature", {{"signature", "s:QQ=="}}},
                                   Rational::parse("0.75")});
    json snapshot = l.to_json();
    CHECK(snapshot.at("transactions")[0].at("gas_price_gwei") == "5/2");
    CHECK(snapshot.at("transactions")[1].at("gas_price_gwei") == "3/4");
    CHECK(Ledger::replay(snapshot).to_json().dump(2) == snapshot.dump(2));
}

TEST_CASE("a committed snapshot serves many concurrent readers") {
    Ledger l = fresh();
    auto [addr, _] = l.deploy_contract(kAlice, ContractKind::Esc,
                                       Fqdn::parse("example.org"));
    l.send_transaction(Transaction{
        kAlice, addr, CallData{"setSignature", {{"signature", "e:QQ=="}}}});
    l.send_transaction(Transaction{
        kAlice, l.registry_address(),
        CallData{"register", {{"contract", addr.hex()}, {"domain", "example.org"}}}});

    const Ledger& snapshot = l;
    std::string expected = snapshot.to_json().dump();
    std::atomic<int> mismatches{0};
    std::vector<std::thread> readers;
    for (int t = 0; t < 8; ++t) {
        readers.emplace_back([&] {
            for (int i = 0; i < 50; ++i) {
                if (snapshot.to_json().dump() != expected) ++mismatches;
                if (snapshot.registry().lookup_by_domain("example.org").count(addr) != 1)
                    ++mismatches;
                if (snapshot.events(addr, "SignatureChanged").size() != 1) ++mismatches;
                if (!snapshot.find_contract(addr)) ++mismatches;
            }
        });
    }
    for (auto& r : readers) r.join();
    CHECK(mismatches == 0);
}

TEST_CASE("contract accounts cannot originate transactions") {
    Ledger l = fresh();
    auto [addr, _] = l.deploy_contract(kAlice, ContractKind::Esc);
    CHECK_THROWS_MATCHES(
        l.send_transaction(Transaction{addr, addr, CallData{"setSignature", {}}}),
        EscError, Catch::Matchers::Predicate<EscError>([](const EscError& e) {
            return e.code() == Err::UnknownSender;
        }));
}
