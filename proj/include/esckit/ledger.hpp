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

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "esckit/address.hpp"
#include "esckit/errors.hpp"
#include "esckit/esc.hpp"
#include "esckit/fqdn.hpp"
#include "esckit/rational.hpp"
#include "esckit/registry.hpp"

namespace esckit {

// Flat per-operation gas schedule. Costs are aggregate figures, not
// per-instruction metering.
struct GasSchedule {
    std::uint64_t deploy_esc = 1'000'000;
    std::uint64_t set_signature = 120'000;
    std::uint64_t set_fqdn = 120'000;
    std::uint64_t registry_insert = 100'000;

    void validate() const {
        if (deploy_esc < 900'000 || deploy_esc > 1'000'000)
            throw EscError(Err::Config, "deploy_esc gas outside [900000, 1000000]");
        if (set_signature * 100 < deploy_esc * 8 || set_signature * 100 > deploy_esc * 12)
            throw EscError(Err::Config, "set_signature gas outside 8-12% of deploy");
    }

    json to_json() const {
        return json{{"deploy_esc", deploy_esc},
                    {"registry_insert", registry_insert},
                    {"set_fqdn", set_fqdn},
                    {"set_signature", set_signature}};
    }

    static GasSchedule from_json(const json& j) {
        GasSchedule g;
        g.deploy_esc = j.at("deploy_esc").get<std::uint64_t>();
        g.set_signature = j.at("set_signature").get<std::uint64_t>();
        g.set_fqdn = j.at("set_fqdn").get<std::uint64_t>();
        g.registry_insert = j.at("registry_insert").get<std::uint64_t>();
        g.validate();
        return g;
    }
};

struct Account {
    Address address;
    std::uint64_t nonce = 0;
    bool is_contract = false;
};

enum class ContractKind { Esc, Plain, Registry };

inline const char* to_string(ContractKind k) {
    switch (k) {
        case ContractKind::Esc: return "esc";
        case ContractKind::Plain: return "plain";
        case ContractKind::Registry: return "registry";
    }
    return "?";
}

struct Contract {
    ContractKind kind = ContractKind::Plain;
    EscState esc;          // valid when kind == Esc
    RegistryState registry;  // valid when kind == Registry

    bool supports_interface(const InterfaceId& id) const {
        return kind == ContractKind::Esc && esc.supports_interface(id);
    }
};

struct CallData {
    std::string op;
    json args = json::object();
};

struct Transaction {
    Address sender;
    std::optional<Address> target;  // nullopt = contract deployment
    CallData call;
    Rational gas_price_gwei = Rational(1);
};

enum class TxStatus { Success, Revert };

struct Receipt {
    TxStatus status = TxStatus::Success;
    std::uint64_t gas_used = 0;
    std::vector<Event> events;
    std::optional<Address> created;
    std::optional<std::string> error;  // error class name on revert

    bool ok() const { return status == TxStatus::Success; }
};

struct TxRecord {
    Transaction tx;
    Receipt receipt;
};

// Deterministic single-writer ledger with Ethereum-compatible semantics:
// deterministic contract addresses from (sender, nonce), total transaction
// order, revert-on-error with nonce consumption, flat gas accounting.
// Balances and value transfer are not modeled. Mutations must be serialized
// by the caller; reads of a committed instance are const and concurrency-safe.
class Ledger {
public:
    static Ledger genesis(const std::vector<Address>& funded,
                          GasSchedule schedule = GasSchedule{}) {
        schedule.validate();
        Ledger l;
        l.gas_ = schedule;
        for (const Address& a : funded) l.accounts_[a] = Account{a, 0, false};
        // The discovery registry lives at a well-known address derived from
        // the zero account so every snapshot agrees on where to look.
        l.registry_address_ = contract_address(Address::zero(), 0);
        l.contracts_[l.registry_address_] = Contract{ContractKind::Registry, {}, {}};
        l.accounts_[l.registry_address_] = Account{l.registry_address_, 0, true};
        return l;
    }

    static Address predict_address(const Address& sender, std::uint64_t nonce) {
        return contract_address(sender, nonce);
    }

    std::pair<Address, Receipt> deploy_contract(
        const Address& sender, ContractKind kind, std::optional<Fqdn> fqdn = {},
        const Rational& gas_price_gwei = Rational(1)) {
        json args{{"kind", to_string(kind)}};
        if (fqdn) args["fqdn"] = fqdn->labels();
        Receipt r = send_transaction(
            Transaction{sender, std::nullopt, CallData{"deploy", args}, gas_price_gwei});
        if (!r.created) throw EscError(Err::ContractRevert, r.error.value_or(""));
        return {*r.created, r};
    }

    Receipt send_transaction(const Transaction& tx) {
        auto sender_it = accounts_.find(tx.sender);
        if (sender_it == accounts_.end())
            throw EscError(Err::UnknownSender, tx.sender.hex());
        if (sender_it->second.is_contract)
            throw EscError(Err::UnknownSender,
                           tx.sender.hex() + " is a contract account");
        if (tx.target && !contracts_.contains(*tx.target))
            throw EscError(Err::UnknownTarget, tx.target->hex());

        std::uint64_t nonce = sender_it->second.nonce;
        sender_it->second.nonce = nonce + 1;  // consumed even on revert

        Receipt receipt;
        try {
            if (!tx.target) {
                receipt = apply_deploy(tx, nonce);
            } else {
                receipt = apply_call(tx);
            }
        } catch (const EscError& e) {
            receipt = Receipt{TxStatus::Revert, gas_for_op(tx), {}, std::nullopt,
                              std::string(to_string(e.code()))};
        }
        log_.push_back(TxRecord{tx, receipt});
        return receipt;
    }

    // -- reads ---------------------------------------------------------------

    const Account* find_account(const Address& a) const {
        auto it = accounts_.find(a);
        return it == accounts_.end() ? nullptr : &it->second;
    }

    const Contract* find_contract(const Address& a) const {
        auto it = contracts_.find(a);
        return it == contracts_.end() ? nullptr : &it->second;
    }

    std::uint64_t account_nonce(const Address& a) const {
        const Account* acc = find_account(a);
        if (!acc) throw EscError(Err::UnknownSender, a.hex());
        return acc->nonce;
    }

    const Address& registry_address() const { return registry_address_; }

    const RegistryState& registry() const {
        return contracts_.at(registry_address_).registry;
    }

    const std::vector<TxRecord>& transactions() const { return log_; }
    const GasSchedule& gas_schedule() const { return gas_; }
    const std::map<Address, Account>& accounts() const { return accounts_; }
    const std::map<Address, Contract>& contracts() const { return contracts_; }

    // Event log filtered by contract and/or event name, in commit order.
    std::vector<std::pair<Address, Event>> events(
        std::optional<Address> contract = {},
        std::optional<std::string> name = {}) const {
        std::vector<std::pair<Address, Event>> out;
        for (const TxRecord& rec : log_) {
            std::optional<Address> at = rec.receipt.created
                                            ? rec.receipt.created
                                            : rec.tx.target;
            if (!at) continue;
            if (contract && *contract != *at) continue;
            for (const Event& ev : rec.receipt.events) {
                if (name && ev.name != *name) continue;
                out.emplace_back(*at, ev);
            }
        }
        return out;
    }

    // -- persistence ----------------------------------------------------------

    json to_json() const {
        json accounts = json::object();
        for (const auto& [addr, acc] : accounts_)
            accounts[addr.hex()] = json{{"is_contract", acc.is_contract},
                                        {"nonce", acc.nonce}};
        json contracts = json::object();
        for (const auto& [addr, c] : contracts_)
            contracts[addr.hex()] = contract_to_json(c);
        json txs = json::array();
        for (const TxRecord& rec : log_) txs.push_back(record_to_json(rec));
        return json{{"accounts", accounts},
                    {"contracts", contracts},
                    {"gas_schedule", gas_.to_json()},
                    {"registry_address", registry_address_.hex()},
                    {"transactions", txs}};
    }

    static Ledger from_json(const json& j) {
        Ledger l;
        l.gas_ = GasSchedule::from_json(j.at("gas_schedule"));
        l.registry_address_ = Address::parse(j.at("registry_address").get<std::string>());
        for (const auto& [hex, v] : j.at("accounts").items()) {
            Address a = Address::parse(hex);
            l.accounts_[a] = Account{a, v.at("nonce").get<std::uint64_t>(),
                                     v.at("is_contract").get<bool>()};
        }
        for (const auto& [hex, v] : j.at("contracts").items())
            l.contracts_[Address::parse(hex)] = contract_from_json(v);
        for (const json& rec : j.at("transactions"))
            l.log_.push_back(record_from_json(rec));
        return l;
    }

    // Rebuilds from genesis and re-applies the recorded transaction sequence.
    // The result must match the snapshot byte for byte.
    static Ledger replay(const json& state) {
        std::vector<Address> funded;
        for (const auto& [hex, v] : state.at("accounts").items())
            if (!v.at("is_contract").get<bool>()) funded.push_back(Address::parse(hex));
        Ledger l = genesis(funded, GasSchedule::from_json(state.at("gas_schedule")));
        for (const json& rec : state.at("transactions")) {
            TxRecord r = record_from_json(rec);
            l.send_transaction(r.tx);
        }
        return l;
    }

    void save(const std::filesystem::path& path) const {
        std::ofstream out(path, std::ios::trunc);
        if (!out) throw EscError(Err::Io, "cannot write " + path.string());
        out << to_json().dump(2) << "\n";
    }

    static Ledger load(const std::filesystem::path& path) {
        std::ifstream in(path);
        if (!in) throw EscError(Err::Io, "cannot read " + path.string());
        json j = json::parse(in, nullptr, true);
        return from_json(j);
    }

private:
    Receipt apply_deploy(const Transaction& tx, std::uint64_t nonce) {
        const json& args = tx.call.args;
        std::string kind_s = args.at("kind").get<std::string>();
        ContractKind kind;
        if (kind_s == "esc") {
            kind = ContractKind::Esc;
        } else if (kind_s == "plain") {
            kind = ContractKind::Plain;
        } else {
            throw EscError(Err::UnknownOperation, "deploy kind " + kind_s);
        }

        Address addr = contract_address(tx.sender, nonce);
        Contract c;
        c.kind = kind;
        std::vector<Event> events;
        if (kind == ContractKind::Esc) {
            c.esc.owner = tx.sender;
            if (args.contains("fqdn")) {
                Fqdn domain = Fqdn::from_labels(args.at("fqdn").get<std::vector<std::string>>());
                c.esc.fqdn = domain;
                events.push_back(Event{"FQDNChanged", json{{"labels", domain.labels()}}});
            }
        }
        contracts_[addr] = std::move(c);
        accounts_[addr] = Account{addr, 0, true};
        return Receipt{TxStatus::Success, gas_.deploy_esc, std::move(events), addr,
                       std::nullopt};
    }

    Receipt apply_call(const Transaction& tx) {
        Contract& target = contracts_.at(*tx.target);
        const std::string& op = tx.call.op;
        const json& args = tx.call.args;

        // mutate a copy; commit only on success so reverts cannot leak state
        Contract scratch = target;
        Event ev;
        std::uint64_t gas = gas_for_op(tx);

        if (scratch.kind == ContractKind::Esc && op == "setFQDN") {
            Fqdn domain = Fqdn::from_labels(args.at("labels").get<std::vector<std::string>>());
            ev = scratch.esc.set_fqdn(tx.sender, std::move(domain));
        } else if (scratch.kind == ContractKind::Esc && op == "setSignature") {
            ev = scratch.esc.set_signature(tx.sender, args.at("signature").get<std::string>());
        } else if (scratch.kind == ContractKind::Registry && op == "register") {
            ev = apply_register(scratch.registry, args);
        } else {
            throw EscError(Err::UnknownOperation,
                           op + " on " + to_string(scratch.kind) + " contract");
        }

        target = std::move(scratch);
        return Receipt{TxStatus::Success, gas, {ev}, std::nullopt, std::nullopt};
    }

    Event apply_register(RegistryState& reg, const json& args) {
        Address contract = Address::parse(args.at("contract").get<std::string>());
        if (!contracts_.contains(contract))
            throw EscError(Err::UnknownContract, contract.hex());
        bool has_domain = args.contains("domain");
        bool has_hash = args.contains("domain_hash");
        if (has_domain == has_hash)
            throw EscError(Err::Config, "register takes domain or domain_hash");
        RegistryEntry entry =
            has_domain ? RegistryEntry{Fqdn::parse(args.at("domain").get<std::string>())}
                       : RegistryEntry{DomainHash::parse(args.at("domain_hash").get<std::string>())};
        return reg.insert(entry, contract);
    }

    std::uint64_t gas_for_op(const Transaction& tx) const {
        if (!tx.target) return gas_.deploy_esc;
        const std::string& op = tx.call.op;
        if (op == "setSignature") return gas_.set_signature;
        if (op == "setFQDN") return gas_.set_fqdn;
        if (op == "register") return gas_.registry_insert;
        return 0;
    }

    // -- json helpers ----------------------------------------------------------

    static json contract_to_json(const Contract& c) {
        switch (c.kind) {
            case ContractKind::Plain:
                return json{{"kind", "plain"}};
            case ContractKind::Esc: {
                json j{{"kind", "esc"}, {"owner", c.esc.owner.hex()}};
                j["fqdn"] = c.esc.fqdn ? json(c.esc.fqdn->labels()) : json(nullptr);
                j["signature"] = c.esc.signature ? json(*c.esc.signature) : json(nullptr);
                return j;
            }
            case ContractKind::Registry: {
                json by_domain = json::object();
                for (const auto& [domain, addrs] : c.registry.by_domain) {
                    json list = json::array();
                    for (const Address& a : addrs) list.push_back(a.hex());
                    by_domain[domain] = list;
                }
                json by_hash = json::object();
                for (const auto& [h, addrs] : c.registry.by_hash) {
                    json list = json::array();
                    for (const Address& a : addrs) list.push_back(a.hex());
                    by_hash[h.hex()] = list;
                }
                return json{{"by_domain", by_domain}, {"by_hash", by_hash},
                            {"kind", "registry"}};
            }
        }
        throw EscError(Err::Config, "bad contract kind");
    }

    static Contract contract_from_json(const json& j) {
        std::string kind = j.at("kind").get<std::string>();
        Contract c;
        if (kind == "plain") {
            c.kind = ContractKind::Plain;
        } else if (kind == "esc") {
            c.kind = ContractKind::Esc;
            c.esc.owner = Address::parse(j.at("owner").get<std::string>());
            if (!j.at("fqdn").is_null())
                c.esc.fqdn = Fqdn::from_labels(j.at("fqdn").get<std::vector<std::string>>());
            if (!j.at("signature").is_null())
                c.esc.signature = j.at("signature").get<std::string>();
        } else if (kind == "registry") {
            c.kind = ContractKind::Registry;
            for (const auto& [domain, list] : j.at("by_domain").items())
                for (const json& a : list)
                    c.registry.by_domain[domain].insert(Address::parse(a.get<std::string>()));
            for (const auto& [hex, list] : j.at("by_hash").items())
                for (const json& a : list)
                    c.registry.by_hash[DomainHash::parse(hex)].insert(
                        Address::parse(a.get<std::string>()));
        } else {
            throw EscError(Err::Config, "bad contract kind " + kind);
        }
        return c;
    }

    static json record_to_json(const TxRecord& rec) {
        json events = json::array();
        for (const Event& ev : rec.receipt.events)
            events.push_back(json{{"name", ev.name}, {"payload", ev.payload}});
        json receipt{{"created", rec.receipt.created ? json(rec.receipt.created->hex())
                                                     : json(nullptr)},
                     {"error", rec.receipt.error ? json(*rec.receipt.error) : json(nullptr)},
                     {"events", events},
                     {"gas_used", rec.receipt.gas_used},
                     {"status", rec.receipt.ok() ? "success" : "revert"}};
        return json{{"call", json{{"args", rec.tx.call.args}, {"op", rec.tx.call.op}}},
                    {"gas_price_gwei", rec.tx.gas_price_gwei.str()},
                    {"receipt", receipt},
                    {"sender", rec.tx.sender.hex()},
                    {"target", rec.tx.target ? json(rec.tx.target->hex()) : json("DEPLOY")}};
    }

    static TxRecord record_from_json(const json& j) {
        TxRecord rec;
        rec.tx.sender = Address::parse(j.at("sender").get<std::string>());
        std::string target = j.at("target").get<std::string>();
        if (target != "DEPLOY") rec.tx.target = Address::parse(target);
        rec.tx.call.op = j.at("call").at("op").get<std::string>();
        rec.tx.call.args = j.at("call").at("args");
        rec.tx.gas_price_gwei = Rational::parse(j.at("gas_price_gwei").get<std::string>());
        const json& r = j.at("receipt");
        rec.receipt.status =
            r.at("status").get<std::string>() == "success" ? TxStatus::Success
                                                           : TxStatus::Revert;
        rec.receipt.gas_used = r.at("gas_used").get<std::uint64_t>();
        if (!r.at("created").is_null())
            rec.receipt.created = Address::parse(r.at("created").get<std::string>());
        if (!r.at("error").is_null())
            rec.receipt.error = r.at("error").get<std::string>();
        for (const json& ev : r.at("events"))
            rec.receipt.events.push_back(
                Event{ev.at("name").get<std::string>(), ev.at("payload")});
        return rec;
    }

    std::map<Address, Account> accounts_;
    std::map<Address, Contract> contracts_;
    std::vector<TxRecord> log_;
    GasSchedule gas_;
    Address registry_address_;
};

}  // namespace esckit
