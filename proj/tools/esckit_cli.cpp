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

// esckit — bind a smart contract to a web identity and check the binding.
//
// Assertion workflow:   init → deploy → sign → upload → register
// Authentication:       verify (four steps + downgrade check), lookup
// Support:              ca init (offline test PKI), costs
//
// stdout carries machine-parseable payload only; progress and diagnostics go
// to stderr. Exit codes: 0 = pass, 1 = protocol failure (failed verification,
// reverted transaction), 2 = operational error.
//
// Option resolution: flag > environment variable > config file > default.

#include <fcntl.h>
#include <sys/file.h>
#include <unistd.h>

#include <chrono>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "esckit/endorsement.hpp"
#include "esckit/ledger.hpp"
#include "esckit/pki_testkit.hpp"
#include "esckit/verifier.hpp"

namespace {

using namespace esckit;

// Exclusive advisory lock over the ledger file for mutating commands; the
// ledger contract is single-writer.
class FileLock {
public:
    explicit FileLock(const std::filesystem::path& path) {
        fd_ = ::open(path.c_str(), O_RDWR | O_CREAT, 0644);
        if (fd_ < 0 || flock(fd_, LOCK_EX) != 0)
            throw EscError(Err::Io, "cannot lock " + path.string());
    }
    ~FileLock() {
        if (fd_ >= 0) {
            flock(fd_, LOCK_UN);
            ::close(fd_);
        }
    }
    FileLock(const FileLock&) = delete;
    FileLock& operator=(const FileLock&) = delete;

private:
    int fd_ = -1;
};

struct GlobalOpts {
    std::string ledger;
    std::string trust_store;
    std::string registry;
    std::string clock;
    std::string eth_usd = "233";
    std::string gas_price = "1";

    std::filesystem::path ledger_path() const {
        if (ledger.empty()) throw EscError(Err::Config, "no ledger file configured");
        return ledger;
    }

    std::int64_t resolve_clock() const {
        if (!clock.empty()) return parse_clock(clock);
        return std::chrono::duration_cast<std::chrono::seconds>(
                   std::chrono::system_clock::now().time_since_epoch())
            .count();
    }

    Rational price() const { return Rational::parse(gas_price); }
    Rational rate() const { return Rational::parse(eth_usd); }
};

void print_receipt(const Receipt& receipt) {
    for (const Event& ev : receipt.events)
        std::cout << ev.name << " " << ev.payload.dump() << "\n";
    std::cout << "gas=" << receipt.gas_used << "\n";
}

// Reverted receipts are protocol failures (exit 1), not crashes.
int finish_mutation(const Receipt& receipt) {
    if (!receipt.ok()) {
        std::cerr << "esckit: transaction reverted: " << receipt.error.value_or("?")
                  << "\n";
        return 1;
    }
    print_receipt(receipt);
    return 0;
}

int cmd_init(const GlobalOpts& g, const std::vector<std::string>& accounts) {
    std::vector<Address> funded;
    for (const std::string& a : accounts) funded.push_back(Address::parse(a));
    FileLock lock(g.ledger_path());
    Ledger ledger = Ledger::genesis(funded);
    ledger.save(g.ledger_path());
    std::cout << "registry=" << ledger.registry_address().hex() << "\n";
    std::cerr << "esckit: ledger created at " << g.ledger_path().string() << " with "
              << funded.size() << " account(s)\n";
    return 0;
}

int cmd_deploy(const GlobalOpts& g, const std::string& owner, const std::string& domain,
               bool one_way) {
    if (!domain.empty() && one_way)
        throw EscError(Err::Config, "--domain and --one-way are mutually exclusive");
    std::optional<Fqdn> fqdn;
    if (!domain.empty()) fqdn = Fqdn::parse(domain);

    FileLock lock(g.ledger_path());
    Ledger ledger = Ledger::load(g.ledger_path());
    auto [addr, receipt] =
        ledger.deploy_contract(Address::parse(owner), ContractKind::Esc, fqdn, g.price());
    ledger.save(g.ledger_path());

    std::cout << addr.hex() << "\n";
    std::cout << "gas=" << receipt.gas_used << "\n";
    std::cout << "cost=" << cost_usd(receipt.gas_used, g.price(), g.rate()).decimal(3)
              << " USD\n";
    return 0;
}

int cmd_sign(const std::string& key, const std::string& cert, const std::string& chain,
             const std::string& address, const std::string& sender,
             std::optional<std::uint64_t> nonce, const std::string& alg) {
    if (!address.empty() && !sender.empty())
        throw EscError(Err::Config, "--address and --sender are mutually exclusive");
    std::optional<std::filesystem::path> chain_path;
    if (!chain.empty()) chain_path = chain;
    SigningIdentity identity = SigningIdentity::load(key, cert, chain_path);
    std::optional<SigAlg> sig_alg;
    if (!alg.empty()) sig_alg = sig_alg_from_string(alg);

    if (!sender.empty()) {
        if (!nonce) throw EscError(Err::Config, "--sender requires --nonce");
        auto [predicted, endorsement] =
            predeploy_sign(identity, Address::parse(sender), *nonce, sig_alg);
        std::cout << predicted.hex() << "\n" << endorsement.encoded() << "\n";
        return 0;
    }
    if (address.empty())
        throw EscError(Err::Config, "provide --address or --sender/--nonce");
    Endorsement endorsement = sign_address(identity, Address::parse(address), sig_alg);
    std::cout << endorsement.encoded() << "\n";
    return 0;
}

int cmd_upload(const GlobalOpts& g, const std::string& address,
               const std::string& signature, const std::string& from) {
    FileLock lock(g.ledger_path());
    Ledger ledger = Ledger::load(g.ledger_path());
    Receipt receipt = ledger.send_transaction(
        Transaction{Address::parse(from), Address::parse(address),
                    CallData{"setSignature", {{"signature", signature}}}, g.price()});
    ledger.save(g.ledger_path());
    return finish_mutation(receipt);
}

int cmd_register(const GlobalOpts& g, const std::string& address,
                 const std::string& domain, const std::string& hash,
                 const std::string& from) {
    if (domain.empty() == hash.empty())
        throw EscError(Err::Config, "provide exactly one of --domain and --hash");
    FileLock lock(g.ledger_path());
    Ledger ledger = Ledger::load(g.ledger_path());
    Address registry = g.registry.empty() ? ledger.registry_address()
                                          : Address::parse(g.registry);
    json args{{"contract", Address::parse(address).hex()}};
    if (!domain.empty())
        args["domain"] = Fqdn::parse(domain).dotted();
    else
        args["domain_hash"] = DomainHash::parse(hash).hex();
    Receipt receipt = ledger.send_transaction(Transaction{
        Address::parse(from), registry, CallData{"register", args}, g.price()});
    ledger.save(g.ledger_path());
    return finish_mutation(receipt);
}

int cmd_verify(const GlobalOpts& g, const std::string& address,
               const std::string& domain, const std::string& cert_file,
               const std::string& host, int port,
               const std::vector<std::string>& crl_files, const std::string& crl_check,
               bool no_downgrade) {
    if (cert_file.empty() == host.empty())
        throw EscError(Err::Config, "provide exactly one of --cert-file and --host");
    if (g.trust_store.empty())
        throw EscError(Err::Config, "no trust store configured");

    Ledger ledger = Ledger::load(g.ledger_path());

    VerifierConfig cfg;
    cfg.trust = TrustStore::from_dir(g.trust_store);
    cfg.source = cert_file.empty() ? CertificateSource::live(host, port)
                                   : CertificateSource::fixture(cert_file);
    cfg.at = g.resolve_clock();
    for (const std::string& f : crl_files) cfg.crls.push_back(load_crl(f));
    if (crl_check == "on") {
        cfg.check_crls = true;
    } else if (crl_check == "off") {
        cfg.check_crls = false;
    } else if (crl_check == "auto") {
        // fixtures lean on CRL evaluation, live connections leave it off
        cfg.check_crls = !cfg.crls.empty() && !cert_file.empty();
    } else {
        throw EscError(Err::Config, "--crl-check takes on, off or auto");
    }
    cfg.downgrade_enabled = !no_downgrade;
    cfg.notice = [](const std::string& note) { std::cerr << "esckit: " << note << "\n"; };

    std::optional<Fqdn> expected;
    if (!domain.empty()) expected = Fqdn::parse(domain);

    VerificationReport report =
        authenticate(ledger, Address::parse(address), expected, cfg);
    std::cout << report.to_json().dump(2) << "\n";
    if (report.downgrade)
        std::cerr << "esckit: warning: this contract does not verify, but "
                  << report.downgrade->alternatives.size()
                  << " verifying contract(s) exist for "
                  << report.downgrade->domain.dotted() << "\n";
    return report.exit_code();
}

int cmd_lookup(const GlobalOpts& g, const std::string& domain, const std::string& hash) {
    if (domain.empty() == hash.empty())
        throw EscError(Err::Config, "provide exactly one of --domain and --hash");
    Ledger ledger = Ledger::load(g.ledger_path());
    std::set<Address> found =
        domain.empty() ? ledger.registry().lookup_by_hash(DomainHash::parse(hash))
                       : ledger.registry().lookup_by_domain(domain);
    json out = json::array();
    for (const Address& a : found) out.push_back(a.hex());
    std::cout << out.dump() << "\n";
    return 0;
}

int cmd_ca_init(const GlobalOpts& g, const std::string& out_dir, std::uint64_t seed,
                const std::string& domain, const std::string& other_domain) {
    std::int64_t clock = g.resolve_clock();
    StandardFixtures fx =
        make_standard_fixtures(out_dir, seed, domain, other_domain, clock);
    std::cout << fx.manifest.dump(2) << "\n";
    std::cerr << "esckit: fixtures written to " << out_dir << "\n";
    return 0;
}

int cmd_costs(std::uint64_t gas, const std::string& gwei, const std::string& ethusd) {
    std::cout << cost_usd(gas, Rational::parse(gwei), Rational::parse(ethusd)).decimal(3)
              << " USD\n";
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Bind smart contracts to web identities via TLS certificates"};
    app.require_subcommand(1);
    app.set_config("--config", "", "key=value configuration file");

    GlobalOpts g;
    app.add_option("--ledger", g.ledger, "ledger state file")->envname("ESC_LEDGER");
    app.add_option("--trust-store", g.trust_store, "directory of trusted root PEMs")
        ->envname("ESC_TRUST_STORE");
    app.add_option("--registry", g.registry, "registry contract address")
        ->envname("ESC_REGISTRY");
    app.add_option("--clock", g.clock, "verification time (unix seconds or ISO-8601 Z)")
        ->envname("ESC_CLOCK");
    app.add_option("--eth-usd", g.eth_usd, "ETH/USD rate for cost lines");
    app.add_option("--gas-price", g.gas_price, "gas price in GWei");

    // init
    auto* init = app.add_subcommand("init", "create a fresh ledger file");
    init->fallthrough();
    std::vector<std::string> init_accounts;
    init->add_option("--account", init_accounts, "funded account address")->required();

    // deploy
    auto* deploy = app.add_subcommand("deploy", "deploy an authenticated contract");
    deploy->fallthrough();
    std::string deploy_owner, deploy_domain;
    bool deploy_one_way = false;
    deploy->add_option("--owner", deploy_owner, "owner account")->required();
    deploy->add_option("--domain", deploy_domain, "domain for two-way binding");
    deploy->add_flag("--one-way", deploy_one_way, "deploy without a stored domain");

    // sign
    auto* sign = app.add_subcommand("sign", "endorse a contract address");
    sign->fallthrough();
    std::string sign_key, sign_cert, sign_chain, sign_address_s, sign_sender, sign_alg;
    std::optional<std::uint64_t> sign_nonce;
    sign->add_option("--key", sign_key, "PEM private key") ->required();
    sign->add_option("--cert", sign_cert, "PEM certificate")->required();
    sign->add_option("--chain", sign_chain, "PEM intermediate chain");
    sign->add_option("--address", sign_address_s, "existing contract address");
    sign->add_option("--sender", sign_sender, "deployer account (pre-deployment form)");
    sign->add_option("--nonce", sign_nonce, "deployer nonce (pre-deployment form)");
    sign->add_option("--alg", sign_alg,
                     "ecdsa-p256-sha256 | rsa-pkcs1-sha256 | rsa-pss-sha256");

    // upload
    auto* upload = app.add_subcommand("upload", "store an endorsement on-chain");
    upload->fallthrough();
    std::string up_address, up_signature, up_from;
    upload->add_option("--address", up_address)->required();
    upload->add_option("--signature", up_signature)->required();
    upload->add_option("--from", up_from, "sending account")->required();

    // register
    auto* reg = app.add_subcommand("register", "advertise a contract in the registry");
    reg->fallthrough();
    std::string reg_address, reg_domain, reg_hash, reg_from;
    reg->add_option("--address", reg_address)->required();
    reg->add_option("--domain", reg_domain, "plain domain entry");
    reg->add_option("--hash", reg_hash, "0x-prefixed 32-byte domain hash entry");
    reg->add_option("--from", reg_from, "sending account")->required();

    // verify
    auto* verify = app.add_subcommand("verify", "authenticate a contract");
    verify->fallthrough();
    std::string v_address, v_domain, v_cert_file, v_host, v_crl_check = "auto";
    int v_port = 443;
    std::vector<std::string> v_crls;
    bool v_no_downgrade = false;
    verify->add_option("--address", v_address)->required();
    verify->add_option("--domain", v_domain, "expected domain");
    verify->add_option("--cert-file", v_cert_file, "PEM chain fixture (leaf first)");
    verify->add_option("--host", v_host, "live TLS host");
    verify->add_option("--port", v_port, "live TLS port");
    verify->add_option("--crl", v_crls, "CRL PEM file (repeatable)");
    verify->add_option("--crl-check", v_crl_check, "on | off | auto");
    verify->add_flag("--no-downgrade", v_no_downgrade, "skip the registry check");

    // lookup
    auto* lookup = app.add_subcommand("lookup", "query the registry");
    lookup->fallthrough();
    std::string lk_domain, lk_hash;
    lookup->add_option("--domain", lk_domain);
    lookup->add_option("--hash", lk_hash);

    // ca
    auto* ca = app.add_subcommand("ca", "test PKI fixtures");
    ca->fallthrough();
    auto* ca_init = ca->add_subcommand("init", "generate the standard fixture set");
    ca_init->fallthrough();
    std::string ca_out, ca_domain = "hq.example.org", ca_other = "other.org";
    std::uint64_t ca_seed = 1;
    ca_init->add_option("--out", ca_out, "output directory")->required();
    ca_init->add_option("--seed", ca_seed, "determinism seed");
    ca_init->add_option("--domain", ca_domain, "main fixture domain");
    ca_init->add_option("--other-domain", ca_other, "secondary fixture domain");
    ca->require_subcommand(1);

    // costs
    auto* costs = app.add_subcommand("costs", "gas cost in USD");
    costs->fallthrough();
    std::uint64_t c_gas = 0;
    std::string c_gwei = "1", c_ethusd = "233";
    costs->add_option("gas", c_gas, "gas units")->required();
    costs->add_option("gwei", c_gwei, "gas price in GWei");
    costs->add_option("ethusd", c_ethusd, "ETH/USD rate");

    CLI11_PARSE(app, argc, argv);

    try {
        if (init->parsed()) return cmd_init(g, init_accounts);
        if (deploy->parsed()) return cmd_deploy(g, deploy_owner, deploy_domain,
                                                deploy_one_way);
        if (sign->parsed())
            return cmd_sign(sign_key, sign_cert, sign_chain, sign_address_s, sign_sender,
                            sign_nonce, sign_alg);
        if (upload->parsed()) return cmd_upload(g, up_address, up_signature, up_from);
        if (reg->parsed()) return cmd_register(g, reg_address, reg_domain, reg_hash,
                                               reg_from);
        if (verify->parsed())
            return cmd_verify(g, v_address, v_domain, v_cert_file, v_host, v_port, v_crls,
                              v_crl_check, v_no_downgrade);
        if (lookup->parsed()) return cmd_lookup(g, lk_domain, lk_hash);
        if (ca->parsed() && ca_init->parsed())
            return cmd_ca_init(g, ca_out, ca_seed, ca_domain, ca_other);
        if (costs->parsed()) return cmd_costs(c_gas, c_gwei, c_ethusd);
        std::cerr << "esckit: no command\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "esckit: " << e.what() << "\n";
        return 2;
    }
}
