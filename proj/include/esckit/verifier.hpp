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

#include <algorithm>
#include <array>
#include <cstdio>
#include <ctime>
#include <functional>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "esckit/endorsement.hpp"
#include "esckit/ledger.hpp"
#include "esckit/registry.hpp"
#include "esckit/ssl_util.hpp"
#include "esckit/tls_client.hpp"

// Off-chain authentication of an endorsed contract, in four ordered steps:
//   1. read the domain and endorsement off the contract
//   2. obtain the domain's certificate chain (live TLS or fixture file)
//   3. check the endorsement signature over the contract address
//   4. run certification path validation against the user's trust store
// A failed step short-circuits; later steps are reported as skipped. When a
// registry is available, a failed authentication additionally searches it for
// verifying alternatives, which defeats address-swap downgrade attacks.

namespace esckit {

using CertChain = std::vector<X509Ptr>;

struct TrustStore {
    std::vector<X509Ptr> roots;

    // Reads every *.pem / *.crt in the directory; other files are ignored.
    static TrustStore from_dir(const std::filesystem::path& dir) {
        TrustStore store;
        std::vector<std::filesystem::path> files;
        for (const auto& entry : std::filesystem::directory_iterator(dir)) {
            if (!entry.is_regular_file()) continue;
            auto ext = entry.path().extension();
            if (ext == ".pem" || ext == ".crt") files.push_back(entry.path());
        }
        std::sort(files.begin(), files.end());
        for (const auto& f : files)
            for (X509Ptr& c : certs_from_pem(read_file(f)))
                store.roots.push_back(std::move(c));
        if (store.roots.empty())
            throw EscError(Err::Config, "trust store " + dir.string() + " is empty");
        return store;
    }

    static TrustStore from_certs(std::vector<X509Ptr> roots) {
        if (roots.empty()) throw EscError(Err::Config, "trust store is empty");
        TrustStore store;
        store.roots = std::move(roots);
        return store;
    }
};

struct CertificateSource {
    enum class Mode { Fixture, Live };
    Mode mode = Mode::Fixture;
    std::filesystem::path chain_file;  // fixture mode
    std::string host;                  // live mode
    int port = 443;

    static CertificateSource fixture(std::filesystem::path file) {
        CertificateSource s;
        s.mode = Mode::Fixture;
        s.chain_file = std::move(file);
        return s;
    }

    static CertificateSource live(std::string host, int port = 443) {
        CertificateSource s;
        s.mode = Mode::Live;
        s.host = std::move(host);
        s.port = port;
        return s;
    }
};

struct PathResult {
    bool ok = false;
    std::optional<Err> error;
    std::string detail;
};

enum class StepState { Succeeded, Failed, Skipped };

inline const char* to_string(StepState s) {
    switch (s) {
        case StepState::Succeeded: return "succeeded";
        case StepState::Failed: return "failed";
        case StepState::Skipped: return "skipped";
    }
    return "?";
}

struct StepOutcome {
    int id = 0;
    StepState state = StepState::Skipped;
    std::string detail;
};

struct DowngradeFinding {
    Fqdn domain;
    std::vector<Address> alternatives;  // verifying contracts, ascending
};

struct VerificationReport {
    static constexpr int kSchemaVersion = 1;

    Address contract;
    std::optional<Fqdn> domain_used;
    std::optional<bool> two_way;
    std::array<StepOutcome, 4> steps{StepOutcome{1, StepState::Skipped, ""},
                                     StepOutcome{2, StepState::Skipped, ""},
                                     StepOutcome{3, StepState::Skipped, ""},
                                     StepOutcome{4, StepState::Skipped, ""}};
    bool pass = false;
    std::optional<std::string> failure;
    std::optional<DowngradeFinding> downgrade;

    int exit_code() const { return pass ? 0 : 1; }

    json to_json() const {
        json steps_json = json::array();
        for (const StepOutcome& s : steps)
            steps_json.push_back(json{
                {"detail", s.detail}, {"outcome", to_string(s.state)}, {"step", s.id}});
        json downgrade_json(nullptr);
        if (downgrade) {
            json alts = json::array();
            for (const Address& a : downgrade->alternatives) alts.push_back(a.hex());
            downgrade_json = json{{"alternatives", alts},
                                  {"domain", downgrade->domain.dotted()},
                                  {"severity", "warning"}};
        }
        return json{
            {"binding", two_way ? json(*two_way ? "two-way" : "one-way") : json(nullptr)},
            {"contract", contract.hex()},
            {"domain", domain_used ? json(domain_used->dotted()) : json(nullptr)},
            {"downgrade", downgrade_json},
            {"failure", failure ? json(*failure) : json(nullptr)},
            {"result", pass ? "PASS" : "FAIL"},
            {"schema_version", kSchemaVersion},
            {"steps", steps_json}};
    }
};

struct VerifierConfig {
    TrustStore trust;
    CertificateSource source;
    std::int64_t at = 0;  // verification clock, unix seconds
    bool check_crls = false;
    std::vector<CrlPtr> crls;
    bool downgrade_enabled = true;  // effective only when a registry exists
    std::function<void(const std::string&)> notice;  // lookup degradation notes
};

// -- step 1 --------------------------------------------------------------------

inline std::pair<std::optional<Fqdn>, std::string> fetch_contract_data(
    const Ledger& ledger, const Address& addr) {
    const Contract* c = ledger.find_contract(addr);
    if (!c || !c->supports_interface(InterfaceId::esc()))
        throw EscError(Err::NotEscContract, addr.hex());
    if (!c->esc.signature || c->esc.signature->empty())
        throw EscError(Err::NoSignaturePresent, addr.hex());
    return {c->esc.fqdn, *c->esc.signature};
}

// Two-way contracts authenticate against their stored domain; the caller may
// still pin an expected one, which then has to agree. One-way contracts can
// only be authenticated when the caller knows the domain.
inline Fqdn resolve_domain(const std::optional<Fqdn>& onchain,
                           const std::optional<Fqdn>& expected) {
    if (!onchain) {
        if (!expected) throw EscError(Err::DomainUnknown, "one-way contract");
        return *expected;
    }
    if (expected && !(*expected == *onchain))
        throw EscError(Err::DomainMismatch,
                       onchain->dotted() + " on-chain vs " + expected->dotted());
    return *onchain;
}

// -- step 2 --------------------------------------------------------------------

inline CertChain fetch_certificate(const CertificateSource& source, const Fqdn& domain) {
    CertChain chain;
    if (source.mode == CertificateSource::Mode::Live) {
        chain = fetch_tls_chain(source.host, source.port);
    } else {
        try {
            chain = load_cert_chain(source.chain_file);
        } catch (const EscError& e) {
            throw EscError(Err::ConnectionFailed, e.what());
        }
    }
    auto names = cert_dns_names(chain.front().get());
    if (std::find(names.begin(), names.end(), domain.dotted()) == names.end())
        throw EscError(Err::NameMismatch,
                       "certificate does not cover " + domain.dotted());
    return chain;
}

// -- step 3 --------------------------------------------------------------------

inline bool verify_endorsement(const X509* leaf, const Address& addr,
                               const Endorsement& endorsement) {
    EVP_PKEY* pub = X509_get0_pubkey(const_cast<X509*>(leaf));
    if (!pub) throw EscError(Err::MalformedSignature, "certificate has no key");
    return verify_signature(pub, addr, endorsement);
}

// -- step 4 --------------------------------------------------------------------

inline PathResult validate_path(const CertChain& chain, const TrustStore& store,
                                std::int64_t at, const std::vector<CrlPtr>& crls = {},
                                bool check_crls = false) {
    if (chain.empty()) throw EscError(Err::Config, "empty chain");
    Owned<X509_STORE> x509_store = Owned<X509_STORE>::wrap(X509_STORE_new(), "store");
    for (const X509Ptr& root : store.roots)
        X509_STORE_add_cert(x509_store.get(), root.get());
    if (check_crls)
        for (const CrlPtr& crl : crls) X509_STORE_add_crl(x509_store.get(), crl.get());

    Owned<STACK_OF(X509)> untrusted =
        Owned<STACK_OF(X509)>::wrap(sk_X509_new_null(), "untrusted");
    for (std::size_t i = 1; i < chain.size(); ++i) {
        X509_up_ref(chain[i].get());
        sk_X509_push(untrusted.get(), chain[i].get());
    }

    Owned<X509_STORE_CTX> ctx =
        Owned<X509_STORE_CTX>::wrap(X509_STORE_CTX_new(), "store ctx");
    if (X509_STORE_CTX_init(ctx.get(), x509_store.get(), chain.front().get(),
                            untrusted.get()) != 1)
        throw SslError("X509_STORE_CTX_init");
    X509_STORE_CTX_set_time(ctx.get(), 0, static_cast<time_t>(at));
    unsigned long flags = X509_V_FLAG_USE_CHECK_TIME;
    if (check_crls) flags |= X509_V_FLAG_CRL_CHECK | X509_V_FLAG_CRL_CHECK_ALL;
    X509_VERIFY_PARAM_set_flags(X509_STORE_CTX_get0_param(ctx.get()), flags);

    if (X509_verify_cert(ctx.get()) == 1) return PathResult{true, {}, "chain anchored"};

    int code = X509_STORE_CTX_get_error(ctx.get());
    int depth = X509_STORE_CTX_get_error_depth(ctx.get());
    std::string reason = X509_verify_cert_error_string(code);
    PathResult out{false, Err::PathValidationFailed,
                   reason + " (depth " + std::to_string(depth) + ")"};
    switch (code) {
        case X509_V_ERR_CERT_HAS_EXPIRED:
            out.error = Err::CertificateExpired;
            break;
        case X509_V_ERR_CERT_NOT_YET_VALID:
            out.error = Err::CertificateNotYetValid;
            break;
        case X509_V_ERR_CERT_REVOKED:
            out.error = Err::CertificateRevoked;
            break;
        case X509_V_ERR_DEPTH_ZERO_SELF_SIGNED_CERT:
        case X509_V_ERR_SELF_SIGNED_CERT_IN_CHAIN:
            out.error = Err::UntrustedRoot;
            break;
        case X509_V_ERR_UNABLE_TO_GET_ISSUER_CERT:
        case X509_V_ERR_UNABLE_TO_GET_ISSUER_CERT_LOCALLY:
            // no issuer for the leaf itself = a hole in the presented chain;
            // no issuer further up = the terminating CA is not trusted
            out.error = depth == 0 ? Err::BrokenChain : Err::UntrustedRoot;
            break;
        default:
            break;
    }
    return out;
}

// -- full pipeline ---------------------------------------------------------------

namespace detail {

inline VerificationReport authenticate_impl(const Ledger& ledger, const Address& addr,
                                            const std::optional<Fqdn>& expected,
                                            const VerifierConfig& cfg) {
    VerificationReport rep;
    rep.contract = addr;

    auto fail = [&](int step, Err code, const std::string& detail) {
        rep.steps[step - 1].state = StepState::Failed;
        rep.steps[step - 1].detail = detail;
        rep.failure = to_string(code);
    };

    // step 1: on-chain data + domain resolution
    std::optional<Fqdn> domain;
    std::string endorsement_text;
    try {
        auto [onchain, sig_text] = fetch_contract_data(ledger, addr);
        domain = resolve_domain(onchain, expected);
        endorsement_text = sig_text;
        rep.domain_used = domain;
        rep.two_way = onchain.has_value();
        rep.steps[0].state = StepState::Succeeded;
        rep.steps[0].detail = (onchain ? "on-chain domain " : "caller-supplied domain ") +
                              domain->dotted();
    } catch (const EscError& e) {
        fail(1, e.code(), e.what());
        return rep;
    }

    // step 2: certificate retrieval + name coverage
    CertChain chain;
    try {
        chain = fetch_certificate(cfg.source, *domain);
        rep.steps[1].state = StepState::Succeeded;
        rep.steps[1].detail =
            "chain of " + std::to_string(chain.size()) + " for " + domain->dotted();
    } catch (const EscError& e) {
        fail(2, e.code(), e.what());
        return rep;
    }

    // step 3: endorsement signature over the contract address
    try {
        Endorsement endorsement = Endorsement::decode(endorsement_text);
        if (!verify_endorsement(chain.front().get(), addr, endorsement))
            throw EscError(Err::SignatureMismatch,
                           "endorsement does not cover " + addr.hex());
        rep.steps[2].state = StepState::Succeeded;
        rep.steps[2].detail = std::string(to_string(endorsement.algorithm)) + " verified";
    } catch (const EscError& e) {
        fail(3, e.code(), e.what());
        return rep;
    }

    // step 4: certification path validation
    PathResult path = validate_path(chain, cfg.trust, cfg.at, cfg.crls, cfg.check_crls);
    if (!path.ok) {
        fail(4, path.error.value_or(Err::PathValidationFailed), path.detail);
        return rep;
    }
    rep.steps[3].state = StepState::Succeeded;
    rep.steps[3].detail = path.detail;
    rep.pass = true;
    return rep;
}

}  // namespace detail

// Registry-backed downgrade check: when the website-supplied contract does
// not verify, every registered candidate for the domain is authenticated and
// the verifying ones are reported. Attacker-registered spam fails
// verification and produces nothing, so the check cannot be used for denial
// of service. Lookup problems degrade to "no finding" with a notice.
inline std::optional<DowngradeFinding> check_downgrade(const Ledger& ledger,
                                                       const Address& website_contract,
                                                       const Fqdn& domain,
                                                       const VerifierConfig& cfg,
                                                       bool website_verifies) {
    if (website_verifies) return std::nullopt;
    std::set<Address> candidates;
    try {
        const RegistryState& reg = ledger.registry();
        for (const Address& a : reg.lookup_by_domain(domain.dotted()))
            candidates.insert(a);
        for (const Address& a : reg.lookup_by_hash(DomainHash::of(domain)))
            candidates.insert(a);
    } catch (const std::exception& e) {
        if (cfg.notice) cfg.notice(std::string("registry lookup failed: ") + e.what());
        return std::nullopt;
    }
    candidates.erase(website_contract);

    DowngradeFinding finding{domain, {}};
    for (const Address& candidate : candidates) {
        VerificationReport sub = detail::authenticate_impl(ledger, candidate, domain, cfg);
        if (sub.pass) finding.alternatives.push_back(candidate);
    }
    if (finding.alternatives.empty()) return std::nullopt;
    return finding;
}

// The four-step authentication plus, when enabled, the downgrade check. A
// contract that fails step 1 outright (say, a plain contract swapped in on a
// hacked page) still gets the downgrade search through the caller-supplied
// domain.
inline VerificationReport authenticate(const Ledger& ledger, const Address& addr,
                                       const std::optional<Fqdn>& expected,
                                       const VerifierConfig& cfg) {
    VerificationReport rep = detail::authenticate_impl(ledger, addr, expected, cfg);
    std::optional<Fqdn> domain = rep.domain_used ? rep.domain_used : expected;
    if (cfg.downgrade_enabled && domain)
        rep.downgrade = check_downgrade(ledger, addr, *domain, cfg, rep.pass);
    return rep;
}

// Accepts unix seconds or ISO-8601 UTC ("2026-03-01T12:00:00Z").
inline std::int64_t parse_clock(const std::string& text) {
    if (!text.empty() && text.find_first_not_of("0123456789") == std::string::npos)
        return std::stoll(text);
    std::tm tm{};
    int y, mo, d, h, mi, s;
    if (std::sscanf(text.c_str(), "%d-%d-%dT%d:%d:%dZ", &y, &mo, &d, &h, &mi, &s) != 6)
        throw EscError(Err::Config, "cannot parse clock '" + text + "'");
    tm.tm_year = y - 1900;
    tm.tm_mon = mo - 1;
    tm.tm_mday = d;
    tm.tm_hour = h;
    tm.tm_min = mi;
    tm.tm_sec = s;
    return static_cast<std::int64_t>(timegm(&tm));
}

}  // namespace esckit
