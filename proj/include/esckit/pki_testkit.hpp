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
#include <map>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "esckit/det_crypto.hpp"
#include "esckit/endorsement.hpp"
#include "esckit/fqdn.hpp"
#include "esckit/ssl_util.hpp"

// Deterministic offline PKI for exercising every verification path: chains of
// any depth, expired / not-yet-valid / revoked / wrong-name leaves, CRLs and
// an untrusted sibling hierarchy, all reproducible bit for bit from one seed.
// Timestamps come from an injected clock; nothing reads wall time.

namespace esckit {

struct Validity {
    std::int64_t not_before;  // unix seconds
    std::int64_t not_after;

    Validity(std::int64_t nb, std::int64_t na) : not_before(nb), not_after(na) {
        if (na <= nb) throw EscError(Err::Config, "empty validity window");
    }
};

enum class KeyAlg { EcdsaP256, Rsa2048 };

struct Crl {
    std::string issuer;
    std::set<std::uint64_t> revoked;
    std::int64_t this_update = 0;
    CrlPtr handle;

    std::string pem() const { return pem_from_crl(handle.get()); }
};

namespace detail {

inline Owned<ASN1_TIME> asn1_time(std::int64_t unix_seconds) {
    return Owned<ASN1_TIME>::wrap(
        ASN1_TIME_set(nullptr, static_cast<time_t>(unix_seconds)), "ASN1_TIME");
}

inline void add_ext(X509* cert, const X509* issuer, int nid, const char* value) {
    X509V3_CTX ctx;
    X509V3_set_ctx_nodb(&ctx);
    X509V3_set_ctx(&ctx, const_cast<X509*>(issuer), cert, nullptr, nullptr, 0);
    Owned<X509_EXTENSION> ext = Owned<X509_EXTENSION>::wrap(
        X509V3_EXT_conf_nid(nullptr, &ctx, nid, value), "extension");
    if (X509_add_ext(cert, ext.get(), -1) != 1) throw SslError("X509_add_ext");
}

// Sign with a reproducible signature: RSA PKCS#1 is deterministic by itself;
// for EC issuers the randomized signature is recomputed with the RFC 6979
// nonce and swapped into the already-encoded structure.
inline void det_sign(X509* cert, EVP_PKEY* issuer_key) {
    if (X509_sign(cert, issuer_key, EVP_sha256()) == 0) throw SslError("X509_sign");
    if (EVP_PKEY_base_id(issuer_key) != EVP_PKEY_EC) return;

    unsigned char* tbs = nullptr;
    int tbs_len = i2d_re_X509_tbs(cert, &tbs);
    if (tbs_len <= 0) throw SslError("i2d_re_X509_tbs");
    auto digest = sha256({tbs, static_cast<std::size_t>(tbs_len)});
    OPENSSL_free(tbs);
    Bytes der = ecdsa_det_sign_digest(issuer_key, digest);

    const ASN1_BIT_STRING* sig = nullptr;
    const X509_ALGOR* alg = nullptr;
    X509_get0_signature(&sig, &alg, cert);
    ASN1_BIT_STRING* mut = const_cast<ASN1_BIT_STRING*>(sig);
    if (ASN1_STRING_set(mut, der.data(), int(der.size())) != 1)
        throw SslError("signature swap");
    mut->flags &= ~(ASN1_STRING_FLAG_BITS_LEFT | 0x07);
    mut->flags |= ASN1_STRING_FLAG_BITS_LEFT;
}

inline void det_sign_crl(X509_CRL* crl, EVP_PKEY* issuer_key) {
    if (X509_CRL_sign(crl, issuer_key, EVP_sha256()) == 0)
        throw SslError("X509_CRL_sign");
    if (EVP_PKEY_base_id(issuer_key) != EVP_PKEY_EC) return;

    unsigned char* tbs = nullptr;
    int tbs_len = i2d_re_X509_CRL_tbs(crl, &tbs);
    if (tbs_len <= 0) throw SslError("i2d_re_X509_CRL_tbs");
    auto digest = sha256({tbs, static_cast<std::size_t>(tbs_len)});
    OPENSSL_free(tbs);
    Bytes der = ecdsa_det_sign_digest(issuer_key, digest);

    const ASN1_BIT_STRING* sig = nullptr;
    const X509_ALGOR* alg = nullptr;
    X509_CRL_get0_signature(crl, &sig, &alg);
    ASN1_BIT_STRING* mut = const_cast<ASN1_BIT_STRING*>(sig);
    if (ASN1_STRING_set(mut, der.data(), int(der.size())) != 1)
        throw SslError("signature swap");
    mut->flags &= ~(ASN1_STRING_FLAG_BITS_LEFT | 0x07);
    mut->flags |= ASN1_STRING_FLAG_BITS_LEFT;
}

}  // namespace detail

class CertAuthority {
public:
    // Self-signed root. Everything derived from this authority — child CAs,
    // leaf keys, serials — is a function of (name, alg, seed, now).
    static CertAuthority make_root(const std::string& name, KeyAlg alg,
                                   std::uint64_t seed, std::int64_t now) {
        CertAuthority ca(name, DetStream(seed, "ca:" + name), now);
        ca.key_ = make_key(alg, ca.stream_.child("key"));
        ca.cert_ = ca.build_ca_cert(name, ca.key_.get(), nullptr, nullptr,
                                    ca.next_serial_++);
        return ca;
    }

    // Child CA whose certificate is signed by this authority.
    CertAuthority issue_intermediate(const std::string& name,
                                     KeyAlg alg = KeyAlg::EcdsaP256) {
        CertAuthority child(name, stream_.child("ca:" + name), now_);
        child.key_ = make_key(alg, child.stream_.child("key"));
        std::uint64_t serial = next_serial_++;
        issued_.insert(serial);
        child.cert_ = build_ca_cert(name, child.key_.get(), cert_.get(), key_.get(),
                                    serial);
        return child;
    }

    // Server leaf with SAN = dotted fqdn. Returns the full signing identity
    // (key, certificate, issuer chain is up to the caller to assemble).
    SigningIdentity issue_leaf(const Fqdn& fqdn, const Validity& validity,
                               KeyAlg alg = KeyAlg::EcdsaP256) {
        std::uint64_t serial = next_serial_++;
        issued_.insert(serial);
        PkeyPtr key = make_key(
            alg, stream_.child("leaf:" + fqdn.dotted() + ":" + std::to_string(serial)));

        X509Ptr cert = X509Ptr::wrap(X509_new(), "X509");
        populate_basics(cert.get(), fqdn.dotted(), key.get(), cert_.get(), serial,
                        validity);
        detail::add_ext(cert.get(), cert_.get(), NID_basic_constraints, "CA:FALSE");
        detail::add_ext(cert.get(), cert_.get(), NID_key_usage, "digitalSignature");
        detail::add_ext(cert.get(), cert_.get(), NID_ext_key_usage, "serverAuth");
        detail::add_ext(cert.get(), cert_.get(), NID_subject_key_identifier, "hash");
        detail::add_ext(cert.get(), cert_.get(), NID_authority_key_identifier,
                        "keyid:always");
        std::string san = "DNS:" + fqdn.dotted();
        detail::add_ext(cert.get(), cert_.get(), NID_subject_alt_name, san.c_str());
        detail::det_sign(cert.get(), key_.get());

        last_serial_ = serial;
        return SigningIdentity::from_parts(std::move(key), std::move(cert));
    }

    // Marks the serial revoked (as of the authority clock) and returns the
    // refreshed CRL. The revoked set only grows.
    Crl revoke(std::uint64_t serial) {
        if (!issued_.contains(serial))
            throw EscError(Err::UnknownSerial, std::to_string(serial));
        revoked_.insert(serial);
        return current_crl();
    }

    Crl current_crl() const {
        CrlPtr crl = CrlPtr::wrap(X509_CRL_new(), "X509_CRL");
        X509_CRL_set_version(crl.get(), 1);
        X509_CRL_set_issuer_name(crl.get(), X509_get_subject_name(cert_.get()));
        auto this_update = detail::asn1_time(now_);
        auto next_update = detail::asn1_time(now_ + 3650LL * 86400);
        X509_CRL_set1_lastUpdate(crl.get(), this_update.get());
        X509_CRL_set1_nextUpdate(crl.get(), next_update.get());
        for (std::uint64_t serial : revoked_) {
            X509_REVOKED* entry = X509_REVOKED_new();
            if (!entry) throw SslError("X509_REVOKED_new");
            Owned<ASN1_INTEGER> sn =
                Owned<ASN1_INTEGER>::wrap(ASN1_INTEGER_new(), "serial");
            ASN1_INTEGER_set_uint64(sn.get(), serial);
            X509_REVOKED_set_serialNumber(entry, sn.get());
            auto when = detail::asn1_time(now_);
            X509_REVOKED_set_revocationDate(entry, when.get());
            X509_CRL_add0_revoked(crl.get(), entry);
        }
        X509_CRL_sort(crl.get());
        detail::det_sign_crl(crl.get(), key_.get());
        return Crl{name_, revoked_, now_, std::move(crl)};
    }

    const X509* certificate() const { return cert_.get(); }
    EVP_PKEY* key() const { return key_.get(); }
    const std::string& name() const { return name_; }
    std::int64_t clock() const { return now_; }
    std::uint64_t last_serial() const { return last_serial_; }
    const std::set<std::uint64_t>& issued() const { return issued_; }

    std::string cert_pem() const { return pem_from_cert(cert_.get()); }
    std::string key_pem() const { return pem_from_key(key_.get()); }

private:
    CertAuthority(std::string name, DetStream stream, std::int64_t now)
        : name_(std::move(name)), stream_(std::move(stream)), now_(now) {}

    static PkeyPtr make_key(KeyAlg alg, DetStream stream) {
        switch (alg) {
            case KeyAlg::EcdsaP256: return det_ec_p256_key(std::move(stream));
            case KeyAlg::Rsa2048: return det_rsa_2048_key(std::move(stream));
        }
        throw EscError(Err::UnsupportedKeyType, "bad key algorithm");
    }

    static void populate_basics(X509* cert, const std::string& cn, EVP_PKEY* pubkey,
                                const X509* issuer, std::uint64_t serial,
                                const Validity& validity) {
        X509_set_version(cert, 2);
        Owned<ASN1_INTEGER> sn = Owned<ASN1_INTEGER>::wrap(ASN1_INTEGER_new(), "serial");
        ASN1_INTEGER_set_uint64(sn.get(), serial);
        X509_set_serialNumber(cert, sn.get());

        X509_NAME* subject = X509_get_subject_name(cert);
        X509_NAME_add_entry_by_txt(subject, "CN", MBSTRING_ASC,
                                   reinterpret_cast<const unsigned char*>(cn.c_str()),
                                   -1, -1, 0);
        X509_set_issuer_name(cert, issuer ? X509_get_subject_name(const_cast<X509*>(issuer))
                                          : subject);
        auto nb = detail::asn1_time(validity.not_before);
        auto na = detail::asn1_time(validity.not_after);
        X509_set1_notBefore(cert, nb.get());
        X509_set1_notAfter(cert, na.get());
        X509_set_pubkey(cert, pubkey);
    }

    // CA certs get a generous window around the injected clock.
    X509Ptr build_ca_cert(const std::string& cn, EVP_PKEY* pubkey, const X509* issuer,
                          EVP_PKEY* issuer_key, std::uint64_t serial) {
        X509Ptr cert = X509Ptr::wrap(X509_new(), "X509");
        Validity window(now_ - 3LL * 365 * 86400, now_ + 20LL * 365 * 86400);
        populate_basics(cert.get(), cn, pubkey, issuer, serial, window);
        const X509* ext_issuer = issuer ? issuer : cert.get();
        detail::add_ext(cert.get(), ext_issuer, NID_basic_constraints,
                        "critical,CA:TRUE");
        detail::add_ext(cert.get(), ext_issuer, NID_key_usage,
                        "critical,keyCertSign,cRLSign");
        detail::add_ext(cert.get(), ext_issuer, NID_subject_key_identifier, "hash");
        detail::add_ext(cert.get(), ext_issuer, NID_authority_key_identifier,
                        "keyid:always");
        detail::det_sign(cert.get(), issuer_key ? issuer_key : key_.get());
        return cert;
    }

    std::string name_;
    PkeyPtr key_;
    X509Ptr cert_;
    DetStream stream_;
    std::int64_t now_;
    std::uint64_t next_serial_ = 1;
    std::uint64_t last_serial_ = 0;
    std::set<std::uint64_t> issued_;
    std::set<std::uint64_t> revoked_;
};

// One fixture directory covering the whole verification matrix for `domain`:
// valid / expired / not-yet-valid / revoked / untrusted-root / wrong-name /
// broken-chain, plus an RSA leaf for algorithm agility and a trust-store
// directory holding the good root. manifest.json maps role → relative path.
struct StandardFixtures {
    std::filesystem::path dir;
    std::string domain;
    std::string other_domain;
    std::uint64_t seed = 0;
    std::int64_t clock = 0;
    nlohmann::json manifest;

    std::filesystem::path path(const std::string& role) const {
        return dir / manifest.at("files").at(role).get<std::string>();
    }
};

inline StandardFixtures make_standard_fixtures(const std::filesystem::path& dir,
                                               std::uint64_t seed,
                                               const std::string& domain,
                                               const std::string& other_domain,
                                               std::int64_t clock) {
    namespace fs = std::filesystem;
    fs::create_directories(dir);
    fs::create_directories(dir / "truststore");

    Fqdn main_fqdn = Fqdn::parse(domain);
    Fqdn other_fqdn = Fqdn::parse(other_domain);
    constexpr std::int64_t kDay = 86400;
    Validity valid_window(clock - kDay, clock + 365 * kDay);
    Validity expired_window(clock - 730 * kDay, clock - 365 * kDay);
    Validity notyet_window(clock + 365 * kDay, clock + 730 * kDay);

    CertAuthority root =
        CertAuthority::make_root("fixture-root", KeyAlg::EcdsaP256, seed, clock);
    CertAuthority inter = root.issue_intermediate("fixture-intermediate");

    SigningIdentity valid = inter.issue_leaf(main_fqdn, valid_window);
    SigningIdentity expired = inter.issue_leaf(main_fqdn, expired_window);
    SigningIdentity notyet = inter.issue_leaf(main_fqdn, notyet_window);
    SigningIdentity revoked = inter.issue_leaf(main_fqdn, valid_window);
    std::uint64_t revoked_serial = inter.last_serial();
    SigningIdentity other = inter.issue_leaf(other_fqdn, valid_window);
    SigningIdentity rsa =
        inter.issue_leaf(main_fqdn, valid_window, KeyAlg::Rsa2048);

    // sibling hierarchy that is structurally fine but not in the trust store
    CertAuthority root2 = CertAuthority::make_root("fixture-untrusted-root",
                                                   KeyAlg::EcdsaP256, seed + 1, clock);
    CertAuthority inter2 = root2.issue_intermediate("fixture-untrusted-intermediate");
    SigningIdentity untrusted = inter2.issue_leaf(main_fqdn, valid_window);

    Crl root_crl = root.current_crl();
    Crl inter_crl = inter.revoke(revoked_serial);

    auto chain_pem = [](const SigningIdentity& id, const CertAuthority& issuer) {
        return pem_from_cert(id.certificate.get()) + issuer.cert_pem();
    };
    std::map<std::string, std::string> files{
        {"root_cert", root.cert_pem()},
        {"root_crl", root_crl.pem()},
        {"intermediate_cert", inter.cert_pem()},
        {"intermediate_crl", inter_crl.pem()},
        {"truststore_root", root.cert_pem()},
        {"chain_valid", chain_pem(valid, inter)},
        {"key_valid", pem_from_key(valid.key.get())},
        {"cert_valid", pem_from_cert(valid.certificate.get())},
        {"chain_expired", chain_pem(expired, inter)},
        {"key_expired", pem_from_key(expired.key.get())},
        {"chain_notyet", chain_pem(notyet, inter)},
        {"key_notyet", pem_from_key(notyet.key.get())},
        {"chain_revoked", chain_pem(revoked, inter)},
        {"key_revoked", pem_from_key(revoked.key.get())},
        {"chain_broken", pem_from_cert(valid.certificate.get())},  // no issuer
        {"chain_untrusted", chain_pem(untrusted, inter2)},
        {"key_untrusted", pem_from_key(untrusted.key.get())},
        {"chain_other", chain_pem(other, inter)},
        {"key_other", pem_from_key(other.key.get())},
        {"chain_valid_rsa", chain_pem(rsa, inter)},
        {"key_valid_rsa", pem_from_key(rsa.key.get())},
    };
    std::map<std::string, std::string> rel{
        {"root_cert", "root.cert.pem"},
        {"root_crl", "root.crl.pem"},
        {"intermediate_cert", "intermediate.cert.pem"},
        {"intermediate_crl", "intermediate.crl.pem"},
        {"truststore_root", "truststore/root.cert.pem"},
        {"chain_valid", "valid.chain.pem"},
        {"key_valid", "valid.key.pem"},
        {"cert_valid", "valid.cert.pem"},
        {"chain_expired", "expired.chain.pem"},
        {"key_expired", "expired.key.pem"},
        {"chain_notyet", "notyet.chain.pem"},
        {"key_notyet", "notyet.key.pem"},
        {"chain_revoked", "revoked.chain.pem"},
        {"key_revoked", "revoked.key.pem"},
        {"chain_broken", "broken.chain.pem"},
        {"chain_untrusted", "untrusted.chain.pem"},
        {"key_untrusted", "untrusted.key.pem"},
        {"chain_other", "other.chain.pem"},
        {"key_other", "other.key.pem"},
        {"chain_valid_rsa", "valid-rsa.chain.pem"},
        {"key_valid_rsa", "valid-rsa.key.pem"},
    };

    nlohmann::json file_map = nlohmann::json::object();
    for (const auto& [role, content] : files) {
        write_file(dir / rel.at(role), content);
        file_map[role] = rel.at(role);
    }

    StandardFixtures out;
    out.dir = dir;
    out.domain = main_fqdn.dotted();
    out.other_domain = other_fqdn.dotted();
    out.seed = seed;
    out.clock = clock;
    out.manifest = nlohmann::json{{"clock", clock},
                                  {"domain", out.domain},
                                  {"files", file_map},
                                  {"other_domain", out.other_domain},
                                  {"revoked_serial", revoked_serial},
                                  {"seed", seed}};
    write_file(dir / "manifest.json", out.manifest.dump(2) + "\n");
    return out;
}

}  // namespace esckit
