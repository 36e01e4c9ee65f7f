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

#include <openssl/core_names.h>
#include <openssl/rsa.h>

#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "esckit/address.hpp"
#include "esckit/errors.hpp"
#include "esckit/ssl_util.hpp"

namespace esckit {

enum class SigAlg { EcdsaP256Sha256, RsaPkcs1Sha256, RsaPssSha256 };

inline const char* to_string(SigAlg a) {
    switch (a) {
        case SigAlg::EcdsaP256Sha256: return "ecdsa-p256-sha256";
        case SigAlg::RsaPkcs1Sha256: return "rsa-pkcs1-sha256";
        case SigAlg::RsaPssSha256: return "rsa-pss-sha256";
    }
    return "?";
}

inline SigAlg sig_alg_from_string(std::string_view s) {
    if (s == "ecdsa-p256-sha256") return SigAlg::EcdsaP256Sha256;
    if (s == "rsa-pkcs1-sha256") return SigAlg::RsaPkcs1Sha256;
    if (s == "rsa-pss-sha256") return SigAlg::RsaPssSha256;
    throw EscError(Err::UnsupportedAlgorithm, std::string(s));
}

// Signature over the canonical contract-address payload, carried on-chain as
// "alg:base64(DER signature)". The algorithm prefix makes off-chain
// verification self-describing.
struct Endorsement {
    SigAlg algorithm;
    Bytes signature;

    std::string encoded() const {
        return std::string(to_string(algorithm)) + ":" + base64_encode(signature);
    }

    static Endorsement decode(std::string_view text) {
        auto colon = text.find(':');
        if (colon == std::string_view::npos)
            throw EscError(Err::MalformedSignature, "missing algorithm prefix");
        SigAlg alg = sig_alg_from_string(text.substr(0, colon));
        Bytes sig = base64_decode(text.substr(colon + 1));
        if (sig.empty()) throw EscError(Err::MalformedSignature, "empty signature");
        return Endorsement{alg, std::move(sig)};
    }

    bool operator==(const Endorsement&) const = default;
};

// What gets signed: the ASCII bytes of the 0x-prefixed lowercase hex address,
// exactly the string a user would copy from a website. Always 42 bytes.
inline Bytes canonical_payload(const Address& addr) {
    std::string hex = addr.hex();
    return Bytes(hex.begin(), hex.end());
}

namespace detail {

inline bool key_is_p256(const EVP_PKEY* key) {
    if (EVP_PKEY_base_id(key) != EVP_PKEY_EC) return false;
    char group[64] = {};
    size_t len = 0;
    if (EVP_PKEY_get_utf8_string_param(key, OSSL_PKEY_PARAM_GROUP_NAME, group,
                                       sizeof group, &len) != 1)
        return false;
    std::string_view name(group, len);
    return name == "prime256v1" || name == "P-256";
}

inline void check_key_matches_alg(const EVP_PKEY* key, SigAlg alg) {
    int base = EVP_PKEY_base_id(key);
    switch (alg) {
        case SigAlg::EcdsaP256Sha256:
            if (!key_is_p256(key))
                throw EscError(Err::UnsupportedKeyType,
                               "ecdsa-p256-sha256 requires a P-256 key");
            return;
        case SigAlg::RsaPkcs1Sha256:
        case SigAlg::RsaPssSha256:
            if (base != EVP_PKEY_RSA)
                throw EscError(Err::UnsupportedKeyType, "RSA algorithm on non-RSA key");
            return;
    }
}

inline void apply_padding(EVP_PKEY_CTX* pctx, SigAlg alg) {
    if (alg == SigAlg::RsaPssSha256) {
        if (EVP_PKEY_CTX_set_rsa_padding(pctx, RSA_PKCS1_PSS_PADDING) != 1 ||
            EVP_PKEY_CTX_set_rsa_pss_saltlen(pctx, RSA_PSS_SALTLEN_DIGEST) != 1)
            throw SslError("rsa-pss setup");
    }
}

}  // namespace detail

inline SigAlg default_algorithm(const EVP_PKEY* key) {
    if (detail::key_is_p256(key)) return SigAlg::EcdsaP256Sha256;
    if (EVP_PKEY_base_id(key) == EVP_PKEY_RSA) return SigAlg::RsaPkcs1Sha256;
    throw EscError(Err::UnsupportedKeyType, "only P-256 and RSA keys are supported");
}

// Private key plus the TLS certificate it belongs to. Consistency is checked
// once at load time.
struct SigningIdentity {
    PkeyPtr key;
    X509Ptr certificate;
    std::vector<X509Ptr> chain;  // intermediates, leaf-nearest first

    static SigningIdentity load(const std::filesystem::path& key_path,
                                const std::filesystem::path& cert_path,
                                std::optional<std::filesystem::path> chain_path = {}) {
        SigningIdentity id;
        id.key = load_key(key_path);
        id.certificate = load_cert(cert_path);
        if (chain_path) id.chain = load_cert_chain(*chain_path);
        id.check();
        return id;
    }

    static SigningIdentity from_parts(PkeyPtr key, X509Ptr cert,
                                      std::vector<X509Ptr> chain = {}) {
        SigningIdentity id;
        id.key = std::move(key);
        id.certificate = std::move(cert);
        id.chain = std::move(chain);
        id.check();
        return id;
    }

    void check() const {
        EVP_PKEY* cert_pub = X509_get0_pubkey(certificate.get());
        if (!cert_pub || EVP_PKEY_eq(cert_pub, key.get()) != 1)
            throw EscError(Err::KeyCertMismatch,
                           "private key does not match the certificate");
        if (cert_dns_names(certificate.get()).empty())
            throw EscError(Err::Config, "certificate carries no DNS name");
    }
};

// Endorse one specific contract address with the identity's private key.
inline Endorsement sign_address(const SigningIdentity& identity, const Address& addr,
                                std::optional<SigAlg> alg = {}) {
    SigAlg algorithm = alg ? *alg : default_algorithm(identity.key.get());
    detail::check_key_matches_alg(identity.key.get(), algorithm);

    Bytes payload = canonical_payload(addr);
    Owned<EVP_MD_CTX> ctx = Owned<EVP_MD_CTX>::wrap(EVP_MD_CTX_new(), "md ctx");
    EVP_PKEY_CTX* pctx = nullptr;
    if (EVP_DigestSignInit(ctx.get(), &pctx, EVP_sha256(), nullptr,
                           identity.key.get()) != 1)
        throw SslError("DigestSignInit");
    detail::apply_padding(pctx, algorithm);

    size_t sig_len = 0;
    if (EVP_DigestSign(ctx.get(), nullptr, &sig_len, payload.data(), payload.size()) != 1)
        throw SslError("DigestSign (size)");
    Bytes sig(sig_len);
    if (EVP_DigestSign(ctx.get(), sig.data(), &sig_len, payload.data(), payload.size()) != 1)
        throw SslError("DigestSign");
    sig.resize(sig_len);
    return Endorsement{algorithm, std::move(sig)};
}

// True iff the endorsement validates over the canonical payload of addr with
// the given public key. A damaged or mismatched signature returns false.
inline bool verify_signature(EVP_PKEY* public_key, const Address& addr,
                             const Endorsement& endorsement) {
    detail::check_key_matches_alg(public_key, endorsement.algorithm);
    Bytes payload = canonical_payload(addr);
    Owned<EVP_MD_CTX> ctx = Owned<EVP_MD_CTX>::wrap(EVP_MD_CTX_new(), "md ctx");
    EVP_PKEY_CTX* pctx = nullptr;
    if (EVP_DigestVerifyInit(ctx.get(), &pctx, EVP_sha256(), nullptr, public_key) != 1)
        throw SslError("DigestVerifyInit");
    detail::apply_padding(pctx, endorsement.algorithm);
    int rc = EVP_DigestVerify(ctx.get(), endorsement.signature.data(),
                              endorsement.signature.size(), payload.data(),
                              payload.size());
    ERR_clear_error();
    return rc == 1;
}

// Two-step variant: endorse the address the next deployment from (sender,
// nonce) will receive. Any intervening transaction from the sender
// invalidates the prediction.
inline std::pair<Address, Endorsement> predeploy_sign(const SigningIdentity& identity,
                                                      const Address& sender,
                                                      std::uint64_t nonce,
                                                      std::optional<SigAlg> alg = {}) {
    Address predicted = contract_address(sender, nonce);
    return {predicted, sign_address(identity, predicted, alg)};
}

// Certificate rotation: produce a fresh endorsement with the new identity,
// ready for another signature upload. Endorsements made with the old
// certificate stop verifying against the replacement key.
inline Endorsement rotate(const SigningIdentity& identity_new, const Address& addr,
                          std::optional<SigAlg> alg = {}) {
    return sign_address(identity_new, addr, alg);
}

}  // namespace esckit
