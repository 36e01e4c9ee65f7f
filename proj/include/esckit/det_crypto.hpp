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
#include <openssl/ec.h>
#include <openssl/ecdsa.h>
#include <openssl/obj_mac.h>
#include <openssl/param_build.h>
#include <openssl/sha.h>

#include <array>
#include <cstdint>
#include <string>

#include "esckit/bytes.hpp"
#include "esckit/ssl_util.hpp"

// Deterministic key material and signatures for reproducible test fixtures:
// every byte is a pure function of a caller-supplied seed. Signing uses the
// deterministic ECDSA nonce construction of RFC 6979, so even EC-signed
// certificates serialize identically across runs. Not intended for
// production keys; the signing toolkit loads real PEM material instead.

namespace esckit {

inline std::array<std::uint8_t, 32> sha256(std::span<const std::uint8_t> data) {
    std::array<std::uint8_t, 32> out;
    SHA256(data.data(), data.size(), out.data());
    return out;
}

inline Bytes hmac_sha256(std::span<const std::uint8_t> key,
                         std::span<const std::uint8_t> data) {
    Bytes out(32);
    size_t out_len = 0;
    EVP_MAC* mac = EVP_MAC_fetch(nullptr, "HMAC", nullptr);
    if (!mac) throw SslError("HMAC fetch");
    EVP_MAC_CTX* ctx = EVP_MAC_CTX_new(mac);
    EVP_MAC_free(mac);
    if (!ctx) throw SslError("HMAC ctx");
    char digest_name[] = "SHA256";
    OSSL_PARAM params[] = {
        OSSL_PARAM_construct_utf8_string("digest", digest_name, 0),
        OSSL_PARAM_construct_end()};
    int ok = EVP_MAC_init(ctx, key.data(), key.size(), params) &&
             EVP_MAC_update(ctx, data.data(), data.size()) &&
             EVP_MAC_final(ctx, out.data(), &out_len, out.size());
    EVP_MAC_CTX_free(ctx);
    if (!ok || out_len != 32) throw SslError("HMAC compute");
    return out;
}

// Label-scoped deterministic byte stream: block i = SHA256(state ‖ label ‖ i).
class DetStream {
public:
    DetStream(std::uint64_t seed, std::string label) : label_(std::move(label)) {
        Bytes material;
        for (int i = 7; i >= 0; --i)
            material.push_back(static_cast<std::uint8_t>(seed >> (8 * i)));
        material.insert(material.end(), label_.begin(), label_.end());
        state_ = sha256(material);
    }

    DetStream child(const std::string& label) const {
        DetStream s(0, label);
        Bytes material(state_.begin(), state_.end());
        material.insert(material.end(), label.begin(), label.end());
        s.state_ = sha256(material);
        s.counter_ = 0;
        return s;
    }

    std::array<std::uint8_t, 32> next32() {
        Bytes material(state_.begin(), state_.end());
        for (int i = 3; i >= 0; --i)
            material.push_back(static_cast<std::uint8_t>(counter_ >> (8 * i)));
        ++counter_;
        return sha256(material);
    }

    Bytes take(std::size_t n) {
        Bytes out;
        while (out.size() < n) {
            auto block = next32();
            out.insert(out.end(), block.begin(), block.end());
        }
        out.resize(n);
        return out;
    }

private:
    std::string label_;
    std::array<std::uint8_t, 32> state_{};
    std::uint32_t counter_ = 0;
};

namespace detail {

inline BnPtr bn_from_bytes(std::span<const std::uint8_t> b) {
    return BnPtr::wrap(BN_bin2bn(b.data(), int(b.size()), nullptr), "BN_bin2bn");
}

inline Bytes bn_to_padded(const BIGNUM* v, int len) {
    Bytes out(static_cast<std::size_t>(len));
    if (BN_bn2binpad(v, out.data(), len) != len) throw SslError("BN_bn2binpad");
    return out;
}

}  // namespace detail

// P-256 keypair with the scalar derived from the stream.
inline PkeyPtr det_ec_p256_key(DetStream stream) {
    Owned<EC_GROUP> group = Owned<EC_GROUP>::wrap(
        EC_GROUP_new_by_curve_name(NID_X9_62_prime256v1), "P-256 group");
    const BIGNUM* order = EC_GROUP_get0_order(group.get());

    Owned<BN_CTX> bctx = Owned<BN_CTX>::wrap(BN_CTX_new(), "BN ctx");
    BnPtr scalar = detail::bn_from_bytes(stream.take(32));
    // fold into [1, order-1]
    BnPtr order_minus_1 = BnPtr::wrap(BN_dup(order), "BN_dup");
    BN_sub_word(order_minus_1.get(), 1);
    BN_mod(scalar.get(), scalar.get(), order_minus_1.get(), bctx.get());
    BN_add_word(scalar.get(), 1);

    Owned<EC_POINT> pub = Owned<EC_POINT>::wrap(EC_POINT_new(group.get()), "EC point");
    if (EC_POINT_mul(group.get(), pub.get(), scalar.get(), nullptr, nullptr,
                     bctx.get()) != 1)
        throw SslError("EC_POINT_mul");
    std::size_t oct_len = EC_POINT_point2oct(group.get(), pub.get(),
                                             POINT_CONVERSION_UNCOMPRESSED, nullptr, 0,
                                             bctx.get());
    Bytes pub_oct(oct_len);
    EC_POINT_point2oct(group.get(), pub.get(), POINT_CONVERSION_UNCOMPRESSED,
                       pub_oct.data(), oct_len, bctx.get());

    OSSL_PARAM_BLD* bld = OSSL_PARAM_BLD_new();
    char group_name[] = "prime256v1";
    OSSL_PARAM_BLD_push_utf8_string(bld, OSSL_PKEY_PARAM_GROUP_NAME, group_name, 0);
    OSSL_PARAM_BLD_push_BN(bld, OSSL_PKEY_PARAM_PRIV_KEY, scalar.get());
    OSSL_PARAM_BLD_push_octet_string(bld, OSSL_PKEY_PARAM_PUB_KEY, pub_oct.data(),
                                     pub_oct.size());
    Owned<OSSL_PARAM> params =
        Owned<OSSL_PARAM>::wrap(OSSL_PARAM_BLD_to_param(bld), "param build");
    OSSL_PARAM_BLD_free(bld);

    Owned<EVP_PKEY_CTX> pctx = Owned<EVP_PKEY_CTX>::wrap(
        EVP_PKEY_CTX_new_from_name(nullptr, "EC", nullptr), "EC fromdata ctx");
    EVP_PKEY* raw = nullptr;
    if (EVP_PKEY_fromdata_init(pctx.get()) != 1 ||
        EVP_PKEY_fromdata(pctx.get(), &raw, EVP_PKEY_KEYPAIR, params.get()) != 1)
        throw SslError("EC fromdata");
    return PkeyPtr::wrap(raw, "EC key");
}

namespace detail {

inline BnPtr det_prime(DetStream& stream, int bits) {
    Owned<BN_CTX> bctx = Owned<BN_CTX>::wrap(BN_CTX_new(), "BN ctx");
    for (;;) {
        Bytes candidate = stream.take(static_cast<std::size_t>(bits / 8));
        candidate[0] |= 0xc0;   // keep the product at full width
        candidate.back() |= 1;  // odd
        BnPtr p = bn_from_bytes(candidate);
        int rc = BN_check_prime(p.get(), bctx.get(), nullptr);
        if (rc < 0) throw SslError("BN_check_prime");
        if (rc == 1) return p;
    }
}

}  // namespace detail

// RSA-2048 keypair built from two stream-derived primes.
inline PkeyPtr det_rsa_2048_key(DetStream stream) {
    Owned<BN_CTX> bctx = Owned<BN_CTX>::wrap(BN_CTX_new(), "BN ctx");
    BnPtr e = BnPtr::wrap(BN_new(), "BN e");
    BN_set_word(e.get(), 65537);

    BnPtr p = nullptr, q = nullptr;
    BnPtr p1 = BnPtr::wrap(BN_new(), "p-1"), q1 = BnPtr::wrap(BN_new(), "q-1");
    BnPtr gcd = BnPtr::wrap(BN_new(), "gcd");
    for (;;) {
        p = detail::det_prime(stream, 1024);
        q = detail::det_prime(stream, 1024);
        if (BN_cmp(p.get(), q.get()) == 0) continue;
        if (BN_cmp(p.get(), q.get()) < 0) std::swap(p, q);
        BN_sub(p1.get(), p.get(), BN_value_one());
        BN_sub(q1.get(), q.get(), BN_value_one());
        BN_gcd(gcd.get(), p1.get(), e.get(), bctx.get());
        if (!BN_is_one(gcd.get())) continue;
        BN_gcd(gcd.get(), q1.get(), e.get(), bctx.get());
        if (!BN_is_one(gcd.get())) continue;
        break;
    }

    BnPtr n = BnPtr::wrap(BN_new(), "n");
    BN_mul(n.get(), p.get(), q.get(), bctx.get());
    // d = e⁻¹ mod lcm(p-1, q-1)
    BnPtr lcm = BnPtr::wrap(BN_new(), "lcm");
    BN_gcd(gcd.get(), p1.get(), q1.get(), bctx.get());
    BN_mul(lcm.get(), p1.get(), q1.get(), bctx.get());
    BN_div(lcm.get(), nullptr, lcm.get(), gcd.get(), bctx.get());
    BnPtr d = BnPtr::wrap(BN_mod_inverse(nullptr, e.get(), lcm.get(), bctx.get()),
                          "mod inverse");
    BnPtr dp = BnPtr::wrap(BN_new(), "dp"), dq = BnPtr::wrap(BN_new(), "dq");
    BN_mod(dp.get(), d.get(), p1.get(), bctx.get());
    BN_mod(dq.get(), d.get(), q1.get(), bctx.get());
    BnPtr qinv = BnPtr::wrap(BN_mod_inverse(nullptr, q.get(), p.get(), bctx.get()),
                             "qinv");

    OSSL_PARAM_BLD* bld = OSSL_PARAM_BLD_new();
    OSSL_PARAM_BLD_push_BN(bld, OSSL_PKEY_PARAM_RSA_N, n.get());
    OSSL_PARAM_BLD_push_BN(bld, OSSL_PKEY_PARAM_RSA_E, e.get());
    OSSL_PARAM_BLD_push_BN(bld, OSSL_PKEY_PARAM_RSA_D, d.get());
    OSSL_PARAM_BLD_push_BN(bld, OSSL_PKEY_PARAM_RSA_FACTOR1, p.get());
    OSSL_PARAM_BLD_push_BN(bld, OSSL_PKEY_PARAM_RSA_FACTOR2, q.get());
    OSSL_PARAM_BLD_push_BN(bld, OSSL_PKEY_PARAM_RSA_EXPONENT1, dp.get());
    OSSL_PARAM_BLD_push_BN(bld, OSSL_PKEY_PARAM_RSA_EXPONENT2, dq.get());
    OSSL_PARAM_BLD_push_BN(bld, OSSL_PKEY_PARAM_RSA_COEFFICIENT1, qinv.get());
    Owned<OSSL_PARAM> params =
        Owned<OSSL_PARAM>::wrap(OSSL_PARAM_BLD_to_param(bld), "param build");
    OSSL_PARAM_BLD_free(bld);

    Owned<EVP_PKEY_CTX> pctx = Owned<EVP_PKEY_CTX>::wrap(
        EVP_PKEY_CTX_new_from_name(nullptr, "RSA", nullptr), "RSA fromdata ctx");
    EVP_PKEY* raw = nullptr;
    if (EVP_PKEY_fromdata_init(pctx.get()) != 1 ||
        EVP_PKEY_fromdata(pctx.get(), &raw, EVP_PKEY_KEYPAIR, params.get()) != 1)
        throw SslError("RSA fromdata");
    return PkeyPtr::wrap(raw, "RSA key");
}

// RFC 6979 deterministic ECDSA over P-256/SHA-256. Returns the DER-encoded
// (r, s) pair for the given 32-byte message digest.
inline Bytes ecdsa_det_sign_digest(EVP_PKEY* key,
                                   std::span<const std::uint8_t> digest32) {
    if (digest32.size() != 32)
        throw EscError(Err::Config, "expected a 32-byte digest");

    BIGNUM* x_raw = nullptr;
    if (EVP_PKEY_get_bn_param(key, OSSL_PKEY_PARAM_PRIV_KEY, &x_raw) != 1)
        throw SslError("private scalar");
    BnPtr x = BnPtr::wrap(x_raw, "priv");

    Owned<EC_GROUP> group = Owned<EC_GROUP>::wrap(
        EC_GROUP_new_by_curve_name(NID_X9_62_prime256v1), "P-256 group");
    const BIGNUM* order = EC_GROUP_get0_order(group.get());
    Owned<BN_CTX> bctx = Owned<BN_CTX>::wrap(BN_CTX_new(), "BN ctx");

    // z = digest interpreted as an integer, reduced mod the order. For P-256
    // the digest already has exactly qlen bits, so no shift is involved.
    BnPtr z = detail::bn_from_bytes(digest32);
    BnPtr z_mod = BnPtr::wrap(BN_new(), "z mod q");
    BN_mod(z_mod.get(), z.get(), order, bctx.get());

    Bytes x_octets = detail::bn_to_padded(x.get(), 32);
    Bytes h_octets = detail::bn_to_padded(z_mod.get(), 32);  // bits2octets

    // HMAC-DRBG seeding per RFC 6979 §3.2
    Bytes v(32, 0x01), k(32, 0x00);
    auto feed = [&](std::uint8_t tag) {
        Bytes msg = v;
        msg.push_back(tag);
        msg.insert(msg.end(), x_octets.begin(), x_octets.end());
        msg.insert(msg.end(), h_octets.begin(), h_octets.end());
        k = hmac_sha256(k, msg);
        v = hmac_sha256(k, v);
    };
    feed(0x00);
    feed(0x01);

    BnPtr r = BnPtr::wrap(BN_new(), "r"), s = BnPtr::wrap(BN_new(), "s");
    Owned<EC_POINT> point = Owned<EC_POINT>::wrap(EC_POINT_new(group.get()), "kG");
    BnPtr px = BnPtr::wrap(BN_new(), "px");
    for (;;) {
        v = hmac_sha256(k, v);
        BnPtr nonce = detail::bn_from_bytes(v);
        bool usable = !BN_is_zero(nonce.get()) && BN_cmp(nonce.get(), order) < 0;
        if (usable) {
            if (EC_POINT_mul(group.get(), point.get(), nonce.get(), nullptr, nullptr,
                             bctx.get()) != 1)
                throw SslError("EC_POINT_mul");
            if (EC_POINT_get_affine_coordinates(group.get(), point.get(), px.get(),
                                                nullptr, bctx.get()) != 1)
                throw SslError("affine coordinates");
            BN_mod(r.get(), px.get(), order, bctx.get());
            if (!BN_is_zero(r.get())) {
                BnPtr kinv = BnPtr::wrap(
                    BN_mod_inverse(nullptr, nonce.get(), order, bctx.get()), "k inv");
                BnPtr rx = BnPtr::wrap(BN_new(), "r*x");
                BN_mod_mul(rx.get(), r.get(), x.get(), order, bctx.get());
                BN_mod_add(s.get(), z_mod.get(), rx.get(), order, bctx.get());
                BN_mod_mul(s.get(), s.get(), kinv.get(), order, bctx.get());
                if (!BN_is_zero(s.get())) break;
            }
        }
        Bytes msg = v;
        msg.push_back(0x00);
        k = hmac_sha256(k, msg);
        v = hmac_sha256(k, v);
    }

    Owned<ECDSA_SIG> sig = Owned<ECDSA_SIG>::wrap(ECDSA_SIG_new(), "ECDSA_SIG");
    // set0 transfers ownership of r and s
    if (ECDSA_SIG_set0(sig.get(), r.release(), s.release()) != 1)
        throw SslError("ECDSA_SIG_set0");
    int der_len = i2d_ECDSA_SIG(sig.get(), nullptr);
    if (der_len <= 0) throw SslError("i2d_ECDSA_SIG size");
    Bytes der(static_cast<std::size_t>(der_len));
    unsigned char* out = der.data();
    i2d_ECDSA_SIG(sig.get(), &out);
    return der;
}

}  // namespace esckit
