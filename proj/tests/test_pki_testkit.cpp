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

#include <filesystem>

#include <catch2/catch_amalgamated.hpp>

#include "esckit/pki_testkit.hpp"

using namespace esckit;

namespace {
constexpr std::int64_t kClock = 1700000000;
constexpr std::int64_t kDay = 86400;
const Validity kValidNow(kClock - kDay, kClock + 365 * kDay);

// Path validation through a plain OpenSSL store, independent of the verifier
// module, so the two routes cross-check each other.
int raw_verify(const X509* leaf, const std::vector<const X509*>& untrusted,
               const std::vector<const X509*>& roots, std::int64_t at) {
    Owned<X509_STORE> store = Owned<X509_STORE>::wrap(X509_STORE_new(), "store");
    for (const X509* r : roots)
        X509_STORE_add_cert(store.get(), const_cast<X509*>(r));
    Owned<STACK_OF(X509)> stack =
        Owned<STACK_OF(X509)>::wrap(sk_X509_new_null(), "stack");
    for (const X509* c : untrusted) {
        X509_up_ref(const_cast<X509*>(c));
        sk_X509_push(stack.get(), const_cast<X509*>(c));
    }
    Owned<X509_STORE_CTX> ctx = Owned<X509_STORE_CTX>::wrap(X509_STORE_CTX_new(), "ctx");
    X509_STORE_CTX_init(ctx.get(), store.get(), const_cast<X509*>(leaf), stack.get());
    X509_STORE_CTX_set_time(ctx.get(), 0, static_cast<time_t>(at));
    X509_VERIFY_PARAM_set_flags(X509_STORE_CTX_get0_param(ctx.get()),
                                X509_V_FLAG_USE_CHECK_TIME);
    if (X509_verify_cert(ctx.get()) == 1) return X509_V_OK;
    return X509_STORE_CTX_get_error(ctx.get());
}
}  // namespace

TEST_CASE("deterministic ecdsa reproduces the published P-256/SHA-256 vector") {
    // RFC 6979 appendix vector: key and message "sample".
    Bytes priv = from_hex(
        "c9afa9d845ba75166b5c215767b1d6934e50c3db36e89b127b8a622b120f6721");
    Owned<EC_GROUP> group = Owned<EC_GROUP>::wrap(
        EC_GROUP_new_by_curve_name(NID_X9_62_prime256v1), "group");
    Owned<BN_CTX> bctx = Owned<BN_CTX>::wrap(BN_CTX_new(), "bnctx");
    BnPtr scalar = BnPtr::wrap(BN_bin2bn(priv.data(), int(priv.size()), nullptr), "bn");
    Owned<EC_POINT> pub = Owned<EC_POINT>::wrap(EC_POINT_new(group.get()), "point");
    REQUIRE(EC_POINT_mul(group.get(), pub.get(), scalar.get(), nullptr, nullptr,
                         bctx.get()) == 1);
    Bytes pub_oct(65);
    EC_POINT_point2oct(group.get(), pub.get(), POINT_CONVERSION_UNCOMPRESSED,
                       pub_oct.data(), pub_oct.size(), bctx.get());
    OSSL_PARAM_BLD* bld = OSSL_PARAM_BLD_new();
    char group_name[] = "prime256v1";
    OSSL_PARAM_BLD_push_utf8_string(bld, OSSL_PKEY_PARAM_GROUP_NAME, group_name, 0);
    OSSL_PARAM_BLD_push_BN(bld, OSSL_PKEY_PARAM_PRIV_KEY, scalar.get());
    OSSL_PARAM_BLD_push_octet_string(bld, OSSL_PKEY_PARAM_PUB_KEY, pub_oct.data(),
                                     pub_oct.size());
    Owned<OSSL_PARAM> params =
        Owned<OSSL_PARAM>::wrap(OSSL_PARAM_BLD_to_param(bld), "params");
    OSSL_PARAM_BLD_free(bld);
    Owned<EVP_PKEY_CTX> pctx = Owned<EVP_PKEY_CTX>::wrap(
        EVP_PKEY_CTX_new_from_name(nullptr, "EC", nullptr), "pctx");
    EVP_PKEY* raw = nullptr;
    REQUIRE(EVP_PKEY_fromdata_init(pctx.get()) == 1);
    REQUIRE(EVP_PKEY_fromdata(pctx.get(), &raw, EVP_PKEY_KEYPAIR, params.get()) == 1);
    PkeyPtr key = PkeyPtr::wrap(raw, "key");

    std::string msg = "sample";
    auto digest = sha256({reinterpret_cast<const std::uint8_t*>(msg.data()), msg.size()});
    Bytes der = ecdsa_det_sign_digest(key.get(), digest);

    const unsigned char* p = der.data();
    Owned<ECDSA_SIG> sig =
        Owned<ECDSA_SIG>::wrap(d2i_ECDSA_SIG(nullptr, &p, long(der.size())), "sig");
    const BIGNUM *r = nullptr, *s = nullptr;
    ECDSA_SIG_get0(sig.get(), &r, &s);
    char* r_hex = BN_bn2hex(r);
    char* s_hex = BN_bn2hex(s);
    CHECK(std::string(r_hex) ==
          "EFD48B2AACB6A8FD1140DD9CD45E81D69D2C877B56AAF991C34D0EA84EAF3716");
    CHECK(std::string(s_hex) ==
          "F7CB1C942D657C41D436C7A1B6E29F65F3E900DBB9AFF4064DC4AB2F843ACDA8");
    OPENSSL_free(r_hex);
    OPENSSL_free(s_hex);
}

TEST_CASE("same seed twice gives byte-identical certificates and keys") {
    CertAuthority a = CertAuthority::make_root("det-root", KeyAlg::EcdsaP256, 42, kClock);
    CertAuthority b = CertAuthority::make_root("det-root", KeyAlg::EcdsaP256, 42, kClock);
    CHECK(a.cert_pem() == b.cert_pem());
    CHECK(a.key_pem() == b.key_pem());

    SigningIdentity leaf_a = a.issue_leaf(Fqdn::parse("hq.example.org"), kValidNow);
    SigningIdentity leaf_b = b.issue_leaf(Fqdn::parse("hq.example.org"), kValidNow);
    CHECK(pem_from_cert(leaf_a.certificate.get()) ==
          pem_from_cert(leaf_b.certificate.get()));
    CHECK(pem_from_key(leaf_a.key.get()) == pem_from_key(leaf_b.key.get()));

    // different seed diverges
    CertAuthority c = CertAuthority::make_root("det-root", KeyAlg::EcdsaP256, 43, kClock);
    CHECK(a.cert_pem() != c.cert_pem());
}

TEST_CASE("rsa authorities are deterministic too") {
    CertAuthority a = CertAuthority::make_root("rsa-root", KeyAlg::Rsa2048, 5, kClock);
    CertAuthority b = CertAuthority::make_root("rsa-root", KeyAlg::Rsa2048, 5, kClock);
    CHECK(a.cert_pem() == b.cert_pem());
    CHECK(a.key_pem() == b.key_pem());
    CHECK(EVP_PKEY_base_id(a.key()) == EVP_PKEY_RSA);
    CHECK(EVP_PKEY_get_bits(a.key()) == 2048);
}

TEST_CASE("root validates against a store containing itself, and only then") {
    CertAuthority root = CertAuthority::make_root("r", KeyAlg::EcdsaP256, 1, kClock);
    SigningIdentity leaf = root.issue_leaf(Fqdn::parse("a.example"), kValidNow);
    CHECK(raw_verify(root.certificate(), {}, {root.certificate()}, kClock) == X509_V_OK);
    CHECK(raw_verify(leaf.certificate.get(), {}, {root.certificate()}, kClock) ==
          X509_V_OK);
    // empty store: nothing to anchor on
    CHECK(raw_verify(leaf.certificate.get(), {}, {}, kClock) != X509_V_OK);
}

TEST_CASE("intermediate chains validate at depth two and three") {
    CertAuthority root = CertAuthority::make_root("r", KeyAlg::EcdsaP256, 2, kClock);
    CertAuthority inter = root.issue_intermediate("i1");
    SigningIdentity leaf = inter.issue_leaf(Fqdn::parse("hq.example.org"), kValidNow);

    CHECK(raw_verify(leaf.certificate.get(), {inter.certificate()},
                     {root.certificate()}, kClock) == X509_V_OK);
    // chain missing the intermediate is not buildable
    CHECK(raw_verify(leaf.certificate.get(), {}, {root.certificate()}, kClock) ==
          X509_V_ERR_UNABLE_TO_GET_ISSUER_CERT_LOCALLY);

    CertAuthority deeper = inter.issue_intermediate("i2");
    SigningIdentity leaf3 = deeper.issue_leaf(Fqdn::parse("deep.example.org"), kValidNow);
    CHECK(raw_verify(leaf3.certificate.get(), {deeper.certificate(), inter.certificate()},
                     {root.certificate()}, kClock) == X509_V_OK);
}

TEST_CASE("leaf carries the SAN for its domain") {
    CertAuthority root = CertAuthority::make_root("r", KeyAlg::EcdsaP256, 3, kClock);
    SigningIdentity leaf = root.issue_leaf(Fqdn::parse("HQ.Example.Org"), kValidNow);
    auto names = cert_dns_names(leaf.certificate.get());
    REQUIRE(names.size() == 1);
    CHECK(names[0] == "hq.example.org");
}

TEST_CASE("expired and not-yet-valid windows are honored at the injected clock") {
    CertAuthority root = CertAuthority::make_root("r", KeyAlg::EcdsaP256, 4, kClock);
    SigningIdentity expired = root.issue_leaf(
        Fqdn::parse("old.example.org"), Validity(kClock - 2 * 365 * kDay, kClock - kDay));
    SigningIdentity notyet = root.issue_leaf(
        Fqdn::parse("new.example.org"), Validity(kClock + kDay, kClock + 2 * 365 * kDay));

    CHECK(raw_verify(expired.certificate.get(), {}, {root.certificate()}, kClock) ==
          X509_V_ERR_CERT_HAS_EXPIRED);
    CHECK(raw_verify(notyet.certificate.get(), {}, {root.certificate()}, kClock) ==
          X509_V_ERR_CERT_NOT_YET_VALID);
    // inside their own windows both are fine
    CHECK(raw_verify(expired.certificate.get(), {}, {root.certificate()},
                     kClock - 400 * kDay) == X509_V_OK);
    CHECK(raw_verify(notyet.certificate.get(), {}, {root.certificate()},
                     kClock + 400 * kDay) == X509_V_OK);
    CHECK_THROWS_AS(Validity(kClock, kClock), EscError);  // empty window
}

TEST_CASE("revocation grows the crl monotonically; unknown serials are refused") {
    CertAuthority root = CertAuthority::make_root("r", KeyAlg::EcdsaP256, 6, kClock);
    SigningIdentity l1 = root.issue_leaf(Fqdn::parse("one.example"), kValidNow);
    std::uint64_t s1 = root.last_serial();
    SigningIdentity l2 = root.issue_leaf(Fqdn::parse("two.example"), kValidNow);
    std::uint64_t s2 = root.last_serial();

    Crl crl0 = root.current_crl();
    CHECK(crl0.revoked.empty());
    Crl crl1 = root.revoke(s1);
    CHECK(crl1.revoked == std::set<std::uint64_t>{s1});
    Crl crl2 = root.revoke(s2);
    CHECK(crl2.revoked == std::set<std::uint64_t>{s1, s2});
    CHECK_THROWS_MATCHES(root.revoke(9999), EscError,
                         Catch::Matchers::Predicate<EscError>([](const EscError& e) {
                             return e.code() == Err::UnknownSerial;
                         }));
    // the CRL itself verifies under the issuer key
    CHECK(X509_CRL_verify(crl2.handle.get(), root.key()) == 1);
}

TEST_CASE("standard fixture set is reproducible and complete") {
    namespace fs = std::filesystem;
    fs::path dir_a = fs::temp_directory_path() / "esckit_fixtures_a";
    fs::path dir_b = fs::temp_directory_path() / "esckit_fixtures_b";
    fs::remove_all(dir_a);
    fs::remove_all(dir_b);

    StandardFixtures a =
        make_standard_fixtures(dir_a, 42, "hq.example.org", "other.org", kClock);
    StandardFixtures b =
        make_standard_fixtures(dir_b, 42, "hq.example.org", "other.org", kClock);

    CHECK(a.manifest == b.manifest);
    for (const auto& [role, rel] : a.manifest.at("files").items()) {
        CAPTURE(role);
        CHECK(read_file(dir_a / rel.get<std::string>()) ==
              read_file(dir_b / rel.get<std::string>()));
    }

    // every matrix role is present and parseable
    for (const char* role :
         {"chain_valid", "chain_expired", "chain_notyet", "chain_revoked",
          "chain_broken", "chain_untrusted", "chain_other", "chain_valid_rsa"}) {
        CAPTURE(role);
        CHECK_NOTHROW(load_cert_chain(a.path(role)));
    }
    CHECK_NOTHROW(load_crl(a.path("root_crl")));
    CHECK_NOTHROW(load_crl(a.path("intermediate_crl")));
    CHECK_NOTHROW(SigningIdentity::load(a.path("key_valid"), a.path("cert_valid")));

    fs::remove_all(dir_a);
    fs::remove_all(dir_b);
}
