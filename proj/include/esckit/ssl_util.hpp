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

#include <filesystem>
#include <memory>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include <openssl/bio.h>
#include <openssl/bn.h>
#include <openssl/ec.h>
#include <openssl/err.h>
#include <openssl/evp.h>
#include <openssl/pem.h>
#include <openssl/x509.h>
#include <openssl/x509v3.h>

#include "esckit/bytes.hpp"
#include "esckit/errors.hpp"

namespace esckit {

struct SslError : public std::runtime_error {
    explicit SslError(const std::string& msg)
        : std::runtime_error([&] {
              std::ostringstream strm;
              strm << msg;
              while (auto err = ERR_get_error()) {
                  const char* reason = ERR_reason_error_string(err);
                  strm << " [" << (reason ? reason : "?") << "]";
              }
              return strm.str();
          }()) {}
};

namespace detail {
template <typename T>
struct OsslDelete;
#define ESCKIT_OSSL_DELETE(TYPE)                           \
    template <>                                            \
    struct OsslDelete<TYPE> {                              \
        void operator()(TYPE* p) const { TYPE##_free(p); } \
    }
ESCKIT_OSSL_DELETE(BIO);
ESCKIT_OSSL_DELETE(BN_CTX);
ESCKIT_OSSL_DELETE(EC_GROUP);
ESCKIT_OSSL_DELETE(EC_POINT);
ESCKIT_OSSL_DELETE(ECDSA_SIG);
ESCKIT_OSSL_DELETE(EVP_MD_CTX);
ESCKIT_OSSL_DELETE(EVP_PKEY);
ESCKIT_OSSL_DELETE(EVP_PKEY_CTX);
ESCKIT_OSSL_DELETE(X509);
ESCKIT_OSSL_DELETE(X509_CRL);
ESCKIT_OSSL_DELETE(X509_EXTENSION);
ESCKIT_OSSL_DELETE(X509_NAME);
ESCKIT_OSSL_DELETE(X509_REVOKED);
ESCKIT_OSSL_DELETE(X509_STORE);
ESCKIT_OSSL_DELETE(X509_STORE_CTX);
ESCKIT_OSSL_DELETE(GENERAL_NAME);
#undef ESCKIT_OSSL_DELETE
template <>
struct OsslDelete<BIGNUM> {
    void operator()(BIGNUM* p) const { BN_free(p); }
};
// ASN1_INTEGER / ASN1_TIME / ASN1_OCTET_STRING are all asn1_string_st
template <>
struct OsslDelete<ASN1_STRING> {
    void operator()(ASN1_STRING* p) const { ASN1_STRING_free(p); }
};
template <>
struct OsslDelete<OSSL_PARAM> {
    void operator()(OSSL_PARAM* p) const { OPENSSL_free(p); }
};
template <>
struct OsslDelete<STACK_OF(X509)> {
    void operator()(STACK_OF(X509) * p) const { sk_X509_pop_free(p, X509_free); }
};
template <>
struct OsslDelete<GENERAL_NAMES> {
    void operator()(GENERAL_NAMES* p) const {
        sk_GENERAL_NAME_pop_free(p, GENERAL_NAME_free);
    }
};
}  // namespace detail

// unique_ptr with the matching *_free, null-checked at wrap time.
template <typename T>
class Owned : public std::unique_ptr<T, detail::OsslDelete<T>> {
    using Base = std::unique_ptr<T, detail::OsslDelete<T>>;

public:
    Owned() = default;
    Owned(std::nullptr_t) : Base(nullptr) {}
    static Owned wrap(T* raw, const char* what) {
        if (!raw) throw SslError(std::string("null ") + what);
        Owned o;
        o.reset(raw);
        return o;
    }
    static Owned adopt(T* raw) {  // may be null
        Owned o;
        o.reset(raw);
        return o;
    }
};

using PkeyPtr = Owned<EVP_PKEY>;
using X509Ptr = Owned<X509>;
using CrlPtr = Owned<X509_CRL>;
using BioPtr = Owned<BIO>;
using BnPtr = Owned<BIGNUM>;

inline X509Ptr x509_dup(const X509* cert) {
    return X509Ptr::wrap(X509_dup(const_cast<X509*>(cert)), "X509_dup");
}

// -- PEM io -------------------------------------------------------------------

inline std::string read_file(const std::filesystem::path& path) {
    std::unique_ptr<FILE, int (*)(FILE*)> fp(fopen(path.c_str(), "rb"), &fclose);
    if (!fp) throw EscError(Err::Io, "cannot open " + path.string());
    std::string out;
    char buf[4096];
    size_t n;
    while ((n = fread(buf, 1, sizeof buf, fp.get())) > 0) out.append(buf, n);
    return out;
}

inline void write_file(const std::filesystem::path& path, const std::string& data) {
    std::unique_ptr<FILE, int (*)(FILE*)> fp(fopen(path.c_str(), "wb"), &fclose);
    if (!fp) throw EscError(Err::Io, "cannot write " + path.string());
    if (fwrite(data.data(), 1, data.size(), fp.get()) != data.size())
        throw EscError(Err::Io, "short write to " + path.string());
}

inline std::string pem_from_cert(const X509* cert) {
    BioPtr bio = BioPtr::wrap(BIO_new(BIO_s_mem()), "mem bio");
    if (PEM_write_bio_X509(bio.get(), const_cast<X509*>(cert)) != 1)
        throw SslError("PEM_write_bio_X509");
    char* data = nullptr;
    long len = BIO_get_mem_data(bio.get(), &data);
    return std::string(data, static_cast<size_t>(len));
}

inline std::string pem_from_crl(const X509_CRL* crl) {
    BioPtr bio = BioPtr::wrap(BIO_new(BIO_s_mem()), "mem bio");
    if (PEM_write_bio_X509_CRL(bio.get(), const_cast<X509_CRL*>(crl)) != 1)
        throw SslError("PEM_write_bio_X509_CRL");
    char* data = nullptr;
    long len = BIO_get_mem_data(bio.get(), &data);
    return std::string(data, static_cast<size_t>(len));
}

inline std::string pem_from_key(const EVP_PKEY* key) {
    BioPtr bio = BioPtr::wrap(BIO_new(BIO_s_mem()), "mem bio");
    if (PEM_write_bio_PKCS8PrivateKey(bio.get(), const_cast<EVP_PKEY*>(key), nullptr,
                                      nullptr, 0, nullptr, nullptr) != 1)
        throw SslError("PEM_write_bio_PKCS8PrivateKey");
    char* data = nullptr;
    long len = BIO_get_mem_data(bio.get(), &data);
    return std::string(data, static_cast<size_t>(len));
}

inline X509Ptr cert_from_pem(const std::string& pem) {
    BioPtr bio = BioPtr::wrap(BIO_new_mem_buf(pem.data(), int(pem.size())), "mem bio");
    return X509Ptr::wrap(PEM_read_bio_X509(bio.get(), nullptr, nullptr, nullptr),
                         "certificate PEM");
}

// All CERTIFICATE blocks in the buffer, in order (leaf first for chain files).
inline std::vector<X509Ptr> certs_from_pem(const std::string& pem) {
    BioPtr bio = BioPtr::wrap(BIO_new_mem_buf(pem.data(), int(pem.size())), "mem bio");
    std::vector<X509Ptr> out;
    while (X509* c = PEM_read_bio_X509(bio.get(), nullptr, nullptr, nullptr))
        out.push_back(X509Ptr::adopt(c));
    ERR_clear_error();  // trailing no-more-PEM error is expected
    if (out.empty()) throw EscError(Err::Io, "no certificates in PEM data");
    return out;
}

inline CrlPtr crl_from_pem(const std::string& pem) {
    BioPtr bio = BioPtr::wrap(BIO_new_mem_buf(pem.data(), int(pem.size())), "mem bio");
    return CrlPtr::wrap(PEM_read_bio_X509_CRL(bio.get(), nullptr, nullptr, nullptr),
                        "CRL PEM");
}

inline PkeyPtr key_from_pem(const std::string& pem) {
    BioPtr bio = BioPtr::wrap(BIO_new_mem_buf(pem.data(), int(pem.size())), "mem bio");
    return PkeyPtr::wrap(
        PEM_read_bio_PrivateKey(bio.get(), nullptr, nullptr, nullptr), "private key PEM");
}

inline X509Ptr load_cert(const std::filesystem::path& p) {
    return cert_from_pem(read_file(p));
}
inline std::vector<X509Ptr> load_cert_chain(const std::filesystem::path& p) {
    return certs_from_pem(read_file(p));
}
inline CrlPtr load_crl(const std::filesystem::path& p) {
    return crl_from_pem(read_file(p));
}
inline PkeyPtr load_key(const std::filesystem::path& p) {
    return key_from_pem(read_file(p));
}

// DNS names a certificate is valid for: the SAN DNS entries, or the subject
// CN when no SAN extension is present. Lowercased.
inline std::vector<std::string> cert_dns_names(const X509* cert) {
    std::vector<std::string> out;
    auto fold = [](std::string s) {
        for (char& c : s)
            if (c >= 'A' && c <= 'Z') c = char(c - 'A' + 'a');
        return s;
    };
    Owned<GENERAL_NAMES> names = Owned<GENERAL_NAMES>::adopt(static_cast<GENERAL_NAMES*>(
        X509_get_ext_d2i(cert, NID_subject_alt_name, nullptr, nullptr)));
    if (names) {
        for (int i = 0; i < sk_GENERAL_NAME_num(names.get()); ++i) {
            const GENERAL_NAME* gn = sk_GENERAL_NAME_value(names.get(), i);
            if (gn->type != GEN_DNS) continue;
            const unsigned char* data = ASN1_STRING_get0_data(gn->d.dNSName);
            int len = ASN1_STRING_length(gn->d.dNSName);
            out.push_back(fold(std::string(reinterpret_cast<const char*>(data),
                                           static_cast<size_t>(len))));
        }
        return out;
    }
    X509_NAME* subject = X509_get_subject_name(cert);
    int idx = X509_NAME_get_index_by_NID(subject, NID_commonName, -1);
    if (idx >= 0) {
        const ASN1_STRING* cn =
            X509_NAME_ENTRY_get_data(X509_NAME_get_entry(subject, idx));
        out.push_back(fold(std::string(
            reinterpret_cast<const char*>(ASN1_STRING_get0_data(cn)),
            static_cast<size_t>(ASN1_STRING_length(cn)))));
    }
    return out;
}

}  // namespace esckit
