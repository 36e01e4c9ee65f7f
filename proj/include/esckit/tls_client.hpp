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

#include <netdb.h>
#include <sys/socket.h>
#include <sys/time.h>
#include <unistd.h>

#include <openssl/ssl.h>

#include <memory>
#include <string>
#include <vector>

#include "esckit/errors.hpp"
#include "esckit/ssl_util.hpp"

namespace esckit {

// Handshakes with host:port and returns the certificate chain the peer
// presented, leaf first. No trust evaluation happens here on purpose: path
// validation runs later against the caller's own trust store.
inline std::vector<X509Ptr> fetch_tls_chain(const std::string& host, int port,
                                            int timeout_seconds = 10) {
    struct AddrInfo {
        addrinfo* res = nullptr;
        ~AddrInfo() {
            if (res) freeaddrinfo(res);
        }
    } addr;
    addrinfo hints{};
    hints.ai_family = AF_UNSPEC;
    hints.ai_socktype = SOCK_STREAM;
    if (getaddrinfo(host.c_str(), std::to_string(port).c_str(), &hints, &addr.res) != 0)
        throw EscError(Err::ConnectionFailed, "cannot resolve " + host);

    int fd = -1;
    for (addrinfo* ai = addr.res; ai; ai = ai->ai_next) {
        fd = socket(ai->ai_family, ai->ai_socktype, ai->ai_protocol);
        if (fd < 0) continue;
        timeval tv{timeout_seconds, 0};
        setsockopt(fd, SOL_SOCKET, SO_RCVTIMEO, &tv, sizeof tv);
        setsockopt(fd, SOL_SOCKET, SO_SNDTIMEO, &tv, sizeof tv);
        if (connect(fd, ai->ai_addr, ai->ai_addrlen) == 0) break;
        close(fd);
        fd = -1;
    }
    if (fd < 0)
        throw EscError(Err::ConnectionFailed,
                       host + ":" + std::to_string(port) + " unreachable");
    struct FdGuard {
        int fd;
        ~FdGuard() { close(fd); }
    } fd_guard{fd};

    std::unique_ptr<SSL_CTX, decltype(&SSL_CTX_free)> ctx(
        SSL_CTX_new(TLS_client_method()), &SSL_CTX_free);
    if (!ctx) throw SslError("SSL_CTX_new");
    SSL_CTX_set_verify(ctx.get(), SSL_VERIFY_NONE, nullptr);

    std::unique_ptr<SSL, decltype(&SSL_free)> ssl(SSL_new(ctx.get()), &SSL_free);
    if (!ssl) throw SslError("SSL_new");
    SSL_set_tlsext_host_name(ssl.get(), host.c_str());
    SSL_set_fd(ssl.get(), fd);
    if (SSL_connect(ssl.get()) != 1) {
        ERR_clear_error();
        throw EscError(Err::ConnectionFailed, "TLS handshake with " + host + " failed");
    }

    std::vector<X509Ptr> chain;
    if (STACK_OF(X509)* peer = SSL_get_peer_cert_chain(ssl.get())) {
        for (int i = 0; i < sk_X509_num(peer); ++i)
            chain.push_back(x509_dup(sk_X509_value(peer, i)));
    }
    if (chain.empty()) {
        if (X509* leaf = SSL_get_peer_certificate(ssl.get()))
            chain.push_back(X509Ptr::adopt(leaf));
    }
    SSL_shutdown(ssl.get());
    if (chain.empty())
        throw EscError(Err::ConnectionFailed, host + " presented no certificate");
    return chain;
}

}  // namespace esckit
