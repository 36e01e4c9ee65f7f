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

#include <netinet/in.h>
#include <sys/socket.h>
#include <unistd.h>

#include <filesystem>
#include <thread>

#include <catch2/catch_amalgamated.hpp>

#include "esckit/pki_testkit.hpp"
#include "esckit/verifier.hpp"

using namespace esckit;
namespace fs = std::filesystem;

namespace {
constexpr std::int64_t kClock = 1700000000;

// Accept-once TLS endpoint serving a fixture chain.
class TlsTestServer {
public:
    TlsTestServer(const fs::path& chain_file, const fs::path& key_file) {
        listen_fd_ = socket(AF_INET, SOCK_STREAM, 0);
        REQUIRE(listen_fd_ >= 0);
        int one = 1;
        setsockopt(listen_fd_, SOL_SOCKET, SO_REUSEADDR, &one, sizeof one);
        sockaddr_in addr{};
        addr.sin_family = AF_INET;
        addr.sin_addr.s_addr = htonl(INADDR_LOOPBACK);
        addr.sin_port = 0;
        REQUIRE(bind(listen_fd_, reinterpret_cast<sockaddr*>(&addr), sizeof addr) == 0);
        socklen_t len = sizeof addr;
        getsockname(listen_fd_, reinterpret_cast<sockaddr*>(&addr), &len);
        port_ = ntohs(addr.sin_port);
        REQUIRE(listen(listen_fd_, 1) == 0);

        thread_ = std::thread([this, chain_file, key_file] {
            SSL_CTX* ctx = SSL_CTX_new(TLS_server_method());
            SSL_CTX_use_certificate_chain_file(ctx, chain_file.c_str());
            SSL_CTX_use_PrivateKey_file(ctx, key_file.c_str(), SSL_FILETYPE_PEM);
            timeval tv{10, 0};
            setsockopt(listen_fd_, SOL_SOCKET, SO_RCVTIMEO, &tv, sizeof tv);
            int fd = accept(listen_fd_, nullptr, nullptr);
            if (fd >= 0) {
                SSL* ssl = SSL_new(ctx);
                SSL_set_fd(ssl, fd);
                if (SSL_accept(ssl) == 1) SSL_shutdown(ssl);
                SSL_free(ssl);
                close(fd);
            }
            SSL_CTX_free(ctx);
        });
    }

    ~TlsTestServer() {
        if (thread_.joinable()) thread_.join();
        close(listen_fd_);
    }

    int port() const { return port_; }

private:
    int listen_fd_ = -1;
    int port_ = 0;
    std::thread thread_;
};

const StandardFixtures& fixtures() {
    static StandardFixtures fx = [] {
        fs::path dir = fs::temp_directory_path() / "esckit_tls_fx";
        fs::remove_all(dir);
        return make_standard_fixtures(dir, 77, "hq.example.org", "other.org", kClock);
    }();
    return fx;
}
}  // namespace

TEST_CASE("live handshake yields the chain the server presents") {
    const StandardFixtures& fx = fixtures();
    TlsTestServer server(fx.path("chain_valid"), fx.path("key_valid"));

    CertChain chain = fetch_tls_chain("127.0.0.1", server.port());
    REQUIRE(chain.size() == 2);
    // identical bytes to the fixture chain
    CertChain expected = load_cert_chain(fx.path("chain_valid"));
    CHECK(pem_from_cert(chain[0].get()) == pem_from_cert(expected[0].get()));
    CHECK(pem_from_cert(chain[1].get()) == pem_from_cert(expected[1].get()));
}

TEST_CASE("live and fixture sources feed the same downstream validation") {
    const StandardFixtures& fx = fixtures();
    TlsTestServer server(fx.path("chain_valid"), fx.path("key_valid"));

    Fqdn domain = Fqdn::parse("hq.example.org");
    CertChain live =
        fetch_certificate(CertificateSource::live("127.0.0.1", server.port()), domain);
    TrustStore store = TrustStore::from_dir(fx.dir / "truststore");
    PathResult r = validate_path(live, store, kClock);
    CHECK(r.ok);
}

TEST_CASE("the name check applies to live chains too") {
    const StandardFixtures& fx = fixtures();
    TlsTestServer server(fx.path("chain_other"), fx.path("key_other"));
    CHECK_THROWS_MATCHES(
        fetch_certificate(CertificateSource::live("127.0.0.1", server.port()),
                          Fqdn::parse("hq.example.org")),
        EscError, Catch::Matchers::Predicate<EscError>([](const EscError& err) {
            return err.code() == Err::NameMismatch;
        }));
}

TEST_CASE("unreachable host reports ConnectionFailed") {
    // grab a port and keep it closed
    int fd = socket(AF_INET, SOCK_STREAM, 0);
    sockaddr_in addr{};
    addr.sin_family = AF_INET;
    addr.sin_addr.s_addr = htonl(INADDR_LOOPBACK);
    REQUIRE(bind(fd, reinterpret_cast<sockaddr*>(&addr), sizeof addr) == 0);
    socklen_t len = sizeof addr;
    getsockname(fd, reinterpret_cast<sockaddr*>(&addr), &len);
    int dead_port = ntohs(addr.sin_port);
    close(fd);

    CHECK_THROWS_MATCHES(fetch_tls_chain("127.0.0.1", dead_port), EscError,
                         Catch::Matchers::Predicate<EscError>([](const EscError& err) {
                             return err.code() == Err::ConnectionFailed;
                         }));
}
