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

#include <stdexcept>
#include <string>

namespace esckit {

// Stable error-class identifiers. These names appear verbatim in receipts,
// verification reports and CLI diagnostics, so renaming one is a wire change.
enum class Err {
    // ledger
    UnknownSender,
    UnknownTarget,
    ContractRevert,
    MalformedAddress,
    // contract state machines
    NotOwner,
    EmptySignature,
    UnknownContract,
    UnknownOperation,
    MalformedDomain,
    BadHashLength,
    // signing toolkit
    KeyCertMismatch,
    UnsupportedKeyType,
    UnsupportedAlgorithm,
    MalformedSignature,
    // verifier, step 1
    NotEscContract,
    NoSignaturePresent,
    DomainUnknown,
    DomainMismatch,
    // verifier, step 2
    ConnectionFailed,
    NameMismatch,
    // verifier, step 3
    SignatureMismatch,
    // verifier, step 4
    UntrustedRoot,
    CertificateExpired,
    CertificateNotYetValid,
    CertificateRevoked,
    BrokenChain,
    PathValidationFailed,
    // test PKI
    UnknownSerial,
    // generic
    Io,
    Config,
};

inline const char* to_string(Err e) {
    switch (e) {
        case Err::UnknownSender: return "UnknownSender";
        case Err::UnknownTarget: return "UnknownTarget";
        case Err::ContractRevert: return "ContractRevert";
        case Err::MalformedAddress: return "MalformedAddress";
        case Err::NotOwner: return "NotOwner";
        case Err::EmptySignature: return "EmptySignature";
        case Err::UnknownContract: return "UnknownContract";
        case Err::UnknownOperation: return "UnknownOperation";
        case Err::MalformedDomain: return "MalformedDomain";
        case Err::BadHashLength: return "BadHashLength";
        case Err::KeyCertMismatch: return "KeyCertMismatch";
        case Err::UnsupportedKeyType: return "UnsupportedKeyType";
        case Err::UnsupportedAlgorithm: return "UnsupportedAlgorithm";
        case Err::MalformedSignature: return "MalformedSignature";
        case Err::NotEscContract: return "NotEscContract";
        case Err::NoSignaturePresent: return "NoSignaturePresent";
        case Err::DomainUnknown: return "DomainUnknown";
        case Err::DomainMismatch: return "DomainMismatch";
        case Err::ConnectionFailed: return "ConnectionFailed";
        case Err::NameMismatch: return "NameMismatch";
        case Err::SignatureMismatch: return "SignatureMismatch";
        case Err::UntrustedRoot: return "UntrustedRoot";
        case Err::CertificateExpired: return "CertificateExpired";
        case Err::CertificateNotYetValid: return "CertificateNotYetValid";
        case Err::CertificateRevoked: return "CertificateRevoked";
        case Err::BrokenChain: return "BrokenChain";
        case Err::PathValidationFailed: return "PathValidationFailed";
        case Err::UnknownSerial: return "UnknownSerial";
        case Err::Io: return "Io";
        case Err::Config: return "Config";
    }
    return "Unknown";
}

class EscError : public std::runtime_error {
public:
    EscError(Err code, const std::string& detail)
        : std::runtime_error(std::string(to_string(code)) +
                             (detail.empty() ? "" : ": " + detail)),
          code_(code) {}

    explicit EscError(Err code) : EscError(code, "") {}

    Err code() const noexcept { return code_; }

private:
    Err code_;
};

}  // namespace esckit
