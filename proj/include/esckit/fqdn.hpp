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
#include <string>
#include <string_view>
#include <vector>

#include "esckit/errors.hpp"

namespace esckit {

// Fully-qualified domain name held as an ordered label array, TLD first:
// "hq.example.org" <-> ["org", "example", "hq"]. Labels are canonical
// lowercase ASCII; internationalized names must be punycode-encoded by the
// caller before they get here.
class Fqdn {
public:
    Fqdn() = default;

    // Parses dotted form, case-folding first. Throws MalformedDomain.
    static Fqdn parse(std::string_view dotted) {
        if (dotted.empty())
            throw EscError(Err::MalformedDomain, "empty domain");
        if (dotted.size() > 253)
            throw EscError(Err::MalformedDomain, "domain exceeds 253 chars");
        std::vector<std::string> dotted_order;
        std::string label;
        auto flush = [&] {
            validate_label(label);
            dotted_order.push_back(label);
            label.clear();
        };
        for (char c : dotted) {
            if (c == '.') {
                flush();
            } else {
                label.push_back(fold(c));
            }
        }
        flush();
        Fqdn out;
        out.labels_.assign(dotted_order.rbegin(), dotted_order.rend());
        return out;
    }

    // Labels given TLD-first, already split. Same validation as parse.
    static Fqdn from_labels(std::vector<std::string> tld_first) {
        if (tld_first.empty())
            throw EscError(Err::MalformedDomain, "no labels");
        std::string dotted;
        for (auto it = tld_first.rbegin(); it != tld_first.rend(); ++it) {
            if (it != tld_first.rbegin()) dotted.push_back('.');
            dotted += *it;
        }
        return parse(dotted);
    }

    const std::vector<std::string>& labels() const { return labels_; }

    std::string dotted() const {
        std::string out;
        for (auto it = labels_.rbegin(); it != labels_.rend(); ++it) {
            if (!out.empty()) out.push_back('.');
            out += *it;
        }
        return out;
    }

    bool operator==(const Fqdn&) const = default;

private:
    static char fold(char c) {
        return (c >= 'A' && c <= 'Z') ? static_cast<char>(c - 'A' + 'a') : c;
    }

    static void validate_label(const std::string& label) {
        if (label.empty())
            throw EscError(Err::MalformedDomain, "empty label");
        if (label.size() > 63)
            throw EscError(Err::MalformedDomain, "label exceeds 63 chars");
        if (label.front() == '-' || label.back() == '-')
            throw EscError(Err::MalformedDomain, "label edge hyphen");
        for (char c : label) {
            bool ok = (c >= 'a' && c <= 'z') || (c >= '0' && c <= '9') || c == '-';
            if (!ok)
                throw EscError(Err::MalformedDomain,
                               "bad character in label '" + label + "'");
        }
    }

    std::vector<std::string> labels_;  // TLD first
};

}  // namespace esckit
