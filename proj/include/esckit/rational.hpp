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
#include <string>
#include <string_view>

#include "esckit/errors.hpp"

namespace esckit {

// Exact non-negative rational on 128-bit words. Covers gas/price/rate
// arithmetic without float drift; money rendering rounds half-up at the
// requested precision.
class Rational {
public:
    using u128 = unsigned __int128;

    Rational() : num_(0), den_(1) {}
    Rational(std::uint64_t n) : num_(n), den_(1) {}
    Rational(u128 num, u128 den) : num_(num), den_(den) {
        if (den_ == 0) throw EscError(Err::Config, "zero denominator");
        normalize();
    }

    // Accepts "233", "1.5", "0.028" and the canonical fraction form "3/40".
    static Rational parse(std::string_view text) {
        if (text.empty()) throw EscError(Err::Config, "empty rational");
        auto slash = text.find('/');
        if (slash != std::string_view::npos) {
            return Rational(parse_u128(text.substr(0, slash)),
                            parse_u128(text.substr(slash + 1)));
        }
        auto dot = text.find('.');
        if (dot == std::string_view::npos) return Rational(parse_u128(text), 1);
        std::string_view whole = text.substr(0, dot);
        std::string_view frac = text.substr(dot + 1);
        if (frac.empty()) throw EscError(Err::Config, "trailing decimal point");
        u128 den = 1;
        for (std::size_t i = 0; i < frac.size(); ++i) den *= 10;
        u128 num = (whole.empty() ? 0 : parse_u128(whole)) * den + parse_u128(frac);
        return Rational(num, den);
    }

    Rational operator*(const Rational& rhs) const {
        // cross-reduce before multiplying to keep words small
        u128 a = num_, b = den_, c = rhs.num_, d = rhs.den_;
        u128 g1 = gcd(a, d), g2 = gcd(c, b);
        a /= g1; d /= g1;
        c /= g2; b /= g2;
        return Rational(a * c, b * d);
    }

    Rational operator/(const Rational& rhs) const {
        if (rhs.num_ == 0) throw EscError(Err::Config, "divide by zero");
        return *this * Rational(rhs.den_, rhs.num_);
    }

    Rational operator+(const Rational& rhs) const {
        u128 g = gcd(den_, rhs.den_);
        u128 l = den_ / g * rhs.den_;
        return Rational(num_ * (l / den_) + rhs.num_ * (l / rhs.den_), l);
    }

    bool operator==(const Rational& rhs) const {
        return num_ == rhs.num_ && den_ == rhs.den_;
    }

    bool is_zero() const { return num_ == 0; }

    // Fixed-point decimal rendering, half-up: decimal(3) of 233/1000 is
    // "0.233", of 2797/125000 (0.022376) is "0.022".
    std::string decimal(int places) const {
        u128 scale = 1;
        for (int i = 0; i < places; ++i) scale *= 10;
        u128 scaled = num_ * scale;
        u128 q = scaled / den_;
        u128 r = scaled % den_;
        if (2 * r >= den_) ++q;
        std::string digits = format_u128(q);
        if (places == 0) return digits;
        while (digits.size() <= static_cast<std::size_t>(places))
            digits.insert(digits.begin(), '0');
        digits.insert(digits.end() - places, '.');
        return digits;
    }

    // Canonical lossless form for state files: "num/den".
    std::string str() const {
        return format_u128(num_) + "/" + format_u128(den_);
    }

private:
    static u128 gcd(u128 a, u128 b) {
        while (b != 0) {
            u128 t = a % b;
            a = b;
            b = t;
        }
        return a == 0 ? 1 : a;
    }

    static u128 parse_u128(std::string_view digits) {
        if (digits.empty()) throw EscError(Err::Config, "empty number");
        u128 v = 0;
        for (char c : digits) {
            if (c < '0' || c > '9')
                throw EscError(Err::Config, "bad digit in rational");
            v = v * 10 + static_cast<unsigned>(c - '0');
        }
        return v;
    }

    static std::string format_u128(u128 v) {
        if (v == 0) return "0";
        std::string out;
        while (v != 0) {
            out.insert(out.begin(), static_cast<char>('0' + int(v % 10)));
            v /= 10;
        }
        return out;
    }

    void normalize() {
        u128 g = gcd(num_, den_);
        num_ /= g;
        den_ /= g;
        if (num_ == 0) den_ = 1;
    }

    u128 num_;
    u128 den_;
};

// Transaction cost in USD: gas × gas-price[GWei] × 10⁻⁹ × ETH/USD rate.
// Returned exact; callers render with .decimal(3).
inline Rational cost_usd(std::uint64_t gas_used, const Rational& gas_price_gwei,
                         const Rational& eth_usd) {
    return Rational(gas_used) * gas_price_gwei * eth_usd /
           Rational(1'000'000'000ULL);
}

}  // namespace esckit
