#pragma once

#include <gmpxx.h>

#include <cmath>
#include <cstdint>
#include <numeric>
#include <ostream>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "strato/error.hpp"

namespace strato {

using Rational = mpq_class;
using Integer = mpz_class;

inline std::vector<std::pair<std::uint64_t, int>> factorize(std::uint64_t n) {
    std::vector<std::pair<std::uint64_t, int>> out;
    for (std::uint64_t p = 2; p * p <= n; p += (p == 2 ? 1 : 2)) {
        int e = 0;
        while (n % p == 0) {
            n /= p;
            ++e;
        }
        if (e > 0) out.emplace_back(p, e);
    }
    if (n > 1) out.emplace_back(n, 1);
    return out;
}

// Splits n = square^2 * radicand with radicand squarefree.
inline std::pair<std::uint64_t, std::uint64_t> squarefree_split(std::uint64_t n) {
    std::uint64_t square = 1;
    std::uint64_t radicand = 1;
    for (auto [p, e] : factorize(n)) {
        for (int i = 0; i < e / 2; ++i) square *= p;
        if (e % 2 == 1) radicand *= p;
    }
    return {square, radicand};
}

/// Exact scalar `rational * L^alpha * sqrt(radicand)` where L = T - t is the
/// interval length, alpha is a half-integer and the radicand is squarefree.
///
/// Closed under multiplication. Addition is only defined between values that
/// share alpha and radicand, which is the case for the sums the Parseval and
/// symmetrization identities need.
class ExactValue {
public:
    ExactValue() = default;

    explicit ExactValue(Rational rational, int two_alpha = 0, std::uint64_t radicand = 1)
        : rational_(std::move(rational)), two_alpha_(two_alpha) {
        if (radicand == 0) {
            rational_ = 0;
            radicand = 1;
        }
        auto [square, rest] = squarefree_split(radicand);
        rational_ *= Integer(static_cast<unsigned long>(square));
        radicand_ = rest;
        rational_.canonicalize();
        if (rational_ == 0) radicand_ = 1;
    }

    static ExactValue zero(int two_alpha = 0) { return ExactValue(Rational(0), two_alpha); }

    // sqrt(n) as an exact value with alpha = 0.
    static ExactValue sqrt_of(std::uint64_t n) { return ExactValue(Rational(1), 0, n); }

    const Rational& rational() const noexcept { return rational_; }
    int two_alpha() const noexcept { return two_alpha_; }
    double alpha() const noexcept { return two_alpha_ / 2.0; }
    std::uint64_t radicand() const noexcept { return radicand_; }
    bool is_zero() const { return rational_ == 0; }

    // Prime factors of the squarefree radicand; each enters as a square root.
    std::vector<std::uint64_t> surds() const {
        std::vector<std::uint64_t> out;
        for (auto [p, e] : factorize(radicand_)) out.push_back(p);
        return out;
    }

    double at_unit() const { return rational_.get_d() * std::sqrt(static_cast<double>(radicand_)); }

    double at(double length) const { return at_unit() * std::pow(length, alpha()); }

    // Exact square: rational^2 * radicand * L^(2 alpha).
    Rational squared_rational() const { return rational_ * rational_ * Integer(static_cast<unsigned long>(radicand_)); }

    ExactValue operator-() const {
        ExactValue out = *this;
        out.rational_ = -out.rational_;
        return out;
    }

    friend ExactValue operator*(const ExactValue& a, const ExactValue& b) {
        const std::uint64_t g = std::gcd(a.radicand_, b.radicand_);
        ExactValue out;
        out.rational_ = a.rational_ * b.rational_ * Integer(static_cast<unsigned long>(g));
        out.radicand_ = (a.radicand_ / g) * (b.radicand_ / g);
        out.two_alpha_ = a.two_alpha_ + b.two_alpha_;
        if (out.rational_ == 0) out.radicand_ = 1;
        return out;
    }

    friend ExactValue operator+(const ExactValue& a, const ExactValue& b) {
        if (a.two_alpha_ != b.two_alpha_) {
            throw contract_error("ExactValue addition requires equal powers of the interval length");
        }
        if (a.is_zero()) return b;
        if (b.is_zero()) return a;
        if (a.radicand_ != b.radicand_) {
            throw contract_error("ExactValue addition requires equal radicands");
        }
        ExactValue out = a;
        out.rational_ += b.rational_;
        if (out.rational_ == 0) out.radicand_ = 1;
        return out;
    }

    friend ExactValue operator-(const ExactValue& a, const ExactValue& b) { return a + (-b); }

    friend bool operator==(const ExactValue& a, const ExactValue& b) {
        if (a.is_zero() && b.is_zero()) return a.two_alpha_ == b.two_alpha_;
        return a.rational_ == b.rational_ && a.radicand_ == b.radicand_ && a.two_alpha_ == b.two_alpha_;
    }

    std::string to_string() const {
        std::ostringstream os;
        os << rational_.get_str();
        if (radicand_ != 1) os << "*sqrt(" << radicand_ << ")";
        if (two_alpha_ != 0) {
            os << "*L^";
            if (two_alpha_ % 2 == 0) {
                os << two_alpha_ / 2;
            } else {
                os << two_alpha_ << "/2";
            }
        }
        return os.str();
    }

    friend std::ostream& operator<<(std::ostream& os, const ExactValue& v) { return os << v.to_string(); }

private:
    Rational rational_{0};
    int two_alpha_ = 0;
    std::uint64_t radicand_ = 1;
};

}  // namespace strato
