#pragma once

#include <cstddef>
#include <vector>

#include "strato/exact.hpp"

namespace strato {

/// Polynomial on [0,1] held exactly by its coefficients in the shifted
/// Legendre basis P_n(2x-1).
///
/// Multiplication by x and integration from 0 are banded in this basis, which
/// keeps iterated simplex integrals of Legendre products cheap and exact.
class LegendreSeries {
public:
    LegendreSeries() = default;
    explicit LegendreSeries(std::vector<Rational> coeffs) : c_(std::move(coeffs)) { trim(); }

    static LegendreSeries one() { return LegendreSeries({Rational(1)}); }

    std::size_t size() const noexcept { return c_.size(); }
    const std::vector<Rational>& coefficients() const noexcept { return c_; }

    Rational coefficient(std::size_t n) const { return n < c_.size() ? c_[n] : Rational(0); }

    // x P_n = P_n / 2 + ((n+1) P_{n+1} + n P_{n-1}) / (2(2n+1))
    LegendreSeries times_x() const {
        std::vector<Rational> out(c_.size() + 1, Rational(0));
        for (std::size_t n = 0; n < c_.size(); ++n) {
            if (c_[n] == 0) continue;
            const Rational scaled = c_[n] / Rational(2 * (2 * static_cast<long>(n) + 1));
            out[n] += c_[n] / 2;
            out[n + 1] += scaled * static_cast<long>(n + 1);
            if (n > 0) out[n - 1] += scaled * static_cast<long>(n);
        }
        return LegendreSeries(std::move(out));
    }

    LegendreSeries times_x_pow(int q) const {
        LegendreSeries out = *this;
        for (int i = 0; i < q; ++i) out = out.times_x();
        return out;
    }

    // int_0^x P_0 = (P_0 + P_1) / 2, int_0^x P_n = (P_{n+1} - P_{n-1}) / (2(2n+1))
    LegendreSeries integral_from_zero() const {
        std::vector<Rational> out(c_.size() + 1, Rational(0));
        for (std::size_t n = 0; n < c_.size(); ++n) {
            if (c_[n] == 0) continue;
            if (n == 0) {
                out[0] += c_[0] / 2;
                out[1] += c_[0] / 2;
            } else {
                const Rational scaled = c_[n] / Rational(2 * (2 * static_cast<long>(n) + 1));
                out[n + 1] += scaled;
                out[n - 1] -= scaled;
            }
        }
        return LegendreSeries(std::move(out));
    }

    Rational definite_integral() const { return coefficient(0); }

    // int_0^1 P_j(2x-1) f(x) dx
    Rational inner_product(std::size_t j) const {
        return coefficient(j) / Rational(2 * static_cast<long>(j) + 1);
    }

    LegendreSeries& operator*=(const Rational& s) {
        for (auto& c : c_) c *= s;
        trim();
        return *this;
    }

    friend LegendreSeries operator-(const LegendreSeries& a, const LegendreSeries& b) {
        std::vector<Rational> out(std::max(a.size(), b.size()), Rational(0));
        for (std::size_t n = 0; n < a.size(); ++n) out[n] += a.c_[n];
        for (std::size_t n = 0; n < b.size(); ++n) out[n] -= b.c_[n];
        return LegendreSeries(std::move(out));
    }

    double evaluate(double x) const {
        const double y = 2.0 * x - 1.0;
        double sum = 0.0;
        double prev = 1.0;
        double cur = y;
        for (std::size_t n = 0; n < c_.size(); ++n) {
            double pn;
            if (n == 0) {
                pn = 1.0;
            } else if (n == 1) {
                pn = y;
            } else {
                const double next = ((2.0 * (n - 1) + 1.0) * y * cur - (n - 1.0) * prev) / static_cast<double>(n);
                prev = cur;
                cur = next;
                pn = cur;
            }
            sum += c_[n].get_d() * pn;
        }
        return sum;
    }

private:
    void trim() {
        while (!c_.empty() && c_.back() == 0) c_.pop_back();
    }

    std::vector<Rational> c_;
};

/// Generates P_0 F, P_1 F, P_2 F, ... by the three-term recurrence
/// (n+1) P_{n+1} = (2n+1)(2x-1) P_n - n P_{n-1}.
class LegendreProducts {
public:
    explicit LegendreProducts(LegendreSeries base) : cur_(std::move(base)) {}

    int index() const noexcept { return n_; }
    const LegendreSeries& current() const noexcept { return cur_; }

    void advance() {
        // (2x-1) G_n = 2 x G_n - G_n
        LegendreSeries two_x = cur_.times_x();
        two_x *= Rational(2);
        LegendreSeries next = two_x - cur_;
        next *= Rational(2 * n_ + 1);
        if (n_ > 0) {
            LegendreSeries back = prev_;
            back *= Rational(n_);
            next = next - back;
        }
        next *= Rational(1, n_ + 1);
        prev_ = std::move(cur_);
        cur_ = std::move(next);
        ++n_;
    }

private:
    LegendreSeries prev_;
    LegendreSeries cur_;
    int n_ = 0;
};

}  // namespace strato
