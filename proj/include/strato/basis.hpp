#pragma once

#include <cmath>
#include <numbers>
#include <string>
#include <string_view>
#include <vector>

#include "strato/error.hpp"
#include "strato/exact.hpp"

namespace strato {

struct Interval {
    double t = 0.0;
    double T = 1.0;

    Interval() = default;
    Interval(double start, double end) : t(start), T(end) {
        if (!(end > start) || !std::isfinite(end - start)) {
            throw domain_error("interval requires T > t with finite length");
        }
    }

    double length() const noexcept { return T - t; }

    // Maps s in [t,T] to x in [0,1].
    double normalize(double s) const noexcept { return (s - t) / (T - t); }

    bool contains(double s) const noexcept { return s >= t && s <= T; }
};

enum class BasisKind { legendre, trigonometric };

inline std::string to_string(BasisKind kind) {
    return kind == BasisKind::legendre ? "legendre" : "trigonometric";
}

inline BasisKind parse_basis(std::string_view name) {
    if (name == "legendre") return BasisKind::legendre;
    if (name == "trigonometric" || name == "trig") return BasisKind::trigonometric;
    throw configuration_error("unsupported basis '" + std::string(name) + "'");
}

/// Orthonormal basis function on the unit interval, x in [0,1].
///
/// Legendre: sqrt(2j+1) P_j(2x-1).
/// Trigonometric: 1, sqrt2 sin(2 pi x), sqrt2 cos(2 pi x), sqrt2 sin(4 pi x), ...
/// i.e. j = 2r-1 is the sine and j = 2r the cosine of frequency r.
inline double eval_phi_unit(BasisKind kind, int j, double x) {
    if (j < 0) throw contract_error("basis index must be nonnegative");
    switch (kind) {
        case BasisKind::legendre: {
            const double y = 2.0 * x - 1.0;
            double prev = 1.0;
            double cur = y;
            if (j == 0) return 1.0;
            for (int n = 1; n < j; ++n) {
                const double next = ((2.0 * n + 1.0) * y * cur - n * prev) / (n + 1.0);
                prev = cur;
                cur = next;
            }
            return std::sqrt(2.0 * j + 1.0) * cur;
        }
        case BasisKind::trigonometric: {
            if (j == 0) return 1.0;
            const int r = (j + 1) / 2;
            const double arg = 2.0 * std::numbers::pi * r * x;
            return std::numbers::sqrt2 * ((j % 2 == 1) ? std::sin(arg) : std::cos(arg));
        }
    }
    throw configuration_error("unsupported basis kind");
}

inline double eval_phi(BasisKind kind, int j, double s, const Interval& interval) {
    if (!interval.contains(s)) throw domain_error("evaluation point outside [t,T]");
    return eval_phi_unit(kind, j, interval.normalize(s)) / std::sqrt(interval.length());
}

/// Exact monomial coefficients (ascending powers of x) of P_j(2x-1).
inline std::vector<Rational> legendre_poly_exact(int j) {
    if (j < 0) throw contract_error("basis index must be nonnegative");
    std::vector<Rational> prev{Rational(1)};
    if (j == 0) return prev;
    std::vector<Rational> cur{Rational(-1), Rational(2)};
    for (int n = 1; n < j; ++n) {
        // (n+1) P_{n+1} = (2n+1)(2x-1) P_n - n P_{n-1}
        std::vector<Rational> next(cur.size() + 1, Rational(0));
        for (std::size_t i = 0; i < cur.size(); ++i) {
            next[i + 1] += 2 * (2 * n + 1) * cur[i];
            next[i] -= (2 * n + 1) * cur[i];
        }
        for (std::size_t i = 0; i < prev.size(); ++i) next[i] -= n * prev[i];
        for (auto& c : next) c /= (n + 1);
        prev = std::move(cur);
        cur = std::move(next);
    }
    return cur;
}

// Integral of phi_j over [t,T]; only the constant function has a nonzero mean
// in either basis.
inline ExactValue integral_of_phi(BasisKind kind, int j, const Interval& /*interval*/) {
    if (j < 0) throw contract_error("basis index must be nonnegative");
    if (kind != BasisKind::legendre && kind != BasisKind::trigonometric) {
        throw configuration_error("unsupported basis kind");
    }
    return j == 0 ? ExactValue(Rational(1), 1) : ExactValue::zero(1);
}

}  // namespace strato
