#pragma once

#include <algorithm>
#include <cmath>
#include <optional>
#include <set>
#include <vector>

#include "strato/basis.hpp"
#include "strato/coeffs.hpp"
#include "strato/error.hpp"
#include "strato/exact.hpp"
#include "strato/expansion.hpp"
#include "strato/integral_spec.hpp"
#include "strato/parallel.hpp"
#include "strato/simulate.hpp"

namespace strato {

/// Mean-square error of the order-q Legendre approximation of the double
/// integral with constant weights and distinct Wiener indices:
///   (T-t)^2 / 2 * (1/2 - sum_{i=1}^q 1 / (4 i^2 - 1)).
inline ExactValue exact_error_k2(int q, const Interval& /*interval*/ = {}) {
    if (q < 0) throw contract_error("order q must be nonnegative");
    Rational partial(0);
    for (long i = 1; i <= q; ++i) partial += Rational(1, 4 * i * i - 1);
    return ExactValue(Rational(1, 2) * (Rational(1, 2) - partial), 4);
}

namespace detail {

inline void require_distinct_nonzero(const IntegralSpec& spec) {
    std::set<int> seen;
    for (int i : spec.indices) {
        if (i == 0 || !seen.insert(i).second) {
            throw unsupported_case_error(
                "exact Parseval error needs pairwise distinct nonzero Wiener indices; repeated or dtau indices add "
                "terms that are not implemented");
        }
    }
}

}  // namespace detail

/// ||K||^2 - sum C^2 over the truncation box, exact for Legendre tables.
inline ExactValue parseval_error_exact(const IntegralSpec& spec, const CoefficientTensor& tensor) {
    detail::require_distinct_nonzero(spec);
    if (!tensor.is_exact()) throw contract_error("exact Parseval error needs an exact (Legendre) table");
    Rational captured(0);
    for (const auto& c : tensor.exact_values()) captured += c.squared_rational();
    const ExactValue norm = kernel_norm_squared(spec);
    return ExactValue(norm.rational() - captured, norm.two_alpha());
}

inline double parseval_error(const IntegralSpec& spec, const CoefficientTensor& tensor) {
    detail::require_distinct_nonzero(spec);
    const double length = spec.interval.length();
    if (tensor.is_exact()) return parseval_error_exact(spec, tensor).at(length);
    double captured = 0.0;
    for (double c : tensor.unit_values()) captured += c * c;
    const ExactValue norm = kernel_norm_squared(spec);
    return (norm.at_unit() - captured) * std::pow(length, norm.alpha());
}

inline double parseval_error(const IntegralSpec& spec, BasisKind basis, const std::vector<int>& orders,
                             const TensorOptions& options = {}) {
    detail::require_distinct_nonzero(spec);
    return parseval_error(spec, coefficient_tensor(spec, basis, orders, options));
}

struct BoundReport {
    double k_hat = 0.0;
    bool strictly_decreasing = true;
    std::vector<int> q;
    std::vector<double> error;  // exact_error_k2(q) / (T-t)^2
};

/// Fits K in error(q) <= K (T-t)^2 / q as the largest q error(q) / (T-t)^2.
inline BoundReport verify_bound(std::vector<int> q_list, const Interval& interval = {}) {
    if (q_list.empty()) throw contract_error("verify_bound needs at least one order");
    std::sort(q_list.begin(), q_list.end());
    q_list.erase(std::unique(q_list.begin(), q_list.end()), q_list.end());
    if (q_list.front() < 1) throw contract_error("the bound K (T-t)^2 / q needs q >= 1");
    BoundReport rep;
    for (int q : q_list) {
        const double e = exact_error_k2(q, interval).at_unit();
        if (!rep.error.empty() && !(e < rep.error.back())) rep.strictly_decreasing = false;
        rep.q.push_back(q);
        rep.error.push_back(e);
        rep.k_hat = std::max(rep.k_hat, q * e);
    }
    return rep;
}

/// Exact mean square of (oracle - expansion) on a uniform N-cell grid for
/// k = 2 with distinct nonzero indices. Both sides are bilinear forms
/// dw1' A dw2 and dw1' B dw2 in independent increments, so the mean square is
/// dtau^2 ||A - B||_F^2. Its distance to the continuous error is the
/// discretization slack of the Monte Carlo comparison.
inline double discrete_mse_k2(const IntegralSpec& spec, BasisKind basis, const std::vector<int>& orders, int N,
                              TensorCache* cache = nullptr) {
    spec.validate();
    if (spec.k() != 2) throw unsupported_case_error("discrete_mse_k2 covers multiplicity 2 only");
    detail::require_distinct_nonzero(spec);
    TensorCache local;
    TensorCache& tc = cache ? *cache : local;
    const auto tensor = tc.get(basis, spec.weights, orders);
    const int p1 = orders[0];
    const int p2 = orders[1];
    const ProjectionTable table(basis, std::max(p1, p2), N, spec.interval);
    const double scale = tensor->scale(spec.interval.length());
    const double h = spec.interval.length() / N;
    const std::vector<double> w = detail::weight_table(spec, N);
    // u[a][j2] = sum_{j1} C_{j2 j1} phi_{j1}(tau_a)
    std::vector<double> u(static_cast<std::size_t>(N) * (p2 + 1), 0.0);
    for (int a = 0; a < N; ++a) {
        for (int j2 = 0; j2 <= p2; ++j2) {
            double s = 0.0;
            for (int j1 = 0; j1 <= p1; ++j1) {
                const int j[2] = {j1, j2};
                s += tensor->unit_value(j) * table.phi(j1, a);
            }
            u[static_cast<std::size_t>(a) * (p2 + 1) + j2] = s * scale;
        }
    }
    std::vector<double> phi_col(static_cast<std::size_t>(p2 + 1));
    const double diag = spec.kind == IntegralKind::stratonovich ? 0.5 : 0.0;
    double frob = 0.0;
    for (int b = 0; b < N; ++b) {
        for (int j2 = 0; j2 <= p2; ++j2) phi_col[static_cast<std::size_t>(j2)] = table.phi(j2, b);
        const double w2 = w[static_cast<std::size_t>(N) + b];
        for (int a = 0; a < N; ++a) {
            const double* ua = &u[static_cast<std::size_t>(a) * (p2 + 1)];
            double bab = 0.0;
            for (int j2 = 0; j2 <= p2; ++j2) bab += ua[j2] * phi_col[static_cast<std::size_t>(j2)];
            const double ind = a < b ? 1.0 : (a == b ? diag : 0.0);
            const double d = w[static_cast<std::size_t>(a)] * w2 * ind - bab;
            frob += d * d;
        }
    }
    return h * h * frob;
}

struct McSummary {
    double estimate = 0.0;
    double std_error = 0.0;
};

struct ErrorReport {
    IntegralSpec spec;
    BasisKind basis = BasisKind::legendre;
    std::vector<int> orders;
    std::optional<ExactValue> exact_error;
    double parseval_error = 0.0;
    std::optional<McSummary> mc;
    std::optional<double> bound_constant;

    double exact_error_value() const { return exact_error ? exact_error->at(spec.interval.length()) : std::nan(""); }
};

/// The closed-form error is attached only where it applies: k = 2, constant
/// weights, distinct nonzero indices, Legendre, cubic orders.
inline ErrorReport make_error_report(const IntegralSpec& spec, BasisKind basis, const std::vector<int>& orders,
                                     std::optional<McSummary> mc = {}, const TensorOptions& options = {}) {
    ErrorReport rep;
    rep.spec = spec;
    rep.basis = basis;
    rep.orders = orders;
    rep.parseval_error = parseval_error(spec, basis, orders, options);
    const bool closed_form = spec.k() == 2 && basis == BasisKind::legendre && spec.weight_degree() == 0 &&
                             orders.size() == 2 && orders[0] == orders[1];
    if (closed_form) {
        rep.exact_error = exact_error_k2(orders[0], spec.interval);
        if (orders[0] >= 1) rep.bound_constant = orders[0] * rep.exact_error->at_unit();
    }
    rep.mc = mc;
    return rep;
}

// ---------------------------------------------------------------------------
// Validation campaigns

/// Closed form vs. Parseval vs. Monte Carlo for k = 2, distinct indices,
/// constant weights, Legendre order q in both slots.
struct TriangleCheck {
    IntegralSpec spec;
    int q = 0;
    ExactValue exact;
    double parseval = 0.0;
    McReport mc;
    double discrete = 0.0;  // exact mean square on the simulation grid
    double slack = 0.0;     // |discrete - continuous|
    double parseval_tolerance = 1e-12;
    double sigmas = 3.0;

    double exact_value() const { return exact.at(spec.interval.length()); }
    double deviation() const { return std::abs(mc.estimate - exact_value()); }
    double mc_allowance() const { return sigmas * mc.std_error + slack; }
    bool parseval_ok() const {
        return std::abs(parseval - exact_value()) <= parseval_tolerance * std::abs(exact_value());
    }
    bool mc_ok() const { return deviation() <= mc_allowance(); }
    bool passed() const { return parseval_ok() && mc_ok(); }
};

inline TriangleCheck triangle_check(const IntegralSpec& spec, int q, int N, std::size_t n_paths, std::uint64_t seed,
                                    const McOptions& options = {}, TensorCache* cache = nullptr) {
    spec.validate();
    if (spec.k() != 2 || spec.weight_degree() != 0) {
        throw unsupported_case_error("the consistency triangle needs k = 2 with constant weights");
    }
    detail::require_distinct_nonzero(spec);
    TensorCache local;
    TensorCache& tc = cache ? *cache : local;
    const std::vector<int> orders{q, q};
    TriangleCheck out;
    out.spec = spec;
    out.q = q;
    out.exact = exact_error_k2(q, spec.interval);
    out.parseval = parseval_error(spec, *tc.get(BasisKind::legendre, spec.weights, orders));
    out.mc = mc_mse(spec, BasisKind::legendre, orders, N, n_paths, seed, options, &tc);
    out.discrete = discrete_mse_k2(spec, BasisKind::legendre, orders, N, &tc);
    out.slack = std::abs(out.discrete - out.exact_value());
    return out;
}

/// Sample mean square of the Stratonovich hypothesis gap over a list of
/// orders. The gap is identically zero in exact arithmetic for several
/// configurations, so values below `floor` are treated as rounding noise.
struct GapSweep {
    IntegralSpec spec;
    BasisKind basis = BasisKind::legendre;
    std::vector<int> p;
    std::vector<double> mse;
    std::size_t n_samples = 0;
    double floor = 0.0;
    double threshold = 0.0;

    bool monotone() const {
        for (std::size_t i = 1; i < mse.size(); ++i) {
            if (mse[i] > std::max(mse[i - 1], floor)) return false;
        }
        return true;
    }
    bool below_threshold() const { return !mse.empty() && mse.back() < threshold; }
    bool passed() const { return monotone() && below_threshold(); }
};

inline GapSweep gap_sweep(const IntegralSpec& spec, BasisKind basis, std::vector<int> p_list, std::size_t n_samples,
                          std::uint64_t seed, unsigned threads = 1, TensorCache* cache = nullptr) {
    spec.validate();
    if (p_list.empty()) throw contract_error("gap sweep needs at least one order");
    if (n_samples == 0) throw contract_error("gap sweep needs at least one sample");
    TensorCache local;
    TensorCache& tc = cache ? *cache : local;
    const double length = spec.interval.length();
    GapSweep out;
    out.spec = spec;
    out.basis = basis;
    out.n_samples = n_samples;
    out.floor = 1e-20 * std::pow(length, spec.k());
    out.threshold = 0.01 * std::pow(length, spec.k());
    for (int p : p_list) {
        const HypothesisGap gap(spec, basis, std::vector<int>(static_cast<std::size_t>(spec.k()), p), &tc);
        std::vector<double> sq(n_samples);
        parallel_for(n_samples, threads, [&](std::size_t n) {
            const double g = gap(sample_variates(spec.m, p, spec.interval, seed, n));
            sq[n] = g * g;
        });
        double sum = 0.0;
        for (double v : sq) sum += v;
        out.p.push_back(p);
        out.mse.push_back(sum / static_cast<double>(n_samples));
    }
    return out;
}

}  // namespace strato
