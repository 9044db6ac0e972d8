#pragma once

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstddef>
#include <limits>
#include <map>
#include <memory>
#include <mutex>
#include <numbers>
#include <optional>
#include <span>
#include <sstream>
#include <string>
#include <vector>

#include "strato/basis.hpp"
#include "strato/error.hpp"
#include "strato/exact.hpp"
#include "strato/integral_spec.hpp"
#include "strato/legendre_series.hpp"
#include "strato/parallel.hpp"
#include "strato/spectral.hpp"

namespace strato {

// ---------------------------------------------------------------------------
// Kernels

namespace detail {

inline void check_points(const IntegralSpec& spec, std::span<const double> points) {
    if (static_cast<int>(points.size()) != spec.k()) throw contract_error("kernel needs exactly k points");
    for (double s : points) {
        if (!spec.interval.contains(s)) throw domain_error("kernel point outside [t,T]");
    }
}

inline double weight_product(const IntegralSpec& spec, std::span<const double> points) {
    double prod = 1.0;
    for (int l = 0; l < spec.k(); ++l) prod *= spec.weight(l, points[static_cast<std::size_t>(l)]);
    return prod;
}

}  // namespace detail

/// psi_1(t_1)...psi_k(t_k) on the open simplex t_1 < ... < t_k, zero elsewhere.
inline double kernel_K(const IntegralSpec& spec, std::span<const double> points) {
    detail::check_points(spec, points);
    for (std::size_t l = 1; l < points.size(); ++l) {
        if (!(points[l - 1] < points[l])) return 0.0;
    }
    return detail::weight_product(spec, points);
}

/// Symmetrized kernel: ties between neighbouring times count one half.
inline double kernel_Kstar(const IntegralSpec& spec, std::span<const double> points) {
    detail::check_points(spec, points);
    double factor = 1.0;
    for (std::size_t l = 1; l < points.size(); ++l) {
        if (points[l - 1] < points[l]) continue;
        if (points[l - 1] == points[l]) {
            factor *= 0.5;
        } else {
            return 0.0;
        }
    }
    return factor * detail::weight_product(spec, points);
}

/// Exact squared L2 norm of K over [t,T]^k, i.e. the simplex integral of
/// prod psi_l^2.
inline ExactValue kernel_norm_squared(const IntegralSpec& spec) {
    Rational c(1);
    long exponent = 0;
    for (const auto& w : spec.weights) {
        exponent += 2L * w.q;
        c /= Rational(exponent + 1);
        exponent += 1;
    }
    return ExactValue(c, 2 * spec.k() + 4 * spec.weight_degree());
}

// ---------------------------------------------------------------------------
// Coefficient tensor

struct TensorOptions {
    unsigned threads = 1;
    // Upper bound on k * prod(p_l + 1).
    std::size_t budget = 4'000'000;
    // Relative (to ||K||) accuracy target for quadrature-backed entries.
    double quadrature_tolerance = 1e-12;
};

/// Dense table of Fourier coefficients C_{j_k...j_1} for j_l <= p_l, stored
/// for the unit interval. Multi-indices are (j_1, ..., j_k) with j_1 the
/// innermost integration variable and j_1 varying fastest in storage.
class CoefficientTensor {
public:
    CoefficientTensor() = default;

    CoefficientTensor(BasisKind basis, std::vector<WeightSpec> weights, std::vector<int> orders)
        : basis_(basis), weights_(std::move(weights)), orders_(std::move(orders)) {
        if (weights_.size() != orders_.size() || weights_.empty()) {
            throw contract_error("tensor needs one order per weight and k >= 1");
        }
        strides_.resize(orders_.size());
        std::size_t stride = 1;
        for (std::size_t l = 0; l < orders_.size(); ++l) {
            if (orders_[l] < 0) throw contract_error("orders must be nonnegative");
            strides_[l] = stride;
            stride *= static_cast<std::size_t>(orders_[l]) + 1;
        }
        values_.assign(stride, 0.0);
        errors_.assign(stride, 0.0);
        two_alpha_ = k() + 2 * weight_degree();
    }

    BasisKind basis() const noexcept { return basis_; }
    const std::vector<WeightSpec>& weights() const noexcept { return weights_; }
    const std::vector<int>& orders() const noexcept { return orders_; }
    const std::vector<std::size_t>& strides() const noexcept { return strides_; }
    int k() const noexcept { return static_cast<int>(weights_.size()); }
    std::size_t size() const noexcept { return values_.size(); }
    bool is_exact() const noexcept { return !exact_.empty(); }

    int weight_degree() const noexcept {
        int s = 0;
        for (const auto& w : weights_) s += w.q;
        return s;
    }

    // Every entry scales as (T-t)^alpha with alpha = k/2 + sum q_l.
    int two_alpha() const noexcept { return two_alpha_; }
    double scale(double length) const { return std::pow(length, two_alpha_ / 2.0); }

    std::size_t flat_index(std::span<const int> j) const {
        if (static_cast<int>(j.size()) != k()) throw contract_error("multi-index length must equal k");
        std::size_t idx = 0;
        for (std::size_t l = 0; l < j.size(); ++l) {
            if (j[l] < 0 || j[l] > orders_[l]) throw contract_error("multi-index outside tensor orders");
            idx += static_cast<std::size_t>(j[l]) * strides_[l];
        }
        return idx;
    }

    std::vector<int> multi_index(std::size_t flat) const {
        std::vector<int> j(orders_.size());
        for (std::size_t l = 0; l < orders_.size(); ++l) {
            j[l] = static_cast<int>(flat % (static_cast<std::size_t>(orders_[l]) + 1));
            flat /= static_cast<std::size_t>(orders_[l]) + 1;
        }
        return j;
    }

    double unit_value(std::span<const int> j) const { return values_[flat_index(j)]; }
    double value(std::span<const int> j, double length) const { return unit_value(j) * scale(length); }
    double error_bound(std::span<const int> j) const { return errors_[flat_index(j)]; }

    const ExactValue& exact(std::span<const int> j) const {
        if (!is_exact()) throw contract_error("tensor has no exact entries");
        return exact_[flat_index(j)];
    }

    std::span<const double> unit_values() const noexcept { return values_; }
    std::span<const double> error_bounds() const noexcept { return errors_; }
    std::span<const ExactValue> exact_values() const noexcept { return exact_; }

    // Mutable access for builders and loaders.
    std::vector<double>& mutable_values() noexcept { return values_; }
    std::vector<double>& mutable_errors() noexcept { return errors_; }
    std::vector<ExactValue>& mutable_exact() noexcept { return exact_; }

    bool same_identity(BasisKind basis, const std::vector<WeightSpec>& weights) const {
        return basis == basis_ && weights == weights_;
    }

private:
    BasisKind basis_ = BasisKind::legendre;
    std::vector<WeightSpec> weights_;
    std::vector<int> orders_;
    std::vector<std::size_t> strides_;
    std::vector<double> values_;
    std::vector<double> errors_;
    std::vector<ExactValue> exact_;
    int two_alpha_ = 0;
};

namespace detail {

struct IndexRange {
    int lo = 0;
    int hi = 0;
    std::size_t count() const { return static_cast<std::size_t>(hi - lo + 1); }
};

inline std::vector<IndexRange> full_ranges(std::span<const int> orders) {
    std::vector<IndexRange> r;
    for (int p : orders) r.push_back({0, p});
    return r;
}

inline std::size_t box_size(std::span<const IndexRange> ranges) {
    std::size_t n = 1;
    for (const auto& r : ranges) n *= r.count();
    return n;
}

inline int weight_sign(std::span<const WeightSpec> weights) {
    int s = 0;
    for (const auto& w : weights) s += w.q;
    return s % 2 == 0 ? 1 : -1;
}

/// Exact Legendre coefficients for the box of multi-indices given by ranges,
/// written densely (first index fastest).
///
/// With F_0 = 1 and F_l(x) = int_0^x s^{q_l} P_{j_l}(2s-1) F_{l-1}(s) ds the
/// unit-interval coefficient is
///   (-1)^{sum q} prod sqrt(2 j_l + 1) * int_0^1 x^{q_k} P_{j_k} F_{k-1} dx.
class ExactLegendreBuilder {
public:
    ExactLegendreBuilder(std::span<const WeightSpec> weights, std::span<const IndexRange> ranges)
        : weights_(weights.begin(), weights.end()), ranges_(ranges.begin(), ranges.end()) {
        int degree = 0;
        for (const auto& w : weights_) degree += w.q;
        two_alpha_ = static_cast<int>(weights_.size()) + 2 * degree;
        sign_ = weight_sign(weights_);
        strides_.resize(ranges_.size());
        std::size_t s = 1;
        for (std::size_t l = 0; l < ranges_.size(); ++l) {
            strides_[l] = s;
            s *= ranges_[l].count();
        }
        out_.assign(s, ExactValue::zero(two_alpha_));
    }

    std::vector<ExactValue> build(unsigned threads) {
        const std::size_t k = weights_.size();
        if (k == 1) {
            descend(0, LegendreSeries::one(), 0, ExactValue(Rational(sign_)));
            return std::move(out_);
        }
        // First level is generated sequentially, deeper levels in parallel per j_1.
        struct Seed {
            LegendreSeries f;
            ExactValue norm;
        };
        std::vector<Seed> seeds;
        LegendreProducts gen(LegendreSeries::one());
        for (int j = 0; j <= ranges_[0].hi; ++j) {
            if (j >= ranges_[0].lo) {
                seeds.push_back({gen.current().times_x_pow(weights_[0].q).integral_from_zero(),
                                 ExactValue(Rational(sign_)) * ExactValue::sqrt_of(2 * static_cast<std::uint64_t>(j) + 1)});
            }
            if (j < ranges_[0].hi) gen.advance();
        }
        parallel_for(seeds.size(), threads, [&](std::size_t i) {
            descend(1, seeds[i].f, i * strides_[0], seeds[i].norm);
        });
        return std::move(out_);
    }

private:
    void descend(std::size_t level, const LegendreSeries& f, std::size_t offset, const ExactValue& norm) {
        const auto& range = ranges_[level];
        const int q = weights_[level].q;
        if (level + 1 == weights_.size()) {
            const LegendreSeries h = f.times_x_pow(q);
            for (int j = range.lo; j <= range.hi; ++j) {
                const ExactValue n = norm * ExactValue::sqrt_of(2 * static_cast<std::uint64_t>(j) + 1);
                out_[offset + static_cast<std::size_t>(j - range.lo) * strides_[level]] =
                    ExactValue(h.inner_product(static_cast<std::size_t>(j)), two_alpha_) * n;
            }
            return;
        }
        LegendreProducts gen(f);
        for (int j = 0; j <= range.hi; ++j) {
            if (j >= range.lo) {
                const LegendreSeries next = gen.current().times_x_pow(q).integral_from_zero();
                descend(level + 1, next, offset + static_cast<std::size_t>(j - range.lo) * strides_[level],
                        norm * ExactValue::sqrt_of(2 * static_cast<std::uint64_t>(j) + 1));
            }
            if (j < range.hi) gen.advance();
        }
    }

    std::vector<WeightSpec> weights_;
    std::vector<IndexRange> ranges_;
    std::vector<std::size_t> strides_;
    std::vector<ExactValue> out_;
    int two_alpha_ = 0;
    int sign_ = 1;
};

/// Same box of coefficients by iterated Chebyshev collocation on the unit
/// interval, for any basis. Result is at T - t = 1.
inline std::vector<double> spectral_entries(BasisKind basis, std::span<const WeightSpec> weights,
                                            std::span<const IndexRange> ranges, const ChebyshevGrid& grid) {
    const std::size_t k = weights.size();
    const auto& x = grid.nodes();
    int jmax = 0;
    for (const auto& r : ranges) jmax = std::max(jmax, r.hi);
    std::vector<std::vector<double>> phi(static_cast<std::size_t>(jmax) + 1, std::vector<double>(x.size()));
    for (int j = 0; j <= jmax; ++j) {
        for (std::size_t i = 0; i < x.size(); ++i) phi[static_cast<std::size_t>(j)][i] = eval_phi_unit(basis, j, x[i]);
    }
    std::vector<std::vector<double>> psi(k, std::vector<double>(x.size()));
    for (std::size_t l = 0; l < k; ++l) {
        for (std::size_t i = 0; i < x.size(); ++i) psi[l][i] = std::pow(-x[i], weights[l].q);
    }
    std::vector<std::size_t> strides(k);
    std::size_t total = 1;
    for (std::size_t l = 0; l < k; ++l) {
        strides[l] = total;
        total *= ranges[l].count();
    }
    std::vector<double> out(total, 0.0);
    std::vector<double> weights_cc = grid.clenshaw_curtis_weights();

    auto descend = [&](auto&& self, std::size_t level, const std::vector<double>& f, std::size_t offset) -> void {
        std::vector<double> h(x.size());
        for (int j = ranges[level].lo; j <= ranges[level].hi; ++j) {
            const auto& pj = phi[static_cast<std::size_t>(j)];
            for (std::size_t i = 0; i < x.size(); ++i) h[i] = f[i] * psi[level][i] * pj[i];
            const std::size_t slot = offset + static_cast<std::size_t>(j - ranges[level].lo) * strides[level];
            if (level + 1 == k) {
                double s = 0.0;
                for (std::size_t i = 0; i < x.size(); ++i) s += weights_cc[i] * h[i];
                out[slot] = s;
            } else {
                self(self, level + 1, grid.cumulative(h), slot);
            }
        }
    };
    descend(descend, 0, std::vector<double>(x.size(), 1.0), 0);
    return out;
}

inline std::size_t initial_grid_degree(BasisKind basis, std::span<const WeightSpec> weights,
                                       std::span<const IndexRange> ranges) {
    double band = 0.0;
    for (std::size_t l = 0; l < weights.size(); ++l) {
        const double hi = ranges[l].hi;
        band += (basis == BasisKind::trigonometric ? std::numbers::pi * std::ceil(hi / 2.0) : hi) + weights[l].q + 1;
    }
    const auto want = static_cast<std::size_t>(std::ceil(1.25 * band + 24.0));
    return std::max<std::size_t>(32, std::bit_ceil(want));
}

inline constexpr std::size_t max_grid_degree = 2048;

struct SpectralResult {
    std::vector<double> values;
    std::vector<double> errors;
};

/// Adaptive driver: doubles the collocation degree until two successive
/// resolutions agree to tolerance * scale, and reports |difference| (floored
/// at a few ulps of scale) as the per-entry error bound.
inline SpectralResult adaptive_spectral_entries(BasisKind basis, std::span<const WeightSpec> weights,
                                                std::span<const IndexRange> ranges, double scale,
                                                double tolerance) {
    std::size_t degree = initial_grid_degree(basis, weights, ranges);
    std::vector<double> coarse = spectral_entries(basis, weights, ranges, ChebyshevGrid(degree));
    for (;;) {
        const std::size_t finer = degree * 2;
        std::vector<double> fine = spectral_entries(basis, weights, ranges, ChebyshevGrid(finer));
        SpectralResult res{std::move(fine), std::vector<double>(coarse.size())};
        double worst = 0.0;
        const double floor = 8.0 * std::numeric_limits<double>::epsilon() * scale;
        for (std::size_t i = 0; i < coarse.size(); ++i) {
            res.errors[i] = std::max(std::abs(res.values[i] - coarse[i]), floor);
            worst = std::max(worst, res.errors[i]);
        }
        if (worst <= tolerance * scale || finer >= max_grid_degree) return res;
        degree = finer;
        coarse = std::move(res.values);
    }
}

inline void check_budget(std::size_t k, std::span<const int> orders, std::size_t budget) {
    std::size_t need = k;
    for (int p : orders) {
        if (p < 0) throw contract_error("orders must be nonnegative");
        const std::size_t n = static_cast<std::size_t>(p) + 1;
        if (need > std::numeric_limits<std::size_t>::max() / n) {
            throw resource_error("coefficient tensor size overflows", std::numeric_limits<std::size_t>::max());
        }
        need *= n;
    }
    if (need > budget) {
        throw resource_error("coefficient tensor needs " + std::to_string(need) + " slots (k * prod(p+1)), budget is " +
                                 std::to_string(budget),
                             need);
    }
}

}  // namespace detail

/// Builds the full table for j_l <= p_l. Legendre entries are exact; the
/// trigonometric table comes from adaptive collocation with per-entry bounds.
inline CoefficientTensor coefficient_tensor(const std::vector<WeightSpec>& weights, BasisKind basis,
                                            const std::vector<int>& orders, const TensorOptions& options = {}) {
    if (weights.empty()) throw contract_error("multiplicity k must be at least 1");
    if (weights.size() != orders.size()) throw contract_error("need one order per weight");
    detail::check_budget(weights.size(), orders, options.budget);
    CoefficientTensor tensor(basis, weights, orders);
    const auto ranges = detail::full_ranges(orders);
    if (basis == BasisKind::legendre) {
        tensor.mutable_exact() = detail::ExactLegendreBuilder(weights, ranges).build(options.threads);
        auto& vals = tensor.mutable_values();
        for (std::size_t i = 0; i < vals.size(); ++i) vals[i] = tensor.exact_values()[i].at_unit();
    } else {
        IntegralSpec unit;
        unit.weights = weights;
        unit.indices.assign(weights.size(), 0);
        const double scale = std::sqrt(kernel_norm_squared(unit).at_unit());
        auto res = detail::adaptive_spectral_entries(basis, weights, ranges, scale, options.quadrature_tolerance);
        tensor.mutable_values() = std::move(res.values);
        tensor.mutable_errors() = std::move(res.errors);
    }
    return tensor;
}

inline CoefficientTensor coefficient_tensor(const IntegralSpec& spec, BasisKind basis, const std::vector<int>& orders,
                                            const TensorOptions& options = {}) {
    spec.validate();
    return coefficient_tensor(spec.weights, basis, orders, options);
}

/// Recomputes a Legendre or trigonometric table by collocation only; used to
/// cross-check the exact route.
inline CoefficientTensor quadrature_tensor(const std::vector<WeightSpec>& weights, BasisKind basis,
                                           const std::vector<int>& orders, double tolerance = 1e-12) {
    detail::check_budget(weights.size(), orders, TensorOptions{}.budget);
    CoefficientTensor tensor(basis, weights, orders);
    IntegralSpec unit;
    unit.weights = weights;
    unit.indices.assign(weights.size(), 0);
    const double scale = std::sqrt(kernel_norm_squared(unit).at_unit());
    auto res = detail::adaptive_spectral_entries(basis, weights, detail::full_ranges(orders), scale, tolerance);
    tensor.mutable_values() = std::move(res.values);
    tensor.mutable_errors() = std::move(res.errors);
    return tensor;
}

/// One coefficient C_{j_k...j_1}. Exact for Legendre; for the trigonometric
/// basis `exact` is empty and `error_bound` carries the quadrature bound.
struct Coefficient {
    std::optional<ExactValue> exact;
    double unit_value = 0.0;
    double error_bound = 0.0;
    int two_alpha = 0;

    double at(double length) const { return unit_value * std::pow(length, two_alpha / 2.0); }
};

inline Coefficient coefficient(const IntegralSpec& spec, BasisKind basis, std::span<const int> multi_index,
                               double tolerance = 1e-12) {
    spec.validate();
    if (static_cast<int>(multi_index.size()) != spec.k()) {
        throw contract_error("multi-index length must equal k");
    }
    std::vector<detail::IndexRange> ranges;
    for (int j : multi_index) {
        if (j < 0) throw contract_error("multi-index entries must be nonnegative");
        ranges.push_back({j, j});
    }
    Coefficient c;
    c.two_alpha = spec.k() + 2 * spec.weight_degree();
    if (basis == BasisKind::legendre) {
        auto v = detail::ExactLegendreBuilder(spec.weights, ranges).build(1);
        c.exact = v.front();
        c.unit_value = v.front().at_unit();
    } else {
        IntegralSpec unit = spec;
        unit.interval = Interval{};
        const double scale = std::sqrt(kernel_norm_squared(unit).at_unit());
        auto res = detail::adaptive_spectral_entries(basis, spec.weights, ranges, scale, tolerance);
        c.unit_value = res.values.front();
        c.error_bound = res.errors.front();
    }
    return c;
}

/// Memoizes tensors by (basis, weights, orders). Entries are immutable and
/// shared between threads.
class TensorCache {
public:
    explicit TensorCache(TensorOptions options = {}) : options_(options) {}

    std::shared_ptr<const CoefficientTensor> get(BasisKind basis, const std::vector<WeightSpec>& weights,
                                                 const std::vector<int>& orders) {
        const std::string key = make_key(basis, weights, orders);
        {
            std::lock_guard lock(mutex_);
            if (auto it = entries_.find(key); it != entries_.end()) return it->second;
        }
        auto built = std::make_shared<const CoefficientTensor>(coefficient_tensor(weights, basis, orders, options_));
        std::lock_guard lock(mutex_);
        return entries_.emplace(key, std::move(built)).first->second;
    }

    std::size_t size() const {
        std::lock_guard lock(mutex_);
        return entries_.size();
    }

private:
    static std::string make_key(BasisKind basis, const std::vector<WeightSpec>& weights,
                                const std::vector<int>& orders) {
        std::ostringstream os;
        os << to_string(basis) << '|';
        for (const auto& w : weights) os << w.q << ',';
        os << '|';
        for (int p : orders) os << p << ',';
        return os.str();
    }

    TensorOptions options_;
    mutable std::mutex mutex_;
    std::map<std::string, std::shared_ptr<const CoefficientTensor>> entries_;
};

}  // namespace strato
