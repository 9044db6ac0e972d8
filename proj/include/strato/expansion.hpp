#pragma once

#include <cmath>
#include <cstddef>
#include <memory>
#include <optional>
#include <span>
#include <vector>

#include "strato/basis.hpp"
#include "strato/coeffs.hpp"
#include "strato/combinatorics.hpp"
#include "strato/error.hpp"
#include "strato/integral_spec.hpp"

namespace strato {

/// Table zeta_j^{(i)} for i in 0..m and j in 0..p_max. Row 0 belongs to the
/// deterministic integrator and always holds int phi_j = sqrt(T-t) delta_{j0}.
struct GaussianVariates {
    int m = 1;
    int p_max = 0;
    double length = 1.0;
    std::vector<double> zeta;

    GaussianVariates() = default;

    GaussianVariates(int components, int max_order, double interval_length)
        : m(components), p_max(max_order), length(interval_length),
          zeta(static_cast<std::size_t>(components + 1) * static_cast<std::size_t>(max_order + 1), 0.0) {
        if (components < 1 || max_order < 0) throw contract_error("variates need m >= 1 and p_max >= 0");
        zeta[0] = std::sqrt(interval_length);
    }

    double& at(int i, int j) { return zeta[static_cast<std::size_t>(i) * (p_max + 1) + static_cast<std::size_t>(j)]; }
    double at(int i, int j) const {
        return zeta[static_cast<std::size_t>(i) * (p_max + 1) + static_cast<std::size_t>(j)];
    }

    std::span<const double> row(int i) const {
        return {zeta.data() + static_cast<std::size_t>(i) * (p_max + 1), static_cast<std::size_t>(p_max) + 1};
    }
    std::span<double> row(int i) {
        return {zeta.data() + static_cast<std::size_t>(i) * (p_max + 1), static_cast<std::size_t>(p_max) + 1};
    }
};

struct ExpansionResult {
    double value = 0.0;
    IntegralSpec spec;
    std::vector<int> orders;
    std::size_t term_count = 0;
};

/// One signed correction of the Ito expansion: (-1)^r times the partition term.
struct ItoCorrectionTerm {
    int sign = 1;
    PairPartition partition;
};

/// Correction layout for multiplicity k: all r = 1..floor(k/2) partitions
/// with sign (-1)^r.
inline std::vector<ItoCorrectionTerm> ito_correction_terms(int k) {
    std::vector<ItoCorrectionTerm> out;
    for (int r = 1; 2 * r <= k; ++r) {
        for (auto& p : pair_partitions(k, r)) out.push_back({r % 2 == 0 ? 1 : -1, std::move(p)});
    }
    return out;
}

namespace detail {

inline std::vector<int> resolve_orders(const CoefficientTensor& tensor, const std::optional<std::vector<int>>& orders) {
    if (!orders) return tensor.orders();
    if (static_cast<int>(orders->size()) != tensor.k()) throw contract_error("orders must have k entries");
    for (std::size_t l = 0; l < orders->size(); ++l) {
        if ((*orders)[l] < 0 || (*orders)[l] > tensor.orders()[l]) {
            throw contract_error("requested orders exceed the coefficient table");
        }
    }
    return *orders;
}

inline void check_inputs(const CoefficientTensor& tensor, const GaussianVariates& v, const IntegralSpec& spec,
                         std::span<const int> orders) {
    spec.validate();
    if (tensor.k() != spec.k() || tensor.weights() != spec.weights) {
        throw contract_error("coefficient table does not match the integral's weights");
    }
    if (std::abs(v.length - spec.interval.length()) > 1e-12 * spec.interval.length()) {
        throw contract_error("variates were generated for a different interval length");
    }
    for (int i : spec.indices) {
        if (i > v.m) throw contract_error("variates do not cover all Wiener indices");
    }
    for (int p : orders) {
        if (p > v.p_max) throw contract_error("variates do not cover the requested orders");
    }
}

inline std::size_t box_count(std::span<const int> orders) {
    std::size_t n = 1;
    for (int p : orders) n *= static_cast<std::size_t>(p) + 1;
    return n;
}

/// Sum over the orders box of C[j] * prod_l vec_l[j_l], folding the innermost
/// dimension first.
inline double contract(const CoefficientTensor& tensor, std::span<const int> orders,
                       const std::vector<std::span<const double>>& vecs) {
    const std::size_t k = orders.size();
    const auto& strides = tensor.strides();
    const auto vals = tensor.unit_values();
    // Fold j_1 straight out of the (possibly larger) tensor.
    std::size_t outer = 1;
    for (std::size_t l = 1; l < k; ++l) outer *= static_cast<std::size_t>(orders[l]) + 1;
    std::vector<double> folded(outer, 0.0);
    std::vector<int> j(k, 0);
    for (std::size_t o = 0; o < outer; ++o) {
        std::size_t base = 0;
        for (std::size_t l = 1; l < k; ++l) base += static_cast<std::size_t>(j[l]) * strides[l];
        double s = 0.0;
        for (int a = 0; a <= orders[0]; ++a) s += vals[base + static_cast<std::size_t>(a)] * vecs[0][static_cast<std::size_t>(a)];
        folded[o] = s;
        for (std::size_t l = 1; l < k; ++l) {
            if (++j[l] <= orders[l]) break;
            j[l] = 0;
        }
    }
    // Remaining dimensions are dense with box strides.
    for (std::size_t l = 1; l < k; ++l) {
        const std::size_t n = static_cast<std::size_t>(orders[l]) + 1;
        const std::size_t rest = folded.size() / n;
        std::vector<double> next(rest, 0.0);
        for (std::size_t r = 0; r < rest; ++r) {
            double s = 0.0;
            for (std::size_t a = 0; a < n; ++a) s += folded[r * n + a] * vecs[l][a];
            next[r] = s;
        }
        folded = std::move(next);
    }
    return folded[0];
}

/// Sum of C[j] * prod_{remainder} zeta over j with j_a = j_b on every pair.
inline double contract_partition(const CoefficientTensor& tensor, std::span<const int> orders,
                                 const PairPartition& part, const std::vector<std::span<const double>>& vecs) {
    // Free variables: one per pair (shared index), one per remainder slot.
    struct Var {
        int hi;
        std::size_t stride;
        int slot;  // remainder position in vecs, or -1 for pairs
    };
    std::vector<Var> vars;
    const auto& strides = tensor.strides();
    for (auto [a, b] : part.pairs) {
        const auto ia = static_cast<std::size_t>(a - 1);
        const auto ib = static_cast<std::size_t>(b - 1);
        vars.push_back({std::min(orders[ia], orders[ib]), strides[ia] + strides[ib], -1});
    }
    for (int q : part.remainder) {
        const auto iq = static_cast<std::size_t>(q - 1);
        vars.push_back({orders[iq], strides[iq], static_cast<int>(iq)});
    }
    const auto vals = tensor.unit_values();
    std::vector<int> idx(vars.size(), 0);
    double total = 0.0;
    for (;;) {
        std::size_t flat = 0;
        double prod = 1.0;
        for (std::size_t v = 0; v < vars.size(); ++v) {
            flat += static_cast<std::size_t>(idx[v]) * vars[v].stride;
            if (vars[v].slot >= 0) prod *= vecs[static_cast<std::size_t>(vars[v].slot)][static_cast<std::size_t>(idx[v])];
        }
        total += vals[flat] * prod;
        std::size_t v = 0;
        for (; v < vars.size(); ++v) {
            if (++idx[v] <= vars[v].hi) break;
            idx[v] = 0;
        }
        if (v == vars.size()) break;
    }
    return total;
}

inline std::vector<std::span<const double>> variate_rows(const GaussianVariates& v, const IntegralSpec& spec) {
    std::vector<std::span<const double>> rows;
    for (int i : spec.indices) rows.push_back(v.row(i));
    return rows;
}

inline bool partition_active(const PairPartition& part, std::span<const int> indices) {
    for (auto [a, b] : part.pairs) {
        const int ia = indices[static_cast<std::size_t>(a - 1)];
        const int ib = indices[static_cast<std::size_t>(b - 1)];
        if (ia != ib || ia == 0) return false;
    }
    return true;
}

}  // namespace detail

/// Truncated Ito expansion: sum_j C_j [prod zeta + sum_r (-1)^r sum over
/// r-pair partitions of indicator products times the remaining zetas].
inline ExpansionResult expand_ito(const CoefficientTensor& tensor, const GaussianVariates& variates,
                                  const IntegralSpec& spec, const std::optional<std::vector<int>>& orders = {}) {
    const std::vector<int> p = detail::resolve_orders(tensor, orders);
    detail::check_inputs(tensor, variates, spec, p);
    const auto rows = detail::variate_rows(variates, spec);
    double sum = detail::contract(tensor, p, rows);
    for (const auto& term : ito_correction_terms(spec.k())) {
        if (!detail::partition_active(term.partition, spec.indices)) continue;
        sum += term.sign * detail::contract_partition(tensor, p, term.partition, rows);
    }
    return {sum * tensor.scale(spec.interval.length()), spec, p, detail::box_count(p)};
}

/// Plain truncated sum sum_j C_j prod zeta_{j_l}^{(i_l)} without corrections;
/// the approximation of the Stratonovich integral.
inline ExpansionResult expand_stratonovich_sum(const CoefficientTensor& tensor, const GaussianVariates& variates,
                                               const IntegralSpec& spec,
                                               const std::optional<std::vector<int>>& orders = {}) {
    const std::vector<int> p = detail::resolve_orders(tensor, orders);
    detail::check_inputs(tensor, variates, spec, p);
    const double sum = detail::contract(tensor, p, detail::variate_rows(variates, spec));
    return {sum * tensor.scale(spec.interval.length()), spec, p, detail::box_count(p)};
}

inline constexpr int max_conversion_multiplicity = 5;

/// Precomputed Ito-to-Stratonovich conversion for one (spec, basis, orders):
///   J* = J + sum_r 2^{-r} sum_{(s_r..s_1) in A_{k,r}} J^{s_r..s_1}.
/// Each surviving correction is the Ito expansion of the reduced integral in
/// which positions s, s+1 are merged into one dtau integrator with weight
/// psi_s psi_{s+1}.
class StratonovichConversion {
public:
    struct Correction {
        CorrectionTuple tuple;
        double factor = 0.0;
        IntegralSpec reduced;
        std::vector<int> orders;
        std::shared_ptr<const CoefficientTensor> tensor;
        // Set when every reduced integrator is dtau; then the correction is
        // the exact deterministic iterated integral.
        std::optional<double> deterministic;
    };

    StratonovichConversion(const IntegralSpec& spec, BasisKind basis, std::vector<int> orders,
                           TensorCache* cache = nullptr)
        : spec_(spec), basis_(basis), orders_(std::move(orders)) {
        spec_.validate();
        if (spec_.kind != IntegralKind::stratonovich) {
            throw contract_error("Ito-to-Stratonovich conversion needs a Stratonovich integral");
        }
        if (spec_.k() > max_conversion_multiplicity) {
            throw contract_error("conversion supports multiplicity k <= 5");
        }
        if (static_cast<int>(orders_.size()) != spec_.k()) throw contract_error("orders must have k entries");
        TensorCache local;
        TensorCache& tc = cache ? *cache : local;
        main_ = tc.get(basis_, spec_.weights, orders_);
        for (int r = 1; 2 * r <= spec_.k(); ++r) {
            for (auto& tuple : correction_index_sets(spec_.k(), r)) {
                if (!indicator(tuple)) continue;
                Correction c;
                c.factor = std::ldexp(1.0, -r);
                c.reduced = reduce(tuple, c.orders);
                if (std::all_of(c.reduced.indices.begin(), c.reduced.indices.end(), [](int i) { return i == 0; })) {
                    c.deterministic = deterministic_integral(c.reduced);
                } else {
                    c.tensor = tc.get(basis_, c.reduced.weights, c.orders);
                }
                c.tuple = std::move(tuple);
                corrections_.push_back(std::move(c));
            }
        }
    }

    const IntegralSpec& spec() const noexcept { return spec_; }
    const std::vector<int>& orders() const noexcept { return orders_; }
    const CoefficientTensor& tensor() const noexcept { return *main_; }
    const std::vector<Correction>& corrections() const noexcept { return corrections_; }

    ExpansionResult evaluate(const GaussianVariates& variates) const {
        ExpansionResult res = expand_ito(*main_, variates, spec_, orders_);
        for (const auto& c : corrections_) {
            if (c.deterministic) {
                res.value += c.factor * *c.deterministic;
                continue;
            }
            const ExpansionResult part = expand_ito(*c.tensor, variates, c.reduced, c.orders);
            res.value += c.factor * part.value;
            res.term_count += part.term_count;
        }
        return res;
    }

    // int_t^T psi_k ... int_t^{t_2} psi_1 dt_1 ... dt_k, exact in closed form.
    static double deterministic_integral(const IntegralSpec& spec) {
        Rational c(1);
        long exponent = 0;
        for (const auto& w : spec.weights) {
            exponent += w.q;
            c /= Rational(exponent + 1);
            exponent += 1;
        }
        const double sign = spec.weight_degree() % 2 == 0 ? 1.0 : -1.0;
        return sign * c.get_d() * std::pow(spec.interval.length(), static_cast<double>(exponent));
    }

private:
    bool indicator(const CorrectionTuple& tuple) const {
        for (int s : tuple.s) {
            const int a = spec_.indices[static_cast<std::size_t>(s - 1)];
            const int b = spec_.indices[static_cast<std::size_t>(s)];
            if (a != b || a == 0) return false;
        }
        return true;
    }

    IntegralSpec reduce(const CorrectionTuple& tuple, std::vector<int>& reduced_orders) const {
        IntegralSpec out;
        out.m = spec_.m;
        out.interval = spec_.interval;
        out.kind = IntegralKind::ito;
        reduced_orders.clear();
        for (int pos = 1; pos <= spec_.k(); ++pos) {
            const auto idx = static_cast<std::size_t>(pos - 1);
            if (std::find(tuple.s.begin(), tuple.s.end(), pos) != tuple.s.end()) {
                out.weights.push_back(WeightSpec{spec_.weights[idx].q + spec_.weights[idx + 1].q});
                out.indices.push_back(0);
                // zeta^{(0)}_j vanishes for j >= 1, so a dtau slot only needs j = 0.
                reduced_orders.push_back(0);
                ++pos;
            } else {
                out.weights.push_back(spec_.weights[idx]);
                out.indices.push_back(spec_.indices[idx]);
                reduced_orders.push_back(orders_[idx]);
            }
        }
        return out;
    }

    IntegralSpec spec_;
    BasisKind basis_;
    std::vector<int> orders_;
    std::shared_ptr<const CoefficientTensor> main_;
    std::vector<Correction> corrections_;
};

inline ExpansionResult stratonovich_from_ito(const IntegralSpec& spec, BasisKind basis, const std::vector<int>& orders,
                                             const GaussianVariates& variates, TensorCache* cache = nullptr) {
    return StratonovichConversion(spec, basis, orders, cache).evaluate(variates);
}

/// Plain Stratonovich sum minus the converted Ito expansion on the same
/// variates. Vanishes in mean square as the orders grow.
class HypothesisGap {
public:
    HypothesisGap(const IntegralSpec& spec, BasisKind basis, std::vector<int> orders, TensorCache* cache = nullptr)
        : conversion_(spec, basis, std::move(orders), cache) {}

    double operator()(const GaussianVariates& variates) const {
        const double plain =
            expand_stratonovich_sum(conversion_.tensor(), variates, conversion_.spec(), conversion_.orders()).value;
        return plain - conversion_.evaluate(variates).value;
    }

    const StratonovichConversion& conversion() const noexcept { return conversion_; }

private:
    StratonovichConversion conversion_;
};

inline double hypothesis_gap(const IntegralSpec& spec, BasisKind basis, const std::vector<int>& orders,
                             const GaussianVariates& variates, TensorCache* cache = nullptr) {
    return HypothesisGap(spec, basis, orders, cache)(variates);
}

}  // namespace strato
