#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <random>
#include <span>
#include <vector>

#include "strato/basis.hpp"
#include "strato/coeffs.hpp"
#include "strato/error.hpp"
#include "strato/expansion.hpp"
#include "strato/integral_spec.hpp"
#include "strato/parallel.hpp"

namespace strato {

// ---------------------------------------------------------------------------
// Random streams
//
// Every (seed, stream) pair gets its own mt19937_64 engine whose state is
// derived through SplitMix64. Path n of a Monte Carlo run uses stream n, so a
// path's randomness does not depend on which worker draws it. Normals come
// from std::normal_distribution, fixed per toolchain.

inline std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

inline std::mt19937_64 make_stream(std::uint64_t seed, std::uint64_t stream) {
    const std::uint64_t a = splitmix64(seed);
    const std::uint64_t b = splitmix64(a ^ splitmix64(stream + 0x632be59bd9b4e019ULL));
    std::seed_seq seq{static_cast<std::uint32_t>(a), static_cast<std::uint32_t>(a >> 32),
                      static_cast<std::uint32_t>(b), static_cast<std::uint32_t>(b >> 32)};
    return std::mt19937_64(seq);
}

// ---------------------------------------------------------------------------
// Paths

/// Brownian increments on the uniform grid tau_l = t + l (T-t)/N.
struct WienerPath {
    int m = 1;
    int N = 1;
    Interval interval{};
    std::uint64_t seed = 0;
    std::uint64_t stream = 0;
    // Component i (1-based) occupies [(i-1) N, i N).
    std::vector<double> increments;

    double step() const noexcept { return interval.length() / N; }
    double node(int l) const noexcept { return interval.t + step() * l; }

    // Increment of component i over cell l; component 0 is dtau.
    double dw(int i, int l) const {
        if (i == 0) return step();
        return increments[static_cast<std::size_t>(i - 1) * N + static_cast<std::size_t>(l)];
    }

    std::span<const double> component(int i) const {
        return {increments.data() + static_cast<std::size_t>(i - 1) * N, static_cast<std::size_t>(N)};
    }

    double total(int i) const {
        double s = 0.0;
        for (double d : component(i)) s += d;
        return s;
    }
};

inline WienerPath generate_path(int m, int N, const Interval& interval, std::uint64_t seed, std::uint64_t stream = 0) {
    if (m < 1 || N < 1) throw contract_error("path needs m >= 1 and N >= 1");
    WienerPath path;
    path.m = m;
    path.N = N;
    path.interval = interval;
    path.seed = seed;
    path.stream = stream;
    path.increments.resize(static_cast<std::size_t>(m) * N);
    auto rng = make_stream(seed, stream);
    std::normal_distribution<double> normal(0.0, 1.0);
    const double sd = std::sqrt(path.step());
    for (auto& d : path.increments) d = sd * normal(rng);
    return path;
}

// ---------------------------------------------------------------------------
// Variates

inline GaussianVariates sample_variates(int m, int p_max, const Interval& interval, std::uint64_t seed,
                                        std::uint64_t stream = 0) {
    GaussianVariates v(m, p_max, interval.length());
    auto rng = make_stream(seed, stream);
    std::normal_distribution<double> normal(0.0, 1.0);
    for (int i = 1; i <= m; ++i) {
        for (double& z : v.row(i)) z = normal(rng);
    }
    return v;
}

/// phi_j at the left grid nodes, reused across paths sharing (basis, N, interval).
class ProjectionTable {
public:
    ProjectionTable(BasisKind basis, int p_max, int N, const Interval& interval)
        : basis_(basis), p_max_(p_max), N_(N), interval_(interval),
          table_(static_cast<std::size_t>(p_max + 1) * static_cast<std::size_t>(N)) {
        if (p_max < 0 || N < 1) throw contract_error("projection needs p_max >= 0 and N >= 1");
        const double h = interval.length() / N;
        for (int j = 0; j <= p_max; ++j) {
            for (int l = 0; l < N; ++l) {
                const double tau = std::min(interval.t + h * l, interval.T);
                table_[static_cast<std::size_t>(j) * N + static_cast<std::size_t>(l)] = eval_phi(basis, j, tau, interval);
            }
        }
    }

    BasisKind basis() const noexcept { return basis_; }
    int p_max() const noexcept { return p_max_; }
    int N() const noexcept { return N_; }

    double phi(int j, int l) const { return table_[static_cast<std::size_t>(j) * N_ + static_cast<std::size_t>(l)]; }

    /// zeta_j^{(i)} = sum_l phi_j(tau_l) dw_l^{(i)} for i >= 1.
    GaussianVariates project(const WienerPath& path) const {
        if (path.N != N_ || std::abs(path.interval.length() - interval_.length()) > 1e-12 * interval_.length()) {
            throw contract_error("path grid does not match the projection table");
        }
        GaussianVariates v(path.m, p_max_, interval_.length());
        for (int i = 1; i <= path.m; ++i) {
            const auto dw = path.component(i);
            auto row = v.row(i);
            for (int j = 0; j <= p_max_; ++j) {
                const double* ph = &table_[static_cast<std::size_t>(j) * N_];
                double s = 0.0;
                for (int l = 0; l < N_; ++l) s += ph[l] * dw[static_cast<std::size_t>(l)];
                row[static_cast<std::size_t>(j)] = s;
            }
        }
        return v;
    }

private:
    BasisKind basis_;
    int p_max_;
    int N_;
    Interval interval_;
    std::vector<double> table_;
};

inline GaussianVariates project_variates(const WienerPath& path, BasisKind basis, int p_max) {
    return ProjectionTable(basis, p_max, path.N, path.interval).project(path);
}

// ---------------------------------------------------------------------------
// Discretization oracles

namespace detail {

// psi_r(tau_l) for every level r and left node l.
inline std::vector<double> weight_table(const IntegralSpec& spec, int N) {
    std::vector<double> w(static_cast<std::size_t>(spec.k()) * N);
    const double h = spec.interval.length() / N;
    for (int r = 0; r < spec.k(); ++r) {
        for (int l = 0; l < N; ++l) w[static_cast<std::size_t>(r) * N + l] = spec.weight(r, spec.interval.t + h * l);
    }
    return w;
}

inline void check_oracle(const IntegralSpec& spec, const WienerPath& path) {
    spec.validate();
    if (spec.k() > 5) throw contract_error("discretization oracles support k <= 5");
    for (int i : spec.indices) {
        if (i > path.m) throw contract_error("path does not carry every Wiener index");
    }
    if (std::abs(path.interval.length() - spec.interval.length()) > 1e-12 * spec.interval.length()) {
        throw contract_error("path interval does not match the integral");
    }
}

// Left-point sum over l_1 < ... < l_k by running partial sums:
// X_r(l+1) = X_r(l) + psi_r(tau_l) X_{r-1}(l) dw_l^{(i_r)}.
inline double ito_sum(const IntegralSpec& spec, const WienerPath& path, std::span<const double> weights) {
    const int k = spec.k();
    std::vector<double> x(static_cast<std::size_t>(k) + 1, 0.0);
    x[0] = 1.0;
    for (int l = 0; l < path.N; ++l) {
        for (int r = k; r >= 1; --r) {
            x[static_cast<std::size_t>(r)] += weights[static_cast<std::size_t>(r - 1) * path.N + l] *
                                              x[static_cast<std::size_t>(r - 1)] * path.dw(spec.indices[static_cast<std::size_t>(r - 1)], l);
        }
    }
    return x[static_cast<std::size_t>(k)];
}

// Trapezoid in the inner process at every level:
// X_r(l+1) = X_r(l) + psi_r(tau_l) (X_{r-1}(l) + X_{r-1}(l+1)) / 2 dw_l^{(i_r)}.
inline double stratonovich_sum(const IntegralSpec& spec, const WienerPath& path, std::span<const double> weights) {
    const int k = spec.k();
    std::vector<double> x(static_cast<std::size_t>(k) + 1, 0.0);
    x[0] = 1.0;
    for (int l = 0; l < path.N; ++l) {
        double below_old = 1.0;
        for (int r = 1; r <= k; ++r) {
            const auto ur = static_cast<std::size_t>(r);
            const double old = x[ur];
            const double mid = 0.5 * (below_old + x[ur - 1]);
            x[ur] += weights[(ur - 1) * path.N + l] * mid * path.dw(spec.indices[ur - 1], l);
            below_old = old;
        }
    }
    return x[static_cast<std::size_t>(k)];
}

}  // namespace detail

inline double oracle_ito(const IntegralSpec& spec, const WienerPath& path) {
    detail::check_oracle(spec, path);
    if (spec.kind != IntegralKind::ito) throw contract_error("oracle_ito needs an Ito integral");
    return detail::ito_sum(spec, path, detail::weight_table(spec, path.N));
}

inline double oracle_stratonovich(const IntegralSpec& spec, const WienerPath& path) {
    detail::check_oracle(spec, path);
    if (spec.kind != IntegralKind::stratonovich) {
        throw contract_error("oracle_stratonovich needs a Stratonovich integral");
    }
    return detail::stratonovich_sum(spec, path, detail::weight_table(spec, path.N));
}

// ---------------------------------------------------------------------------
// Monte Carlo mean-square error

struct PathRecord {
    std::uint64_t path_id = 0;
    double oracle = 0.0;
    double expansion = 0.0;

    double sq_diff() const { return (oracle - expansion) * (oracle - expansion); }
};

struct McConfig {
    IntegralSpec spec;
    BasisKind basis = BasisKind::legendre;
    std::vector<int> orders;
    int N = 1;
    std::size_t n_paths = 0;
    std::uint64_t seed = 0;
};

struct McReport {
    std::size_t n_paths = 0;
    double estimate = 0.0;
    double std_error = 0.0;
    McConfig config;
    // Filled only when requested.
    std::vector<PathRecord> paths;
};

struct McOptions {
    unsigned threads = 1;
    bool keep_paths = false;
    // Upper bound on n_paths * N * m normal draws.
    double max_draws = 2e10;
};

/// Oracle vs. expansion on shared randomness: for each path the oracle of the
/// spec's kind is compared with the matching truncated expansion evaluated on
/// the projected variates of the same path.
inline McReport mc_mse(const IntegralSpec& spec, BasisKind basis, const std::vector<int>& orders, int N,
                       std::size_t n_paths, std::uint64_t seed, const McOptions& options = {},
                       TensorCache* cache = nullptr) {
    spec.validate();
    if (n_paths == 0) throw contract_error("mc_mse needs at least one path");
    if (N < 1) throw contract_error("grid needs N >= 1");
    if (spec.k() > 5) throw contract_error("discretization oracles support k <= 5");
    if (static_cast<int>(orders.size()) != spec.k()) throw contract_error("orders must have k entries");
    if (static_cast<double>(n_paths) * N * spec.m > options.max_draws) {
        throw resource_error("Monte Carlo run exceeds the draw budget", n_paths * static_cast<std::size_t>(N) * spec.m);
    }
    TensorCache local;
    TensorCache& tc = cache ? *cache : local;
    const auto tensor = tc.get(basis, spec.weights, orders);
    const int p_max = *std::max_element(orders.begin(), orders.end());
    const ProjectionTable table(basis, p_max, N, spec.interval);
    const std::vector<double> weights = detail::weight_table(spec, N);

    std::vector<PathRecord> records(n_paths);
    parallel_for(n_paths, options.threads, [&](std::size_t n) {
        const WienerPath path = generate_path(spec.m, N, spec.interval, seed, n);
        const GaussianVariates v = table.project(path);
        PathRecord rec;
        rec.path_id = n;
        if (spec.kind == IntegralKind::ito) {
            rec.oracle = detail::ito_sum(spec, path, weights);
            rec.expansion = expand_ito(*tensor, v, spec, orders).value;
        } else {
            rec.oracle = detail::stratonovich_sum(spec, path, weights);
            rec.expansion = expand_stratonovich_sum(*tensor, v, spec, orders).value;
        }
        records[n] = rec;
    });

    McReport report;
    report.n_paths = n_paths;
    report.config = McConfig{spec, basis, orders, N, n_paths, seed};
    double sum = 0.0;
    for (const auto& r : records) sum += r.sq_diff();
    const double mean = sum / static_cast<double>(n_paths);
    double ss = 0.0;
    for (const auto& r : records) ss += (r.sq_diff() - mean) * (r.sq_diff() - mean);
    report.estimate = mean;
    report.std_error = n_paths > 1 ? std::sqrt(ss / static_cast<double>(n_paths - 1)) / std::sqrt(static_cast<double>(n_paths)) : 0.0;
    if (options.keep_paths) report.paths = std::move(records);
    return report;
}

}  // namespace strato
