#include <array>
#include <cmath>
#include <random>

#include <gtest/gtest.h>

#include "oracles.hpp"
#include "strato/expansion.hpp"
#include "strato/simulate.hpp"

using namespace strato;

namespace {

GaussianVariates random_variates(int m, int p_max, double length, std::mt19937_64& rng) {
    GaussianVariates v(m, p_max, length);
    std::normal_distribution<double> n;
    for (int i = 1; i <= m; ++i)
        for (int j = 0; j <= p_max; ++j) v.at(i, j) = n(rng);
    return v;
}

}  // namespace

TEST(Expansion, CorrectionTermLayout) {
    auto count = [](int k, int sign) {
        int n = 0;
        for (const auto& t : ito_correction_terms(k)) n += t.sign == sign;
        return n;
    };
    EXPECT_EQ(count(2, -1), 1);
    EXPECT_EQ(count(3, -1), 3);
    EXPECT_EQ(count(4, -1), 6);
    EXPECT_EQ(count(4, +1), 3);
    EXPECT_EQ(count(5, -1), 10);
    EXPECT_EQ(count(5, +1), 15);
}

TEST(Expansion, SingleIntegral) {
    const double L = 2.0;
    const auto spec = make_spec({1}, {}, 0, Interval(0.0, L));
    const auto t = coefficient_tensor(spec, BasisKind::legendre, {5});
    std::mt19937_64 rng(3);
    const auto v = random_variates(1, 5, L, rng);
    const auto r = expand_ito(t, v, spec);
    EXPECT_NEAR(r.value, std::sqrt(L) * v.at(1, 0), 1e-14);
    EXPECT_EQ(r.term_count, 6u);
    EXPECT_EQ(expand_stratonovich_sum(t, v, spec).value, r.value);
}

TEST(Expansion, ZeroVariates) {
    const auto spec = make_spec({1, 2});
    const auto t = coefficient_tensor(spec, BasisKind::legendre, {4, 4});
    const GaussianVariates zero(2, 4, 1.0);
    EXPECT_EQ(expand_ito(t, zero, spec).value, 0.0);
    EXPECT_EQ(expand_stratonovich_sum(t, zero, spec).value, 0.0);
}

TEST(Expansion, LevyAreaForm) {
    const double L = 1.7;
    const int q = 9;
    const auto spec = make_spec({1, 2}, {}, 0, Interval(0.0, L));
    const auto t = coefficient_tensor(spec, BasisKind::legendre, {q, q});
    std::mt19937_64 rng(5);
    const auto v = random_variates(2, q, L, rng);
    double s = v.at(1, 0) * v.at(2, 0);
    for (int j = 1; j <= q; ++j) {
        s += (v.at(1, j - 1) * v.at(2, j) - v.at(1, j) * v.at(2, j - 1)) / std::sqrt(4.0 * j * j - 1);
    }
    EXPECT_NEAR(expand_stratonovich_sum(t, v, spec).value, L / 2 * s, 1e-13);
}

TEST(Expansion, AgreesWithLiteralFormulas) {
    std::mt19937_64 rng(17);
    std::uniform_int_distribution<int> idx(0, 2), qd(0, 2);
    const double L = 0.8;
    for (int k = 2; k <= 5; ++k) {
        const int p = k <= 3 ? 5 : 3;
        for (int trial = 0; trial < 25; ++trial) {
            std::vector<int> indices(static_cast<std::size_t>(k)), q(static_cast<std::size_t>(k));
            for (auto& i : indices) i = trial % 4 == 0 ? 1 : idx(rng);
            for (auto& e : q) e = trial % 3 == 0 ? qd(rng) : 0;
            const auto spec = make_spec(indices, q, 2, Interval(0.0, L));
            const std::vector<int> orders(static_cast<std::size_t>(k), p);
            const auto t = coefficient_tensor(spec, BasisKind::legendre, orders);
            const auto v = random_variates(2, p, L, rng);
            const auto hand = oracle::hand_ito(t, v, indices, orders, L);
            const double got = expand_ito(t, v, spec).value;
            EXPECT_NEAR(got, hand.value, 1e-12 * std::max(hand.l1, 1e-300)) << "k=" << k << " trial=" << trial;
        }
    }
}

TEST(Expansion, RectangularOrders) {
    std::mt19937_64 rng(23);
    const std::vector<int> indices{1, 1, 2};
    const auto spec = make_spec(indices);
    const std::vector<int> orders{2, 5, 3};
    const auto t = coefficient_tensor(spec, BasisKind::legendre, orders);
    const auto v = random_variates(2, 5, 1.0, rng);
    const auto hand = oracle::hand_ito(t, v, indices, orders, 1.0);
    const auto r = expand_ito(t, v, spec);
    EXPECT_NEAR(r.value, hand.value, 1e-12 * hand.l1);
    EXPECT_EQ(r.term_count, 3u * 6 * 4);
    // Evaluating a sub-box of a larger table equals a table built at the sub-box.
    const std::vector<int> sub{1, 2, 2};
    const auto small = coefficient_tensor(spec, BasisKind::legendre, sub);
    EXPECT_NEAR(expand_ito(t, v, spec, sub).value, expand_ito(small, v, spec).value, 1e-15);
}

TEST(Expansion, DeterministicIndexRow) {
    // i_1 = 0: only j_1 = 0 survives since zeta^{(0)}_j = sqrt(L) delta_{j0}.
    const double L = 1.3;
    const auto spec = make_spec({0, 1}, {1, 0}, 0, Interval(0.0, L));
    const auto t = coefficient_tensor(spec, BasisKind::legendre, {4, 4});
    std::mt19937_64 rng(2);
    const auto v = random_variates(1, 4, L, rng);
    double expect = 0.0;
    for (int j2 = 0; j2 <= 4; ++j2) {
        const std::array<int, 2> j{0, j2};
        expect += t.value(j, L) * std::sqrt(L) * v.at(1, j2);
    }
    EXPECT_NEAR(expand_ito(t, v, spec).value, expect, 1e-14);
}

TEST(Expansion, Deterministic) {
    const auto spec = make_spec({1, 1, 2, 1});
    const auto t = coefficient_tensor(spec, BasisKind::legendre, {4, 4, 4, 4});
    const auto v = sample_variates(2, 4, Interval{}, 99);
    const double a = expand_ito(t, v, spec).value;
    const double b = expand_ito(t, v, spec).value;
    EXPECT_EQ(a, b);
}

TEST(Expansion, ContractViolations) {
    const auto spec = make_spec({1, 1});
    const auto t = coefficient_tensor(spec, BasisKind::legendre, {3, 3});
    const GaussianVariates v(1, 3, 1.0);
    EXPECT_THROW(expand_ito(t, v, spec, std::vector<int>{4, 3}), contract_error);
    EXPECT_THROW(expand_ito(t, v, make_spec({1, 1}, {1, 0})), contract_error);
    EXPECT_THROW(expand_ito(t, v, make_spec({1, 2})), contract_error);
    const GaussianVariates short_v(1, 2, 1.0);
    EXPECT_THROW(expand_ito(t, short_v, spec), contract_error);
    EXPECT_THROW(expand_ito(t, GaussianVariates(1, 3, 2.0), spec), contract_error);
}

TEST(Conversion, DoubleEqualIndices) {
    const double L = 2.5;
    const auto spec = make_spec({1, 1}, {}, 0, Interval(0.0, L), IntegralKind::stratonovich);
    const std::vector<int> orders{6, 6};
    const auto v = sample_variates(1, 6, spec.interval, 4);
    const auto ito = expand_ito(coefficient_tensor(spec, BasisKind::legendre, orders), v, spec);
    EXPECT_NEAR(stratonovich_from_ito(spec, BasisKind::legendre, orders, v).value, ito.value + 0.5 * L, 1e-13);
}

TEST(Conversion, DistinctIndicesUnchanged) {
    const auto spec = make_spec({1, 2}, {}, 0, Interval{}, IntegralKind::stratonovich);
    const auto v = sample_variates(2, 5, spec.interval, 4);
    const auto ito = expand_ito(coefficient_tensor(spec, BasisKind::legendre, {5, 5}), v, spec);
    const StratonovichConversion conv(spec, BasisKind::legendre, {5, 5});
    EXPECT_TRUE(conv.corrections().empty());
    EXPECT_EQ(conv.evaluate(v).value, ito.value);
}

TEST(Conversion, TripleWithOneAdjacentPair) {
    const auto spec = make_spec({1, 1, 2}, {}, 0, Interval{}, IntegralKind::stratonovich);
    const std::vector<int> orders{4, 4, 4};
    const StratonovichConversion conv(spec, BasisKind::legendre, orders);
    ASSERT_EQ(conv.corrections().size(), 1u);
    const auto& c = conv.corrections().front();
    EXPECT_EQ(c.tuple.s, std::vector<int>{1});
    EXPECT_EQ(c.reduced.indices, (std::vector<int>{0, 2}));
    EXPECT_EQ(c.factor, 0.5);
    const auto v = sample_variates(2, 4, spec.interval, 8);
    const double ito = expand_ito(conv.tensor(), v, spec).value;
    const double corr = expand_ito(coefficient_tensor(c.reduced, BasisKind::legendre, c.orders), v, c.reduced).value;
    EXPECT_NEAR(conv.evaluate(v).value, ito + 0.5 * corr, 1e-14);
}

TEST(Conversion, MergedWeightsAndDeterministicShortcut) {
    // k = 4 with all indices equal: A_{4,1} = {1,2,3}, A_{4,2} = {(3,1)}; the
    // (3,1) reduction leaves two dtau slots, an exact deterministic integral.
    const auto spec = make_spec({1, 1, 1, 1}, {1, 0, 2, 0}, 0, Interval(0.0, 1.5), IntegralKind::stratonovich);
    const StratonovichConversion conv(spec, BasisKind::legendre, {3, 3, 3, 3});
    ASSERT_EQ(conv.corrections().size(), 4u);
    const auto& last = conv.corrections().back();
    EXPECT_EQ(last.tuple.s, (std::vector<int>{3, 1}));
    EXPECT_EQ(last.factor, 0.25);
    ASSERT_TRUE(last.deterministic);
    EXPECT_EQ(last.reduced.weights, (std::vector<WeightSpec>{{1}, {2}}));
    // int_0^L (-s)^2 int_0^s (-u) du ds = -L^5 / 10
    EXPECT_NEAR(*last.deterministic, -std::pow(1.5, 5) / 10, 1e-14);
    EXPECT_EQ(conv.corrections()[1].reduced.weights, (std::vector<WeightSpec>{{1}, {2}, {0}}));
}

TEST(Conversion, PreconditionErrors) {
    EXPECT_THROW(StratonovichConversion(make_spec({1, 1}), BasisKind::legendre, {2, 2}), contract_error);
    const auto six = make_spec({1, 1, 1, 1, 1, 1}, {}, 0, Interval{}, IntegralKind::stratonovich);
    EXPECT_THROW(StratonovichConversion(six, BasisKind::legendre, std::vector<int>(6, 1)), contract_error);
}

TEST(HypothesisGap, VanishesWithoutCorrections) {
    const auto s1 = make_spec({1}, {2}, 0, Interval{}, IntegralKind::stratonovich);
    const auto v1 = sample_variates(1, 6, Interval{}, 1);
    EXPECT_EQ(hypothesis_gap(s1, BasisKind::legendre, {6}, v1), 0.0);
    const auto s2 = make_spec({2, 1}, {1, 0}, 0, Interval{}, IntegralKind::stratonovich);
    const auto v2 = sample_variates(2, 6, Interval{}, 1);
    EXPECT_EQ(hypothesis_gap(s2, BasisKind::trigonometric, {6, 6}, v2), 0.0);
}

TEST(HypothesisGap, TraceIdentityWithUnitVariates) {
    // All zeta = 1: the gap reduces to sum_j C_jj - L/2, and sum_j C_jj = L/2
    // for every order since C_jj vanishes for j >= 1.
    const double L = 0.6;
    const auto spec = make_spec({1, 1}, {}, 0, Interval(0.0, L), IntegralKind::stratonovich);
    for (int q : {0, 1, 5, 20}) {
        GaussianVariates v(1, q, L);
        for (int j = 0; j <= q; ++j) v.at(1, j) = 1.0;
        EXPECT_NEAR(hypothesis_gap(spec, BasisKind::legendre, {q, q}, v), 0.0, 1e-14);
    }
}

TEST(HypothesisGap, ShrinksForWeightedIntegrals) {
    const auto spec = make_spec({1, 1}, {1, 0}, 0, Interval{}, IntegralKind::stratonovich);
    double prev = INFINITY;
    for (int p : {2, 8, 32}) {
        const HypothesisGap gap(spec, BasisKind::legendre, {p, p});
        double s = 0.0;
        for (int n = 0; n < 500; ++n) {
            const double g = gap(sample_variates(1, p, Interval{}, 7, static_cast<std::uint64_t>(n)));
            s += g * g;
        }
        s /= 500;
        EXPECT_LT(s, prev) << p;
        prev = s;
    }
    EXPECT_LT(prev, 1e-4);
}
