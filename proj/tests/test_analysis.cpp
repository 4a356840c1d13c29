#include <cmath>
#include <random>

#include <gtest/gtest.h>

#include "support.hpp"
#include "tollcap/tollcap.hpp"

using namespace tollcap;

TEST(Bounds, Poly) {
    EXPECT_DOUBLE_EQ(bound_poly(1), 8.0 / 7.0);
    EXPECT_NEAR(bound_poly(3), 1.0 / (1.0 - 3.0 / (2.0 * std::pow(4.0, 4.0 / 3.0))), 1e-15);
    EXPECT_NEAR(bound_poly(3), 1.3093, 1e-4);
    double prev = 1.0;
    for (int d = 1; d <= 60; ++d) {
        EXPECT_GT(bound_poly(d), prev);
        EXPECT_LT(bound_poly(d), 2.0);
        prev = bound_poly(d);
    }
    EXPECT_NEAR(bound_poly(100000), 2.0, 1e-3);
    EXPECT_THROW(bound_poly(0), DomainError);
}

TEST(Bounds, ComposesFromMuTwo) {
    for (int d = 1; d <= 8; ++d)
        EXPECT_NEAR(bound_poly(d), 1.0 / (1.0 - mu2_bound(d)), 1e-14);
}

TEST(Bounds, Nonexistence) {
    const double p3 = std::pow(4.0, 4.0 / 3.0);
    EXPECT_NEAR(lower_bound_nonexistence(3), p3 / (p3 - 2.0), 1e-15);
    EXPECT_NEAR(lower_bound_nonexistence(3), 1.4598, 1e-4);
    const double p10 = std::pow(11.0, 1.1);
    EXPECT_NEAR(lower_bound_nonexistence(10), p10 / (p10 - 9.0), 1e-15);
    EXPECT_GT(lower_bound_nonexistence(10), lower_bound_nonexistence(3));
    for (int d = 4; d <= 40; ++d)
        EXPECT_GT(lower_bound_nonexistence(d), lower_bound_nonexistence(d - 1));
    EXPECT_THROW(lower_bound_nonexistence(2), DomainError);
}

TEST(Bounds, NonexistenceMatchesCappedFlow) {
    // x(c) = (2/3, 1/3) below the threshold; its cost over C(x*) is the bound
    const int d = 3;
    const auto inst = preset_fig_poly(d);
    const std::vector<double> capped{2.0 / 3.0, 1.0 / 3.0};
    const auto r = efficiency_ratio(inst, capped);
    EXPECT_NEAR(r.ratio, lower_bound_nonexistence(d), 1e-9);
    EXPECT_EQ(r.bound_kind, BoundKind::poly_d);
}

TEST(Efficiency, Examples) {
    const auto aff = preset_fig_aff(2);
    const auto r = efficiency_ratio(aff, std::vector<double>{0.5, 0.5});
    EXPECT_NEAR(r.ratio, 8.0 / 7.0, 1e-12);
    EXPECT_EQ(r.bound_kind, BoundKind::affine_8_7);

    const auto bad = efficiency_ratio(preset_fig_bad(2.0), kInf);
    EXPECT_NEAR(bad.cost_at_cap, 19.0 / 27.0, 1e-12);
    EXPECT_NEAR(bad.cost_opt, 2.0 / 3.0, 1e-12);
    EXPECT_NEAR(bad.ratio, 19.0 / 18.0, 1e-12);
    EXPECT_FALSE(bad.bound_applies);

    const Instance sym({LatencyFunction::affine(1, 0), LatencyFunction::affine(1, 0)});
    for (double c : {0.0, 0.5, kInf})
        EXPECT_NEAR(efficiency_ratio(sym, c).ratio, 1.0, 1e-12);

    const auto alg = efficiency_ratio(preset_fig_alg(), 1.0);
    EXPECT_NEAR(alg.ratio, 1.0, 1e-12);
    EXPECT_TRUE(alg.bound_applies);

    const auto three = efficiency_ratio(preset_fig_mul(0.5), std::vector<double>{0.5, 0.5, 0.0});
    EXPECT_EQ(three.bound_kind, BoundKind::none);
}

TEST(Efficiency, ZeroCostIsUndefined) {
    const Instance empty({LatencyFunction::affine(1, 0), LatencyFunction::affine(1, 0)}, 0.0);
    EXPECT_THROW(efficiency_ratio(empty, std::vector<double>{0.0, 0.0}), DomainError);
}

TEST(Efficiency, AffineDuopoliesWithinBound) {
    std::mt19937_64 rng(61);
    for (int k = 0; k < 200; ++k) {
        const auto inst = support::random_full_support(rng, 2);
        const auto best = optimal_cap(inst);
        const auto r = efficiency_ratio(inst, best.c_star);
        EXPECT_GE(r.ratio, 1.0 - 1e-9);
        EXPECT_TRUE(r.bound_applies);
        EXPECT_LE(r.ratio, 8.0 / 7.0 + 1e-6);
    }
}

TEST(Smoothness, MuOneExamples) {
    EXPECT_NEAR(mu1_estimate(LatencyFunction::affine(1, 0)), 0.25, 1e-4);
    EXPECT_LT(mu1_estimate(LatencyFunction::affine(1, 5)), 0.25);
    EXPECT_NEAR(mu1_estimate(LatencyFunction::monomial(1, 2, 0)), 2.0 / std::pow(3.0, 1.5), 1e-4);
    EXPECT_THROW(mu1_estimate(LatencyFunction::constant(0.0)), DomainError);
    EXPECT_NEAR(mu1_estimate(LatencyFunction::constant(1.0)), 0.0, 1e-15);
}

TEST(Smoothness, MuTwoExamples) {
    EXPECT_LE(mu2_estimate(LatencyFunction::affine(1, 0)), 0.125 + 1e-4);
    EXPECT_NEAR(mu2_estimate(LatencyFunction::constant(2.0)), 0.0, 1e-15);
    EXPECT_LE(mu2_estimate(LatencyFunction::monomial(1, 2, 0)), 2.0 / (2.0 * std::pow(3.0, 1.5)) + 1e-4);
    EXPECT_THROW(mu2_estimate(LatencyFunction::constant(0.0)), DomainError);
}

TEST(Smoothness, MonomialsBelowClassBounds) {
    for (int d = 1; d <= 4; ++d) {
        const auto l = LatencyFunction::monomial(1.0, d, 0.0);
        const double m1 = mu1_estimate(l);
        const double m2 = mu2_estimate(l);
        EXPECT_LE(m1, mu1_bound(d) + 1e-3);
        EXPECT_LE(m2, mu2_bound(d) + 1e-3);
        EXPECT_GE(m1, 0.0);
        EXPECT_LE(m1, 1.0);
        EXPECT_GE(m2, 0.0);
        EXPECT_LE(m2, 1.0);
    }
}

TEST(Smoothness, RandomPolynomialsInUnitRange) {
    std::mt19937_64 rng(67);
    std::uniform_real_distribution<double> coef(0.0, 2.0);
    for (int k = 0; k < 20; ++k) {
        const auto l = LatencyFunction::polynomial({{0, coef(rng)}, {1, coef(rng)}, {2, coef(rng)}, {3, coef(rng)}});
        const double m1 = mu1_estimate(l, 128);
        const double m2 = mu2_estimate(l, 128);
        EXPECT_GE(m1, 0.0);
        EXPECT_LE(m1, mu1_bound(3) + 1e-3);
        EXPECT_GE(m2, 0.0);
        EXPECT_LE(m2, mu2_bound(3) + 1e-3);
    }
}
