#include <cmath>
#include <random>

#include <gtest/gtest.h>

#include "tollcap/latency.hpp"
#include "tollcap/model.hpp"

using namespace tollcap;

TEST(Latency, AffineEvaluates) {
    const auto l = LatencyFunction::affine(2.0, 0.5);
    EXPECT_DOUBLE_EQ(l.eval(0.0), 0.5);
    EXPECT_DOUBLE_EQ(l.eval(1.5), 3.5);
    EXPECT_DOUBLE_EQ(l.derivative(0.7), 2.0);
    EXPECT_TRUE(l.is_affine());
    EXPECT_TRUE(l.is_strictly_increasing());
    EXPECT_EQ(l.kind(), LatencyKind::affine);
}

TEST(Latency, MonomialAndPolynomial) {
    const auto m = LatencyFunction::monomial(1.0, 3, 0.2);
    EXPECT_NEAR(m.eval(2.0), 8.2, 1e-15);
    EXPECT_NEAR(m.derivative(2.0), 12.0, 1e-15);
    const auto p = LatencyFunction::polynomial({{1, 1.0}, {0, 0.5}, {2, 0.0}, {1, 1.0}});
    EXPECT_EQ(p.degree(), 1);
    EXPECT_DOUBLE_EQ(p.coefficient(1), 2.0);
    EXPECT_DOUBLE_EQ(p.eval(1.0), 2.5);
    EXPECT_TRUE(p.is_affine());
}

TEST(Latency, ConstantIsNotStrict) {
    const auto c = LatencyFunction::constant(0.25);
    EXPECT_TRUE(c.is_constant());
    EXPECT_FALSE(c.is_strictly_increasing());
    EXPECT_FALSE(c.is_affine());
    EXPECT_DOUBLE_EQ(c.eval(10.0), 0.25);
    EXPECT_DOUBLE_EQ(c.invert(0.25), 0.0);
    EXPECT_THROW(c.invert(0.3), DomainError);
}

TEST(Latency, RejectsBadArguments) {
    const auto l = LatencyFunction::affine(1.0, 1.0);
    EXPECT_THROW(l.eval(-0.1), DomainError);
    EXPECT_THROW(l.eval(std::nan("")), DomainError);
    EXPECT_THROW(l.invert(0.5), DomainError);
    EXPECT_THROW(LatencyFunction::monomial(1.0, 0, 0.0), DomainError);
    EXPECT_THROW(LatencyFunction::affine(-1.0, 0.0), DomainError);
    EXPECT_THROW(LatencyFunction::polynomial({{-1, 1.0}}), DomainError);
}

TEST(Latency, MarginalCost) {
    const auto l = LatencyFunction::polynomial({{0, 0.5}, {1, 1.0}, {3, 2.0}});
    const auto m = l.marginal();
    for (double x : {0.0, 0.3, 1.7})
        EXPECT_NEAR(m.eval(x), l.eval(x) + x * l.derivative(x), 1e-12);
}

TEST(Latency, InversionRoundTrips) {
    std::mt19937_64 rng(7);
    std::uniform_real_distribution<double> coef(0.0, 3.0);
    std::uniform_real_distribution<double> pos(0.0, 4.0);
    for (int k = 0; k < 300; ++k) {
        std::vector<Term> terms{{0, coef(rng)}, {1, coef(rng)}, {2, coef(rng) * (k % 2)}, {4, coef(rng) * (k % 3 == 0)}};
        const auto l = LatencyFunction::polynomial(terms);
        if (!l.is_strictly_increasing())
            continue;
        const double x = pos(rng);
        EXPECT_NEAR(l.invert(l.eval(x)), x, 1e-9 * std::max(1.0, x));
    }
    const auto a = LatencyFunction::affine(2.0, 1.0);
    EXPECT_DOUBLE_EQ(a.invert(5.0), 2.0);
    const auto m = LatencyFunction::monomial(2.0, 3, 1.0);
    EXPECT_NEAR(m.invert(17.0), 2.0, 1e-14);
}

TEST(Latency, MonotoneAndConvexOnSamples) {
    std::mt19937_64 rng(11);
    std::uniform_real_distribution<double> coef(0.0, 2.0);
    for (int k = 0; k < 100; ++k) {
        const auto l = LatencyFunction::polynomial({{0, coef(rng)}, {1, coef(rng)}, {2, coef(rng)}, {3, coef(rng)}});
        double prev = l.eval(0.0);
        double prev_slope = l.derivative(0.0);
        for (int s = 1; s <= 50; ++s) {
            const double x = 0.1 * s;
            EXPECT_GE(l.eval(x), prev);
            EXPECT_GE(l.derivative(x), prev_slope - 1e-12);
            prev = l.eval(x);
            prev_slope = l.derivative(x);
        }
    }
}

TEST(Latency, DerivativeMatchesFiniteDifference) {
    const auto l = LatencyFunction::polynomial({{0, 0.3}, {1, 0.7}, {2, 1.1}, {5, 0.2}});
    for (double x : {0.1, 0.5, 1.3, 2.0}) {
        const double h = 1e-6;
        EXPECT_NEAR(l.derivative(x), (l.eval(x + h) - l.eval(x - h)) / (2 * h), 1e-6);
    }
}

TEST(Model, InstanceAndTolls) {
    const Instance inst({LatencyFunction::affine(1, 0), LatencyFunction::affine(1, 0.5)});
    EXPECT_EQ(inst.size(), 2u);
    EXPECT_TRUE(inst.all_affine());
    EXPECT_THROW(Instance({LatencyFunction::affine(1, 0)}, -1.0), DomainError);
    EXPECT_THROW(TollVector({0.5, 1.5}, 1.0), DomainError);
    EXPECT_THROW(TollVector({-0.1, 0.0}), DomainError);
    const TollVector t({0.2, 0.3}, 0.5);
    EXPECT_DOUBLE_EQ(t.with(1, 0.5)[1], 0.5);
    EXPECT_THROW(t.with(0, 0.6), DomainError);
    EXPECT_DOUBLE_EQ(total_cost(inst, std::vector<double>{0.75, 0.25}), 0.75 * 0.75 + 0.75 * 0.25);
    EXPECT_THROW(total_cost(inst, std::vector<double>{1.0}), ShapeError);
    EXPECT_TRUE(is_feasible(inst, std::vector<double>{0.4, 0.6}));
    EXPECT_FALSE(is_feasible(inst, std::vector<double>{0.4, 0.5}));
}
