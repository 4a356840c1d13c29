#ifndef TOLLCAP_ANALYSIS_HPP_
#define TOLLCAP_ANALYSIS_HPP_

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <functional>
#include <span>
#include <vector>

#include "tollcap/capalg.hpp"
#include "tollcap/error.hpp"
#include "tollcap/latency.hpp"
#include "tollcap/model.hpp"
#include "tollcap/wardrop.hpp"

namespace tollcap {

enum class BoundKind { affine_8_7, poly_d, general_2, none };

inline const char* to_string(BoundKind k) {
    switch (k) {
        case BoundKind::affine_8_7: return "affine_8_7";
        case BoundKind::poly_d: return "poly_d";
        case BoundKind::general_2: return "general_2";
        case BoundKind::none: return "none";
    }
    return "?";
}

/// (1 - d / (2 (d+1)^((d+1)/d)))^{-1}: worst ratio at the optimal cap for
/// duopolies with polynomial latencies of degree at most d.
inline double bound_poly(int d) {
    if (d < 1)
        throw DomainError("polynomial degree must be at least 1");
    const double dd = d;
    return 1.0 / (1.0 - dd / (2.0 * std::pow(dd + 1.0, (dd + 1.0) / dd)));
}

/// d / (d+1)^((d+1)/d), the class-level value of mu_1 for degree-d polynomials.
inline double mu1_bound(int d) {
    if (d < 1)
        throw DomainError("polynomial degree must be at least 1");
    const double dd = d;
    return dd / std::pow(dd + 1.0, (dd + 1.0) / dd);
}

/// Half of mu1_bound(d): the class-level bound on mu_2.
inline double mu2_bound(int d) { return 0.5 * mu1_bound(d); }

/// Ratio forced at any existing equilibrium by x^d against the constant
/// ((d-1)/d)^d, for which no uncapped duopoly equilibrium exists (d >= 3).
inline double lower_bound_nonexistence(int d) {
    if (d < 3)
        throw DomainError("the nonexistence family needs degree d >= 3");
    const double dd = d;
    const double p = std::pow(dd + 1.0, (dd + 1.0) / dd);
    return p / (p - (dd - 1.0));
}

struct EfficiencyReport {
    double cost_opt = 0.0;
    double cost_at_cap = 0.0;
    double ratio = 1.0;
    double bound = kInf;
    BoundKind bound_kind = BoundKind::none;
    bool bound_applies = false;  // the evaluated cap is optimal and the bound's hypotheses hold
};

namespace detail {

inline void classify_bound(const Instance& inst, EfficiencyReport& r) {
    if (inst.size() != 2) {
        r.bound_kind = BoundKind::none;
        r.bound = kInf;
        return;
    }
    int degree = 0;
    for (const auto& l : inst.links())
        degree = std::max(degree, l.degree());
    if (degree <= 1) {
        r.bound_kind = BoundKind::affine_8_7;
        r.bound = bound_poly(1);
    } else {
        r.bound_kind = BoundKind::poly_d;
        r.bound = bound_poly(degree);
    }
}

}  // namespace detail

/// C(x) / C(x*) for a flow obtained elsewhere (e.g. a verified equilibrium).
inline EfficiencyReport efficiency_ratio(const Instance& inst, std::span<const double> flow_at_cap,
                                         bool at_optimal_cap = false) {
    EfficiencyReport r;
    r.cost_opt = total_cost(inst, optimal_flow(inst).flow);
    if (!(r.cost_opt > 0.0))
        throw DomainError("efficiency ratio is undefined when the optimal cost is zero");
    r.cost_at_cap = total_cost(inst, flow_at_cap);
    r.ratio = r.cost_at_cap / r.cost_opt;
    detail::classify_bound(inst, r);
    r.bound_applies = at_optimal_cap && r.bound_kind != BoundKind::none;
    return r;
}

/// C(x(c)) / C(x*) on the exact affine path (c may be kInf).
inline EfficiencyReport efficiency_ratio(const Instance& inst, double c) {
    if (std::isnan(c) || c < 0.0)
        throw DomainError("cap must be nonnegative");
    const auto best = optimal_cap(inst);
    const double cost = best.curve.cost_at(c);
    auto r = efficiency_ratio(inst, best.curve.flow_at(c));
    r.cost_at_cap = cost;
    r.ratio = cost / r.cost_opt;
    r.bound_applies = r.bound_kind != BoundKind::none &&
                      std::abs(cost - best.cost_at_star) <= 1e-12 * std::max(1.0, best.cost_at_star);
    return r;
}

namespace detail {

/// Golden-section maximum of f on [a, b]; returns {argmax, max}.
inline std::pair<double, double> golden_max(const std::function<double(double)>& f, double a, double b,
                                            int iters = 100) {
    constexpr double kInvPhi = 0.6180339887498949;
    double x1 = b - kInvPhi * (b - a);
    double x2 = a + kInvPhi * (b - a);
    double f1 = f(x1);
    double f2 = f(x2);
    for (int it = 0; it < iters; ++it) {
        if (f1 < f2) {
            a = x1;
            x1 = x2;
            f1 = f2;
            x2 = a + kInvPhi * (b - a);
            f2 = f(x2);
        } else {
            b = x2;
            x2 = x1;
            f2 = f1;
            x1 = b - kInvPhi * (b - a);
            f1 = f(x1);
        }
    }
    std::pair<double, double> best{a, f(a)};
    for (auto cand : {std::pair{b, f(b)}, std::pair{x1, f1}, std::pair{x2, f2}})
        if (cand.second > best.second)
            best = cand;
    return best;
}

/// Sup of g over a grid of x on [x_lo, x_hi], refined around the best cell.
inline double grid_sup(const std::function<double(double)>& g, double x_lo, double x_hi, int grid_n) {
    grid_n = std::max(grid_n, 2);
    const double h = (x_hi - x_lo) / grid_n;
    int best_k = 0;
    double best = -kInf;
    for (int k = 0; k <= grid_n; ++k) {
        const double v = g(x_lo + h * k);
        if (v > best) {
            best = v;
            best_k = k;
        }
    }
    const double a = std::max(x_lo, x_lo + h * (best_k - 1));
    const double b = std::min(x_hi, x_lo + h * (best_k + 1));
    return std::max(best, golden_max(g, a, b).second);
}

inline void require_nonzero(const LatencyFunction& l) {
    const bool zero = std::all_of(l.terms().begin(), l.terms().end(), [](const Term& t) { return t.coeff == 0.0; });
    if (zero)
        throw DomainError("smoothness parameters are undefined for the zero latency");
}

}  // namespace detail

/*!
 * \brief Numeric estimate of
 *   mu_1(l) = sup_{x, y >= 0} (l(x) - l(y)) y / (l(x) x).
 *
 * The sup is taken over x in (0, 10]: for pure monomials the ratio is
 * scale-invariant and for a positive intercept it decreases past the
 * monomial optimum. For fixed x the numerator is concave in y on [0, x]
 * (l convex), so the inner sup is an exact golden-section search.
 */
inline double mu1_estimate(const LatencyFunction& l, int grid_n = 512) {
    detail::require_nonzero(l);
    constexpr double kMax = 10.0;
    auto ratio = [&](double x) {
        if (x <= 0.0)
            return 0.0;
        const double lx = l.eval(x);
        const auto inner = detail::golden_max([&](double y) { return (lx - l.eval(y)) * y; }, 0.0, x);
        return std::max(0.0, inner.second) / (lx * x);
    };
    return std::clamp(detail::grid_sup(ratio, kMax / grid_n, kMax, grid_n), 0.0, 1.0);
}

/*!
 * \brief Numeric estimate of
 *   mu_2(l) = sup_{x >= 1/2, 0 <= y <= x} (l(x) - l(y)) (y + 1 - 2x) / l(x)
 * with x restricted to [1/2, 1] (unit demand).
 */
inline double mu2_estimate(const LatencyFunction& l, int grid_n = 512) {
    detail::require_nonzero(l);
    auto ratio = [&](double x) {
        const double lx = l.eval(x);
        const double lo = std::max(0.0, 2.0 * x - 1.0);
        if (lx <= 0.0 || lo >= x)
            return 0.0;
        const auto inner = detail::golden_max([&](double y) { return (lx - l.eval(y)) * (y + 1.0 - 2.0 * x); }, lo, x);
        return std::max(0.0, inner.second) / lx;
    };
    return std::clamp(detail::grid_sup(ratio, 0.5, 1.0, grid_n), 0.0, 1.0);
}

}  // namespace tollcap

#endif  // TOLLCAP_ANALYSIS_HPP_
