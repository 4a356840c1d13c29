#ifndef TOLLCAP_WARDROP_HPP_
#define TOLLCAP_WARDROP_HPP_

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <numeric>
#include <span>
#include <vector>

#include "tollcap/error.hpp"
#include "tollcap/latency.hpp"
#include "tollcap/model.hpp"

namespace tollcap {

struct WardropSolution {
    Flow flow;
    std::vector<std::size_t> support;  // links with x_i > kSupportTolerance
    double level = 0.0;                // common effective cost K on the support
};

namespace detail {

inline bool same_level(double a, double b) {
    return std::abs(a - b) <= 1e-12 * std::max({1.0, std::abs(a), std::abs(b)});
}

/*!
 * \brief Equalizes cost_i(x_i) + offset_i over the used links.
 *
 * Finds the level K where the total supply
 *   S(K) = sum_i max(0, cost_i^{-1}(K - offset_i))
 * meets the demand. Constant costs act as reservoirs: once K reaches the
 * cheapest constant level L, any remaining demand is split evenly among
 * the constant links tied at L. Strictly increasing costs are handled by
 * an exact segment walk when all of them are affine, and by a safeguarded
 * Newton iteration on K otherwise.
 */
inline WardropSolution equalize(std::span<const LatencyFunction> cost, std::span<const double> offset,
                                double demand) {
    const std::size_t n = cost.size();
    WardropSolution sol;
    sol.flow.x.assign(n, 0.0);

    std::vector<double> base(n);
    std::vector<std::size_t> strict;
    std::vector<std::size_t> constants;
    double reservoir = kInf;
    for (std::size_t i = 0; i < n; ++i) {
        if (!std::isfinite(offset[i]))
            throw DomainError("tolls must be finite");
        base[i] = cost[i].constant_term() + offset[i];
        if (cost[i].is_strictly_increasing()) {
            strict.push_back(i);
        } else {
            constants.push_back(i);
            reservoir = std::min(reservoir, base[i]);
        }
    }

    if (demand == 0.0) {
        sol.level = *std::min_element(base.begin(), base.end());
        sol.flow.effective_cost = sol.level;
        return sol;
    }

    auto supply = [&](double level) {
        double s = 0.0;
        for (std::size_t i : strict)
            if (level > base[i])
                s += cost[i].invert(level - offset[i]);
        return s;
    };

    double level = kInf;
    bool spill = false;
    if (strict.empty() || (reservoir < kInf && supply(reservoir) <= demand)) {
        level = reservoir;
        spill = true;
    } else {
        std::sort(strict.begin(), strict.end(), [&](std::size_t a, std::size_t b) { return base[a] < base[b]; });
        const bool affine = std::all_of(strict.begin(), strict.end(),
                                        [&](std::size_t i) { return cost[i].is_affine(); });
        if (affine) {
            double inv_sum = 0.0;
            double weighted = 0.0;
            for (std::size_t m = 0; m < strict.size(); ++m) {
                const std::size_t i = strict[m];
                inv_sum += 1.0 / cost[i].slope();
                weighted += base[i] / cost[i].slope();
                level = (demand + weighted) / inv_sum;
                if (m + 1 == strict.size() || level <= base[strict[m + 1]])
                    break;
            }
        } else {
            double lo = base[strict.front()];
            double hi = -kInf;
            for (std::size_t i : strict)
                hi = std::max(hi, cost[i].eval(demand) + offset[i]);
            hi = std::min(hi, reservoir);
            double k = hi;
            for (int it = 0; it < 300; ++it) {
                double s = 0.0;
                double ds = 0.0;
                bool flat = false;
                for (std::size_t i : strict) {
                    if (k > base[i]) {
                        const double xi = cost[i].invert(k - offset[i]);
                        s += xi;
                        const double d = cost[i].derivative(xi);
                        if (d > 0.0)
                            ds += 1.0 / d;
                        else
                            flat = true;
                    }
                }
                const double f = s - demand;
                if (f == 0.0)
                    break;
                if (f < 0.0)
                    lo = k;
                else
                    hi = k;
                double next = (!flat && ds > 0.0) ? k - f / ds : 0.5 * (lo + hi);
                if (!(next > lo && next < hi))
                    next = 0.5 * (lo + hi);
                if (next == k || hi - lo <= 2 * std::numeric_limits<double>::epsilon() * std::max(1.0, std::abs(hi)))
                    break;
                k = next;
            }
            level = k;
        }
    }

    double routed = 0.0;
    for (std::size_t i : strict) {
        if (level > base[i]) {
            sol.flow.x[i] = cost[i].invert(level - offset[i]);
            routed += sol.flow.x[i];
        }
    }
    if (spill) {
        std::vector<std::size_t> tied;
        for (std::size_t i : constants)
            if (same_level(base[i], reservoir))
                tied.push_back(i);
        const double residual = std::max(0.0, demand - routed) / static_cast<double>(tied.size());
        for (std::size_t i : tied)
            sol.flow.x[i] = residual;
    }

    sol.level = level;
    sol.flow.effective_cost = level;
    for (std::size_t i = 0; i < n; ++i)
        if (sol.flow.x[i] > kSupportTolerance)
            sol.support.push_back(i);
    return sol;
}

}  // namespace detail

/// Unique Wardrop equilibrium x(t) for the toll vector t.
inline WardropSolution solve_wardrop(const Instance& inst, std::span<const double> tolls) {
    require_size(inst, tolls.size(), "toll vector");
    for (double t : tolls)
        if (!std::isfinite(t) || t < 0.0)
            throw DomainError("tolls must be finite and nonnegative");
    return detail::equalize(inst.links(), tolls, inst.demand());
}

inline WardropSolution solve_wardrop(const Instance& inst, const TollVector& tolls) {
    return solve_wardrop(inst, tolls.values());
}

inline WardropSolution solve_wardrop(const Instance& inst) {
    return solve_wardrop(inst, std::vector<double>(inst.size(), 0.0));
}

/*!
 * \brief System optimum x*, by equalizing marginal costs l_i(x) + x*l_i'(x).
 * The returned level is the common marginal cost K*.
 */
inline WardropSolution optimal_flow(const Instance& inst) {
    std::vector<LatencyFunction> marginal;
    marginal.reserve(inst.size());
    for (const auto& l : inst.links())
        marginal.push_back(l.marginal());
    const std::vector<double> zero(inst.size(), 0.0);
    return detail::equalize(marginal, zero, inst.demand());
}

/*!
 * \brief Checks the Wardrop condition for a given flow.
 *
 * On parallel links the variational inequality reduces to single-link
 * reroutes: every used link must be no more expensive than any other
 * link, up to eps.
 */
inline bool verify_wardrop(const Instance& inst, std::span<const double> tolls, std::span<const double> x,
                           double eps) {
    require_size(inst, tolls.size(), "toll vector");
    if (!is_feasible(inst, x))
        throw PreconditionError("flow is not feasible for the instance");
    double cheapest = kInf;
    std::vector<double> effective(x.size());
    for (std::size_t i = 0; i < x.size(); ++i) {
        effective[i] = inst.link(i).eval(std::max(0.0, x[i])) + tolls[i];
        cheapest = std::min(cheapest, effective[i]);
    }
    for (std::size_t i = 0; i < x.size(); ++i)
        if (x[i] > kSupportTolerance && effective[i] > cheapest + eps)
            return false;
    return true;
}

inline bool verify_wardrop(const Instance& inst, const TollVector& tolls, const Flow& flow, double eps) {
    return verify_wardrop(inst, tolls.values(), flow.x, eps);
}

}  // namespace tollcap

#endif  // TOLLCAP_WARDROP_HPP_
