#ifndef TOLLCAP_CAPALG_HPP_
#define TOLLCAP_CAPALG_HPP_

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <numeric>
#include <span>
#include <string>
#include <vector>

#include "tollcap/error.hpp"
#include "tollcap/model.hpp"
#include "tollcap/validate.hpp"

namespace tollcap {

/// value(c) = constant + slope * c
struct AffineMap {
    double constant = 0.0;
    double slope = 0.0;

    double operator()(double c) const { return slope == 0.0 ? constant : constant + slope * c; }
};

/// value(c) = q0 + q1 * c + q2 * c^2
struct Quadratic {
    double q0 = 0.0;
    double q1 = 0.0;
    double q2 = 0.0;

    double operator()(double c) const {
        if (q1 == 0.0 && q2 == 0.0)
            return q0;
        return q0 + c * (q1 + c * q2);
    }
};

/*!
 * \brief One piece of the equilibrium path c -> (t(c), x(c), K(c)).
 *
 * On [lo, hi] the firms in `binding` charge exactly the cap while every
 * other firm i charges its markup (a_i + h_i) x_i(c), with
 * h_i = 1 / sum_{l != i} 1/a_l. Flows, tolls and the level are affine in
 * c; the total latency cost is quadratic. The first piece is unbounded
 * above (hi = kInf) and does not depend on c.
 */
struct CapInterval {
    double lo = 0.0;
    double hi = kInf;
    std::vector<std::size_t> binding;  // sorted link indices
    AffineMap level;
    std::vector<AffineMap> flow;
    std::vector<AffineMap> toll;
    Quadratic cost;

    bool contains(double c) const { return c >= lo && c <= hi; }
    bool is_binding(std::size_t i) const { return std::binary_search(binding.begin(), binding.end(), i); }
};

struct CapCurve {
    std::vector<CapInterval> intervals;  // ordered by decreasing cap
    std::vector<double> breakpoints;     // c_1 > c_2 > ... > c_j
    std::vector<double> markup;          // a_i + h_i per link

    const CapInterval& locate(double c) const {
        if (std::isnan(c) || c < 0.0)
            throw DomainError("cap must be nonnegative");
        for (const auto& iv : intervals)
            if (c >= iv.lo)
                return iv;
        return intervals.back();
    }

    std::vector<double> flow_at(double c) const { return eval(locate(c).flow, c); }
    std::vector<double> tolls_at(double c) const {
        const auto& iv = locate(c);
        auto t = eval(iv.toll, c);
        for (auto& v : t)
            v = std::clamp(v, 0.0, c);
        return t;
    }
    double level_at(double c) const { return locate(c).level(c); }
    double cost_at(double c) const { return locate(c).cost(c); }

 private:
    static std::vector<double> eval(const std::vector<AffineMap>& maps, double c) {
        std::vector<double> out(maps.size());
        for (std::size_t i = 0; i < maps.size(); ++i)
            out[i] = maps[i](c);
        return out;
    }
};

namespace detail {

/// h_i = 1 / sum_{l != i} 1/a_l for affine slopes a.
inline std::vector<double> rival_stiffness(std::span<const double> a) {
    std::vector<double> h(a.size());
    for (std::size_t i = 0; i < a.size(); ++i) {
        double others = 0.0;
        for (std::size_t l = 0; l < a.size(); ++l)
            if (l != i)
                others += 1.0 / a[l];
        h[i] = 1.0 / others;
    }
    return h;
}

/*!
 * \brief Solves the equilibrium system for a fixed binding set.
 *
 *   a_i x_i + b_i + c           = K   (i binding)
 *   (2 a_i + h_i) x_i + b_i     = K   (i free)
 *   sum_i x_i                   = D
 *
 * Everything is affine in c; the result fills level/flow/toll/cost of `iv`.
 */
inline void solve_piece(std::span<const double> a, std::span<const double> b, std::span<const double> h,
                        double demand, CapInterval& iv) {
    const std::size_t n = a.size();
    double denom = 0.0;
    double num0 = demand;
    double num1 = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        if (iv.is_binding(i)) {
            denom += 1.0 / a[i];
            num0 += b[i] / a[i];
            num1 += 1.0 / a[i];
        } else {
            const double w = 2.0 * a[i] + h[i];
            denom += 1.0 / w;
            num0 += b[i] / w;
        }
    }
    iv.level = {num0 / denom, num1 / denom};
    iv.flow.assign(n, {});
    iv.toll.assign(n, {});
    iv.cost = {};
    for (std::size_t i = 0; i < n; ++i) {
        AffineMap x;
        if (iv.is_binding(i)) {
            x = {(iv.level.constant - b[i]) / a[i], (iv.level.slope - 1.0) / a[i]};
            iv.toll[i] = {0.0, 1.0};
        } else {
            const double w = 2.0 * a[i] + h[i];
            x = {(iv.level.constant - b[i]) / w, iv.level.slope / w};
            iv.toll[i] = {(a[i] + h[i]) * x.constant, (a[i] + h[i]) * x.slope};
        }
        iv.flow[i] = x;
        // (a x + b) x with x = u + v c
        iv.cost.q0 += a[i] * x.constant * x.constant + b[i] * x.constant;
        iv.cost.q1 += 2.0 * a[i] * x.constant * x.slope + b[i] * x.slope;
        iv.cost.q2 += a[i] * x.slope * x.slope;
    }
}

}  // namespace detail

/*!
 * \brief Equilibrium path of the uniform cap, breakpoint by breakpoint.
 *
 * Starting from the uncapped equilibrium (no firm binding), each round
 * finds for every free firm the cap at which its markup toll meets the
 * cap, takes the largest such cap as the next breakpoint and moves all
 * firms attaining it into the binding set. Binding sets only grow as the
 * cap decreases, so there are at most n rounds. The last interval [0, c_j]
 * has every firm binding and reproduces the zero-toll flow.
 */
inline CapCurve build_cap_curve(const Instance& inst) {
    require_exact(inst);
    const std::size_t n = inst.size();
    std::vector<double> a(n);
    std::vector<double> b(n);
    for (std::size_t i = 0; i < n; ++i) {
        a[i] = inst.link(i).slope();
        b[i] = inst.link(i).constant_term();
    }
    const auto h = detail::rival_stiffness(a);

    CapCurve curve;
    curve.markup.resize(n);
    for (std::size_t i = 0; i < n; ++i)
        curve.markup[i] = a[i] + h[i];

    CapInterval current;
    current.hi = kInf;
    while (true) {
        detail::solve_piece(a, b, h, inst.demand(), current);
        if (current.binding.size() == n) {
            current.lo = 0.0;
            curve.intervals.push_back(std::move(current));
            break;
        }

        // markup_i * x_i(c) = c  <=>  c = m u / (1 - m v)
        double next = -kInf;
        std::vector<double> crossing(n, -kInf);
        for (std::size_t i = 0; i < n; ++i) {
            if (current.is_binding(i))
                continue;
            const auto& x = current.flow[i];
            const double denom = 1.0 - curve.markup[i] * x.slope;
            if (std::abs(denom) < 1e-14)
                continue;
            const double c = curve.markup[i] * x.constant / denom;
            if (c > current.hi * (1.0 + 1e-12) + 1e-12)
                continue;
            crossing[i] = c;
            next = std::max(next, c);
        }
        if (!(next > 0.0)) {
            // Cannot happen with full support; close the path at zero.
            current.lo = 0.0;
            curve.intervals.push_back(std::move(current));
            break;
        }
        next = std::min(next, current.hi);

        current.lo = next;
        curve.breakpoints.push_back(next);
        CapInterval following;
        following.hi = next;
        following.binding = current.binding;
        for (std::size_t i = 0; i < n; ++i)
            if (crossing[i] > -kInf && std::abs(crossing[i] - next) <= 1e-10 * std::max(1.0, next))
                following.binding.push_back(i);
        std::sort(following.binding.begin(), following.binding.end());
        curve.intervals.push_back(std::move(current));
        current = std::move(following);
    }
    return curve;
}

struct IntervalMinimum {
    double lo = 0.0;
    double hi = kInf;
    double argmin = 0.0;
    double value = 0.0;
};

struct OptimalCapResult {
    double c_star = 0.0;
    double cost_at_star = 0.0;
    std::vector<IntervalMinimum> interval_minima;  // same order as curve.intervals
    CapCurve curve;
};

/// Minimizes the piecewise-quadratic cost over all caps; the smallest
/// minimizing cap wins ties.
inline OptimalCapResult optimal_cap(const Instance& inst) {
    OptimalCapResult result;
    result.curve = build_cap_curve(inst);

    for (const auto& iv : result.curve.intervals) {
        IntervalMinimum m{iv.lo, iv.hi, iv.lo, iv.cost(iv.lo)};
        auto consider = [&](double c) {
            const double v = iv.cost(c);
            if (v < m.value - 1e-15 * std::max(1.0, std::abs(m.value)))
                m = {iv.lo, iv.hi, c, v};
        };
        if (std::isfinite(iv.hi)) {
            if (iv.cost.q2 > 0.0) {
                const double vertex = -iv.cost.q1 / (2.0 * iv.cost.q2);
                if (vertex > iv.lo && vertex < iv.hi)
                    consider(vertex);
            }
            consider(iv.hi);
        }
        result.interval_minima.push_back(m);
    }

    const IntervalMinimum* best = nullptr;
    for (const auto& m : result.interval_minima) {
        if (!best || m.value < best->value - 1e-12 * std::max(1.0, std::abs(best->value)) ||
            (std::abs(m.value - best->value) <= 1e-12 * std::max(1.0, std::abs(best->value)) &&
             m.argmin < best->argmin))
            best = &m;
    }
    result.c_star = best->argmin;
    result.cost_at_star = best->value;
    return result;
}

/// C(x(c)) for the unique capped equilibrium; the uncapped cost for c >= c_1.
inline double cost_at_cap(const CapCurve& curve, double c) { return curve.cost_at(c); }

inline double cost_at_cap(const Instance& inst, double c) {
    if (std::isnan(c) || c < 0.0)
        throw DomainError("cap must be nonnegative");
    return build_cap_curve(inst).cost_at(c);
}

struct SweepRow {
    double c = 0.0;
    double level = 0.0;
    double cost = 0.0;
    std::vector<double> tolls;
    std::vector<double> flow;
};

/// Largest violation of the equilibrium characterization by (t, x) at cap c.
inline double characterization_residual(const Instance& inst, double c, std::span<const double> t,
                                        std::span<const double> x, double level) {
    const std::size_t n = inst.size();
    std::vector<double> a(n);
    for (std::size_t i = 0; i < n; ++i)
        a[i] = inst.link(i).slope();
    const auto h = detail::rival_stiffness(a);
    double worst = std::abs(std::accumulate(x.begin(), x.end(), 0.0) - inst.demand());
    for (std::size_t i = 0; i < n; ++i) {
        worst = std::max(worst, std::abs(inst.link(i).eval(std::max(0.0, x[i])) + t[i] - level));
        worst = std::max(worst, std::abs(t[i] - std::min((a[i] + h[i]) * x[i], c)));
        worst = std::max(worst, std::max(0.0, -x[i]));
    }
    return worst;
}

/// Uniform samples of the curve on [c_lo, c_hi]; each row is checked
/// against the equilibrium characterization.
inline std::vector<SweepRow> sweep(const Instance& inst, double c_lo, double c_hi, int steps) {
    if (std::isnan(c_lo) || c_lo < 0.0)
        throw DomainError("cap must be nonnegative");
    if (!(c_hi >= c_lo) || !std::isfinite(c_hi))
        throw DomainError("sweep needs a finite range with c_lo <= c_hi");
    if (steps < 2)
        throw DomainError("sweep needs at least two steps");
    const auto curve = build_cap_curve(inst);
    std::vector<SweepRow> rows;
    rows.reserve(static_cast<std::size_t>(steps));
    for (int k = 0; k < steps; ++k) {
        const double c = k + 1 == steps ? c_hi : c_lo + (c_hi - c_lo) * k / (steps - 1);
        SweepRow row{c, curve.level_at(c), curve.cost_at(c), curve.tolls_at(c), curve.flow_at(c)};
        if (characterization_residual(inst, c, row.tolls, row.flow, row.level) > 1e-8)
            throw std::logic_error("cap curve row violates the equilibrium characterization at c = " +
                                   std::to_string(c));
        rows.push_back(std::move(row));
    }
    return rows;
}

}  // namespace tollcap

#endif  // TOLLCAP_CAPALG_HPP_
