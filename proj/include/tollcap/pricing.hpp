#ifndef TOLLCAP_PRICING_HPP_
#define TOLLCAP_PRICING_HPP_

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <numeric>
#include <optional>
#include <span>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "tollcap/capalg.hpp"
#include "tollcap/error.hpp"
#include "tollcap/model.hpp"
#include "tollcap/parallel.hpp"
#include "tollcap/validate.hpp"
#include "tollcap/wardrop.hpp"

namespace tollcap {

inline constexpr double kTieTolerance = 1e-7;       // profit gap for merging argmax candidates
inline constexpr double kEquilibriumEpsilon = 1e-6;  // default deviation-gain threshold
inline constexpr int kDefaultGrid = 2000;
inline constexpr int kDefaultRefine = 60;

/// Pi_i(t) = t_i * x_i(t)
inline double profit(const Instance& inst, std::span<const double> tolls, std::size_t i) {
    if (i >= inst.size())
        throw std::out_of_range("firm index " + std::to_string(i) + " out of range");
    const auto sol = solve_wardrop(inst, tolls);
    return tolls[i] * sol.flow.x[i];
}

inline double profit(const Instance& inst, const TollVector& t, std::size_t i) { return profit(inst, t.values(), i); }

struct TollInterval {
    double lo = 0.0;
    double hi = 0.0;

    bool contains(double v, double tol = 0.0) const { return v >= lo - tol && v <= hi + tol; }
};

/// Profit of one firm on a toll range where the set of used rival links is
/// fixed: Pi(tau) = linear * tau + quadratic * tau^2.
struct ProfitPiece {
    double lo = 0.0;
    double hi = 0.0;
    double linear = 0.0;
    double quadratic = 0.0;

    double operator()(double tau) const { return tau * (linear + quadratic * tau); }
    double slope(double tau) const { return linear + 2.0 * quadratic * tau; }
};

struct BestResponse {
    std::vector<TollInterval> argmax;  // isolated points have lo == hi
    double value = 0.0;
    bool flat = false;                 // profit identically zero on the range
    std::vector<ProfitPiece> pieces;   // exact affine path only

    double smallest() const { return argmax.empty() ? 0.0 : argmax.front().lo; }
    double largest() const { return argmax.empty() ? 0.0 : argmax.back().hi; }

    bool contains(double tau, double tol) const {
        return std::any_of(argmax.begin(), argmax.end(), [&](const TollInterval& iv) { return iv.contains(tau, tol); });
    }
};

namespace detail {

inline void require_firm(const Instance& inst, std::size_t i) {
    if (i >= inst.size())
        throw std::out_of_range("firm index " + std::to_string(i) + " out of range");
}

/// Toll beyond which firm i's link carries no flow, whatever the rivals do
/// at their current tolls.
inline double profit_horizon(const Instance& inst, std::span<const double> tolls, std::size_t i) {
    double strict_top = -kInf;
    double reservoir = kInf;
    for (std::size_t j = 0; j < inst.size(); ++j) {
        if (j == i)
            continue;
        const auto& l = inst.link(j);
        if (l.is_strictly_increasing())
            strict_top = std::max(strict_top, l.eval(inst.demand()) + tolls[j]);
        else
            reservoir = std::min(reservoir, l.constant_term() + tolls[j]);
    }
    const double top = std::min(reservoir, strict_top == -kInf ? kInf : strict_top);
    return std::max(0.0, top - inst.link(i).constant_term());
}

}  // namespace detail

/*!
 * \brief Exact best response of firm i for affine latencies.
 *
 * As firm i raises its toll, the level K rises and rival links enter the
 * support at computable tolls; between entries x_i is affine in the toll,
 * so profit is linear (firm i alone) or a concave quadratic. Past the toll
 * where x_i reaches zero the profit is identically zero. The pieces are
 * returned along with the argmax over [0, cap]. A profit that is zero
 * everywhere yields the flat range [0, cap] and smallest() == 0.
 */
inline BestResponse best_response_affine(const Instance& inst, std::span<const double> tolls, std::size_t i,
                                         double cap) {
    detail::require_firm(inst, i);
    require_size(inst, tolls.size(), "toll vector");
    if (!inst.all_affine())
        throw NotApplicable("exact best responses require strictly increasing affine latencies");
    if (std::isnan(cap) || cap < 0.0)
        throw DomainError("cap must be nonnegative");

    const double demand = inst.demand();
    const double ai = inst.link(i).slope();
    const double bi = inst.link(i).constant_term();

    std::vector<std::size_t> rivals;
    for (std::size_t j = 0; j < inst.size(); ++j)
        if (j != i)
            rivals.push_back(j);
    auto entry_level = [&](std::size_t j) { return inst.link(j).constant_term() + tolls[j]; };
    std::sort(rivals.begin(), rivals.end(), [&](std::size_t l, std::size_t r) { return entry_level(l) < entry_level(r); });

    BestResponse br;
    std::size_t active = 0;
    double inv_sum = 1.0 / ai;
    double weighted = demand + bi / ai;
    double tau = 0.0;
    auto admit = [&] {
        const std::size_t j = rivals[active++];
        inv_sum += 1.0 / inst.link(j).slope();
        weighted += entry_level(j) / inst.link(j).slope();
    };
    while (true) {
        // level K(tau) = k0 + k1 * tau with firm i and `active` rivals used
        double k0 = weighted / inv_sum;
        double k1 = (1.0 / ai) / inv_sum;
        while (active < rivals.size()) {
            const double level = k0 + k1 * tau;
            if (entry_level(rivals[active]) > level + 1e-13 * std::max(1.0, std::abs(level)))
                break;
            admit();
            k0 = weighted / inv_sum;
            k1 = (1.0 / ai) / inv_sum;
        }
        const double p = (k0 - bi) / ai;
        const double q = (k1 - 1.0) / ai;
        if (tau == 0.0 && p <= 0.0) {
            br.pieces.push_back({0.0, cap, 0.0, 0.0});
            break;
        }

        const double exit = q < 0.0 ? -p / q : kInf;
        const double enter = active < rivals.size() ? (entry_level(rivals[active]) - k0) / k1 : kInf;
        const double end = std::min({exit, enter, cap});
        if (end > tau)
            br.pieces.push_back({tau, end, p, q});
        if (end >= cap)
            break;
        if (exit <= enter) {
            br.pieces.push_back({std::max(exit, tau), cap, 0.0, 0.0});
            break;
        }
        if (end <= tau)
            admit();
        tau = std::max(tau, end);
    }

    double best = 0.0;  // profit at a zero toll
    double arg = 0.0;
    auto consider = [&](double at, double v) {
        const double tol = 1e-15 * std::max(1.0, std::abs(best));
        if (v > best + tol) {
            best = v;
            arg = at;
        } else if (v >= best - tol && at < arg) {
            arg = at;
        }
    };
    for (const auto& piece : br.pieces) {
        consider(piece.lo, piece(piece.lo));
        if (piece.quadratic < 0.0) {
            const double vertex = std::clamp(-piece.linear / (2.0 * piece.quadratic), piece.lo, piece.hi);
            consider(vertex, piece(vertex));
        } else if (piece.linear > 0.0 && std::isfinite(piece.hi)) {
            consider(piece.hi, piece(piece.hi));
        }
    }
    if (best <= 0.0) {
        br.value = 0.0;
        br.flat = true;
        br.argmax = {{0.0, cap}};
    } else {
        br.value = best;
        br.argmax = {{arg, arg}};
    }
    return br;
}

inline BestResponse best_response_affine(const Instance& inst, const TollVector& t, std::size_t i, double cap) {
    return best_response_affine(inst, t.values(), i, cap);
}

/*!
 * \brief Grid-and-refine best response for arbitrary latencies.
 *
 * Profit is sampled on grid_n + 1 uniform points of [0, cap_hi]; each local
 * maximum is refined by golden-section search over its two neighbouring
 * cells. Refined maxima within kTieTolerance of the best are all reported.
 */
inline BestResponse best_response_numeric(const Instance& inst, std::span<const double> tolls, std::size_t i,
                                          double cap_hi, int grid_n = kDefaultGrid, int refine_iters = kDefaultRefine) {
    detail::require_firm(inst, i);
    require_size(inst, tolls.size(), "toll vector");
    if (!std::isfinite(cap_hi) || cap_hi < 0.0)
        throw DomainError("numeric best response needs a finite nonnegative upper toll");
    grid_n = std::max(grid_n, 1);

    std::vector<double> t(tolls.begin(), tolls.end());
    auto pi = [&](double tau) {
        t[i] = tau;
        return tau * detail::equalize(inst.links(), t, inst.demand()).flow.x[i];
    };

    const double h = cap_hi / grid_n;
    std::vector<double> grid(static_cast<std::size_t>(grid_n) + 1);
    for (int k = 0; k <= grid_n; ++k)
        grid[k] = pi(k == grid_n ? cap_hi : h * k);

    BestResponse br;
    const double top = *std::max_element(grid.begin(), grid.end());
    if (!(top > 0.0)) {
        br.flat = true;
        br.argmax = {{0.0, cap_hi}};
        return br;
    }

    struct Candidate {
        double at;
        double value;
    };
    std::vector<Candidate> maxima;
    constexpr double kInvPhi = 0.6180339887498949;
    for (int k = 0; k <= grid_n; ++k) {
        const bool left = k == 0 || grid[k] >= grid[k - 1];
        const bool right = k == grid_n || grid[k] >= grid[k + 1];
        if (!left || !right || grid[k] <= 0.0)
            continue;
        Candidate best{k == grid_n ? cap_hi : h * k, grid[k]};
        double a = k == 0 ? 0.0 : h * (k - 1);
        double b = k == grid_n ? cap_hi : std::min(cap_hi, h * (k + 1));
        double x1 = b - kInvPhi * (b - a);
        double x2 = a + kInvPhi * (b - a);
        double f1 = pi(x1);
        double f2 = pi(x2);
        for (int it = 0; it < refine_iters; ++it) {
            if (f1 < f2) {
                a = x1;
                x1 = x2;
                f1 = f2;
                x2 = a + kInvPhi * (b - a);
                f2 = pi(x2);
            } else {
                b = x2;
                x2 = x1;
                f2 = f1;
                x1 = b - kInvPhi * (b - a);
                f1 = pi(x1);
            }
        }
        for (const Candidate c : {Candidate{x1, f1}, Candidate{x2, f2}})
            if (c.value > best.value)
                best = c;
        maxima.push_back(best);
    }

    double value = 0.0;
    for (const auto& m : maxima)
        value = std::max(value, m.value);
    br.value = value;
    for (const auto& m : maxima) {
        if (m.value < value - kTieTolerance)
            continue;
        if (!br.argmax.empty() && m.at - br.argmax.back().hi <= 2.0 * h)
            br.argmax.back().hi = m.at;
        else
            br.argmax.push_back({m.at, m.at});
    }
    return br;
}

struct ResponseOptions {
    int grid_n = kDefaultGrid;
    int refine_iters = kDefaultRefine;
};

/// Exact response for affine instances, numeric otherwise.
inline BestResponse best_response(const Instance& inst, std::span<const double> tolls, std::size_t i, double cap,
                                  const ResponseOptions& opts = {}) {
    if (inst.all_affine())
        return best_response_affine(inst, tolls, i, cap);
    const double hi = std::min(cap, detail::profit_horizon(inst, tolls, i));
    return best_response_numeric(inst, tolls, i, hi, opts.grid_n, opts.refine_iters);
}

enum class EquilibriumStatus {
    unique,          // exact characterization
    multiple,        // several separated equilibria found by search
    none_found,      // no epsilon-equilibrium at the stated resolution
    not_applicable,  // method does not apply to the instance
    verified,        // candidate accepted by the deviation oracle
    rejected,        // candidate refuted by the deviation oracle
};

inline const char* to_string(EquilibriumStatus s) {
    switch (s) {
        case EquilibriumStatus::unique: return "unique";
        case EquilibriumStatus::multiple: return "multiple";
        case EquilibriumStatus::none_found: return "none_found";
        case EquilibriumStatus::not_applicable: return "not_applicable";
        case EquilibriumStatus::verified: return "verified";
        case EquilibriumStatus::rejected: return "rejected";
    }
    return "?";
}

struct FoundEquilibrium {
    std::vector<double> tolls;
    std::vector<double> flow;
    double gain = 0.0;
    double cost = 0.0;
};

struct EquilibriumReport {
    EquilibriumStatus status = EquilibriumStatus::not_applicable;
    double cap = kInf;
    std::optional<TollVector> tolls;
    std::optional<Flow> flow;
    std::vector<std::size_t> binding_set;  // firms with t_i == cap
    double max_deviation_gain = 0.0;
    std::vector<double> deviation_gains;   // per firm, when computed
    std::vector<FoundEquilibrium> equilibria;
    std::string certificate;

    bool found() const {
        return status == EquilibriumStatus::unique || status == EquilibriumStatus::multiple ||
               status == EquilibriumStatus::verified;
    }
};

namespace detail {

inline std::vector<std::size_t> binding_firms(std::span<const double> t, double cap) {
    std::vector<std::size_t> out;
    if (!std::isfinite(cap))
        return out;
    for (std::size_t i = 0; i < t.size(); ++i)
        if (std::abs(t[i] - cap) <= 1e-12 * std::max(1.0, cap))
            out.push_back(i);
    return out;
}

inline EquilibriumReport exact_report(const Instance& inst, double cap, std::vector<double> t, std::vector<double> x,
                                      double level, std::string certificate) {
    EquilibriumReport r;
    r.cap = cap;
    for (auto& v : t)
        v = std::clamp(v, 0.0, cap);
    r.binding_set = binding_firms(t, cap);
    r.tolls = TollVector(std::move(t), cap);
    r.flow = Flow{std::move(x), level};
    r.status = EquilibriumStatus::unique;
    r.certificate = std::move(certificate);
    (void)inst;
    return r;
}

}  // namespace detail

/*!
 * \brief Uncapped equilibrium from the price representation
 * t_i = (a_i + h_i) x_i, solved together with the Wardrop condition.
 */
inline EquilibriumReport spne_prices_uncapped(const Instance& inst) {
    EquilibriumReport r;
    try {
        require_exact(inst);
    } catch (const NotApplicable& e) {
        r.certificate = e.what();
        return r;
    }
    const std::size_t n = inst.size();
    std::vector<double> a(n), b(n);
    for (std::size_t i = 0; i < n; ++i) {
        a[i] = inst.link(i).slope();
        b[i] = inst.link(i).constant_term();
    }
    const auto h = detail::rival_stiffness(a);
    CapInterval piece;
    detail::solve_piece(a, b, h, inst.demand(), piece);
    std::vector<double> t(n), x(n);
    for (std::size_t i = 0; i < n; ++i) {
        x[i] = piece.flow[i].constant;
        t[i] = piece.toll[i].constant;
        if (!(x[i] > 0.0)) {
            r.certificate = "price representation yields a nonpositive flow on link " + std::to_string(i + 1);
            return r;
        }
    }
    return detail::exact_report(inst, kInf, std::move(t), std::move(x), piece.level.constant,
                                "closed-form price representation (affine, full support)");
}

/// The unique c-capped equilibrium, read off the cap curve.
inline EquilibriumReport spne_at_cap(const Instance& inst, const CapCurve& curve, double c) {
    if (std::isinf(c) && c > 0.0)
        return spne_prices_uncapped(inst);
    const auto& iv = curve.locate(c);
    return detail::exact_report(inst, c, curve.tolls_at(c), curve.flow_at(c), iv.level(c),
                                "cap curve interval [" + std::to_string(iv.lo) + ", " + std::to_string(iv.hi) + "]");
}

inline EquilibriumReport spne_at_cap(const Instance& inst, double c) {
    if (std::isnan(c) || c < 0.0)
        throw DomainError("cap must be nonnegative");
    try {
        const auto curve = build_cap_curve(inst);
        return spne_at_cap(inst, curve, c);
    } catch (const NotApplicable& e) {
        EquilibriumReport r;
        r.cap = c;
        r.certificate = e.what();
        return r;
    }
}

/*!
 * \brief Deviation oracle: how much can any single firm gain by moving its
 * toll within [0, c]? Exact responses for affine instances, grid search
 * with grid_n cells otherwise. Status is verified iff the gain is at most eps.
 */
inline EquilibriumReport verify_spne(const Instance& inst, double c, std::span<const double> tolls, double eps,
                                     int grid_n = kDefaultGrid, int refine_iters = kDefaultRefine) {
    require_size(inst, tolls.size(), "toll vector");
    for (double v : tolls)
        if (!(v >= 0.0) || v > c * (1.0 + 1e-12) + 1e-12)
            throw PreconditionError("tolls must lie within [0, cap]");
    EquilibriumReport r;
    r.cap = c;
    const auto sol = solve_wardrop(inst, tolls);
    r.deviation_gains.resize(inst.size());
    const ResponseOptions opts{grid_n, refine_iters};
    for (std::size_t i = 0; i < inst.size(); ++i) {
        const double current = tolls[i] * sol.flow.x[i];
        const auto br = best_response(inst, tolls, i, c, opts);
        r.deviation_gains[i] = std::max(0.0, br.value - current);
    }
    r.max_deviation_gain = *std::max_element(r.deviation_gains.begin(), r.deviation_gains.end());
    std::vector<double> t(tolls.begin(), tolls.end());
    for (auto& v : t)
        v = std::clamp(v, 0.0, c);
    r.binding_set = detail::binding_firms(t, c);
    r.tolls = TollVector(std::move(t), c);
    r.flow = sol.flow;
    r.status = r.max_deviation_gain <= eps ? EquilibriumStatus::verified : EquilibriumStatus::rejected;
    std::ostringstream cert;
    cert << (inst.all_affine() ? "exact best responses" : "numeric best responses, grid " + std::to_string(grid_n))
         << "; max deviation gain " << r.max_deviation_gain << " vs eps " << eps;
    r.certificate = cert.str();
    return r;
}

inline EquilibriumReport verify_spne(const Instance& inst, double c, const TollVector& t, double eps,
                                     int grid_n = kDefaultGrid) {
    return verify_spne(inst, c, t.values(), eps, grid_n);
}

struct SearchOptions {
    int grid_n = kDefaultGrid;           // opponent-toll resolution c / grid_n
    double eps = kEquilibriumEpsilon;
    int inner_grid = 400;                // grid of each tabulated best response
    int refine_iters = kDefaultRefine;
    int verify_grid = kDefaultGrid;      // grid of the final deviation oracle
};

struct ResponseRow {
    double opponent = 0.0;
    double br_lo = 0.0;
    double br_hi = 0.0;
    double profit = 0.0;
};

/// B_i(t_other) tabulated over opponent tolls k*c/grid_n (duopolies).
inline std::vector<ResponseRow> tabulate_best_response(const Instance& inst, std::size_t firm, double c, int grid_n,
                                                       const ResponseOptions& opts = {400, kDefaultRefine}) {
    if (inst.size() != 2)
        throw NotApplicable("best-response tabulation is defined for duopolies");
    detail::require_firm(inst, firm);
    if (!std::isfinite(c) || c < 0.0)
        throw DomainError("tabulation needs a finite cap");
    const std::size_t other = 1 - firm;
    std::vector<ResponseRow> rows(static_cast<std::size_t>(grid_n) + 1);
    parallel_for(rows.size(), [&](std::size_t k) {
        std::vector<double> t(2, 0.0);
        t[other] = k == rows.size() - 1 ? c : c * static_cast<double>(k) / grid_n;
        const auto br = best_response(inst, t, firm, c, opts);
        rows[k] = {t[other], br.smallest(), br.largest(), br.value};
    });
    return rows;
}

/*!
 * \brief Equilibrium search for duopolies under cap c.
 *
 * For every firm-2 toll s on the grid, firm 1 best-responds with b(s) and
 * the remaining incentive g(s) = max Pi_2(b(s), .) - Pi_2(b(s), s) of firm 2
 * is recorded. Every equilibrium is a zero of g. Local minima of g are
 * refined by golden-section search and confirmed with verify_spne. When no
 * candidate passes, the report is an epsilon-certificate at resolution
 * c / grid_n, not a proof of nonexistence.
 */
inline EquilibriumReport duopoly_search(const Instance& inst, double c, const SearchOptions& opts = {}) {
    EquilibriumReport r;
    r.cap = c;
    if (inst.size() != 2) {
        r.certificate = "duopoly search needs exactly two links";
        return r;
    }
    if (!std::isfinite(c) || c < 0.0)
        throw DomainError("duopoly search needs a finite nonnegative cap");

    const ResponseOptions inner{opts.inner_grid, opts.refine_iters};
    const int grid_n = std::max(opts.grid_n, 1);
    const double h = c / grid_n;

    struct Probe {
        double s = 0.0;
        double b = 0.0;
        double gain = kInf;
    };
    auto probe = [&](double s) {
        Probe p{s, 0.0, kInf};
        std::vector<double> t{0.0, s};
        const auto br1 = best_response(inst, t, 0, c, inner);
        std::vector<double> choices;
        for (const auto& iv : br1.argmax) {
            choices.push_back(iv.lo);
            if (iv.hi > iv.lo)
                choices.push_back(iv.hi);
        }
        for (double b : choices) {
            t[0] = b;
            const double current = profit(inst, t, 1);
            const auto br2 = best_response(inst, t, 1, c, inner);
            const double gain = std::max(0.0, br2.value - current);
            if (gain < p.gain)
                p = {s, b, gain};
        }
        return p;
    };

    std::vector<Probe> probes(static_cast<std::size_t>(grid_n) + 1);
    parallel_for(probes.size(), [&](std::size_t k) { probes[k] = probe(k == probes.size() - 1 ? c : h * k); });

    // candidates: local minima of the firm-2 incentive
    std::vector<Probe> candidates;
    constexpr double kInvPhi = 0.6180339887498949;
    for (std::size_t k = 0; k < probes.size(); ++k) {
        const bool left = k == 0 || probes[k].gain <= probes[k - 1].gain;
        const bool right = k + 1 == probes.size() || probes[k].gain <= probes[k + 1].gain;
        if (!left || !right || probes[k].gain > 1e-3 * std::max(1.0, c))
            continue;
        Probe best = probes[k];
        if (best.gain > 0.0 && grid_n > 1) {
            double a = k == 0 ? 0.0 : probes[k - 1].s;
            double b = k + 1 == probes.size() ? c : probes[k + 1].s;
            double x1 = b - kInvPhi * (b - a);
            double x2 = a + kInvPhi * (b - a);
            Probe p1 = probe(x1);
            Probe p2 = probe(x2);
            for (int it = 0; it < 40; ++it) {
                if (p1.gain > p2.gain) {
                    a = x1;
                    x1 = x2;
                    p1 = p2;
                    x2 = a + kInvPhi * (b - a);
                    p2 = probe(x2);
                } else {
                    b = x2;
                    x2 = x1;
                    p2 = p1;
                    x1 = b - kInvPhi * (b - a);
                    p1 = probe(x1);
                }
            }
            for (const auto& p : {p1, p2})
                if (p.gain < best.gain)
                    best = p;
        }
        candidates.push_back(best);
    }

    for (const auto& cand : candidates) {
        const std::vector<double> t{std::min(cand.b, c), std::min(cand.s, c)};
        const auto check = verify_spne(inst, c, t, opts.eps, opts.verify_grid, opts.refine_iters);
        if (check.status != EquilibriumStatus::verified)
            continue;
        FoundEquilibrium eq{t, check.flow->x, check.max_deviation_gain, total_cost(inst, check.flow->x)};
        // Candidates from neighbouring cells describe the same equilibrium.
        if (!r.equilibria.empty() && std::abs(r.equilibria.back().tolls[1] - t[1]) <= 2.0 * h + 1e-12 &&
            std::abs(r.equilibria.back().tolls[0] - t[0]) <= 2.0 * h + 1e-12) {
            if (eq.gain < r.equilibria.back().gain)
                r.equilibria.back() = std::move(eq);
            continue;
        }
        r.equilibria.push_back(std::move(eq));
    }

    std::ostringstream cert;
    cert << "grid resolution " << h << " (c/" << grid_n << "), eps " << opts.eps << ", "
         << (inst.all_affine() ? "exact" : "numeric") << " best responses";
    if (r.equilibria.empty()) {
        r.status = EquilibriumStatus::none_found;
        double least = kInf;
        for (const auto& p : probes)
            least = std::min(least, p.gain);
        for (const auto& p : candidates)
            least = std::min(least, p.gain);
        r.max_deviation_gain = least;
        cert << "; no eps-equilibrium at this resolution, least deviation gain " << least;
        r.certificate = cert.str();
        return r;
    }

    r.status = r.equilibria.size() == 1 ? EquilibriumStatus::unique : EquilibriumStatus::multiple;
    // Report the most expensive equilibrium, the one a worst-case cap must face.
    const auto worst = std::max_element(r.equilibria.begin(), r.equilibria.end(),
                                        [](const auto& l, const auto& rr) { return l.cost < rr.cost; });
    r.tolls = TollVector(worst->tolls, c);
    r.flow = Flow{worst->flow, std::nullopt};
    r.binding_set = detail::binding_firms(worst->tolls, c);
    double gain = 0.0;
    for (const auto& eq : r.equilibria)
        gain = std::max(gain, eq.gain);
    r.max_deviation_gain = gain;
    r.certificate = cert.str();
    return r;
}

/// Markup l_i'(x_i) + 1 / sum_{j != i} 1/l_j'(x_j) at the flow x; the
/// harmonic term vanishes when some rival has zero marginal latency.
inline std::vector<double> markups(const Instance& inst, std::span<const double> x) {
    const std::size_t n = inst.size();
    std::vector<double> d(n);
    for (std::size_t i = 0; i < n; ++i)
        d[i] = inst.link(i).derivative(std::max(0.0, x[i]));
    std::vector<double> m(n);
    for (std::size_t i = 0; i < n; ++i) {
        double inv = 0.0;
        bool unbounded = false;
        for (std::size_t j = 0; j < n; ++j) {
            if (j == i)
                continue;
            if (d[j] <= 0.0)
                unbounded = true;
            else
                inv += 1.0 / d[j];
        }
        m[i] = d[i] + (unbounded ? 0.0 : 1.0 / inv);
    }
    return m;
}

/*!
 * \brief Equilibrium candidate for general latencies.
 *
 * Iterates t <- min(markup(x(t)) * x(t), c) with damping until the first-order
 * price representation holds, then hands the candidate to verify_spne. The
 * markup assumes every rival link reacts, which fails when some link sits
 * unused at the margin; a rejected or unsettled candidate is therefore
 * followed by damped best-response dynamics. The result is verified,
 * rejected (final candidate is not an equilibrium) or none_found.
 */
inline EquilibriumReport spne_general(const Instance& inst, double c, double eps = kEquilibriumEpsilon,
                                      int grid_n = kDefaultGrid) {
    if (std::isnan(c) || c < 0.0)
        throw DomainError("cap must be nonnegative");
    const std::size_t n = inst.size();
    auto scale = [](const std::vector<double>& t) { return std::max(1.0, *std::max_element(t.begin(), t.end())); };

    std::vector<double> t(n, 0.0);
    bool settled = false;
    for (int it = 0; it < 5000 && !settled; ++it) {
        const auto sol = solve_wardrop(inst, t);
        const auto m = markups(inst, sol.flow.x);
        double move = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            const double target = std::min(m[i] * sol.flow.x[i], c);
            move = std::max(move, std::abs(target - t[i]));
            t[i] = 0.5 * (t[i] + target);
        }
        settled = move <= 1e-13 * scale(t);
    }
    if (settled) {
        auto r = verify_spne(inst, c, t, eps, grid_n);
        if (r.status == EquilibriumStatus::verified) {
            r.certificate = "price-representation fixed point; " + r.certificate;
            return r;
        }
    }

    const ResponseOptions opts{grid_n, kDefaultRefine};
    const int rounds = inst.all_affine() ? 5000 : 300;
    settled = false;
    for (int it = 0; it < rounds && !settled; ++it) {
        double move = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            const double target = best_response(inst, t, i, c, opts).smallest();
            const double next = 0.5 * (t[i] + target);
            move = std::max(move, std::abs(next - t[i]));
            t[i] = next;
        }
        settled = move <= 1e-13 * scale(t);
    }
    auto r = verify_spne(inst, c, t, eps, grid_n);
    r.certificate = std::string("best-response dynamics") + (settled ? "" : " (not settled)") + "; " + r.certificate;
    if (r.status != EquilibriumStatus::verified && !settled)
        r.status = EquilibriumStatus::none_found;
    return r;
}

}  // namespace tollcap

#endif  // TOLLCAP_PRICING_HPP_
