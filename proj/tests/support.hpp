// Helpers shared by the unit tests and the acceptance binary: random
// instances and an equilibrium solver that does not use the cap curve.
#ifndef TOLLCAP_TESTS_SUPPORT_HPP_
#define TOLLCAP_TESTS_SUPPORT_HPP_

#include <algorithm>
#include <cmath>
#include <random>
#include <vector>

#include "tollcap/tollcap.hpp"

namespace support {

using tollcap::Instance;
using tollcap::LatencyFunction;

/// Affine instance with a_i in [a_lo, a_hi], b_i in [0, b_hi], redrawn
/// until the zero-toll equilibrium uses every link.
inline Instance random_full_support(std::mt19937_64& rng, std::size_t n, double a_lo = 0.1, double a_hi = 5.0,
                                    double b_hi = 2.0) {
    std::uniform_real_distribution<double> slope(a_lo, a_hi);
    std::uniform_real_distribution<double> icpt(0.0, b_hi);
    while (true) {
        std::vector<LatencyFunction> links;
        for (std::size_t i = 0; i < n; ++i)
            links.push_back(LatencyFunction::affine(slope(rng), icpt(rng)));
        Instance inst(std::move(links));
        if (tollcap::validate(inst).full_support)
            return inst;
    }
}

/// Dense Gaussian elimination with partial pivoting; solves M y = r in place.
inline std::vector<double> solve_dense(std::vector<std::vector<double>> m, std::vector<double> r) {
    const std::size_t n = r.size();
    for (std::size_t col = 0; col < n; ++col) {
        std::size_t piv = col;
        for (std::size_t row = col + 1; row < n; ++row)
            if (std::abs(m[row][col]) > std::abs(m[piv][col]))
                piv = row;
        std::swap(m[col], m[piv]);
        std::swap(r[col], r[piv]);
        for (std::size_t row = col + 1; row < n; ++row) {
            const double f = m[row][col] / m[col][col];
            for (std::size_t k = col; k < n; ++k)
                m[row][k] -= f * m[col][k];
            r[row] -= f * r[col];
        }
    }
    std::vector<double> y(n);
    for (std::size_t row = n; row-- > 0;) {
        double s = r[row];
        for (std::size_t k = row + 1; k < n; ++k)
            s -= m[row][k] * y[k];
        y[row] = s / m[row][row];
    }
    return y;
}

struct OracleEquilibrium {
    std::vector<double> t;
    std::vector<double> x;
    double level = 0.0;
    std::vector<bool> binding;
    double cost = 0.0;
};

/*!
 * Capped equilibrium of an affine full-support instance by active-set
 * iteration on the characterization: binding firms pay c, free firms pay
 * their markup times flow. The linear system in (x, K) is solved densely
 * for each guess; free firms whose markup toll exceeds c become binding
 * and binding firms whose markup toll falls below c are released.
 */
inline OracleEquilibrium capped_oracle(const Instance& inst, double c, std::vector<bool> binding = {}) {
    const std::size_t n = inst.size();
    std::vector<double> a(n), b(n), m(n);
    for (std::size_t i = 0; i < n; ++i) {
        a[i] = inst.link(i).slope();
        b[i] = inst.link(i).constant_term();
    }
    for (std::size_t i = 0; i < n; ++i) {
        double inv = 0.0;
        for (std::size_t j = 0; j < n; ++j)
            if (j != i)
                inv += 1.0 / a[j];
        m[i] = a[i] + 1.0 / inv;
    }
    if (binding.size() != n)
        binding.assign(n, false);

    OracleEquilibrium eq;
    for (int round = 0; round < 4 * static_cast<int>(n) + 4; ++round) {
        std::vector<std::vector<double>> mat(n + 1, std::vector<double>(n + 1, 0.0));
        std::vector<double> rhs(n + 1, 0.0);
        for (std::size_t i = 0; i < n; ++i) {
            mat[i][i] = binding[i] ? a[i] : a[i] + m[i];
            mat[i][n] = -1.0;
            rhs[i] = -b[i] - (binding[i] ? c : 0.0);
            mat[n][i] = 1.0;
        }
        rhs[n] = inst.demand();
        const auto y = solve_dense(mat, rhs);
        bool changed = false;
        for (std::size_t i = 0; i < n; ++i) {
            const double markup_toll = m[i] * y[i];
            if (!binding[i] && markup_toll > c * (1.0 + 1e-13) + 1e-15) {
                binding[i] = true;
                changed = true;
            } else if (binding[i] && markup_toll < c * (1.0 - 1e-13) - 1e-15) {
                binding[i] = false;
                changed = true;
            }
        }
        eq.x.assign(y.begin(), y.begin() + static_cast<std::ptrdiff_t>(n));
        eq.level = y[n];
        if (!changed)
            break;
    }
    eq.binding = binding;
    eq.t.resize(n);
    eq.cost = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        eq.t[i] = binding[i] ? c : m[i] * eq.x[i];
        eq.cost += (a[i] * eq.x[i] + b[i]) * eq.x[i];
    }
    return eq;
}

/// Largest uncapped toll: the first cap that binds.
inline double first_binding_cap(const Instance& inst) {
    const auto eq = capped_oracle(inst, tollcap::kInf);
    return *std::max_element(eq.t.begin(), eq.t.end());
}

/// Minimum of the oracle cost over `points` uniform caps in [0, hi].
inline double brute_force_min_cost(const Instance& inst, double hi, int points) {
    std::vector<bool> binding;
    double best = tollcap::kInf;
    for (int k = points - 1; k >= 0; --k) {
        const double c = hi * k / (points - 1);
        const auto eq = capped_oracle(inst, c, binding);
        binding = eq.binding;
        best = std::min(best, eq.cost);
    }
    // the uncapped regime is part of the cap range
    return std::min(best, capped_oracle(inst, tollcap::kInf).cost);
}

}  // namespace support

#endif  // TOLLCAP_TESTS_SUPPORT_HPP_
