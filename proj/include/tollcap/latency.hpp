#ifndef TOLLCAP_LATENCY_HPP_
#define TOLLCAP_LATENCY_HPP_

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <string>
#include <utility>
#include <vector>

#include "tollcap/error.hpp"

namespace tollcap {

/// Root-finding tolerance guaranteed by LatencyFunction::invert. The
/// iteration itself runs to machine precision.
inline constexpr double kRootTolerance = 1e-10;

enum class LatencyKind { affine, monomial, polynomial };

inline const char* to_string(LatencyKind kind) {
    switch (kind) {
        case LatencyKind::affine: return "affine";
        case LatencyKind::monomial: return "monomial";
        case LatencyKind::polynomial: return "polynomial";
    }
    return "?";
}

struct Term {
    int degree = 0;
    double coeff = 0.0;

    friend bool operator==(const Term&, const Term&) = default;
};

/*!
 * \brief Polynomial link latency with nonnegative coefficients.
 *
 * Terms are kept merged by degree and sorted ascending. Nonnegative
 * coefficients make the function convex on [0, inf); it is strictly
 * increasing iff some term of degree >= 1 has a positive coefficient.
 * A constant latency is representable (and used by some instances) but
 * reports is_strictly_increasing() == false.
 */
class LatencyFunction {
 public:
    LatencyFunction() = default;

    /// a*x + b
    static LatencyFunction affine(double a, double b) {
        return LatencyFunction(LatencyKind::affine, {{0, b}, {1, a}});
    }

    /// a*x^d + b
    static LatencyFunction monomial(double a, int d, double b) {
        if (d < 1)
            throw DomainError("monomial latency needs degree >= 1");
        return LatencyFunction(LatencyKind::monomial, {{0, b}, {d, a}});
    }

    static LatencyFunction constant(double b) {
        return LatencyFunction(LatencyKind::polynomial, {{0, b}});
    }

    static LatencyFunction polynomial(std::vector<Term> terms) {
        return LatencyFunction(LatencyKind::polynomial, std::move(terms));
    }

    LatencyKind kind() const noexcept { return kind_; }
    const std::vector<Term>& terms() const noexcept { return terms_; }

    double coefficient(int degree) const noexcept {
        for (const auto& t : terms_)
            if (t.degree == degree)
                return t.coeff;
        return 0.0;
    }

    int degree() const noexcept { return terms_.empty() ? 0 : terms_.back().degree; }
    double constant_term() const noexcept { return coefficient(0); }

    /// True for every function of the form a*x + b with a > 0, whatever its kind tag.
    bool is_affine() const noexcept { return degree() == 1 && coefficient(1) > 0.0; }
    bool is_constant() const noexcept { return degree() == 0; }

    bool is_strictly_increasing() const noexcept {
        return std::any_of(terms_.begin(), terms_.end(),
                           [](const Term& t) { return t.degree >= 1 && t.coeff > 0.0; });
    }

    /// Slope of an affine latency (coefficient of x).
    double slope() const noexcept { return coefficient(1); }

    double eval(double x) const {
        check_argument(x);
        double value = 0.0;
        for (const auto& t : terms_)
            value += t.coeff * power(x, t.degree);
        return value;
    }

    double derivative(double x) const {
        check_argument(x);
        double value = 0.0;
        for (const auto& t : terms_)
            if (t.degree >= 1)
                value += t.coeff * t.degree * power(x, t.degree - 1);
        return value;
    }

    /// Marginal cost x -> l(x) + x*l'(x), again a latency of the same family.
    LatencyFunction marginal() const {
        std::vector<Term> out;
        out.reserve(terms_.size());
        for (const auto& t : terms_)
            out.push_back({t.degree, t.coeff * (t.degree + 1)});
        return LatencyFunction(kind_, std::move(out));
    }

    /*!
     * \brief Unique x >= 0 with l(x) = y.
     * Closed form for affine and monomial latencies, safeguarded Newton
     * iteration otherwise.
     */
    double invert(double y) const {
        if (!std::isfinite(y))
            throw DomainError("cannot invert latency at non-finite level");
        const double b = constant_term();
        if (y < b)
            throw DomainError("latency has no preimage below its constant term");
        if (y == b)
            return 0.0;
        if (!is_strictly_increasing())
            throw DomainError("constant latency has no preimage above its value");

        if (is_affine())
            return (y - b) / slope();
        if (terms_.size() == 2 && terms_[0].degree == 0) {
            const auto& top = terms_[1];
            return std::pow((y - b) / top.coeff, 1.0 / top.degree);
        }
        return invert_numeric(y);
    }

    friend bool operator==(const LatencyFunction&, const LatencyFunction&) = default;

 private:
    LatencyFunction(LatencyKind kind, std::vector<Term> terms) : kind_(kind) {
        for (const auto& t : terms) {
            if (t.degree < 0)
                throw DomainError("latency term with negative degree");
            if (!std::isfinite(t.coeff) || t.coeff < 0.0)
                throw DomainError("latency coefficients must be finite and nonnegative");
        }
        std::sort(terms.begin(), terms.end(),
                  [](const Term& l, const Term& r) { return l.degree < r.degree; });
        for (const auto& t : terms) {
            if (!terms_.empty() && terms_.back().degree == t.degree)
                terms_.back().coeff += t.coeff;
            else
                terms_.push_back(t);
        }
        // Zero coefficients above degree 0 carry no information; keep the
        // constant term so that constant_term() is always explicit.
        std::erase_if(terms_, [](const Term& t) { return t.degree > 0 && t.coeff == 0.0; });
        if (terms_.empty() || terms_.front().degree != 0)
            terms_.insert(terms_.begin(), Term{0, 0.0});
    }

    static void check_argument(double x) {
        if (!std::isfinite(x) || x < 0.0)
            throw DomainError("latency argument must be finite and nonnegative");
    }

    static double power(double x, int k) {
        double r = 1.0;
        for (int i = 0; i < k; ++i)
            r *= x;
        return r;
    }

    double invert_numeric(double y) const {
        double lo = 0.0;
        double hi = 1.0;
        while (eval(hi) < y)
            hi *= 2.0;
        double x = 0.5 * (lo + hi);
        for (int it = 0; it < 200; ++it) {
            const double fx = eval(x) - y;
            if (fx == 0.0)
                return x;
            if (fx < 0.0)
                lo = x;
            else
                hi = x;
            const double d = derivative(x);
            double next = d > 0.0 ? x - fx / d : 0.5 * (lo + hi);
            if (!(next > lo && next < hi))
                next = 0.5 * (lo + hi);
            if (next == x || hi - lo <= 4 * std::numeric_limits<double>::epsilon() * hi)
                return next;
            x = next;
        }
        return x;
    }

    LatencyKind kind_ = LatencyKind::polynomial;
    std::vector<Term> terms_{{0, 0.0}};
};

inline std::string describe(const LatencyFunction& l) {
    std::string out;
    for (auto it = l.terms().rbegin(); it != l.terms().rend(); ++it) {
        if (it->coeff == 0.0 && !(it->degree == 0 && out.empty()))
            continue;
        if (!out.empty())
            out += " + ";
        out += std::to_string(it->coeff);
        if (it->degree == 1)
            out += "*x";
        else if (it->degree > 1)
            out += "*x^" + std::to_string(it->degree);
    }
    return out;
}

}  // namespace tollcap

#endif  // TOLLCAP_LATENCY_HPP_
