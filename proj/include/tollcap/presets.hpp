#ifndef TOLLCAP_PRESETS_HPP_
#define TOLLCAP_PRESETS_HPP_

#include <cmath>
#include <optional>
#include <string>
#include <vector>

#include "tollcap/error.hpp"
#include "tollcap/latency.hpp"
#include "tollcap/model.hpp"

namespace tollcap {

/// Parameters for the named instances; unset fields take the defaults below.
struct PresetParams {
    std::optional<double> a2;  // fig-bad (required), fig-non (optional slope of link 2)
    std::optional<double> a3;  // fig-mul, default 1/2
    std::optional<int> n;      // fig-aff, default 2
    std::optional<int> d;      // fig-poly, default 3
};

/// x and x + 1/2.
inline Instance preset_fig_alg() {
    return Instance({LatencyFunction::affine(1.0, 0.0), LatencyFunction::affine(1.0, 0.5)});
}

/// x and a2 * x.
inline Instance preset_fig_bad(double a2) {
    if (!(a2 > 0.0) || !std::isfinite(a2))
        throw DomainError("fig-bad needs a positive slope a2");
    return Instance({LatencyFunction::affine(1.0, 0.0), LatencyFunction::affine(a2, 0.0)});
}

/// x, x and a3 * x + 6/5.
inline Instance preset_fig_mul(double a3 = 0.5) {
    if (!(a3 > 0.0) || !std::isfinite(a3))
        throw DomainError("fig-mul needs a positive slope a3");
    return Instance({LatencyFunction::affine(1.0, 0.0), LatencyFunction::affine(1.0, 0.0),
                     LatencyFunction::affine(a3, 1.2)});
}

/// x^2 against a free link (or a2 * x when a2 is given).
inline Instance preset_fig_non(std::optional<double> a2 = std::nullopt) {
    auto second = LatencyFunction::constant(0.0);
    if (a2) {
        if (!(*a2 >= 0.0) || !std::isfinite(*a2))
            throw DomainError("fig-non needs a nonnegative slope a2");
        second = LatencyFunction::affine(*a2, 0.0);
    }
    return Instance({LatencyFunction::monomial(1.0, 2, 0.0), second});
}

/// n-1 links with latency x and one constant link 1/(2(n-1)).
inline Instance preset_fig_aff(int n) {
    if (n < 2)
        throw DomainError("fig-aff needs n >= 2");
    std::vector<LatencyFunction> links(static_cast<std::size_t>(n - 1), LatencyFunction::affine(1.0, 0.0));
    links.push_back(LatencyFunction::constant(1.0 / (2.0 * (n - 1))));
    return Instance(std::move(links));
}

/// x^d against the constant ((d-1)/d)^d.
inline Instance preset_fig_poly(int d) {
    if (d < 1)
        throw DomainError("fig-poly needs d >= 1");
    const double level = std::pow((d - 1.0) / d, d);
    return Instance({LatencyFunction::monomial(1.0, d, 0.0), LatencyFunction::constant(level)});
}

inline const std::vector<std::string>& preset_names() {
    static const std::vector<std::string> names{"fig-alg", "fig-bad", "fig-mul", "fig-non", "fig-aff", "fig-poly"};
    return names;
}

/// Builds a preset by name; unknown names raise ParseError.
inline Instance make_preset(const std::string& name, const PresetParams& p = {}) {
    if (name == "fig-alg")
        return preset_fig_alg();
    if (name == "fig-bad") {
        if (!p.a2)
            throw ParseError("fig-bad needs --a2");
        return preset_fig_bad(*p.a2);
    }
    if (name == "fig-mul")
        return preset_fig_mul(p.a3.value_or(0.5));
    if (name == "fig-non")
        return preset_fig_non(p.a2);
    if (name == "fig-aff")
        return preset_fig_aff(p.n.value_or(2));
    if (name == "fig-poly")
        return preset_fig_poly(p.d.value_or(3));
    throw ParseError("unknown preset '" + name + "'");
}

}  // namespace tollcap

#endif  // TOLLCAP_PRESETS_HPP_
