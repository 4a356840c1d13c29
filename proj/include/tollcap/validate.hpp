#ifndef TOLLCAP_VALIDATE_HPP_
#define TOLLCAP_VALIDATE_HPP_

#include <cstddef>
#include <string>
#include <vector>

#include "tollcap/error.hpp"
#include "tollcap/model.hpp"
#include "tollcap/wardrop.hpp"

namespace tollcap {

struct ValidationReport {
    std::size_t links = 0;
    bool well_formed = false;
    bool all_affine = false;
    bool strictly_increasing = false;
    std::vector<std::size_t> non_strict_links;  // constant latencies
    bool full_support = false;                  // x_i(0) > 0 for every link
    Flow zero_toll_flow;

    /// Affine latencies, full zero-toll support and positive demand: the
    /// exact characterization and the cap algorithm apply.
    bool exact_ready() const { return well_formed && all_affine && full_support; }
};

/// Throws StructuralError for malformed instances; otherwise reports the
/// properties the solvers dispatch on.
inline ValidationReport validate(const Instance& inst) {
    if (inst.size() < 2)
        throw StructuralError("an instance needs at least two links, got " + std::to_string(inst.size()));

    ValidationReport report;
    report.links = inst.size();
    report.well_formed = true;
    report.all_affine = inst.all_affine();
    for (std::size_t i = 0; i < inst.size(); ++i)
        if (!inst.link(i).is_strictly_increasing())
            report.non_strict_links.push_back(i);
    report.strictly_increasing = report.non_strict_links.empty();

    auto zero = solve_wardrop(inst);
    report.full_support = inst.demand() > 0.0 && zero.support.size() == inst.size();
    report.zero_toll_flow = std::move(zero.flow);
    return report;
}

/// Throws NotApplicable unless the exact affine machinery applies.
inline ValidationReport require_exact(const Instance& inst) {
    auto report = validate(inst);
    if (!report.all_affine)
        throw NotApplicable("exact pricing requires strictly increasing affine latencies");
    if (!report.full_support)
        throw NotApplicable("exact pricing requires full support of the zero-toll Wardrop equilibrium");
    return report;
}

}  // namespace tollcap

#endif  // TOLLCAP_VALIDATE_HPP_
