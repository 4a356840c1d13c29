#ifndef TOLLCAP_MODEL_HPP_
#define TOLLCAP_MODEL_HPP_

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <numeric>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "tollcap/error.hpp"
#include "tollcap/latency.hpp"

namespace tollcap {

inline constexpr double kInf = std::numeric_limits<double>::infinity();

inline constexpr double kFlowTolerance = 1e-9;     // feasibility of sum(x) = demand
inline constexpr double kSupportTolerance = 1e-9;  // x_i above this counts as used

/// Parallel links between one origin and one destination, with a fixed demand.
class Instance {
 public:
    Instance() = default;
    explicit Instance(std::vector<LatencyFunction> links, double demand = 1.0)
        : links_(std::move(links)), demand_(demand) {
        if (!std::isfinite(demand_) || demand_ < 0.0)
            throw DomainError("demand must be finite and nonnegative");
    }

    std::size_t size() const noexcept { return links_.size(); }
    double demand() const noexcept { return demand_; }
    const std::vector<LatencyFunction>& links() const noexcept { return links_; }
    const LatencyFunction& link(std::size_t i) const { return links_.at(i); }

    bool all_affine() const noexcept {
        return std::all_of(links_.begin(), links_.end(),
                           [](const LatencyFunction& l) { return l.is_affine(); });
    }

 private:
    std::vector<LatencyFunction> links_;
    double demand_ = 1.0;
};

struct Flow {
    std::vector<double> x;
    std::optional<double> effective_cost;  // common cost K on the support

    std::size_t size() const noexcept { return x.size(); }
    double operator[](std::size_t i) const { return x[i]; }
    double total() const { return std::accumulate(x.begin(), x.end(), 0.0); }
};

/// Per-link tolls subject to a uniform cap (kInf when uncapped).
class TollVector {
 public:
    TollVector() = default;
    explicit TollVector(std::vector<double> t, double cap = kInf) : t_(std::move(t)), cap_(cap) {
        if (std::isnan(cap_) || cap_ < 0.0)
            throw DomainError("toll cap must be nonnegative");
        for (double v : t_) {
            if (!std::isfinite(v))
                throw DomainError("tolls must be finite");
            if (v < 0.0 || v > cap_)
                throw DomainError("tolls must lie in [0, cap]");
        }
    }

    static TollVector zero(std::size_t n) { return TollVector(std::vector<double>(n, 0.0)); }

    std::size_t size() const noexcept { return t_.size(); }
    double cap() const noexcept { return cap_; }
    double operator[](std::size_t i) const { return t_[i]; }
    const std::vector<double>& values() const noexcept { return t_; }

    /// Copy with toll i replaced (and checked against the cap).
    TollVector with(std::size_t i, double value) const {
        auto t = t_;
        t.at(i) = value;
        return TollVector(std::move(t), cap_);
    }

 private:
    std::vector<double> t_;
    double cap_ = kInf;
};

inline void require_size(const Instance& inst, std::size_t got, const char* what) {
    if (got != inst.size())
        throw ShapeError(std::string(what) + " has " + std::to_string(got) + " entries, instance has " +
                         std::to_string(inst.size()) + " links");
}

/// C(x) = sum_i l_i(x_i) * x_i
inline double total_cost(const Instance& inst, std::span<const double> x) {
    require_size(inst, x.size(), "flow");
    double cost = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i)
        cost += inst.link(i).eval(x[i]) * x[i];
    return cost;
}

inline double total_cost(const Instance& inst, const Flow& flow) { return total_cost(inst, flow.x); }

/// Flow is nonnegative and routes the demand, within kFlowTolerance.
inline bool is_feasible(const Instance& inst, std::span<const double> x, double tol = kFlowTolerance) {
    if (x.size() != inst.size())
        return false;
    double sum = 0.0;
    for (double v : x) {
        if (!std::isfinite(v) || v < -tol)
            return false;
        sum += v;
    }
    return std::abs(sum - inst.demand()) <= tol * std::max(1.0, inst.demand());
}

}  // namespace tollcap

#endif  // TOLLCAP_MODEL_HPP_
