#ifndef TOLLCAP_CLI_HPP_
#define TOLLCAP_CLI_HPP_

#include <fstream>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include "tollcap/analysis.hpp"
#include "tollcap/capalg.hpp"
#include "tollcap/error.hpp"
#include "tollcap/io.hpp"
#include "tollcap/model.hpp"
#include "tollcap/presets.hpp"
#include "tollcap/pricing.hpp"
#include "tollcap/validate.hpp"
#include "tollcap/wardrop.hpp"

namespace tollcap::cli {

enum ExitCode : int {
    kOk = 0,
    kParseFailure = 1,
    kValidationFailure = 2,
    kNotApplicable = 3,
    kNoneFound = 4,
    kRejected = 5,
};

struct RunConfig {
    std::string command;
    std::optional<std::string> instance_path;
    std::optional<std::string> preset;
    PresetParams preset_params;
    std::optional<std::vector<double>> tolls;
    std::optional<double> cap;
    std::optional<std::string> result_path;  // verify: read tolls and cap from a result document
    std::size_t firm = 1;                    // 1-based
    int grid_n = kDefaultGrid;
    int refine_iters = kDefaultRefine;
    double eps = kEquilibriumEpsilon;
    std::string format = "json";
    std::optional<std::string> output;
    std::optional<double> c_lo;
    std::optional<double> c_hi;
    int steps = 101;
    int d_max = 10;
};

inline const std::vector<std::string>& commands() {
    static const std::vector<std::string> names{"wardrop", "optimal-flow", "spne",   "best-response", "optimal-cap",
                                                "sweep",   "duopoly-search", "verify", "bounds",        "report"};
    return names;
}

namespace detail {

using io::json;

struct Outcome {
    int code = kOk;
    json doc;
    std::string csv;  // used instead of doc when non-empty
};

inline Instance load(const RunConfig& cfg) {
    if (cfg.instance_path.has_value() == cfg.preset.has_value())
        throw ParseError("give exactly one of --instance and --preset");
    if (cfg.preset)
        return make_preset(*cfg.preset, cfg.preset_params);
    return io::load_instance(*cfg.instance_path);
}

inline std::vector<double> tolls_or_zero(const RunConfig& cfg, const Instance& inst) {
    if (!cfg.tolls)
        return std::vector<double>(inst.size(), 0.0);
    require_size(inst, cfg.tolls->size(), "toll vector");
    return *cfg.tolls;
}

inline void check_ranges(const RunConfig& cfg) {
    if (cfg.grid_n < 1)
        throw ParseError("--grid-n must be at least 1");
    if (cfg.refine_iters < 0)
        throw ParseError("--refine-iters must be nonnegative");
    if (!(cfg.eps > 0.0))
        throw ParseError("--eps must be positive");
    if (cfg.steps < 2)
        throw ParseError("--steps must be at least 2");
    if (cfg.d_max < 1)
        throw ParseError("--d-max must be at least 1");
    if (cfg.firm < 1)
        throw ParseError("--firm is 1-based");
    if (cfg.cap && (std::isnan(*cfg.cap) || *cfg.cap < 0.0))
        throw ParseError("--cap must be nonnegative or inf");
    if (cfg.format != "json" && cfg.format != "csv")
        throw ParseError("--format must be json or csv");
}

inline int status_code(const EquilibriumReport& r) {
    if (r.found())
        return kOk;
    if (r.status == EquilibriumStatus::not_applicable)
        return kNotApplicable;
    if (r.status == EquilibriumStatus::rejected)
        return kRejected;
    return kNoneFound;
}

inline void merge(json& doc, const json& part) {
    for (auto it = part.begin(); it != part.end(); ++it)
        doc[it.key()] = it.value();
}

/// Exact characterization when it applies, the price-representation
/// fixed point with a deviation check otherwise.
inline EquilibriumReport equilibrium(const Instance& inst, const ValidationReport& v, double cap, const RunConfig& cfg) {
    if (v.exact_ready())
        return spne_at_cap(inst, cap);
    return spne_general(inst, cap, cfg.eps, cfg.grid_n);
}

inline Outcome cmd_wardrop(const RunConfig& cfg, const Instance& inst) {
    const auto t = tolls_or_zero(cfg, inst);
    const auto sol = solve_wardrop(inst, t);
    json doc{{"tolls", io::numbers(t)}};
    merge(doc, io::to_json(sol, inst));
    doc["verified"] = verify_wardrop(inst, t, sol.flow.x, 1e-8);
    return {kOk, doc, {}};
}

inline Outcome cmd_optimal_flow(const RunConfig&, const Instance& inst) {
    const auto sol = optimal_flow(inst);
    json doc = io::to_json(sol, inst);
    doc["marginal_level"] = doc["level"];
    doc.erase("level");
    return {kOk, doc, {}};
}

inline Outcome cmd_spne(const RunConfig& cfg, const Instance& inst) {
    const auto v = validate(inst);
    const double cap = cfg.cap.value_or(kInf);
    const auto r = equilibrium(inst, v, cap, cfg);
    json doc = io::to_json(r);
    if (r.flow)
        doc["cost"] = total_cost(inst, r.flow->x);
    return {status_code(r), doc, {}};
}

inline Outcome cmd_best_response(const RunConfig& cfg, const Instance& inst) {
    const std::size_t firm = cfg.firm - 1;
    if (firm >= inst.size())
        throw ParseError("--firm out of range");
    const double cap = cfg.cap.value_or(kInf);
    const ResponseOptions opts{cfg.grid_n, cfg.refine_iters};
    if (cfg.format == "csv") {
        std::ostringstream csv;
        io::write_response_csv(csv, tabulate_best_response(inst, firm, cap, cfg.grid_n, {400, cfg.refine_iters}));
        return {kOk, {}, csv.str()};
    }
    const auto t = tolls_or_zero(cfg, inst);
    const auto br = best_response(inst, t, firm, cap, opts);
    json doc{{"firm", cfg.firm}, {"cap", io::number(cap)}, {"tolls", io::numbers(t)},
             {"method", inst.all_affine() ? "exact" : "numeric"}};
    merge(doc, io::to_json(br));
    return {kOk, doc, {}};
}

inline Outcome cmd_optimal_cap(const RunConfig& cfg, const Instance& inst) {
    require_exact(inst);
    const auto best = optimal_cap(inst);
    if (cfg.format == "csv") {
        std::ostringstream csv;
        io::write_intervals_csv(csv, best);
        return {kOk, {}, csv.str()};
    }
    json doc = io::to_json(best);
    doc["cap"] = best.c_star;
    doc["tolls"] = io::numbers(best.curve.tolls_at(best.c_star));
    doc["flow"] = io::numbers(best.curve.flow_at(best.c_star));
    doc["efficiency"] = io::to_json(efficiency_ratio(inst, best.c_star));
    return {kOk, doc, {}};
}

inline Outcome cmd_sweep(const RunConfig& cfg, const Instance& inst) {
    require_exact(inst);
    double hi = 1.0;
    if (cfg.c_hi) {
        hi = *cfg.c_hi;
    } else {
        const auto curve = build_cap_curve(inst);
        if (!curve.breakpoints.empty())
            hi = 1.25 * curve.breakpoints.front();
    }
    const auto rows = sweep(inst, cfg.c_lo.value_or(0.0), hi, cfg.steps);
    if (cfg.format == "csv") {
        std::ostringstream csv;
        io::write_sweep_csv(csv, inst.size(), rows);
        return {kOk, {}, csv.str()};
    }
    json out = json::array();
    for (const auto& r : rows)
        out.push_back(json{{"c", r.c}, {"level", r.level}, {"cost", r.cost}, {"tolls", io::numbers(r.tolls)},
                           {"flow", io::numbers(r.flow)}});
    return {kOk, json{{"rows", out}}, {}};
}

inline Outcome cmd_duopoly_search(const RunConfig& cfg, const Instance& inst) {
    validate(inst);
    if (!cfg.cap || !std::isfinite(*cfg.cap))
        throw ParseError("duopoly-search needs a finite --cap");
    SearchOptions opts;
    opts.grid_n = cfg.grid_n;
    opts.eps = cfg.eps;
    opts.refine_iters = cfg.refine_iters;
    opts.verify_grid = cfg.grid_n;
    const auto r = duopoly_search(inst, *cfg.cap, opts);
    json doc = io::to_json(r);
    if (r.flow)
        doc["cost"] = total_cost(inst, r.flow->x);
    return {status_code(r), doc, {}};
}

inline Outcome cmd_verify(const RunConfig& cfg, const Instance& inst) {
    std::optional<std::vector<double>> tolls = cfg.tolls;
    std::optional<double> cap = cfg.cap;
    if (cfg.result_path) {
        std::ifstream in(*cfg.result_path);
        if (!in)
            throw ParseError("cannot open result file '" + *cfg.result_path + "'");
        json doc;
        try {
            doc = json::parse(in);
        } catch (const json::parse_error& e) {
            throw ParseError(std::string("invalid result JSON: ") + e.what());
        }
        if (!tolls) {
            if (!doc.contains("tolls") || !doc["tolls"].is_array())
                throw ParseError("result document has no 'tolls' array");
            tolls.emplace();
            for (const auto& v : doc["tolls"])
                tolls->push_back(io::read_number(v, "tolls"));
        }
        if (!cap && doc.contains("cap"))
            cap = io::read_number(doc["cap"], "cap");
    }
    if (!tolls)
        throw ParseError("verify needs --tolls or --result");
    require_size(inst, tolls->size(), "toll vector");
    const auto r = verify_spne(inst, cap.value_or(kInf), *tolls, cfg.eps, cfg.grid_n, cfg.refine_iters);
    return {status_code(r), io::to_json(r), {}};
}

inline Outcome cmd_bounds(const RunConfig& cfg) {
    const auto rows = io::bound_table(cfg.d_max);
    if (cfg.format == "csv") {
        std::ostringstream csv;
        io::write_bounds_csv(csv, rows);
        return {kOk, {}, csv.str()};
    }
    json out = json::array();
    for (const auto& r : rows) {
        const auto mono = LatencyFunction::monomial(1.0, r.d, 0.0);
        out.push_back(json{{"d", r.d},
                           {"upper_bound", r.upper},
                           {"lower_bound_nonexistence", std::isnan(r.lower_nonexistence) ? json(nullptr) : json(r.lower_nonexistence)},
                           {"mu1_bound", mu1_bound(r.d)},
                           {"mu1_estimate", mu1_estimate(mono)},
                           {"mu2_bound", mu2_bound(r.d)},
                           {"mu2_estimate", mu2_estimate(mono)}});
    }
    return {kOk, json{{"rows", out}}, {}};
}

inline Outcome cmd_report(const RunConfig& cfg, const Instance& inst) {
    const auto v = validate(inst);
    json doc{{"validation", io::to_json(v)}};
    doc["wardrop"] = io::to_json(solve_wardrop(inst), inst);
    doc["optimal_flow"] = io::to_json(optimal_flow(inst), inst);
    const double cap = cfg.cap.value_or(kInf);
    const auto eq = equilibrium(inst, v, cap, cfg);
    doc["spne"] = io::to_json(eq);
    if (v.exact_ready()) {
        const auto best = optimal_cap(inst);
        doc["optimal_cap"] = io::to_json(best);
        doc["efficiency"] = io::to_json(efficiency_ratio(inst, best.c_star));
    } else {
        doc["optimal_cap"] = json{{"status", "not_applicable"},
                                  {"reason", v.all_affine ? "zero-toll equilibrium lacks full support"
                                                          : "optimal caps are computed for affine latencies only"}};
        if (eq.found() && eq.flow)
            doc["efficiency"] = io::to_json(efficiency_ratio(inst, eq.flow->x));
        else
            doc["efficiency"] = nullptr;
    }
    return {kOk, doc, {}};
}

inline Outcome dispatch(const RunConfig& cfg) {
    check_ranges(cfg);
    if (cfg.command == "bounds")
        return cmd_bounds(cfg);
    const auto inst = load(cfg);
    if (inst.size() < 2)
        validate(inst);  // raises the structural error with its diagnostics
    Outcome o;
    if (cfg.command == "wardrop")
        o = cmd_wardrop(cfg, inst);
    else if (cfg.command == "optimal-flow")
        o = cmd_optimal_flow(cfg, inst);
    else if (cfg.command == "spne")
        o = cmd_spne(cfg, inst);
    else if (cfg.command == "best-response")
        o = cmd_best_response(cfg, inst);
    else if (cfg.command == "optimal-cap")
        o = cmd_optimal_cap(cfg, inst);
    else if (cfg.command == "sweep")
        o = cmd_sweep(cfg, inst);
    else if (cfg.command == "duopoly-search")
        o = cmd_duopoly_search(cfg, inst);
    else if (cfg.command == "verify")
        o = cmd_verify(cfg, inst);
    else if (cfg.command == "report")
        o = cmd_report(cfg, inst);
    else
        throw ParseError("unknown command '" + cfg.command + "'");
    if (o.csv.empty()) {
        json head{{"command", cfg.command}, {"instance", io::to_json(inst)}};
        merge(head, o.doc);
        o.doc = std::move(head);
    }
    return o;
}

inline json error_doc(const RunConfig& cfg, const char* kind, const std::string& message) {
    return json{{"command", cfg.command}, {"error", json{{"kind", kind}, {"message", message}}}};
}

}  // namespace detail

/// Runs one command; the result document goes to cfg.output or `out`,
/// diagnostics to `err`. Returns the process exit code.
inline int run(const RunConfig& cfg, std::ostream& out, std::ostream& err) {
    detail::Outcome o;
    try {
        o = detail::dispatch(cfg);
    } catch (const ParseError& e) {
        err << "error: " << e.what() << '\n';
        o = {kParseFailure, detail::error_doc(cfg, "parse", e.what()), {}};
    } catch (const StructuralError& e) {
        err << "validation failed: " << e.what() << '\n';
        o = {kValidationFailure, detail::error_doc(cfg, "validation", e.what()), {}};
        o.doc["error"]["links"] = io::labels(e.links());
    } catch (const NotApplicable& e) {
        err << "not applicable: " << e.what() << '\n';
        o = {kNotApplicable, detail::error_doc(cfg, "not_applicable", e.what()), {}};
        o.doc["status"] = "not_applicable";
    } catch (const std::invalid_argument& e) {  // shape and precondition errors
        err << "validation failed: " << e.what() << '\n';
        o = {kValidationFailure, detail::error_doc(cfg, "validation", e.what()), {}};
    } catch (const std::domain_error& e) {
        err << "validation failed: " << e.what() << '\n';
        o = {kValidationFailure, detail::error_doc(cfg, "validation", e.what()), {}};
    } catch (const std::out_of_range& e) {
        err << "error: " << e.what() << '\n';
        o = {kParseFailure, detail::error_doc(cfg, "parse", e.what()), {}};
    }

    std::ofstream file;
    if (cfg.output) {
        file.open(*cfg.output);
        if (!file) {
            err << "error: cannot write '" << *cfg.output << "'\n";
            return kParseFailure;
        }
    }
    std::ostream& sink = cfg.output ? static_cast<std::ostream&>(file) : out;
    if (!o.csv.empty())
        sink << o.csv;
    else
        sink << o.doc.dump(2) << '\n';
    return o.code;
}

}  // namespace tollcap::cli

#endif  // TOLLCAP_CLI_HPP_
