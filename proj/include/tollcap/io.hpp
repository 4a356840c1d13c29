#ifndef TOLLCAP_IO_HPP_
#define TOLLCAP_IO_HPP_

#include <cmath>
#include <cstdio>
#include <fstream>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "tollcap/analysis.hpp"
#include "tollcap/capalg.hpp"
#include "tollcap/error.hpp"
#include "tollcap/latency.hpp"
#include "tollcap/model.hpp"
#include "tollcap/pricing.hpp"
#include "tollcap/validate.hpp"
#include "tollcap/wardrop.hpp"

namespace tollcap::io {

using json = nlohmann::ordered_json;

/// Numbers as JSON numbers; infinities as the strings "inf" / "-inf".
inline json number(double v) {
    if (std::isinf(v))
        return v > 0.0 ? "inf" : "-inf";
    if (std::isnan(v))
        return "nan";
    return v;
}

inline json numbers(std::span<const double> v) {
    json out = json::array();
    for (double x : v)
        out.push_back(number(x));
    return out;
}

/// 1-based link labels for documents.
inline json labels(std::span<const std::size_t> idx) {
    json out = json::array();
    for (auto i : idx)
        out.push_back(i + 1);
    return out;
}

/// Accepts a JSON number or the strings "inf" / "infinity".
inline double read_number(const json& j, const std::string& what) {
    if (j.is_number())
        return j.get<double>();
    if (j.is_string()) {
        const auto s = j.get<std::string>();
        if (s == "inf" || s == "infinity" || s == "+inf")
            return kInf;
    }
    throw ParseError(what + ": expected a number");
}

/// "inf" or a decimal number.
inline double parse_cap(const std::string& text) {
    if (text == "inf" || text == "infinity")
        return kInf;
    try {
        std::size_t used = 0;
        const double v = std::stod(text, &used);
        if (used != text.size())
            throw ParseError("bad cap '" + text + "'");
        return v;
    } catch (const std::logic_error&) {
        throw ParseError("bad cap '" + text + "'");
    }
}

/// Comma-separated list of numbers.
inline std::vector<double> parse_list(const std::string& text) {
    std::vector<double> out;
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, ',')) {
        try {
            std::size_t used = 0;
            out.push_back(std::stod(item, &used));
            while (used < item.size() && std::isspace(static_cast<unsigned char>(item[used])))
                ++used;
            if (used != item.size())
                throw ParseError("bad number '" + item + "'");
        } catch (const std::logic_error&) {
            throw ParseError("bad number '" + item + "'");
        }
    }
    if (out.empty())
        throw ParseError("empty number list");
    return out;
}

// ---------------------------------------------------------------- instances

namespace detail {

inline const json& field(const json& obj, const char* key, std::size_t link) {
    if (!obj.contains(key))
        throw ParseError("link " + std::to_string(link + 1) + ": missing field '" + key + "'");
    return obj.at(key);
}

inline double coeff(const json& obj, const char* key, std::size_t link, std::vector<std::size_t>& bad) {
    const auto& v = field(obj, key, link);
    if (!v.is_number())
        throw ParseError("link " + std::to_string(link + 1) + ": field '" + key + "' must be a number");
    const double x = v.get<double>();
    if (!std::isfinite(x))
        throw ParseError("link " + std::to_string(link + 1) + ": field '" + key + "' must be finite");
    if (x < 0.0 && (bad.empty() || bad.back() != link))
        bad.push_back(link);
    return x;
}

inline int degree(const json& v, std::size_t link) {
    if (!v.is_number_integer() || v.get<long long>() < 0)
        throw ParseError("link " + std::to_string(link + 1) + ": degree must be a nonnegative integer");
    return static_cast<int>(v.get<long long>());
}

}  // namespace detail

/// Instance from a parsed document. Negative coefficients raise
/// StructuralError naming every offending link; a malformed document
/// raises ParseError.
inline Instance parse_instance(const json& doc) {
    if (!doc.is_object())
        throw ParseError("instance must be a JSON object");
    double demand = 1.0;
    if (doc.contains("demand")) {
        if (!doc["demand"].is_number())
            throw ParseError("'demand' must be a number");
        demand = doc["demand"].get<double>();
        if (!std::isfinite(demand) || demand < 0.0)
            throw StructuralError("demand must be finite and nonnegative");
    }
    if (!doc.contains("links") || !doc["links"].is_array())
        throw ParseError("instance needs a 'links' array");

    std::vector<LatencyFunction> links;
    std::vector<std::size_t> bad;
    std::vector<std::vector<Term>> raw;
    std::vector<LatencyKind> kinds;
    for (std::size_t i = 0; i < doc["links"].size(); ++i) {
        const auto& l = doc["links"][i];
        if (!l.is_object())
            throw ParseError("link " + std::to_string(i + 1) + " must be an object");
        const auto kind = detail::field(l, "kind", i);
        if (!kind.is_string())
            throw ParseError("link " + std::to_string(i + 1) + ": 'kind' must be a string");
        const auto k = kind.get<std::string>();
        if (k == "affine") {
            const double a = detail::coeff(l, "a", i, bad);
            const double b = detail::coeff(l, "b", i, bad);
            raw.push_back({{0, b}, {1, a}});
            kinds.push_back(LatencyKind::affine);
        } else if (k == "monomial") {
            const double a = detail::coeff(l, "a", i, bad);
            const int d = detail::degree(detail::field(l, "d", i), i);
            if (d < 1)
                throw ParseError("link " + std::to_string(i + 1) + ": monomial degree must be at least 1");
            const double b = l.contains("b") ? detail::coeff(l, "b", i, bad) : 0.0;
            raw.push_back({{0, b}, {d, a}});
            kinds.push_back(LatencyKind::monomial);
        } else if (k == "polynomial") {
            const auto& cs = detail::field(l, "coeffs", i);
            if (!cs.is_array())
                throw ParseError("link " + std::to_string(i + 1) + ": 'coeffs' must be an array of [degree, coeff]");
            std::vector<Term> terms;
            for (const auto& pair : cs) {
                if (!pair.is_array() || pair.size() != 2 || !pair[1].is_number())
                    throw ParseError("link " + std::to_string(i + 1) + ": bad [degree, coeff] pair");
                const double c = pair[1].get<double>();
                if (!std::isfinite(c))
                    throw ParseError("link " + std::to_string(i + 1) + ": coefficients must be finite");
                if (c < 0.0 && (bad.empty() || bad.back() != i))
                    bad.push_back(i);
                terms.push_back({detail::degree(pair[0], i), c});
            }
            raw.push_back(std::move(terms));
            kinds.push_back(LatencyKind::polynomial);
        } else {
            throw ParseError("link " + std::to_string(i + 1) + ": unknown kind '" + k + "'");
        }
    }
    if (!bad.empty()) {
        std::string list;
        for (auto i : bad)
            list += (list.empty() ? "" : ", ") + std::to_string(i + 1);
        throw StructuralError("negative latency coefficients on link(s) " + list, bad);
    }
    for (std::size_t i = 0; i < raw.size(); ++i) {
        switch (kinds[i]) {
            case LatencyKind::affine: links.push_back(LatencyFunction::affine(raw[i][1].coeff, raw[i][0].coeff)); break;
            case LatencyKind::monomial:
                links.push_back(LatencyFunction::monomial(raw[i][1].coeff, raw[i][1].degree, raw[i][0].coeff));
                break;
            case LatencyKind::polynomial: links.push_back(LatencyFunction::polynomial(raw[i])); break;
        }
    }
    return Instance(std::move(links), demand);
}

inline Instance parse_instance(const std::string& text) {
    json doc;
    try {
        doc = json::parse(text);
    } catch (const json::parse_error& e) {
        throw ParseError(std::string("invalid JSON: ") + e.what());
    }
    return parse_instance(doc);
}

inline Instance load_instance(const std::string& path) {
    std::ifstream in(path);
    if (!in)
        throw ParseError("cannot open instance file '" + path + "'");
    std::stringstream ss;
    ss << in.rdbuf();
    return parse_instance(ss.str());
}

inline json to_json(const LatencyFunction& l) {
    json out;
    if (l.kind() == LatencyKind::affine && l.degree() <= 1) {
        out["kind"] = "affine";
        out["a"] = l.coefficient(1);
        out["b"] = l.constant_term();
    } else if (l.kind() == LatencyKind::monomial && l.terms().size() == 2) {
        out["kind"] = "monomial";
        out["a"] = l.terms().back().coeff;
        out["d"] = l.degree();
        out["b"] = l.constant_term();
    } else {
        out["kind"] = "polynomial";
        json cs = json::array();
        for (const auto& t : l.terms())
            cs.push_back(json::array({t.degree, t.coeff}));
        out["coeffs"] = cs;
    }
    return out;
}

inline json to_json(const Instance& inst) {
    json links = json::array();
    for (const auto& l : inst.links())
        links.push_back(to_json(l));
    return json{{"demand", inst.demand()}, {"links", links}};
}

// ------------------------------------------------------------------ results

inline json to_json(const ValidationReport& r) {
    json nonstrict = json::array();
    for (auto i : r.non_strict_links)
        nonstrict.push_back(i + 1);
    return json{{"links", r.links},
                {"well_formed", r.well_formed},
                {"all_affine", r.all_affine},
                {"strictly_increasing", r.strictly_increasing},
                {"non_strict_links", nonstrict},
                {"full_support", r.full_support},
                {"zero_toll_flow", numbers(r.zero_toll_flow.x)},
                {"exact_ready", r.exact_ready()}};
}

inline json to_json(const WardropSolution& s, const Instance& inst) {
    return json{{"flow", numbers(s.flow.x)},
                {"level", number(s.level)},
                {"support", labels(s.support)},
                {"cost", total_cost(inst, s.flow)}};
}

inline json to_json(const AffineMap& m) { return json{{"constant", m.constant}, {"slope", m.slope}}; }

inline json to_json(const Quadratic& q) { return json{{"q0", q.q0}, {"q1", q.q1}, {"q2", q.q2}}; }

inline json to_json(const OptimalCapResult& r) {
    json intervals = json::array();
    for (std::size_t k = 0; k < r.curve.intervals.size(); ++k) {
        const auto& iv = r.curve.intervals[k];
        const auto& m = r.interval_minima[k];
        json flow = json::array();
        json toll = json::array();
        for (std::size_t i = 0; i < iv.flow.size(); ++i) {
            flow.push_back(to_json(iv.flow[i]));
            toll.push_back(to_json(iv.toll[i]));
        }
        intervals.push_back(json{{"lo", number(iv.lo)},
                                 {"hi", number(iv.hi)},
                                 {"binding", labels(iv.binding)},
                                 {"level", to_json(iv.level)},
                                 {"flow", flow},
                                 {"tolls", toll},
                                 {"cost", to_json(iv.cost)},
                                 {"argmin", number(m.argmin)},
                                 {"min_cost", m.value}});
    }
    return json{{"c_star", r.c_star},
                {"cost", r.cost_at_star},
                {"breakpoints", numbers(r.curve.breakpoints)},
                {"markup", numbers(r.curve.markup)},
                {"intervals", intervals}};
}

inline json to_json(const BestResponse& br) {
    json argmax = json::array();
    for (const auto& iv : br.argmax)
        argmax.push_back(json::array({number(iv.lo), number(iv.hi)}));
    json pieces = json::array();
    for (const auto& p : br.pieces)
        pieces.push_back(json{{"lo", number(p.lo)}, {"hi", number(p.hi)}, {"linear", p.linear}, {"quadratic", p.quadratic}});
    return json{{"argmax", argmax}, {"value", br.value}, {"flat", br.flat}, {"pieces", pieces}};
}

inline json to_json(const EquilibriumReport& r) {
    json out{{"status", to_string(r.status)}, {"cap", number(r.cap)}};
    out["tolls"] = r.tolls ? numbers(r.tolls->values()) : json(nullptr);
    out["flow"] = r.flow ? numbers(r.flow->x) : json(nullptr);
    out["level"] = r.flow && r.flow->effective_cost ? number(*r.flow->effective_cost) : json(nullptr);
    out["binding_set"] = labels(r.binding_set);
    out["max_deviation_gain"] = number(r.max_deviation_gain);
    if (!r.deviation_gains.empty())
        out["deviation_gains"] = numbers(r.deviation_gains);
    if (!r.equilibria.empty()) {
        json eqs = json::array();
        for (const auto& e : r.equilibria)
            eqs.push_back(json{{"tolls", numbers(e.tolls)}, {"flow", numbers(e.flow)}, {"gain", e.gain}, {"cost", e.cost}});
        out["equilibria"] = eqs;
    }
    out["certificate"] = r.certificate;
    return out;
}

inline json to_json(const EfficiencyReport& r) {
    return json{{"cost_opt", r.cost_opt},
                {"cost_at_cap", r.cost_at_cap},
                {"ratio", r.ratio},
                {"bound", number(r.bound)},
                {"bound_kind", to_string(r.bound_kind)},
                {"bound_applies", r.bound_applies}};
}

// ---------------------------------------------------------------------- CSV

/// 12 significant digits; "inf" for infinities.
inline std::string csv_number(double v) {
    if (std::isinf(v))
        return v > 0.0 ? "inf" : "-inf";
    if (std::isnan(v))
        return "nan";
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.12g", v);
    return buf;
}

inline void write_sweep_csv(std::ostream& out, std::size_t n, const std::vector<SweepRow>& rows) {
    out << "c,K,cost";
    for (std::size_t i = 1; i <= n; ++i)
        out << ",t_" << i;
    for (std::size_t i = 1; i <= n; ++i)
        out << ",x_" << i;
    out << '\n';
    for (const auto& r : rows) {
        out << csv_number(r.c) << ',' << csv_number(r.level) << ',' << csv_number(r.cost);
        for (double v : r.tolls)
            out << ',' << csv_number(v);
        for (double v : r.flow)
            out << ',' << csv_number(v);
        out << '\n';
    }
}

inline void write_response_csv(std::ostream& out, const std::vector<ResponseRow>& rows) {
    out << "t_opponent,br_lo,br_hi,profit\n";
    for (const auto& r : rows)
        out << csv_number(r.opponent) << ',' << csv_number(r.br_lo) << ',' << csv_number(r.br_hi) << ','
            << csv_number(r.profit) << '\n';
}

struct BoundRow {
    int d = 1;
    double upper = 0.0;
    double lower_nonexistence = kInf;  // NaN when the family does not apply
};

inline std::vector<BoundRow> bound_table(int d_max) {
    std::vector<BoundRow> rows;
    for (int d = 1; d <= d_max; ++d)
        rows.push_back({d, bound_poly(d), d >= 3 ? lower_bound_nonexistence(d) : std::nan("")});
    return rows;
}

inline void write_bounds_csv(std::ostream& out, const std::vector<BoundRow>& rows) {
    out << "d,upper_bound,lower_bound_nonexistence\n";
    for (const auto& r : rows)
        out << r.d << ',' << csv_number(r.upper) << ',' << (std::isnan(r.lower_nonexistence) ? "" : csv_number(r.lower_nonexistence))
            << '\n';
}

inline void write_intervals_csv(std::ostream& out, const OptimalCapResult& r) {
    out << "lo,hi,binding,q0,q1,q2,argmin,min_cost\n";
    for (std::size_t k = 0; k < r.curve.intervals.size(); ++k) {
        const auto& iv = r.curve.intervals[k];
        std::string binding;
        for (auto i : iv.binding)
            binding += (binding.empty() ? "" : " ") + std::to_string(i + 1);
        out << csv_number(iv.lo) << ',' << csv_number(iv.hi) << ',' << binding << ',' << csv_number(iv.cost.q0) << ','
            << csv_number(iv.cost.q1) << ',' << csv_number(iv.cost.q2) << ',' << csv_number(r.interval_minima[k].argmin)
            << ',' << csv_number(r.interval_minima[k].value) << '\n';
    }
}

}  // namespace tollcap::io

#endif  // TOLLCAP_IO_HPP_
