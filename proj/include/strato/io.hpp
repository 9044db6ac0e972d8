#pragma once

#include <cmath>
#include <cstdint>
#include <fstream>
#include <iomanip>
#include <limits>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "strato/analysis.hpp"
#include "strato/coeffs.hpp"
#include "strato/error.hpp"
#include "strato/exact.hpp"
#include "strato/integral_spec.hpp"
#include "strato/simulate.hpp"

namespace strato::io {

using nlohmann::json;

inline json to_json(const IntegralSpec& spec) {
    std::vector<int> q;
    for (const auto& w : spec.weights) q.push_back(w.q);
    return json{{"k", spec.k()},
                {"m", spec.m},
                {"indices", spec.indices},
                {"weights", q},
                {"interval", {spec.interval.t, spec.interval.T}},
                {"kind", to_string(spec.kind)}};
}

inline IntegralSpec spec_from_json(const json& j) {
    IntegralSpec spec;
    for (int q : j.at("weights").get<std::vector<int>>()) spec.weights.push_back(WeightSpec{q});
    spec.indices = j.at("indices").get<std::vector<int>>();
    spec.m = j.at("m").get<int>();
    const auto iv = j.at("interval").get<std::vector<double>>();
    spec.interval = Interval(iv.at(0), iv.at(1));
    spec.kind = parse_kind(j.at("kind").get<std::string>());
    spec.validate();
    return spec;
}

// ---------------------------------------------------------------------------
// Coefficient tables. Values are for T - t = 1; rescale by (T-t)^alpha.
// Exact rationals are written as decimal strings since they outgrow 64 bits.

inline json alpha_json(int two_alpha) {
    if (two_alpha % 2 == 0) return json(two_alpha / 2);
    return json(two_alpha / 2.0);
}

inline int two_alpha_from_json(const json& j) {
    const double a = j.get<double>();
    const double twice = 2.0 * a;
    if (std::abs(twice - std::round(twice)) > 1e-9) throw io_error("alpha must be a half-integer");
    return static_cast<int>(std::lround(twice));
}

inline json coefficient_table_json(const CoefficientTensor& tensor, int m = 1) {
    std::vector<int> q;
    for (const auto& w : tensor.weights()) q.push_back(w.q);
    json out{{"basis", to_string(tensor.basis())},
             {"k", tensor.k()},
             {"m", m},
             {"weights", q},
             {"orders", tensor.orders()},
             {"normalization", "unit-interval"},
             {"alpha", alpha_json(tensor.two_alpha())}};
    json entries = json::array();
    for (std::size_t i = 0; i < tensor.size(); ++i) {
        json e{{"j", tensor.multi_index(i)}};
        if (tensor.is_exact()) {
            const ExactValue& v = tensor.exact_values()[i];
            e["num"] = v.rational().get_num().get_str();
            e["den"] = v.rational().get_den().get_str();
            e["surds"] = v.surds();
            e["alpha"] = alpha_json(v.two_alpha());
        } else {
            e["value"] = tensor.unit_values()[i];
            e["err_bound"] = tensor.error_bounds()[i];
        }
        entries.push_back(std::move(e));
    }
    out["entries"] = std::move(entries);
    return out;
}

inline CoefficientTensor coefficient_table_from_json(const json& j) {
    try {
        if (j.at("normalization").get<std::string>() != "unit-interval") {
            throw io_error("unsupported table normalization");
        }
        const BasisKind basis = parse_basis(j.at("basis").get<std::string>());
        std::vector<WeightSpec> weights;
        for (int q : j.at("weights").get<std::vector<int>>()) weights.push_back(WeightSpec{q});
        const auto orders = j.at("orders").get<std::vector<int>>();
        if (static_cast<int>(weights.size()) != j.at("k").get<int>()) throw io_error("table k does not match weights");
        CoefficientTensor tensor(basis, weights, orders);
        const auto& entries = j.at("entries");
        if (entries.size() != tensor.size()) throw io_error("table entry count does not match orders");
        const bool exact = basis == BasisKind::legendre && !entries.empty() && entries.front().contains("num");
        if (exact) tensor.mutable_exact().assign(tensor.size(), ExactValue{});
        for (const auto& e : entries) {
            const auto idx = tensor.flat_index(e.at("j").get<std::vector<int>>());
            if (exact) {
                Rational r(Integer(e.at("num").get<std::string>()), Integer(e.at("den").get<std::string>()));
                r.canonicalize();
                std::uint64_t radicand = 1;
                for (auto s : e.at("surds").get<std::vector<std::uint64_t>>()) radicand *= s;
                ExactValue v(r, two_alpha_from_json(e.at("alpha")), radicand);
                tensor.mutable_values()[idx] = v.at_unit();
                tensor.mutable_exact()[idx] = std::move(v);
            } else {
                tensor.mutable_values()[idx] = e.at("value").get<double>();
                tensor.mutable_errors()[idx] = e.value("err_bound", 0.0);
            }
        }
        return tensor;
    } catch (const json::exception& ex) {
        throw io_error(std::string("malformed coefficient table: ") + ex.what());
    }
}

inline json read_json_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw io_error("cannot open '" + path + "'");
    try {
        return json::parse(in);
    } catch (const json::exception& ex) {
        throw io_error("cannot parse '" + path + "': " + ex.what());
    }
}

inline void write_text_file(const std::string& path, const std::string& text) {
    std::ofstream out(path);
    if (!out) throw io_error("cannot write '" + path + "'");
    out << text;
    if (!out) throw io_error("write failed for '" + path + "'");
}

// ---------------------------------------------------------------------------
// Paths

inline json path_json(const WienerPath& path) {
    json inc = json::array();
    for (int i = 1; i <= path.m; ++i) {
        const auto c = path.component(i);
        inc.push_back(std::vector<double>(c.begin(), c.end()));
    }
    return json{{"m", path.m},
                {"N", path.N},
                {"interval", {path.interval.t, path.interval.T}},
                {"seed", path.seed},
                {"stream", path.stream},
                {"increments", std::move(inc)}};
}

inline WienerPath path_from_json(const json& j) {
    try {
        WienerPath path;
        path.m = j.at("m").get<int>();
        path.N = j.at("N").get<int>();
        const auto iv = j.at("interval").get<std::vector<double>>();
        path.interval = Interval(iv.at(0), iv.at(1));
        path.seed = j.value("seed", std::uint64_t{0});
        path.stream = j.value("stream", std::uint64_t{0});
        const auto& inc = j.at("increments");
        if (static_cast<int>(inc.size()) != path.m) throw io_error("path needs one increment row per component");
        for (const auto& row : inc) {
            auto v = row.get<std::vector<double>>();
            if (static_cast<int>(v.size()) != path.N) throw io_error("increment row length must equal N");
            path.increments.insert(path.increments.end(), v.begin(), v.end());
        }
        return path;
    } catch (const json::exception& ex) {
        throw io_error(std::string("malformed path file: ") + ex.what());
    }
}

// ---------------------------------------------------------------------------
// Reports

inline json mc_report_json(const McReport& r) {
    return json{{"n_paths", r.n_paths},
                {"estimate", r.estimate},
                {"std_error", r.std_error},
                {"config",
                 {{"spec", to_json(r.config.spec)},
                  {"basis", to_string(r.config.basis)},
                  {"orders", r.config.orders},
                  {"N", r.config.N},
                  {"n_paths", r.config.n_paths},
                  {"seed", r.config.seed}}}};
}

inline std::string fmt_double(double v) {
    std::ostringstream os;
    os << std::setprecision(std::numeric_limits<double>::max_digits10) << v;
    return os.str();
}

inline std::string path_records_csv(const std::vector<PathRecord>& records) {
    std::ostringstream os;
    os << "path_id,oracle,expansion,sq_diff\n";
    for (const auto& r : records) {
        os << r.path_id << ',' << fmt_double(r.oracle) << ',' << fmt_double(r.expansion) << ','
           << fmt_double(r.sq_diff()) << '\n';
    }
    return os.str();
}

inline json exact_json(const ExactValue& v) {
    return json{{"num", v.rational().get_num().get_str()},
                {"den", v.rational().get_den().get_str()},
                {"surds", v.surds()},
                {"alpha", alpha_json(v.two_alpha())},
                {"text", v.to_string()}};
}

inline json error_report_json(const ErrorReport& r) {
    json out{{"spec", to_json(r.spec)},
             {"basis", to_string(r.basis)},
             {"orders", r.orders},
             {"parseval_error", r.parseval_error}};
    if (r.exact_error) {
        out["exact_error"] = exact_json(*r.exact_error);
        out["exact_error_value"] = r.exact_error_value();
    } else {
        out["exact_error"] = nullptr;
    }
    if (r.mc) {
        out["mc_estimate"] = {{"estimate", r.mc->estimate}, {"std_error", r.mc->std_error}};
    } else {
        out["mc_estimate"] = nullptr;
    }
    out["bound_constant"] = r.bound_constant ? json(*r.bound_constant) : json(nullptr);
    return out;
}

// Columns: q, exact, parseval, mc, std_error. Missing values are left empty.
inline std::string error_table_csv(const std::vector<ErrorReport>& rows) {
    std::ostringstream os;
    os << "q,exact,parseval,mc,std_error\n";
    for (const auto& r : rows) {
        os << (r.orders.empty() ? 0 : r.orders.front()) << ',';
        if (r.exact_error) os << fmt_double(r.exact_error_value());
        os << ',' << fmt_double(r.parseval_error) << ',';
        if (r.mc) os << fmt_double(r.mc->estimate) << ',' << fmt_double(r.mc->std_error);
        else os << ',';
        os << '\n';
    }
    return os.str();
}

inline json triangle_json(const TriangleCheck& c) {
    return json{{"check", "triangle"},
                {"spec", to_json(c.spec)},
                {"basis", "legendre"},
                {"q", c.q},
                {"exact_error", exact_json(c.exact)},
                {"exact_error_value", c.exact_value()},
                {"parseval_error", c.parseval},
                {"parseval_tolerance", c.parseval_tolerance},
                {"mc", mc_report_json(c.mc)},
                {"discrete_mse", c.discrete},
                {"slack", c.slack},
                {"deviation", c.deviation()},
                {"allowance", c.mc_allowance()},
                {"parseval_ok", c.parseval_ok()},
                {"mc_ok", c.mc_ok()},
                {"passed", c.passed()}};
}

inline std::string triangle_csv(const TriangleCheck& c) {
    std::ostringstream os;
    os << "q,exact,parseval,mc,std_error,discrete,slack,passed\n"
       << c.q << ',' << fmt_double(c.exact_value()) << ',' << fmt_double(c.parseval) << ','
       << fmt_double(c.mc.estimate) << ',' << fmt_double(c.mc.std_error) << ',' << fmt_double(c.discrete) << ','
       << fmt_double(c.slack) << ',' << (c.passed() ? 1 : 0) << '\n';
    return os.str();
}

inline json gap_json(const GapSweep& g) {
    return json{{"check", "gap"},
                {"spec", to_json(g.spec)},
                {"basis", to_string(g.basis)},
                {"p", g.p},
                {"mse", g.mse},
                {"n_samples", g.n_samples},
                {"floor", g.floor},
                {"threshold", g.threshold},
                {"monotone", g.monotone()},
                {"below_threshold", g.below_threshold()},
                {"passed", g.passed()}};
}

inline std::string gap_csv(const GapSweep& g) {
    std::ostringstream os;
    os << "p,mse\n";
    for (std::size_t i = 0; i < g.p.size(); ++i) os << g.p[i] << ',' << fmt_double(g.mse[i]) << '\n';
    return os.str();
}

inline json expansion_json(const ExpansionResult& r) {
    return json{{"spec", to_json(r.spec)}, {"orders", r.orders}, {"value", r.value}, {"term_count", r.term_count}};
}

}  // namespace strato::io
