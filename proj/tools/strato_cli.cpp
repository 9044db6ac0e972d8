// strato: coefficient tables, expansion evaluation, Monte Carlo validation.
//
// Exit codes: 0 ok, 1 validation failed, 2 usage, 3 contract violation,
// 4 resource budget, 5 I/O, 6 domain or unsupported case.

#include <cstdint>
#include <cstdlib>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "strato/strato.hpp"

using namespace strato;
using nlohmann::json;

namespace {

enum Exit : int { ok = 0, failed = 1, usage = 2, contract = 3, resource = 4, io_failure = 5, domain = 6 };

std::vector<int> parse_list(const std::string& text, const char* what) {
    std::vector<int> out;
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, ',')) {
        std::size_t used = 0;
        int v = 0;
        try {
            v = std::stoi(item, &used);
        } catch (const std::exception&) {
            used = 0;
        }
        while (used < item.size() && item[used] == ' ') ++used;
        if (item.empty() || used != item.size()) {
            throw configuration_error(std::string("malformed ") + what + " list '" + text + "'");
        }
        out.push_back(v);
    }
    if (out.empty()) throw configuration_error(std::string("empty ") + what + " list");
    return out;
}

// A single value is broadcast to all k slots.
std::vector<int> per_slot(const std::string& text, int k, const char* what) {
    auto v = parse_list(text, what);
    if (v.size() == 1 && k > 1) v.assign(static_cast<std::size_t>(k), v.front());
    if (static_cast<int>(v.size()) != k) {
        throw configuration_error(std::string(what) + " list needs " + std::to_string(k) + " entries");
    }
    return v;
}

struct Common {
    unsigned threads = default_threads();
    double length = 1.0;
    std::optional<std::uint64_t> seed;
    std::string json_out;
    std::string csv_out;

    std::uint64_t resolve_seed(bool required) const {
        if (seed) return *seed;
        if (const char* env = std::getenv("STRATO_SEED")) {
            try {
                std::size_t used = 0;
                const auto v = std::stoull(env, &used);
                if (used == std::string(env).size()) return v;
            } catch (const std::exception&) {
            }
            throw configuration_error("STRATO_SEED is not an unsigned integer");
        }
        if (required) throw configuration_error("a seed is required (--seed or STRATO_SEED)");
        return 1;
    }

    Interval interval() const {
        if (!(length > 0.0)) throw configuration_error("--length must be positive");
        return Interval(0.0, length);
    }

    void write(const json& j, const std::string& csv) const {
        if (!json_out.empty()) io::write_text_file(json_out, j.dump(2) + "\n");
        if (!csv_out.empty()) io::write_text_file(csv_out, csv);
    }
};

void add_common(CLI::App* cmd, Common& c, bool seeded) {
    cmd->add_option("--threads", c.threads, "worker threads (results do not depend on it)")->check(CLI::PositiveNumber);
    cmd->add_option("--length", c.length, "interval length T - t");
    if (seeded) cmd->add_option("--seed", c.seed, "random seed (falls back to STRATO_SEED)");
    cmd->add_option("--json", c.json_out, "write JSON output to this file");
}

TensorOptions tensor_options(const Common& c) {
    TensorOptions o;
    o.threads = c.threads;
    return o;
}

// ---------------------------------------------------------------------------

struct CoeffArgs {
    Common common;
    std::string basis = "legendre";
    int k = 0;
    std::string orders;
    std::string weights = "0";
    int m = 1;
    std::string out;
};

int run_coeff(const CoeffArgs& a) {
    if (a.k < 1) throw configuration_error("--k must be at least 1");
    const BasisKind basis = parse_basis(a.basis);
    const auto orders = per_slot(a.orders, a.k, "orders");
    const auto q = per_slot(a.weights, a.k, "weights");
    std::vector<WeightSpec> weights;
    for (int v : q) weights.push_back(WeightSpec{v});
    const Interval interval = a.common.interval();
    const CoefficientTensor tensor = coefficient_tensor(weights, basis, orders, tensor_options(a.common));

    IntegralSpec spec;
    spec.weights = weights;
    spec.indices.assign(static_cast<std::size_t>(a.k), 1);
    spec.interval = interval;
    const double scale = tensor.scale(interval.length());
    double captured = 0.0;
    for (double c : tensor.unit_values()) captured += c * c * scale * scale;
    const ExactValue norm = kernel_norm_squared(spec);

    const json table = io::coefficient_table_json(tensor, a.m);
    if (!a.out.empty()) io::write_text_file(a.out, table.dump(2) + "\n");
    if (!a.common.json_out.empty()) io::write_text_file(a.common.json_out, table.dump(2) + "\n");
    std::cout << "basis: " << to_string(basis) << "\n"
              << "entries: " << tensor.size() << "\n"
              << "parseval_partial_sum: " << io::fmt_double(captured) << "\n"
              << "kernel_norm_squared: " << io::fmt_double(norm.at(interval.length())) << "\n";
    return ok;
}

// ---------------------------------------------------------------------------

struct ExpandArgs {
    Common common;
    std::string table;
    std::string basis = "legendre";
    std::string indices;
    std::string weights = "0";
    std::string orders;
    std::string kind = "ito";
    std::string path_file;
    int m = 0;
    std::uint64_t stream = 0;
    bool via_ito = false;
};

int run_expand(const ExpandArgs& a) {
    const auto indices = parse_list(a.indices, "indices");
    const int k = static_cast<int>(indices.size());
    const IntegralKind kind = parse_kind(a.kind);

    std::shared_ptr<const CoefficientTensor> tensor;
    std::optional<std::vector<int>> orders;
    if (!a.orders.empty()) orders = per_slot(a.orders, k, "orders");
    if (!a.table.empty()) {
        tensor = std::make_shared<const CoefficientTensor>(io::coefficient_table_from_json(io::read_json_file(a.table)));
        if (tensor->k() != k) throw contract_error("table multiplicity does not match --indices");
    } else {
        if (!orders) throw configuration_error("--orders is required without --table");
        std::vector<WeightSpec> w;
        for (int v : per_slot(a.weights, k, "weights")) w.push_back(WeightSpec{v});
        tensor = std::make_shared<const CoefficientTensor>(
            coefficient_tensor(w, parse_basis(a.basis), *orders, tensor_options(a.common)));
    }
    const std::vector<int> p = detail::resolve_orders(*tensor, orders);
    const int p_max = *std::max_element(p.begin(), p.end());

    IntegralSpec spec;
    spec.weights = tensor->weights();
    spec.indices = indices;
    spec.kind = kind;
    GaussianVariates variates;
    if (!a.path_file.empty()) {
        const WienerPath path = io::path_from_json(io::read_json_file(a.path_file));
        spec.m = path.m;
        spec.interval = path.interval;
        variates = project_variates(path, tensor->basis(), p_max);
    } else {
        int max_index = 1;
        for (int i : indices) max_index = std::max(max_index, i);
        spec.m = a.m > 0 ? a.m : max_index;
        spec.interval = a.common.interval();
        variates = sample_variates(spec.m, p_max, spec.interval, a.common.resolve_seed(true), a.stream);
    }
    spec.validate();

    ExpansionResult res;
    if (kind == IntegralKind::ito) {
        res = expand_ito(*tensor, variates, spec, p);
    } else if (a.via_ito) {
        if (!a.table.empty()) throw configuration_error("--via-ito rebuilds its tables; omit --table");
        res = stratonovich_from_ito(spec, tensor->basis(), p, variates);
    } else {
        res = expand_stratonovich_sum(*tensor, variates, spec, p);
    }
    a.common.write(io::expansion_json(res), "");
    std::cout << "kind: " << to_string(kind) << "\n"
              << "value: " << io::fmt_double(res.value) << "\n"
              << "term_count: " << res.term_count << "\n";
    return ok;
}

// ---------------------------------------------------------------------------

struct SimulateArgs {
    Common common;
    std::string basis = "legendre";
    std::string indices = "1,2";
    std::string weights = "0";
    std::string orders = "8";
    std::string kind = "ito";
    int N = 4096;
    std::size_t paths = 10000;
    std::string path_out;
    std::uint64_t path_id = 0;
    int m = 0;
};

int run_simulate(const SimulateArgs& a) {
    const auto indices = parse_list(a.indices, "indices");
    const int k = static_cast<int>(indices.size());
    const IntegralSpec spec =
        make_spec(indices, per_slot(a.weights, k, "weights"), a.m, a.common.interval(), parse_kind(a.kind));
    const auto orders = per_slot(a.orders, k, "orders");
    const std::uint64_t seed = a.common.resolve_seed(true);

    McOptions mo;
    mo.threads = a.common.threads;
    mo.keep_paths = !a.common.csv_out.empty();
    TensorCache cache(tensor_options(a.common));
    const McReport rep = mc_mse(spec, parse_basis(a.basis), orders, a.N, a.paths, seed, mo, &cache);
    a.common.write(io::mc_report_json(rep), io::path_records_csv(rep.paths));
    if (!a.path_out.empty()) {
        const WienerPath path = generate_path(spec.m, a.N, spec.interval, seed, a.path_id);
        io::write_text_file(a.path_out, io::path_json(path).dump() + "\n");
    }
    std::cout << "n_paths: " << rep.n_paths << "\n"
              << "estimate: " << io::fmt_double(rep.estimate) << "\n"
              << "std_error: " << io::fmt_double(rep.std_error) << "\n";
    return ok;
}

// ---------------------------------------------------------------------------

struct ValidateArgs {
    Common common;
    std::string check = "triangle";
    std::string basis = "legendre";
    std::string indices;
    std::string weights = "0";
    std::string kind = "stratonovich";
    int q = 8;
    int N = 4096;
    std::size_t paths = 10000;
    int k = 3;
    std::string p_list = "2,8,32";
    std::size_t samples = 10000;
};

int run_validate(const ValidateArgs& a) {
    const std::uint64_t seed = a.common.resolve_seed(false);
    TensorCache cache(tensor_options(a.common));
    if (a.check == "triangle") {
        const auto indices = parse_list(a.indices.empty() ? "1,2" : a.indices, "indices");
        const IntegralSpec spec = make_spec(indices, {}, 0, a.common.interval(), parse_kind(a.kind));
        McOptions mo;
        mo.threads = a.common.threads;
        const TriangleCheck c = triangle_check(spec, a.q, a.N, a.paths, seed, mo, &cache);
        a.common.write(io::triangle_json(c), io::triangle_csv(c));
        std::cout << "exact: " << io::fmt_double(c.exact_value()) << " (" << c.exact.to_string() << ")\n"
                  << "parseval: " << io::fmt_double(c.parseval) << (c.parseval_ok() ? " ok" : " MISMATCH") << "\n"
                  << "mc: " << io::fmt_double(c.mc.estimate) << " +- " << io::fmt_double(c.mc.std_error) << "\n"
                  << "discrete: " << io::fmt_double(c.discrete) << " slack " << io::fmt_double(c.slack) << "\n"
                  << "deviation: " << io::fmt_double(c.deviation()) << " allowed " << io::fmt_double(c.mc_allowance())
                  << "\n"
                  << (c.passed() ? "PASS" : "FAIL") << "\n";
        return c.passed() ? ok : failed;
    }
    if (a.check == "gap") {
        if (a.k < 1) throw configuration_error("--k must be at least 1");
        std::vector<int> indices =
            a.indices.empty() ? std::vector<int>(static_cast<std::size_t>(a.k), 1) : parse_list(a.indices, "indices");
        const int k = static_cast<int>(indices.size());
        const IntegralSpec spec = make_spec(indices, per_slot(a.weights, k, "weights"), 0, a.common.interval(),
                                            IntegralKind::stratonovich);
        const GapSweep g =
            gap_sweep(spec, parse_basis(a.basis), parse_list(a.p_list, "p"), a.samples, seed, a.common.threads, &cache);
        a.common.write(io::gap_json(g), io::gap_csv(g));
        for (std::size_t i = 0; i < g.p.size(); ++i) {
            std::cout << "p=" << g.p[i] << " mse=" << io::fmt_double(g.mse[i]) << "\n";
        }
        std::cout << "monotone: " << (g.monotone() ? "yes" : "no")
                  << "  below threshold: " << (g.below_threshold() ? "yes" : "no") << "\n"
                  << (g.passed() ? "PASS" : "FAIL") << "\n";
        return g.passed() ? ok : failed;
    }
    throw configuration_error("unknown check '" + a.check + "' (triangle or gap)");
}

// ---------------------------------------------------------------------------

struct ExportArgs {
    Common common;
    std::string indices = "1,2";
    std::string q_list = "0,1,2,4,8,16,32";
    int N = 0;
    std::size_t paths = 0;
    std::string kind = "stratonovich";
};

int run_export(const ExportArgs& a) {
    const IntegralSpec spec = make_spec(parse_list(a.indices, "indices"), {}, 0, a.common.interval(), parse_kind(a.kind));
    if (spec.k() != 2) throw configuration_error("export tabulates multiplicity-2 integrals");
    const bool with_mc = a.N > 0 && a.paths > 0;
    const std::uint64_t seed = a.common.resolve_seed(false);
    TensorCache cache(tensor_options(a.common));
    McOptions mo;
    mo.threads = a.common.threads;
    std::vector<ErrorReport> rows;
    json reports = json::array();
    for (int q : parse_list(a.q_list, "q")) {
        const std::vector<int> orders{q, q};
        std::optional<McSummary> mc;
        if (with_mc) {
            const McReport r = mc_mse(spec, BasisKind::legendre, orders, a.N, a.paths, seed, mo, &cache);
            mc = McSummary{r.estimate, r.std_error};
        }
        rows.push_back(make_error_report(spec, BasisKind::legendre, orders, mc, tensor_options(a.common)));
        reports.push_back(io::error_report_json(rows.back()));
    }
    const std::string csv = io::error_table_csv(rows);
    a.common.write(reports, csv);
    std::cout << csv;
    return ok;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Fourier-Legendre expansions of iterated Ito and Stratonovich integrals"};
    app.require_subcommand(1);

    CoeffArgs coeff;
    auto* c = app.add_subcommand("coeff", "build a coefficient table");
    add_common(c, coeff.common, false);
    c->add_option("--basis", coeff.basis, "legendre or trigonometric");
    c->add_option("--k", coeff.k, "multiplicity")->required();
    c->add_option("--orders", coeff.orders, "truncation orders, comma separated")->required();
    c->add_option("--weights", coeff.weights, "weight exponents q in psi = (t - tau)^q");
    c->add_option("--m", coeff.m, "number of Wiener components recorded in the table header");
    c->add_option("--out", coeff.out, "table file");

    ExpandArgs expand;
    auto* e = app.add_subcommand("expand", "evaluate a truncated expansion");
    add_common(e, expand.common, true);
    e->add_option("--table", expand.table, "coefficient table written by coeff");
    e->add_option("--basis", expand.basis, "basis when no table is given");
    e->add_option("--indices", expand.indices, "Wiener indices i_1..i_k (0 = dtau)")->required();
    e->add_option("--weights", expand.weights, "weight exponents when no table is given");
    e->add_option("--orders", expand.orders, "truncation orders");
    e->add_option("--kind", expand.kind, "ito or stratonovich");
    e->add_option("--path-file", expand.path_file, "project variates from a stored path instead of sampling");
    e->add_option("--m", expand.m, "number of Wiener components");
    e->add_option("--stream", expand.stream, "variate stream for sampled input");
    e->add_flag("--via-ito", expand.via_ito, "stratonovich value through the Ito conversion");

    SimulateArgs sim;
    auto* s = app.add_subcommand("simulate", "Monte Carlo mean-square error against the discretization oracle");
    add_common(s, sim.common, true);
    s->add_option("--csv", sim.common.csv_out, "per-path CSV");
    s->add_option("--basis", sim.basis);
    s->add_option("--indices", sim.indices);
    s->add_option("--weights", sim.weights);
    s->add_option("--orders", sim.orders);
    s->add_option("--kind", sim.kind);
    s->add_option("--N", sim.N, "grid cells");
    s->add_option("--paths", sim.paths, "number of paths");
    s->add_option("--m", sim.m);
    s->add_option("--path-out", sim.path_out, "dump one simulated path as JSON");
    s->add_option("--path-id", sim.path_id, "which path --path-out writes");

    ValidateArgs val;
    auto* v = app.add_subcommand("validate", "run a validation check; exit 0 iff it passes");
    add_common(v, val.common, true);
    v->add_option("--csv", val.common.csv_out);
    v->add_option("--check", val.check, "triangle or gap");
    v->add_option("--basis", val.basis, "basis for the gap check");
    v->add_option("--indices", val.indices);
    v->add_option("--weights", val.weights, "weight exponents for the gap check");
    v->add_option("--kind", val.kind, "oracle kind for the triangle check");
    v->add_option("--q", val.q, "Legendre order of the triangle check");
    v->add_option("--N", val.N);
    v->add_option("--paths", val.paths);
    v->add_option("--k", val.k, "multiplicity of the gap check");
    v->add_option("--p", val.p_list, "orders of the gap check");
    v->add_option("--samples", val.samples, "variate tables per order in the gap check");

    ExportArgs exp;
    auto* x = app.add_subcommand("export", "error table over a list of orders");
    add_common(x, exp.common, true);
    x->add_option("--csv", exp.common.csv_out);
    x->add_option("--indices", exp.indices);
    x->add_option("--q", exp.q_list, "orders");
    x->add_option("--N", exp.N, "grid cells for the optional Monte Carlo column");
    x->add_option("--paths", exp.paths, "paths for the optional Monte Carlo column");
    x->add_option("--kind", exp.kind);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& err) {
        const int code = app.exit(err);
        return code == 0 ? ok : usage;
    }

    try {
        if (*c) return run_coeff(coeff);
        if (*e) return run_expand(expand);
        if (*s) return run_simulate(sim);
        if (*v) return run_validate(val);
        if (*x) return run_export(exp);
    } catch (const configuration_error& err) {
        std::cerr << "usage error: " << err.what() << "\n";
        return usage;
    } catch (const contract_error& err) {
        std::cerr << "contract error: " << err.what() << "\n";
        return contract;
    } catch (const resource_error& err) {
        std::cerr << "resource error: " << err.what() << " (required " << err.required() << ")\n";
        return resource;
    } catch (const io_error& err) {
        std::cerr << "I/O error: " << err.what() << "\n";
        return io_failure;
    } catch (const std::domain_error& err) {
        std::cerr << "domain error: " << err.what() << "\n";
        return domain;
    } catch (const unsupported_case_error& err) {
        std::cerr << "unsupported: " << err.what() << "\n";
        return domain;
    }
    return usage;
}
