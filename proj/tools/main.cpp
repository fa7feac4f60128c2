// panelcf command line: impute a single cell, run the pseudo-treatment
// benchmark, or generate a synthetic panel.

#include <CLI11.hpp>
#include <json.hpp>

#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>

#include "panelcf/bench.hpp"
#include "panelcf/imputers.hpp"
#include "panelcf/matrix_completion.hpp"

namespace {

using json = nlohmann::ordered_json;

constexpr int kExitOk = 0;
constexpr int kExitRuntime = 1;
constexpr int kExitUsage = 2;

struct UsageError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

panelcf::Panel read_panel(const std::string& path, const std::string& format) {
    const panelcf::PanelFormat fmt =
        format == "wide" ? panelcf::PanelFormat::Wide : panelcf::PanelFormat::Long;
    if (path == "-") return panelcf::load_panel(std::cin, fmt);
    return panelcf::load_panel_file(path, fmt);
}

void write_output(const std::string& path, const std::string& text) {
    if (path == "-" || path.empty()) {
        std::cout << text;
        return;
    }
    std::ofstream out(path);
    if (!out) throw panelcf::ConfigError("cannot open output '" + path + "'");
    out << text;
}

std::vector<panelcf::Method> parse_methods(const std::vector<std::string>& names) {
    using panelcf::Method;
    std::vector<Method> all = {Method::VR, Method::HZ, Method::MC, Method::EnsVC, Method::EnsHC};
    if (names.empty()) return all;
    std::vector<Method> out;
    for (const auto& n : names) {
        if (n == "all") return all;
        auto m = panelcf::method_from_string(n);
        if (!m) throw UsageError("unknown method '" + n + "'");
        out.push_back(*m);
    }
    return out;
}

panelcf::OutcomeTransform parse_transform(const std::string& name) {
    auto t = panelcf::transform_from_string(name);
    if (!t) throw UsageError("unknown transform '" + name + "'");
    return *t;
}

json result_to_json(const panelcf::ImputationResult& r, double observed) {
    json e;
    e["method"] = panelcf::to_string(r.method);
    e["value"] = r.value;
    e["effect"] = observed - r.value;
    e["complexity"] = r.complexity ? json(*r.complexity) : json(nullptr);
    if (r.penalty) {
        json p;
        p["lambda"] = r.penalty->lambda;
        p["mixing"] = r.penalty->mixing ? json(*r.penalty->mixing) : json(nullptr);
        e["penalty"] = std::move(p);
    } else {
        e["penalty"] = nullptr;
    }
    json diag = json::array();
    for (Eigen::Index i = 0; i < r.diagnostics.size(); ++i) diag.push_back(r.diagnostics(i));
    e["diagnostics"] = std::move(diag);
    return e;
}

struct ImputeArgs {
    std::string input;
    std::string input_format = "long";
    std::string unit, period;
    std::vector<std::string> methods;
    std::string transform = "level";
    std::uint64_t seed = panelcf::kDefaultSeed;
    int s_periods = -1;
    bool fast = false;
    std::string output = "-";
    std::string format = "json";
};

int run_impute(const ImputeArgs& a) {
    const panelcf::Panel raw = read_panel(a.input, a.input_format);
    const panelcf::Panel panel = panelcf::transform(raw, parse_transform(a.transform));
    const auto unit = panel.unit_index(a.unit);
    if (!unit) throw UsageError("unknown unit '" + a.unit + "'");
    const auto period = panel.period_index(a.period);
    if (!period) throw UsageError("unknown period '" + a.period + "' (after transform)");

    const double observed = panel.values(*unit, *period);
    const panelcf::MaskedPanel mp = panelcf::restrict(panel, *unit, *period);
    panelcf::RunConfig rc;
    rc.seed = a.seed;
    rc.hc_periods = a.s_periods;
    rc.fast_mode = a.fast;

    std::vector<panelcf::ImputationResult> results;
    for (panelcf::Method m : parse_methods(a.methods))
        results.push_back(panelcf::run_method(mp, m, rc));

    std::ostringstream text;
    if (a.format == "json") {
        json j;
        j["unit"] = a.unit;
        j["period"] = a.period;
        j["observed"] = observed;
        j["transform"] = a.transform;
        j["seed"] = a.seed;
        j["hc_periods"] = a.s_periods;
        j["fast_mode"] = a.fast;
        json rs = json::array();
        for (const auto& r : results) rs.push_back(result_to_json(r, observed));
        j["results"] = std::move(rs);
        text << j.dump(2) << "\n";
    } else if (a.format == "csv") {
        text << "method,value,effect,complexity,lambda,mixing\n";
        char buf[64];
        auto num = [&buf](double v) {
            std::snprintf(buf, sizeof(buf), "%.17g", v);
            return std::string(buf);
        };
        for (const auto& r : results) {
            text << panelcf::to_string(r.method) << ',' << num(r.value) << ','
                 << num(observed - r.value) << ','
                 << (r.complexity ? num(*r.complexity) : "") << ','
                 << (r.penalty ? num(r.penalty->lambda) : "") << ','
                 << (r.penalty && r.penalty->mixing ? num(*r.penalty->mixing) : "") << "\n";
        }
    } else if (a.format == "table") {
        char buf[128];
        std::snprintf(buf, sizeof(buf), "%8s%16s%16s%12s\n", "method", "value", "effect",
                      "complexity");
        text << buf;
        for (const auto& r : results) {
            std::snprintf(buf, sizeof(buf), "%8s%16.6f%16.6f%12s\n",
                          panelcf::to_string(r.method), r.value, observed - r.value,
                          r.complexity ? std::to_string(static_cast<long long>(*r.complexity)).c_str()
                                       : "");
            text << buf;
        }
    } else {
        throw UsageError("unknown format '" + a.format + "'");
    }
    write_output(a.output, text.str());
    return kExitOk;
}

struct BenchArgs {
    std::string input;
    std::string input_format = "long";
    std::vector<std::string> methods;
    std::string transform = "level";
    int t0 = -1;
    int s_periods = -1;
    std::uint64_t seed = panelcf::kDefaultSeed;
    bool fast = false;
    int jobs = 1;
    std::string output = "-";
    std::string format = "json";
};

int run_benchmark(const BenchArgs& a) {
    const panelcf::Panel panel = read_panel(a.input, a.input_format);
    panelcf::BenchmarkConfig cfg;
    cfg.methods = parse_methods(a.methods);
    cfg.transform = parse_transform(a.transform);
    cfg.t0 = a.t0;
    cfg.hc_periods = a.s_periods;
    cfg.seed = a.seed;
    cfg.fast_mode = a.fast;
    cfg.jobs = a.jobs;

    // Validate T0 against the transformed panel up front: a bad value is a
    // usage error, not an estimation failure.
    if (a.t0 >= 0) {
        const Eigen::Index t = panelcf::transform(panel, cfg.transform).n_periods();
        if (a.t0 < 2 || a.t0 > static_cast<int>(t) - 1)
            throw UsageError("--T0 must lie in [2, T-1] = [2, " + std::to_string(t - 1) + "]");
    }

    const panelcf::BenchmarkReport rep = panelcf::pseudo_treatment_eval(panel, cfg);
    panelcf::ReportFormat fmt;
    if (a.format == "json") fmt = panelcf::ReportFormat::Json;
    else if (a.format == "csv") fmt = panelcf::ReportFormat::Csv;
    else if (a.format == "table") fmt = panelcf::ReportFormat::Table;
    else throw UsageError("unknown format '" + a.format + "'");
    write_output(a.output, panelcf::emit_report(rep, fmt));
    return kExitOk;
}

struct SimArgs {
    Eigen::Index n = 10, t = 10;
    int rank = 0;
    double factor_scale = 1.0;
    double noise = 0.0;
    double fe = 1.0;
    std::uint64_t seed = panelcf::kDefaultSeed;
    std::string output = "-";
};

int run_simulate(const SimArgs& a) {
    panelcf::SyntheticSpec spec;
    spec.n_units = a.n;
    spec.n_periods = a.t;
    spec.rank = a.rank;
    spec.factor_scale = a.factor_scale;
    spec.noise_scale = a.noise;
    spec.fe_scale = a.fe;
    spec.seed = a.seed;
    const panelcf::Panel panel = panelcf::generate_synthetic_panel(spec);
    std::ostringstream text;
    panelcf::write_panel_csv(text, panel);
    write_output(a.output, text.str());
    return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"panelcf: counterfactual imputation for panel data"};
    app.require_subcommand(1);

    ImputeArgs ia;
    CLI::App* imp = app.add_subcommand("impute", "Impute one treated cell and its effect");
    imp->add_option("--input,-i", ia.input, "Panel CSV ('-' for stdin)")->required();
    imp->add_option("--input-format", ia.input_format, "long|wide")
        ->check(CLI::IsMember({"long", "wide"}));
    imp->add_option("--unit", ia.unit, "Treated unit label")->required();
    imp->add_option("--period", ia.period, "Treated period label (after transform)")->required();
    imp->add_option("--method", ia.methods, "vr|hz|mc|ens_vc|ens_hc|all (repeatable)");
    imp->add_option("--transform", ia.transform, "level|log|growth")
        ->check(CLI::IsMember({"level", "log", "growth"}));
    imp->add_option("--seed", ia.seed, "RNG seed")->envname("PANELCF_SEED");
    imp->add_option("--S", ia.s_periods, "Stacking periods for ens_hc (default min(10, t*-3))");
    imp->add_flag("--fast", ia.fast, "Reuse main-problem penalties inside ensemble folds");
    imp->add_option("--output,-o", ia.output, "Output path ('-' for stdout)");
    imp->add_option("--format", ia.format, "json|csv|table")
        ->check(CLI::IsMember({"json", "csv", "table"}));

    BenchArgs ba;
    CLI::App* ben = app.add_subcommand("benchmark", "Pseudo-treatment evaluation");
    ben->add_option("--input,-i", ba.input, "Panel CSV ('-' for stdin)")->required();
    ben->add_option("--input-format", ba.input_format, "long|wide")
        ->check(CLI::IsMember({"long", "wide"}));
    ben->add_option("--method", ba.methods, "vr|hz|mc|ens_vc|ens_hc|all (repeatable)");
    ben->add_option("--transform", ba.transform, "level|log|growth")
        ->check(CLI::IsMember({"level", "log", "growth"}));
    ben->add_option("--T0", ba.t0, "Last non-pseudo period, 1-based (default ceil(0.8*T))");
    ben->add_option("--S", ba.s_periods, "Stacking periods for ens_hc");
    ben->add_option("--seed", ba.seed, "RNG seed")->envname("PANELCF_SEED");
    ben->add_flag("--fast", ba.fast, "Reuse main-problem penalties inside ensemble folds");
    ben->add_option("--jobs", ba.jobs, "Worker threads (output is identical for any value)")
        ->envname("PANELCF_JOBS");
    ben->add_option("--output,-o", ba.output, "Output path ('-' for stdout)");
    ben->add_option("--format", ba.format, "json|csv|table")
        ->check(CLI::IsMember({"json", "csv", "table"}));

    SimArgs sa;
    CLI::App* sim = app.add_subcommand("simulate", "Generate a synthetic factor-model panel");
    sim->add_option("--N", sa.n, "Units")->required();
    sim->add_option("--T", sa.t, "Periods")->required();
    sim->add_option("--rank", sa.rank, "Factor rank");
    sim->add_option("--factor-scale", sa.factor_scale, "Factor scale");
    sim->add_option("--noise", sa.noise, "Noise scale");
    sim->add_option("--fe", sa.fe, "Fixed-effect scale");
    sim->add_option("--seed", sa.seed, "RNG seed")->envname("PANELCF_SEED");
    sim->add_option("--output,-o", sa.output, "Output path ('-' for stdout)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return kExitUsage;
    }

    try {
        if (*imp) return run_impute(ia);
        if (*ben) return run_benchmark(ba);
        if (*sim) return run_simulate(sa);
        std::cerr << "no subcommand\n";
        return kExitUsage;
    } catch (const UsageError& e) {
        std::cerr << "usage error: " << e.what() << "\n";
        return kExitUsage;
    } catch (const panelcf::Error& e) {
        json err;
        err["error"] = e.kind();
        err["message"] = e.what();
        std::cerr << err.dump() << "\n";
        return kExitRuntime;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitRuntime;
    }
}
