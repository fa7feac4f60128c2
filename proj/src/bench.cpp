#include "panelcf/bench.hpp"

#include <algorithm>
#include <array>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <sstream>
#include <thread>

#include <json.hpp>

namespace panelcf {

Panel generate_synthetic_panel(const SyntheticSpec& spec) {
    if (spec.n_units < 2 || spec.n_periods < 2)
        throw ConfigError("synthetic panel needs at least 2 units and 2 periods");
    if (spec.rank < 0 || spec.factor_scale < 0.0 || spec.noise_scale < 0.0 || spec.fe_scale < 0.0)
        throw ConfigError("synthetic spec scales and rank must be >= 0");

    const Eigen::Index n = spec.n_units, t = spec.n_periods;
    auto rng = make_rng(spec.seed);
    std::normal_distribution<double> gauss(0.0, 1.0);

    Eigen::VectorXd a(n), b(t);
    for (Eigen::Index i = 0; i < n; ++i) a(i) = gauss(rng);
    for (Eigen::Index k = 0; k < t; ++k) b(k) = gauss(rng);
    Eigen::MatrixXd u(n, spec.rank), v(t, spec.rank);
    for (Eigen::Index i = 0; i < n; ++i)
        for (int r = 0; r < spec.rank; ++r) u(i, r) = gauss(rng);
    for (Eigen::Index k = 0; k < t; ++k)
        for (int r = 0; r < spec.rank; ++r) v(k, r) = gauss(rng);

    Panel panel;
    panel.values.resize(n, t);
    for (Eigen::Index i = 0; i < n; ++i)
        for (Eigen::Index k = 0; k < t; ++k) {
            double y = spec.fe_scale * (a(i) + b(k));
            for (int r = 0; r < spec.rank; ++r) y += spec.factor_scale * u(i, r) * v(k, r);
            panel.values(i, k) = y;
        }
    for (Eigen::Index i = 0; i < n; ++i)
        for (Eigen::Index k = 0; k < t; ++k)
            panel.values(i, k) += spec.noise_scale * gauss(rng);

    const int width = static_cast<int>(std::to_string(n).size());
    char buf[32];
    for (Eigen::Index i = 0; i < n; ++i) {
        std::snprintf(buf, sizeof(buf), "U%0*lld", width, static_cast<long long>(i + 1));
        panel.unit_labels.emplace_back(buf);
    }
    for (Eigen::Index k = 0; k < t; ++k)
        panel.period_labels.push_back(std::to_string(k + 1));
    return panel;
}

bool BenchmarkReport::operator==(const BenchmarkReport& o) const {
    auto weights_eq = [](const std::optional<EnsembleWeights>& x,
                         const std::optional<EnsembleWeights>& y) {
        if (x.has_value() != y.has_value()) return false;
        if (!x) return true;
        return x->vr == y->vr && x->hz == y->hz && x->mc == y->mc;
    };
    return n_units == o.n_units && n_periods == o.n_periods && t0 == o.t0 &&
           transform == o.transform && seed == o.seed && hc_periods == o.hc_periods &&
           fast_mode == o.fast_mode && n_cells_total == o.n_cells_total && methods == o.methods &&
           weights_eq(avg_weights_vc, o.avg_weights_vc);
}

const MethodSummary* BenchmarkReport::summary(Method m) const {
    for (const auto& [method, s] : methods)
        if (method == m) return &s;
    return nullptr;
}

namespace {

struct CellOutcome {
    // Parallel to cfg.methods.
    std::vector<std::optional<double>> value;
    std::vector<std::optional<double>> complexity;
    std::optional<EnsembleWeights> weights_vc;
    double truth = 0.0;
};

CellOutcome evaluate_cell(const Panel& panel, Eigen::Index unit, Eigen::Index period,
                          const BenchmarkConfig& cfg) {
    CellOutcome out;
    out.value.resize(cfg.methods.size());
    out.complexity.resize(cfg.methods.size());
    out.truth = panel.values(unit, period);

    const Panel* view = &panel;
    Panel poisoned;
    if (cfg.poison_sentinel && period + 1 < panel.n_periods()) {
        poisoned = panel;
        poisoned.values.rightCols(panel.n_periods() - period - 1).setConstant(
            *cfg.poison_sentinel);
        view = &poisoned;
    }
    const MaskedPanel mp = restrict(*view, unit, period);

    RunConfig rc;
    rc.seed = mix_seed(cfg.seed, static_cast<std::uint64_t>(unit + 1),
                       static_cast<std::uint64_t>(period + 1));
    rc.hc_periods = cfg.hc_periods;
    rc.fast_mode = cfg.fast_mode;

    // If the three base methods run anyway, hand their results to the
    // ensembles so the per-cell work is not repeated.
    std::optional<std::array<ImputationResult, 3>> mains;
    {
        std::optional<ImputationResult> vr, hz, mc;
        const bool want_ens =
            std::find(cfg.methods.begin(), cfg.methods.end(), Method::EnsVC) != cfg.methods.end() ||
            std::find(cfg.methods.begin(), cfg.methods.end(), Method::EnsHC) != cfg.methods.end();
        for (std::size_t m = 0; m < cfg.methods.size(); ++m) {
            const Method method = cfg.methods[m];
            if (method != Method::VR && method != Method::HZ && method != Method::MC) continue;
            try {
                ImputationResult r = run_method(mp, method, rc);
                out.value[m] = r.value;
                out.complexity[m] = r.complexity;
                if (method == Method::VR) vr = std::move(r);
                if (method == Method::HZ) hz = std::move(r);
                if (method == Method::MC) mc = std::move(r);
            } catch (const Error&) {
            }
        }
        if (want_ens && vr && hz && mc) mains = std::array<ImputationResult, 3>{*vr, *hz, *mc};
    }

    for (std::size_t m = 0; m < cfg.methods.size(); ++m) {
        const Method method = cfg.methods[m];
        if (method != Method::EnsVC && method != Method::EnsHC) continue;
        try {
            EnsembleOptions eo;
            eo.seed = rc.seed;
            eo.fast_mode = cfg.fast_mode;
            eo.mains = mains;
            ImputationResult r = method == Method::EnsVC
                                     ? ensemble_vc(mp, eo)
                                     : ensemble_hc(mp, cfg.hc_periods, eo);
            out.value[m] = r.value;
            if (method == Method::EnsVC && r.diagnostics.size() == 3)
                out.weights_vc =
                    EnsembleWeights{r.diagnostics(0), r.diagnostics(1), r.diagnostics(2)};
        } catch (const Error&) {
        }
    }
    return out;
}

}  // namespace

BenchmarkReport pseudo_treatment_eval(const Panel& panel, const BenchmarkConfig& cfg) {
    if (cfg.methods.empty()) throw ConfigError("no methods configured");
    const Panel p = transform(panel, cfg.transform);
    const Eigen::Index n = p.n_units();
    const Eigen::Index t = p.n_periods();
    const int t0 = cfg.t0 < 0
                       ? static_cast<int>(std::ceil(0.8 * static_cast<double>(t)))
                       : cfg.t0;
    if (t0 < 2 || t0 >= t)
        throw ConfigError("t0 must lie in [2, T-1], got " + std::to_string(t0) + " with T = " +
                          std::to_string(t));

    std::vector<CellRef> cells;
    for (Eigen::Index i = 0; i < n; ++i)
        for (Eigen::Index k = t0; k < t; ++k)  // 1-based periods t0+1..T
            cells.push_back(CellRef{i, k});

    std::vector<CellOutcome> outcomes(cells.size());
    const int jobs = std::max(1, cfg.jobs);
    if (jobs == 1) {
        for (std::size_t c = 0; c < cells.size(); ++c)
            outcomes[c] = evaluate_cell(p, cells[c].unit, cells[c].period, cfg);
    } else {
        std::atomic<std::size_t> next{0};
        auto worker = [&]() {
            for (std::size_t c = next.fetch_add(1); c < cells.size(); c = next.fetch_add(1))
                outcomes[c] = evaluate_cell(p, cells[c].unit, cells[c].period, cfg);
        };
        std::vector<std::thread> pool;
        for (int w = 0; w < jobs; ++w) pool.emplace_back(worker);
        for (auto& th : pool) th.join();
    }

    BenchmarkReport rep;
    rep.n_units = n;
    rep.n_periods = t;
    rep.t0 = t0;
    rep.transform = cfg.transform;
    rep.seed = cfg.seed;
    rep.hc_periods = cfg.hc_periods;
    rep.fast_mode = cfg.fast_mode;
    rep.n_cells_total = static_cast<int>(cells.size());

    double w_vr = 0.0, w_hz = 0.0, w_mc = 0.0;
    int w_count = 0;
    for (std::size_t m = 0; m < cfg.methods.size(); ++m) {
        MethodSummary s;
        double sse = 0.0, csum = 0.0;
        int cn = 0;
        for (const auto& o : outcomes) {
            if (!o.value[m]) {
                ++s.n_failed;
                continue;
            }
            const double e = *o.value[m] - o.truth;
            sse += e * e;
            ++s.n_cells;
            if (o.complexity[m]) {
                csum += *o.complexity[m];
                ++cn;
            }
        }
        if (s.n_cells > 0) s.rmse = std::sqrt(sse / static_cast<double>(s.n_cells));
        if (cn > 0) s.avg_complexity = csum / static_cast<double>(cn);
        rep.methods.emplace_back(cfg.methods[m], s);
    }
    for (const auto& o : outcomes) {
        if (o.weights_vc) {
            w_vr += o.weights_vc->vr;
            w_hz += o.weights_vc->hz;
            w_mc += o.weights_vc->mc;
            ++w_count;
        }
    }
    if (w_count > 0)
        rep.avg_weights_vc = EnsembleWeights{w_vr / w_count, w_hz / w_count, w_mc / w_count};
    return rep;
}

namespace {

using json = nlohmann::ordered_json;

json weights_to_json(const EnsembleWeights& w) {
    return json{{"vr", w.vr}, {"hz", w.hz}, {"mc", w.mc}};
}

}  // namespace

std::string emit_report(const BenchmarkReport& report, ReportFormat format) {
    switch (format) {
        case ReportFormat::Json: {
            json j;
            j["n_units"] = report.n_units;
            j["n_periods"] = report.n_periods;
            j["t0"] = report.t0;
            j["transform"] = to_string(report.transform);
            j["seed"] = report.seed;
            j["hc_periods"] = report.hc_periods;
            j["fast_mode"] = report.fast_mode;
            j["n_cells_total"] = report.n_cells_total;
            json methods = json::array();
            for (const auto& [m, s] : report.methods) {
                json e;
                e["method"] = to_string(m);
                e["rmse"] = s.rmse ? json(*s.rmse) : json(nullptr);
                e["n_cells"] = s.n_cells;
                e["n_failed"] = s.n_failed;
                e["avg_complexity"] = s.avg_complexity ? json(*s.avg_complexity) : json(nullptr);
                methods.push_back(std::move(e));
            }
            j["methods"] = std::move(methods);
            j["avg_weights_vc"] =
                report.avg_weights_vc ? weights_to_json(*report.avg_weights_vc) : json(nullptr);
            return j.dump(2) + "\n";
        }
        case ReportFormat::Csv: {
            // Uniform metric set per method so the row count is always
            // 1 + #methods * #metrics.
            std::ostringstream out;
            out << "method,metric,value\n";
            char buf[64];
            auto num = [&buf](double v) {
                std::snprintf(buf, sizeof(buf), "%.17g", v);
                return std::string(buf);
            };
            const EnsembleWeights* w =
                report.avg_weights_vc ? &*report.avg_weights_vc : nullptr;
            for (const auto& [m, s] : report.methods) {
                const std::string name = to_string(m);
                out << name << ",rmse," << (s.rmse ? num(*s.rmse) : "") << "\n";
                out << name << ",avg_complexity,"
                    << (s.avg_complexity ? num(*s.avg_complexity) : "") << "\n";
                out << name << ",n_cells," << s.n_cells << "\n";
                out << name << ",n_failed," << s.n_failed << "\n";
                std::string wv;
                if (w && m == Method::VR) wv = num(w->vr);
                if (w && m == Method::HZ) wv = num(w->hz);
                if (w && m == Method::MC) wv = num(w->mc);
                out << name << ",avg_weight_vc," << wv << "\n";
            }
            return out.str();
        }
        case ReportFormat::Table: {
            std::ostringstream out;
            out << "# benchmark  N=" << report.n_units << " T=" << report.n_periods
                << " T0=" << report.t0 << " transform=" << to_string(report.transform)
                << " seed=" << report.seed << " S=" << report.hc_periods
                << " fast=" << (report.fast_mode ? 1 : 0)
                << " cells=" << report.n_cells_total << "\n";
            char buf[256];
            std::snprintf(buf, sizeof(buf), "%8s%8s%8s%8s%8s%8s%8s%8s%8s\n", "periods", "vr",
                          "hz", "mc", "ens_vc", "ens_hc", "w_vr", "w_hz", "w_mc");
            out << buf;
            auto cell = [&](Method m) -> std::string {
                const MethodSummary* s = report.summary(m);
                if (!s || !s->rmse) return "";
                char b[32];
                std::snprintf(b, sizeof(b), "%.4f", *s->rmse);
                return b;
            };
            auto wcell = [&](double EnsembleWeights::*f) -> std::string {
                if (!report.avg_weights_vc) return "";
                char b[32];
                std::snprintf(b, sizeof(b), "%.4f", (*report.avg_weights_vc).*f);
                return b;
            };
            std::snprintf(buf, sizeof(buf), "%8lld%8s%8s%8s%8s%8s%8s%8s%8s\n",
                          static_cast<long long>(report.n_periods), cell(Method::VR).c_str(),
                          cell(Method::HZ).c_str(), cell(Method::MC).c_str(),
                          cell(Method::EnsVC).c_str(), cell(Method::EnsHC).c_str(),
                          wcell(&EnsembleWeights::vr).c_str(), wcell(&EnsembleWeights::hz).c_str(),
                          wcell(&EnsembleWeights::mc).c_str());
            out << buf;
            return out.str();
        }
    }
    throw ConfigError("unknown report format");
}

BenchmarkReport parse_report_json(const std::string& text) {
    const json j = json::parse(text);
    BenchmarkReport rep;
    rep.n_units = j.at("n_units").get<Eigen::Index>();
    rep.n_periods = j.at("n_periods").get<Eigen::Index>();
    rep.t0 = j.at("t0").get<int>();
    const auto tr = transform_from_string(j.at("transform").get<std::string>());
    if (!tr) throw ParseError("unknown transform in report");
    rep.transform = *tr;
    rep.seed = j.at("seed").get<std::uint64_t>();
    rep.hc_periods = j.at("hc_periods").get<int>();
    rep.fast_mode = j.at("fast_mode").get<bool>();
    rep.n_cells_total = j.at("n_cells_total").get<int>();
    for (const auto& e : j.at("methods")) {
        const auto m = method_from_string(e.at("method").get<std::string>());
        if (!m) throw ParseError("unknown method in report");
        MethodSummary s;
        if (!e.at("rmse").is_null()) s.rmse = e.at("rmse").get<double>();
        s.n_cells = e.at("n_cells").get<int>();
        s.n_failed = e.at("n_failed").get<int>();
        if (!e.at("avg_complexity").is_null())
            s.avg_complexity = e.at("avg_complexity").get<double>();
        rep.methods.emplace_back(*m, s);
    }
    if (!j.at("avg_weights_vc").is_null()) {
        const auto& w = j.at("avg_weights_vc");
        rep.avg_weights_vc = EnsembleWeights{w.at("vr").get<double>(), w.at("hz").get<double>(),
                                             w.at("mc").get<double>()};
    }
    return rep;
}

}  // namespace panelcf
