#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <sstream>

#include "panelcf/bench.hpp"
#include "panelcf/imputers.hpp"
#include "panelcf/matrix_completion.hpp"

namespace py = pybind11;
using namespace panelcf;

namespace {

Panel load_panel_py(const std::string& path, const std::string& format) {
    return load_panel_file(path, format == "wide" ? PanelFormat::Wide : PanelFormat::Long);
}

Panel load_panel_csv_py(const std::string& text, const std::string& format) {
    std::istringstream in(text);
    return load_panel(in, format == "wide" ? PanelFormat::Wide : PanelFormat::Long);
}

std::string panel_to_csv(const Panel& p) {
    std::ostringstream out;
    write_panel_csv(out, p);
    return out.str();
}

OutcomeTransform transform_arg(const std::string& name) {
    auto t = transform_from_string(name);
    if (!t) throw ConfigError("unknown transform '" + name + "'");
    return *t;
}

Method method_arg(const std::string& name) {
    auto m = method_from_string(name);
    if (!m) throw ConfigError("unknown method '" + name + "'");
    return *m;
}

py::object opt_to_py(const std::optional<double>& v) {
    if (!v) return py::none();
    return py::float_(*v);
}

}  // namespace

PYBIND11_MODULE(_core, m) {
    m.doc() = "Counterfactual imputation for panel data: vertical/horizontal "
              "elastic-net regression, nuclear-norm matrix completion, and "
              "simplex-stacked ensembles.";

    py::register_exception<Error>(m, "PanelcfError");

    py::class_<Panel>(m, "Panel")
        .def_property_readonly("values", [](const Panel& p) { return p.values; })
        .def_property_readonly("unit_labels", [](const Panel& p) { return p.unit_labels; })
        .def_property_readonly("period_labels", [](const Panel& p) { return p.period_labels; })
        .def_property_readonly("transform", [](const Panel& p) { return std::string(to_string(p.transform)); })
        .def_property_readonly("n_units", &Panel::n_units)
        .def_property_readonly("n_periods", &Panel::n_periods)
        .def("to_csv", &panel_to_csv)
        .def("__repr__", [](const Panel& p) {
            std::ostringstream s;
            s << "<Panel " << p.n_units() << "x" << p.n_periods() << " " << to_string(p.transform)
              << ">";
            return s.str();
        });

    py::class_<MaskedPanel>(m, "MaskedPanel")
        .def_property_readonly("panel", [](const MaskedPanel& mp) { return mp.panel; })
        .def_property_readonly("target",
                               [](const MaskedPanel& mp) {
                                   return py::make_tuple(mp.target.unit, mp.target.period);
                               })
        .def_property_readonly("visible",
                               [](const MaskedPanel& mp) {
                                   return Eigen::MatrixXd(mp.visible.cast<double>());
                               });

    py::class_<ImputationResult>(m, "ImputationResult")
        .def_property_readonly("value", [](const ImputationResult& r) { return r.value; })
        .def_property_readonly("method",
                               [](const ImputationResult& r) { return std::string(to_string(r.method)); })
        .def_property_readonly("complexity",
                               [](const ImputationResult& r) { return opt_to_py(r.complexity); })
        .def_property_readonly("diagnostics",
                               [](const ImputationResult& r) { return r.diagnostics; })
        .def_property_readonly("penalty",
                               [](const ImputationResult& r) -> py::object {
                                   if (!r.penalty) return py::none();
                                   return py::make_tuple(r.penalty->lambda,
                                                         opt_to_py(r.penalty->mixing));
                               })
        .def("__repr__", [](const ImputationResult& r) {
            std::ostringstream s;
            s << "<ImputationResult " << to_string(r.method) << " value=" << r.value << ">";
            return s.str();
        });

    py::class_<ElasticNetFit>(m, "ElasticNetFit")
        .def_readonly("intercept", &ElasticNetFit::intercept)
        .def_readonly("coefficients", &ElasticNetFit::coefficients)
        .def_readonly("lambda_", &ElasticNetFit::lambda)
        .def_readonly("mixing", &ElasticNetFit::mixing)
        .def_readonly("n_nonzero", &ElasticNetFit::n_nonzero)
        .def_readonly("converged", &ElasticNetFit::converged);

    py::class_<MCFit>(m, "MCFit")
        .def_readonly("low_rank", &MCFit::low_rank)
        .def_readonly("unit_effects", &MCFit::unit_effects)
        .def_readonly("time_effects", &MCFit::time_effects)
        .def_readonly("rank", &MCFit::rank)
        .def_readonly("lambda_", &MCFit::lambda)
        .def_readonly("objective_trace", &MCFit::objective_trace)
        .def("predict", &MCFit::predict);

    m.def("load_panel", &load_panel_py, py::arg("path"), py::arg("format") = "long");
    m.def("load_panel_csv", &load_panel_csv_py, py::arg("text"), py::arg("format") = "long");
    m.def(
        "transform",
        [](const Panel& p, const std::string& kind) { return transform(p, transform_arg(kind)); },
        py::arg("panel"), py::arg("kind"));
    m.def("restrict", &restrict, py::arg("panel"), py::arg("unit"), py::arg("period"));

    m.def(
        "impute_vertical",
        [](const MaskedPanel& mp, std::uint64_t seed) {
            ImputeOptions io;
            io.seed = seed;
            return impute_vertical(mp, io);
        },
        py::arg("masked_panel"), py::arg("seed") = kDefaultSeed);
    m.def(
        "impute_horizontal",
        [](const MaskedPanel& mp, std::uint64_t seed) {
            ImputeOptions io;
            io.seed = seed;
            return impute_horizontal(mp, io);
        },
        py::arg("masked_panel"), py::arg("seed") = kDefaultSeed);
    m.def(
        "impute_mc",
        [](const MaskedPanel& mp, std::uint64_t seed, py::object lam) {
            MCOptions mo;
            mo.seed = seed;
            if (!lam.is_none()) mo.lambda = lam.cast<double>();
            return impute_mc(mp, mo);
        },
        py::arg("masked_panel"), py::arg("seed") = kDefaultSeed, py::arg("lambda_") = py::none());
    m.def(
        "ensemble_vc",
        [](const MaskedPanel& mp, std::uint64_t seed, bool fast) {
            EnsembleOptions eo;
            eo.seed = seed;
            eo.fast_mode = fast;
            return ensemble_vc(mp, eo);
        },
        py::arg("masked_panel"), py::arg("seed") = kDefaultSeed, py::arg("fast") = false);
    m.def(
        "ensemble_hc",
        [](const MaskedPanel& mp, int s_periods, std::uint64_t seed, bool fast) {
            EnsembleOptions eo;
            eo.seed = seed;
            eo.fast_mode = fast;
            return ensemble_hc(mp, s_periods, eo);
        },
        py::arg("masked_panel"), py::arg("s_periods") = -1, py::arg("seed") = kDefaultSeed,
        py::arg("fast") = false);
    m.def(
        "estimate_effect",
        [](const Panel& panel, Eigen::Index unit, Eigen::Index period, const std::string& method,
           std::uint64_t seed, int s_periods, bool fast) {
            RunConfig rc;
            rc.seed = seed;
            rc.hc_periods = s_periods;
            rc.fast_mode = fast;
            return estimate_effect(panel, unit, period, method_arg(method), rc);
        },
        py::arg("panel"), py::arg("unit"), py::arg("period"), py::arg("method"),
        py::arg("seed") = kDefaultSeed, py::arg("s_periods") = -1, py::arg("fast") = false);

    m.def("fit_elastic_net", &fit_elastic_net, py::arg("X"), py::arg("y"), py::arg("lambda_"),
          py::arg("mixing"));
    m.def("lambda_max", &lambda_max, py::arg("X"), py::arg("y"), py::arg("mixing"));
    m.def(
        "kkt_residual",
        [](const ElasticNetFit& fit, const Eigen::MatrixXd& X, const Eigen::VectorXd& y) {
            return kkt_residual(fit, X, y);
        },
        py::arg("fit"), py::arg("X"), py::arg("y"));
    m.def("svt", &svt, py::arg("M"), py::arg("threshold"));
    m.def("fit_mc", &fit_mc, py::arg("masked_panel"), py::arg("lambda_"));
    m.def(
        "solve_simplex_ls",
        [](const Eigen::MatrixXd& predictions, const Eigen::VectorXd& targets) {
            const EnsembleWeights w = solve_simplex_ls(StackingProblem{predictions, targets});
            return py::make_tuple(w.vr, w.hz, w.mc);
        },
        py::arg("predictions"), py::arg("targets"));

    m.def(
        "generate_synthetic_panel",
        [](Eigen::Index n_units, Eigen::Index n_periods, int rank, double factor_scale,
           double noise_scale, double fe_scale, std::uint64_t seed) {
            SyntheticSpec spec{n_units, n_periods, rank, factor_scale, noise_scale, fe_scale, seed};
            return generate_synthetic_panel(spec);
        },
        py::arg("n_units"), py::arg("n_periods"), py::arg("rank") = 0,
        py::arg("factor_scale") = 1.0, py::arg("noise_scale") = 0.0, py::arg("fe_scale") = 1.0,
        py::arg("seed") = kDefaultSeed);

    m.def(
        "pseudo_treatment_eval",
        [](const Panel& panel, const std::vector<std::string>& methods, int t0,
           const std::string& transform_name, int s_periods, std::uint64_t seed, bool fast,
           int jobs) {
            BenchmarkConfig cfg;
            if (!methods.empty()) {
                cfg.methods.clear();
                for (const auto& name : methods) cfg.methods.push_back(method_arg(name));
            }
            cfg.t0 = t0;
            cfg.transform = transform_arg(transform_name);
            cfg.hc_periods = s_periods;
            cfg.seed = seed;
            cfg.fast_mode = fast;
            cfg.jobs = jobs;
            const BenchmarkReport rep = pseudo_treatment_eval(panel, cfg);
            return emit_report(rep, ReportFormat::Json);
        },
        py::arg("panel"), py::arg("methods") = std::vector<std::string>{}, py::arg("t0") = -1,
        py::arg("transform") = "level", py::arg("s_periods") = -1,
        py::arg("seed") = kDefaultSeed, py::arg("fast") = false, py::arg("jobs") = 1,
        "Runs the pseudo-treatment benchmark and returns the JSON report as a string.");
}
