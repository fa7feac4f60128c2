#include "panelcf/methods.hpp"

#include "panelcf/imputers.hpp"
#include "panelcf/matrix_completion.hpp"

namespace panelcf {

const char* to_string(Method m) {
    switch (m) {
        case Method::VR: return "vr";
        case Method::HZ: return "hz";
        case Method::MC: return "mc";
        case Method::EnsVC: return "ens_vc";
        case Method::EnsHC: return "ens_hc";
    }
    return "vr";
}

std::optional<Method> method_from_string(const std::string& s) {
    if (s == "vr") return Method::VR;
    if (s == "hz") return Method::HZ;
    if (s == "mc") return Method::MC;
    if (s == "ens_vc") return Method::EnsVC;
    if (s == "ens_hc") return Method::EnsHC;
    return std::nullopt;
}

ImputationResult run_method(const MaskedPanel& mp, Method method, const RunConfig& cfg) {
    switch (method) {
        case Method::VR: {
            ImputeOptions io;
            io.seed = cfg.seed;
            return impute_vertical(mp, io);
        }
        case Method::HZ: {
            ImputeOptions io;
            io.seed = cfg.seed;
            return impute_horizontal(mp, io);
        }
        case Method::MC: {
            MCOptions mo;
            mo.seed = cfg.seed;
            return impute_mc(mp, mo);
        }
        case Method::EnsVC: {
            EnsembleOptions eo;
            eo.seed = cfg.seed;
            eo.fast_mode = cfg.fast_mode;
            return ensemble_vc(mp, eo);
        }
        case Method::EnsHC: {
            EnsembleOptions eo;
            eo.seed = cfg.seed;
            eo.fast_mode = cfg.fast_mode;
            return ensemble_hc(mp, cfg.hc_periods, eo);
        }
    }
    throw ConfigError("unknown method");
}

double estimate_effect(const Panel& panel, Eigen::Index unit, Eigen::Index period, Method method,
                       const RunConfig& cfg) {
    const double observed = panel.values(unit, period);
    const MaskedPanel mp = restrict(panel, unit, period);
    const ImputationResult res = run_method(mp, method, cfg);
    return observed - res.value;
}

}  // namespace panelcf
