#pragma once

#include <cstdint>

#include "panelcf/ensemble.hpp"
#include "panelcf/panel.hpp"
#include "panelcf/result.hpp"
#include "panelcf/rng.hpp"

namespace panelcf {

struct RunConfig {
    std::uint64_t seed = kDefaultSeed;
    /// Stacking periods for the horizontal-CV ensemble; < 0 means the
    /// default min(10, t* - 3).
    int hc_periods = -1;
    bool fast_mode = false;
};

ImputationResult run_method(const MaskedPanel& mp, Method method, const RunConfig& cfg = {});

/// Treatment effect at an observed cell: the observed (treated) outcome minus
/// the imputed untreated one.
double estimate_effect(const Panel& panel, Eigen::Index unit, Eigen::Index period, Method method,
                       const RunConfig& cfg = {});

}  // namespace panelcf
