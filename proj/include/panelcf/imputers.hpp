#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "panelcf/elastic_net.hpp"
#include "panelcf/panel.hpp"
#include "panelcf/result.hpp"
#include "panelcf/rng.hpp"

namespace panelcf {

struct ImputeOptions {
    std::uint64_t seed = kDefaultSeed;
    /// Explicit CV fold assignment over the regression samples (periods for
    /// the vertical imputer, control units for the horizontal one). Defaults:
    /// contiguous time blocks (vertical), seeded random unit folds
    /// (horizontal).
    std::optional<std::vector<int>> folds;
    /// Fixed (lambda, mixing); skips cross-validation entirely.
    std::optional<PenaltyChoice> penalties;
};

/// Synthetic-control-style regression: the target unit's pre-target outcomes
/// are regressed on the other units' contemporaneous outcomes, and the fitted
/// combination is evaluated at the target period.
ImputationResult impute_vertical(const MaskedPanel& mp, const ImputeOptions& opts = {});

/// Lag regression across units: control units' target-period outcomes are
/// regressed on their earlier outcomes, and the fitted model is evaluated on
/// the target unit's history. Same algorithm as the vertical imputer on the
/// transposed panel.
ImputationResult impute_horizontal(const MaskedPanel& mp, const ImputeOptions& opts = {});

}  // namespace panelcf
