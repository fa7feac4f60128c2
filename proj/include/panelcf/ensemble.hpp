#pragma once

#include <Eigen/Dense>
#include <array>
#include <cstdint>
#include <optional>

#include "panelcf/panel.hpp"
#include "panelcf/result.hpp"
#include "panelcf/rng.hpp"

namespace panelcf {

/// Convex combination weights for the three base imputers. Always on the
/// unit simplex: each component >= 0, sum = 1.
struct EnsembleWeights {
    double vr = 0.0;
    double hz = 0.0;
    double mc = 0.0;
};

/// Held-out predictions (columns ordered VR, HZ, MC) against the true
/// outcomes they tried to predict.
struct StackingProblem {
    Eigen::MatrixXd predictions;  // m x 3
    Eigen::VectorXd targets;      // m
};

/// In-sample stacking loss ||y - P*theta||^2. The simplex solver compares
/// candidates with this exact expression, so its result never loses to a
/// pure vertex.
double stacking_loss(const StackingProblem& sp, const EnsembleWeights& w);

/// Exact minimizer of the stacking loss over the 2-simplex, found by
/// enumerating its 7 faces (3 vertices, 3 edges, interior) and keeping the
/// feasible candidate with the smallest loss. Ties break lexicographically
/// VR > HZ > MC.
EnsembleWeights solve_simplex_ls(const StackingProblem& sp);

struct EnsembleOptions {
    std::uint64_t seed = kDefaultSeed;
    /// Reuse the main problem's penalties inside every stacking fold instead
    /// of re-running cross-validation per fold. Approximate but much cheaper.
    bool fast_mode = false;
    /// Precomputed main-problem imputations (VR, HZ, MC), e.g. when the
    /// caller already ran the individual methods with the same seed.
    std::optional<std::array<ImputationResult, 3>> mains;
};

/// Vertical cross-validation: each control unit's target-period outcome is
/// hidden in turn (with the target unit removed entirely), the three
/// imputers predict it, and the simplex weights are fit to those held-out
/// predictions.
ImputationResult ensemble_vc(const MaskedPanel& mp, const EnsembleOptions& opts = {});

/// Horizontal cross-validation: the target unit's outcome at each of the
/// last `s_periods` pre-target periods is hidden in turn, with the inner
/// problems seeing only periods up to the hidden one. Pass s_periods < 0 for
/// the default min(10, t* - 3) (1-based).
ImputationResult ensemble_hc(const MaskedPanel& mp, int s_periods,
                             const EnsembleOptions& opts = {});

}  // namespace panelcf
