#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <optional>
#include <vector>

#include "panelcf/panel.hpp"
#include "panelcf/result.hpp"
#include "panelcf/rng.hpp"

namespace panelcf {

/// Low-rank fit with unpenalized two-way fixed effects. Unit effects are
/// recentered to mean zero; the grand mean lives in the time effects, so
/// predictions a_i + b_t + L_it are reproducible across runs.
struct MCFit {
    Eigen::MatrixXd low_rank;        // N x T
    Eigen::VectorXd unit_effects;    // N, mean zero
    Eigen::VectorXd time_effects;    // T, carries the grand mean
    int rank = 0;                    // singular values above 1e-10 after shrinkage
    double lambda = 0.0;
    std::vector<double> objective_trace;  // non-increasing
    bool converged = true;
    Eigen::VectorXd singular_values;  // retained (post-shrinkage) singular values

    double predict(Eigen::Index i, Eigen::Index t) const {
        return unit_effects(i) + time_effects(t) + low_rank(i, t);
    }
};

struct MCOptions {
    std::uint64_t seed = kDefaultSeed;
    std::optional<double> lambda;  // fixed penalty; skips cross-validation
    int grid_size = 30;
};

/// Proximal operator of the nuclear norm: U * soft(Sigma, threshold) * V'.
Eigen::MatrixXd svt(const Eigen::MatrixXd& M, double threshold);

/// Minimizes  sum_visible (Y_it - a_i - b_t - L_it)^2 + lambda * ||L||_*
/// by alternating closed-form fixed-effect updates with an impute-then-SVT
/// step on the residual matrix (hidden cells filled with the current model,
/// never with observed data). Stops when the relative objective change drops
/// below 1e-6 or after 500 outer iterations.
MCFit fit_mc(const MaskedPanel& mp, double lambda);

/// 30 geometric values from the largest singular value of the residual after
/// a fixed-effects-only fit down to 1e-4 of it.
std::vector<double> default_mc_lambda_grid(const MaskedPanel& mp, int n = 30);

/// 5 folds, each holding out a random 10% of the visible cells (never the
/// target). Returns the lambda with the smallest mean held-out MSE; ties
/// break toward larger lambda.
double select_lambda_mc(const MaskedPanel& mp, const std::vector<double>& grid,
                        std::uint64_t seed = kDefaultSeed);

ImputationResult impute_mc(const MaskedPanel& mp, const MCOptions& opts = {});

}  // namespace panelcf
