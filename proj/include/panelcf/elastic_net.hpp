#pragma once

#include <Eigen/Dense>
#include <vector>

#include "panelcf/errors.hpp"

namespace panelcf {

/// Result of one penalized least-squares fit. Coefficients are on the
/// original scale of X; `objective_trace` holds the internal (standardized)
/// objective after each coordinate-descent sweep.
struct ElasticNetFit {
    double intercept = 0.0;
    Eigen::VectorXd coefficients;
    double lambda = 0.0;
    double mixing = 1.0;
    int n_nonzero = 0;
    bool converged = true;
    std::vector<double> objective_trace;
};

/// Descending lambda path plus the candidate L1/L2 mixings searched by CV.
struct PenaltyGrid {
    std::vector<double> lambdas;
    std::vector<double> mixings;
};

struct PenaltyChoice {
    double lambda = 0.0;
    double mixing = 1.0;
};

/// Minimizes  1/2 * sum_i (y_i - c0 - x_i'c)^2 + lambda * (mixing*||c||_1 +
/// (1-mixing)/2*||c||_2^2)  by cyclic coordinate descent. Columns are
/// internally centered and scaled to unit length (the intercept is never
/// penalized); reported coefficients are mapped back to the original scale.
/// Soft-thresholding produces exact zeros, so n_nonzero counts |c| > 0.
ElasticNetFit fit_elastic_net(const Eigen::MatrixXd& X, const Eigen::VectorXd& y, double lambda,
                              double mixing);

/// Smallest lambda that zeroes every coefficient:
/// max_j |<x_j_standardized, y - mean(y)>| / mixing. Pure ridge (mixing = 0)
/// has no finite zeroing lambda and throws MixingError.
double lambda_max(const Eigen::MatrixXd& X, const Eigen::VectorXd& y, double mixing);

/// 50 geometric lambdas from lambda_max down to 1e-4*lambda_max, anchored at
/// the smallest mixing (which has the largest zeroing lambda, so the top of
/// the grid zeroes every candidate mixing).
PenaltyGrid default_penalty_grid(const Eigen::MatrixXd& X, const Eigen::VectorXd& y,
                                 std::vector<double> mixings = {0.05, 0.25, 0.5, 0.75, 0.95, 1.0},
                                 int n_lambdas = 50);

/// K-fold cross-validation over the full (lambda, mixing) grid. Scores are
/// the mean over folds of the per-fold held-out MSE; ties break toward larger
/// lambda, then larger mixing. Fits along each lambda path are warm-started.
PenaltyChoice select_penalties_cv(const Eigen::MatrixXd& X, const Eigen::VectorXd& y,
                                  const std::vector<int>& fold_assignment,
                                  const PenaltyGrid& grid);

/// Maximum violation of the subgradient optimality conditions of the
/// penalized objective, evaluated in the same standardized coordinates the
/// solver minimizes in. Zero at an exact optimum.
double kkt_residual(const ElasticNetFit& fit, const Eigen::MatrixXd& X, const Eigen::VectorXd& y);

}  // namespace panelcf
