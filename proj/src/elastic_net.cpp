#include "panelcf/elastic_net.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <numeric>

namespace panelcf {

namespace {

constexpr int kMaxSweeps = 10000;
constexpr double kCoefTol = 1e-7;
constexpr double kLambdaGridFloor = 1e-4;

double soft(double z, double t) {
    if (z > t) return z - t;
    if (z < -t) return z + t;
    return 0.0;
}

/// Centered response and centered, unit-length columns. Columns with no
/// variation are excluded from the fit (their coefficient is pinned at 0).
struct Standardized {
    Eigen::MatrixXd X;          // n x p, excluded columns left as zeros
    Eigen::VectorXd y;          // centered
    Eigen::VectorXd col_mean;   // p
    Eigen::VectorXd col_scale;  // p, L2 norm of the centered column (0 if excluded)
    double y_mean = 0.0;
    double y_absmax = 0.0;      // of the original y, for convergence scaling
    std::vector<int> active;    // indices of usable columns
};

Standardized standardize(const Eigen::MatrixXd& X, const Eigen::VectorXd& y) {
    Standardized s;
    const Eigen::Index n = X.rows(), p = X.cols();
    s.y_mean = n > 0 ? y.mean() : 0.0;
    s.y = y.array() - s.y_mean;
    s.y_absmax = n > 0 ? y.cwiseAbs().maxCoeff() : 0.0;
    s.X.setZero(n, p);
    s.col_mean.setZero(p);
    s.col_scale.setZero(p);
    for (Eigen::Index j = 0; j < p; ++j) {
        const double m = X.col(j).mean();
        Eigen::VectorXd c = X.col(j).array() - m;
        const double norm = c.norm();
        const double mag = X.col(j).cwiseAbs().maxCoeff();
        s.col_mean(j) = m;
        if (norm > 1e-12 * std::max(1.0, mag)) {
            s.col_scale(j) = norm;
            s.X.col(j) = c / norm;
            s.active.push_back(static_cast<int>(j));
        }
    }
    return s;
}

double penalty_value(const Eigen::VectorXd& c, const std::vector<int>& active, double lambda,
                     double mixing) {
    double l1 = 0.0, l2 = 0.0;
    for (int j : active) {
        l1 += std::abs(c(j));
        l2 += c(j) * c(j);
    }
    return lambda * (mixing * l1 + 0.5 * (1.0 - mixing) * l2);
}

double kkt_standardized(const Standardized& s, const Eigen::VectorXd& coef,
                        const Eigen::VectorXd& resid, double lambda, double mixing) {
    double worst = 0.0;
    for (int j : s.active) {
        const double g = s.X.col(j).dot(resid);  // -dF/dc_j without the penalty part
        double v;
        if (coef(j) != 0.0) {
            const double sign = coef(j) > 0.0 ? 1.0 : -1.0;
            v = std::abs(-g + lambda * (1.0 - mixing) * coef(j) + lambda * mixing * sign);
        } else {
            v = std::max(0.0, std::abs(g) - lambda * mixing);
        }
        worst = std::max(worst, v);
    }
    return worst;
}

struct CdResult {
    Eigen::VectorXd coef;  // standardized scale
    bool converged = false;
    std::vector<double> trace;
};

/// Cyclic coordinate descent from a warm start. Stops when the largest
/// coefficient move in a sweep is below kCoefTol and the KKT residual is
/// below `kkt_target`.
CdResult coordinate_descent(const Standardized& s, double lambda, double mixing,
                            Eigen::VectorXd warm, double kkt_target, bool record_trace) {
    CdResult out;
    out.coef = std::move(warm);
    Eigen::VectorXd resid = s.y - s.X * out.coef;
    const double denom = 1.0 + lambda * (1.0 - mixing);
    const double thresh = lambda * mixing;

    for (int sweep = 0; sweep < kMaxSweeps; ++sweep) {
        double max_delta = 0.0;
        for (int j : s.active) {
            const double old = out.coef(j);
            const double z = s.X.col(j).dot(resid) + old;  // unit-length column
            const double next = soft(z, thresh) / denom;
            if (next != old) {
                resid.noalias() -= s.X.col(j) * (next - old);
                out.coef(j) = next;
                max_delta = std::max(max_delta, std::abs(next - old));
            }
        }
        if (record_trace)
            out.trace.push_back(0.5 * resid.squaredNorm() +
                                penalty_value(out.coef, s.active, lambda, mixing));
        if (max_delta < kCoefTol) {
            if (kkt_standardized(s, out.coef, resid, lambda, mixing) <= kkt_target) {
                out.converged = true;
                break;
            }
        }
    }
    return out;
}

double kkt_target_for(const Standardized& s) { return 1e-9 * std::max(1.0, s.y_absmax); }

ElasticNetFit destandardize(const Standardized& s, const CdResult& cd, double lambda,
                            double mixing) {
    ElasticNetFit fit;
    fit.lambda = lambda;
    fit.mixing = mixing;
    fit.converged = cd.converged;
    fit.objective_trace = cd.trace;
    const Eigen::Index p = s.col_scale.size();
    fit.coefficients.setZero(p);
    double shift = 0.0;
    for (int j : s.active) {
        fit.coefficients(j) = cd.coef(j) / s.col_scale(j);
        shift += fit.coefficients(j) * s.col_mean(j);
    }
    fit.intercept = s.y_mean - shift;
    fit.n_nonzero = static_cast<int>((fit.coefficients.array() != 0.0).count());
    return fit;
}

void check_inputs(const Eigen::MatrixXd& X, const Eigen::VectorXd& y, double lambda,
                  double mixing) {
    if (!X.allFinite() || !y.allFinite()) throw NumericalError("non-finite entries in X or y");
    if (X.rows() != y.size())
        throw ConfigError("X has " + std::to_string(X.rows()) + " rows but y has " +
                          std::to_string(y.size()));
    if (y.size() < 1) throw ConfigError("need at least one sample");
    if (lambda < 0.0) throw ConfigError("lambda must be >= 0");
    if (mixing < 0.0 || mixing > 1.0) throw ConfigError("mixing must be in [0, 1]");
}

double lambda_max_standardized(const Standardized& s, double mixing) {
    if (mixing <= 0.0)
        throw MixingError("pure ridge (mixing = 0) has no finite zeroing lambda");
    double m = 0.0;
    for (int j : s.active) m = std::max(m, std::abs(s.X.col(j).dot(s.y)));
    return m / mixing;
}

}  // namespace

ElasticNetFit fit_elastic_net(const Eigen::MatrixXd& X, const Eigen::VectorXd& y, double lambda,
                              double mixing) {
    check_inputs(X, y, lambda, mixing);
    const Standardized s = standardize(X, y);
    if (s.active.empty()) {
        // Intercept-only: nothing to descend on.
        ElasticNetFit fit;
        fit.intercept = s.y_mean;
        fit.coefficients.setZero(X.cols());
        fit.lambda = lambda;
        fit.mixing = mixing;
        fit.n_nonzero = 0;
        fit.converged = true;
        return fit;
    }
    CdResult cd = coordinate_descent(s, lambda, mixing, Eigen::VectorXd::Zero(X.cols()),
                                     kkt_target_for(s), /*record_trace=*/true);
    return destandardize(s, cd, lambda, mixing);
}

double lambda_max(const Eigen::MatrixXd& X, const Eigen::VectorXd& y, double mixing) {
    check_inputs(X, y, 0.0, std::clamp(mixing, 0.0, 1.0));
    if (mixing <= 0.0)
        throw MixingError("pure ridge (mixing = 0) has no finite zeroing lambda");
    return lambda_max_standardized(standardize(X, y), mixing);
}

PenaltyGrid default_penalty_grid(const Eigen::MatrixXd& X, const Eigen::VectorXd& y,
                                 std::vector<double> mixings, int n_lambdas) {
    if (mixings.empty()) throw ConfigError("empty mixing set");
    for (double a : mixings)
        if (a <= 0.0 || a > 1.0) throw ConfigError("mixings must lie in (0, 1]");
    if (n_lambdas < 1) throw ConfigError("need at least one lambda");

    const double a_min = *std::min_element(mixings.begin(), mixings.end());
    const double lmax = lambda_max(X, y, a_min);

    PenaltyGrid grid;
    grid.mixings = std::move(mixings);
    if (lmax <= 0.0) {
        grid.lambdas = {0.0};
        return grid;
    }
    grid.lambdas.resize(static_cast<std::size_t>(n_lambdas));
    grid.lambdas.front() = lmax;
    if (n_lambdas > 1) {
        const double step = std::log(kLambdaGridFloor) / static_cast<double>(n_lambdas - 1);
        for (int k = 1; k < n_lambdas - 1; ++k)
            grid.lambdas[static_cast<std::size_t>(k)] = lmax * std::exp(step * k);
        grid.lambdas.back() = lmax * kLambdaGridFloor;
    }
    return grid;
}

PenaltyChoice select_penalties_cv(const Eigen::MatrixXd& X, const Eigen::VectorXd& y,
                                  const std::vector<int>& fold_assignment,
                                  const PenaltyGrid& grid) {
    check_inputs(X, y, 0.0, 1.0);
    if (grid.lambdas.empty() || grid.mixings.empty()) throw ConfigError("empty penalty grid");
    if (fold_assignment.size() != static_cast<std::size_t>(y.size()))
        throw ConfigError("fold assignment size does not match sample count");

    std::map<int, std::vector<Eigen::Index>> folds;
    for (Eigen::Index i = 0; i < y.size(); ++i)
        folds[fold_assignment[static_cast<std::size_t>(i)]].push_back(i);
    if (folds.size() < 2) throw FoldError("cross-validation needs at least 2 folds");

    const std::size_t n_l = grid.lambdas.size();
    const std::size_t n_a = grid.mixings.size();
    std::vector<double> score(n_l * n_a, 0.0);

    for (const auto& [fold_id, held] : folds) {
        const Eigen::Index n_train = y.size() - static_cast<Eigen::Index>(held.size());
        if (n_train < 1)
            throw FoldError("fold " + std::to_string(fold_id) + " leaves no training samples");

        std::vector<char> is_held(static_cast<std::size_t>(y.size()), 0);
        for (Eigen::Index i : held) is_held[static_cast<std::size_t>(i)] = 1;
        Eigen::MatrixXd Xtr(n_train, X.cols());
        Eigen::VectorXd ytr(n_train);
        Eigen::Index r = 0;
        for (Eigen::Index i = 0; i < y.size(); ++i) {
            if (is_held[static_cast<std::size_t>(i)]) continue;
            Xtr.row(r) = X.row(i);
            ytr(r) = y(i);
            ++r;
        }

        const Standardized s = standardize(Xtr, ytr);
        const double kkt_target = kkt_target_for(s);
        for (std::size_t ai = 0; ai < n_a; ++ai) {
            const double mixing = grid.mixings[ai];
            Eigen::VectorXd warm = Eigen::VectorXd::Zero(X.cols());
            for (std::size_t li = 0; li < n_l; ++li) {
                CdResult cd = coordinate_descent(s, grid.lambdas[li], mixing, warm, kkt_target,
                                                 /*record_trace=*/false);
                warm = cd.coef;
                const ElasticNetFit fit = destandardize(s, cd, grid.lambdas[li], mixing);
                double sse = 0.0;
                for (Eigen::Index i : held) {
                    const double pred = fit.intercept + X.row(i).dot(fit.coefficients);
                    const double e = y(i) - pred;
                    sse += e * e;
                }
                score[li * n_a + ai] += sse / static_cast<double>(held.size());
            }
        }
    }

    // Preference order under exact ties: larger lambda first, then larger
    // mixing. The grid is descending in lambda already.
    std::vector<std::size_t> mix_order(n_a);
    std::iota(mix_order.begin(), mix_order.end(), 0u);
    std::stable_sort(mix_order.begin(), mix_order.end(), [&](std::size_t a, std::size_t b) {
        return grid.mixings[a] > grid.mixings[b];
    });

    double best = std::numeric_limits<double>::infinity();
    PenaltyChoice pick{grid.lambdas.front(),
                       grid.mixings[mix_order.front()]};
    for (std::size_t li = 0; li < n_l; ++li) {
        for (std::size_t ai : mix_order) {
            const double v = score[li * n_a + ai];
            if (v < best) {
                best = v;
                pick = PenaltyChoice{grid.lambdas[li], grid.mixings[ai]};
            }
        }
    }
    return pick;
}

double kkt_residual(const ElasticNetFit& fit, const Eigen::MatrixXd& X, const Eigen::VectorXd& y) {
    check_inputs(X, y, fit.lambda, fit.mixing);
    const Standardized s = standardize(X, y);
    Eigen::VectorXd coef = Eigen::VectorXd::Zero(X.cols());
    for (int j : s.active) coef(j) = fit.coefficients(j) * s.col_scale(j);
    const Eigen::VectorXd resid = s.y - s.X * coef;
    return kkt_standardized(s, coef, resid, fit.lambda, fit.mixing);
}

}  // namespace panelcf
