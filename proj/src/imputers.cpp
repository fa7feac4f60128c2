#include "panelcf/imputers.hpp"

#include <algorithm>
#include <numeric>

namespace panelcf {

namespace {

void require_single_hidden_target(const MaskedPanel& mp) {
    if (mp.target.unit < 0 || mp.target.unit >= mp.n_units() || mp.target.period < 0 ||
        mp.target.period >= mp.n_periods())
        throw ConfigError("target cell out of range");
    if (mp.visible(mp.target.unit, mp.target.period))
        throw ConfigError("target cell must be hidden");
    if (static_cast<Eigen::Index>(mp.visible.count()) != mp.n_units() * mp.n_periods() - 1)
        throw ConfigError("regression imputers require every non-target cell to be visible");
}

/// Balanced contiguous blocks: sample s of n goes to fold s*k/n.
std::vector<int> contiguous_folds(Eigen::Index n, int k) {
    std::vector<int> f(static_cast<std::size_t>(n));
    for (Eigen::Index s = 0; s < n; ++s)
        f[static_cast<std::size_t>(s)] = static_cast<int>((s * k) / n);
    return f;
}

std::vector<int> random_folds(Eigen::Index n, int k, std::uint64_t seed) {
    std::vector<Eigen::Index> order(static_cast<std::size_t>(n));
    std::iota(order.begin(), order.end(), Eigen::Index{0});
    auto rng = make_rng(seed);
    std::shuffle(order.begin(), order.end(), rng);
    std::vector<int> f(static_cast<std::size_t>(n));
    for (Eigen::Index pos = 0; pos < n; ++pos)
        f[static_cast<std::size_t>(order[static_cast<std::size_t>(pos)])] =
            static_cast<int>((pos * k) / n);
    return f;
}

int fold_count(const std::vector<int>& folds) {
    std::vector<int> ids(folds);
    std::sort(ids.begin(), ids.end());
    return static_cast<int>(std::unique(ids.begin(), ids.end()) - ids.begin());
}

ImputationResult impute_from_design(const Eigen::MatrixXd& X, const Eigen::VectorXd& y,
                                    const Eigen::VectorXd& x_target,
                                    const std::vector<int>& default_folds, Method tag,
                                    const ImputeOptions& opts) {
    PenaltyChoice pick;
    if (opts.penalties) {
        pick = *opts.penalties;
    } else {
        const PenaltyGrid grid = default_penalty_grid(X, y);
        const std::vector<int>& folds = opts.folds ? *opts.folds : default_folds;
        if (fold_count(folds) >= 2) {
            pick = select_penalties_cv(X, y, folds, grid);
        } else {
            // Too few samples to cross-validate; fall back to the most
            // regularized grid point.
            pick = PenaltyChoice{grid.lambdas.front(),
                                 *std::max_element(grid.mixings.begin(), grid.mixings.end())};
        }
    }

    const ElasticNetFit fit = fit_elastic_net(X, y, pick.lambda, pick.mixing);
    ImputationResult res;
    res.value = fit.intercept + fit.coefficients.dot(x_target);
    res.method = tag;
    res.complexity = static_cast<double>(fit.n_nonzero);
    res.diagnostics = fit.coefficients;
    res.penalty = Penalty{pick.lambda, pick.mixing};
    return res;
}

}  // namespace

ImputationResult impute_vertical(const MaskedPanel& mp, const ImputeOptions& opts) {
    require_single_hidden_target(mp);
    const Eigen::Index i_star = mp.target.unit;
    const Eigen::Index t_star = mp.target.period;
    const Eigen::Index n = t_star;  // training periods strictly before the target
    if (n < 2) throw InsufficientHistory("vertical regression needs at least 2 pre-periods");

    const Eigen::Index n_units = mp.n_units();
    const Eigen::Index p = n_units - 1;
    Eigen::MatrixXd X(n, p);
    Eigen::VectorXd xt(p);
    Eigen::Index col = 0;
    for (Eigen::Index j = 0; j < n_units; ++j) {
        if (j == i_star) continue;
        X.col(col) = mp.panel.values.row(j).head(n).transpose();
        xt(col) = mp.panel.values(j, t_star);
        ++col;
    }
    const Eigen::VectorXd y = mp.panel.values.row(i_star).head(n).transpose();

    const int k = static_cast<int>(std::min<Eigen::Index>(5, n - 1));
    return impute_from_design(X, y, xt, contiguous_folds(n, std::max(k, 1)), Method::VR, opts);
}

ImputationResult impute_horizontal(const MaskedPanel& mp, const ImputeOptions& opts) {
    require_single_hidden_target(mp);
    const Eigen::Index i_star = mp.target.unit;
    const Eigen::Index t_star = mp.target.period;
    if (t_star < 2) throw InsufficientHistory("horizontal regression needs at least 2 pre-periods");
    const Eigen::Index n = mp.n_units() - 1;  // control units
    if (n < 2) throw InsufficientUnits("horizontal regression needs at least 2 control units");

    const Eigen::Index p = t_star;  // lagged outcomes as predictors
    Eigen::MatrixXd X(n, p);
    Eigen::VectorXd y(n);
    Eigen::Index row = 0;
    for (Eigen::Index j = 0; j < mp.n_units(); ++j) {
        if (j == i_star) continue;
        X.row(row) = mp.panel.values.row(j).head(p);
        y(row) = mp.panel.values(j, t_star);
        ++row;
    }
    const Eigen::VectorXd xt = mp.panel.values.row(i_star).head(p).transpose();

    const int k = static_cast<int>(std::min<Eigen::Index>(10, n - 1));
    return impute_from_design(X, y, xt,
                              random_folds(n, std::max(k, 1), mix_seed(opts.seed, seed_tag::hz_folds)),
                              Method::HZ, opts);
}

}  // namespace panelcf
