#include "panelcf/matrix_completion.hpp"

#include <Eigen/SVD>
#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

namespace panelcf {

namespace {

constexpr int kMaxOuterIters = 500;
constexpr double kRelObjTol = 1e-6;
constexpr double kRankFloor = 1e-10;
constexpr int kMcFolds = 5;
constexpr double kMcHoldout = 0.10;

struct MaskCounts {
    Eigen::VectorXd row;  // visible cells per row
    Eigen::VectorXd col;
};

MaskCounts count_mask(const VisibleMask& visible) {
    MaskCounts c;
    c.row = visible.cast<double>().rowwise().sum();
    c.col = visible.cast<double>().colwise().sum().transpose();
    return c;
}

void require_coverage(const MaskCounts& c) {
    if ((c.row.array() < 1.0).any() || (c.col.array() < 1.0).any())
        throw DegenerateMask("every row and column needs at least one visible cell");
}

/// Gauss-Seidel on the two-way fixed effects given L, run until the gradient
/// of the visible-cell squared error w.r.t. every a_i and b_t is negligible.
void update_fixed_effects(const Eigen::MatrixXd& Y, const VisibleMask& visible,
                          const Eigen::MatrixXd& L, const MaskCounts& counts,
                          Eigen::VectorXd& a, Eigen::VectorXd& b) {
    const Eigen::Index n = Y.rows(), t = Y.cols();
    const double scale = std::max(1.0, Y.cwiseAbs().maxCoeff());
    const double tol = 2.5e-10 * scale;  // |sum of residuals|, i.e. gradient/2
    for (int pass = 0; pass < 500; ++pass) {
        for (Eigen::Index i = 0; i < n; ++i) {
            double s = 0.0;
            for (Eigen::Index k = 0; k < t; ++k)
                if (visible(i, k)) s += Y(i, k) - b(k) - L(i, k);
            a(i) = s / counts.row(i);
        }
        for (Eigen::Index k = 0; k < t; ++k) {
            double s = 0.0;
            for (Eigen::Index i = 0; i < n; ++i)
                if (visible(i, k)) s += Y(i, k) - a(i) - L(i, k);
            b(k) = s / counts.col(k);
        }
        // Column updates leave every column-sum at zero; only rows can drift.
        double worst = 0.0;
        for (Eigen::Index i = 0; i < n; ++i) {
            double s = 0.0;
            for (Eigen::Index k = 0; k < t; ++k)
                if (visible(i, k)) s += Y(i, k) - a(i) - b(k) - L(i, k);
            worst = std::max(worst, std::abs(s));
        }
        if (worst <= tol) break;
    }
    // Identification: unit effects sum to zero, grand mean folded into b.
    const double m = a.mean();
    a.array() -= m;
    b.array() += m;
}

double visible_sse(const Eigen::MatrixXd& Y, const VisibleMask& visible, const Eigen::MatrixXd& L,
                   const Eigen::VectorXd& a, const Eigen::VectorXd& b) {
    double sse = 0.0;
    for (Eigen::Index k = 0; k < Y.cols(); ++k)
        for (Eigen::Index i = 0; i < Y.rows(); ++i)
            if (visible(i, k)) {
                const double e = Y(i, k) - a(i) - b(k) - L(i, k);
                sse += e * e;
            }
    return sse;
}

Eigen::MatrixXd svt_impl(const Eigen::MatrixXd& M, double threshold,
                         Eigen::VectorXd* shrunk_out) {
    Eigen::BDCSVD<Eigen::MatrixXd> svd(M, Eigen::ComputeThinU | Eigen::ComputeThinV);
    Eigen::VectorXd shrunk = (svd.singularValues().array() - threshold).max(0.0).matrix();
    if (shrunk_out) *shrunk_out = shrunk;
    return svd.matrixU() * shrunk.asDiagonal() * svd.matrixV().transpose();
}

struct CoreState {
    Eigen::MatrixXd L;
    Eigen::VectorXd a, b;
    double nuclear = 0.0;  // ||L||_*
};

CoreState zero_state(Eigen::Index n, Eigen::Index t) {
    return CoreState{Eigen::MatrixXd::Zero(n, t), Eigen::VectorXd::Zero(n),
                     Eigen::VectorXd::Zero(t), 0.0};
}

/// One run of the fill-and-SVT alternation at a fixed lambda. The SVT step
/// minimizes sum_all (R - L)^2 + lambda*||L||_*, whose proximal threshold is
/// lambda/2; hidden cells of R carry the current model value. When
/// `fe_only_objective` is finite it becomes the leading trace entry (callers
/// guarantee the start state is at least that good).
MCFit alternate(const Eigen::MatrixXd& Y, const VisibleMask& visible, const MaskCounts& counts,
                double lambda, CoreState state, double rel_tol, int max_iters, bool record_trace,
                double fe_only_objective = std::numeric_limits<double>::quiet_NaN()) {
    const Eigen::Index n = Y.rows(), t = Y.cols();
    const double threshold = 0.5 * lambda;

    MCFit fit;
    fit.lambda = lambda;
    fit.converged = false;
    if (record_trace && std::isfinite(fe_only_objective))
        fit.objective_trace.push_back(fe_only_objective);

    Eigen::MatrixXd filled(n, t);
    Eigen::VectorXd shrunk;
    double prev = std::numeric_limits<double>::infinity();

    for (int iter = 0; iter < max_iters; ++iter) {
        update_fixed_effects(Y, visible, state.L, counts, state.a, state.b);
        for (Eigen::Index k = 0; k < t; ++k)
            for (Eigen::Index i = 0; i < n; ++i)
                filled(i, k) = visible(i, k) ? Y(i, k) - state.a(i) - state.b(k) : state.L(i, k);
        state.L = svt_impl(filled, threshold, &shrunk);
        state.nuclear = shrunk.sum();

        const double obj = visible_sse(Y, visible, state.L, state.a, state.b) +
                           lambda * state.nuclear;
        if (record_trace) fit.objective_trace.push_back(obj);
        if (obj <= 0.0 || (std::isfinite(prev) && prev - obj <= rel_tol * prev)) {
            fit.converged = true;
            break;
        }
        prev = obj;
    }

    fit.rank = static_cast<int>((shrunk.array() > kRankFloor).count());
    fit.singular_values = Eigen::VectorXd(fit.rank);
    Eigen::Index r = 0;
    for (Eigen::Index i = 0; i < shrunk.size(); ++i)
        if (shrunk(i) > kRankFloor) fit.singular_values(r++) = shrunk(i);
    fit.low_rank = std::move(state.L);
    fit.unit_effects = std::move(state.a);
    fit.time_effects = std::move(state.b);
    return fit;
}

CoreState state_of(MCFit&& fit) {
    return CoreState{std::move(fit.low_rank), std::move(fit.unit_effects),
                     std::move(fit.time_effects), fit.singular_values.sum()};
}

struct FeBaseline {
    CoreState state;     // L = 0, fixed effects optimal
    double objective;    // visible SSE of the FE-only model
    double sigma_max;    // spectral norm of the visible residual
};

FeBaseline fe_only_baseline(const Eigen::MatrixXd& Y, const VisibleMask& visible,
                            const MaskCounts& counts) {
    const Eigen::Index n = Y.rows(), t = Y.cols();
    FeBaseline base{zero_state(n, t), 0.0, 0.0};
    update_fixed_effects(Y, visible, base.state.L, counts, base.state.a, base.state.b);
    Eigen::MatrixXd resid = Eigen::MatrixXd::Zero(n, t);
    for (Eigen::Index k = 0; k < t; ++k)
        for (Eigen::Index i = 0; i < n; ++i)
            if (visible(i, k)) resid(i, k) = Y(i, k) - base.state.a(i) - base.state.b(k);
    base.objective = resid.squaredNorm();
    base.sigma_max = Eigen::BDCSVD<Eigen::MatrixXd>(resid).singularValues().maxCoeff();
    return base;
}

}  // namespace

Eigen::MatrixXd svt(const Eigen::MatrixXd& M, double threshold) {
    if (!M.allFinite()) throw NumericalError("non-finite entries");
    if (threshold < 0.0) throw ConfigError("threshold must be >= 0");
    return svt_impl(M, threshold, nullptr);
}

MCFit fit_mc(const MaskedPanel& mp, double lambda) {
    if (lambda < 0.0) throw ConfigError("lambda must be >= 0");
    const Eigen::MatrixXd& Y = mp.panel.values;
    const MaskCounts counts = count_mask(mp.visible);
    require_coverage(counts);

    const FeBaseline base = fe_only_baseline(Y, mp.visible, counts);

    // Cold starts at a small lambda converge very slowly, so walk a halving
    // threshold schedule down to the requested one, warm-starting each stage.
    CoreState state = base.state;
    int stages = 0;
    for (double tau = 0.5 * base.sigma_max; tau > 0.5 * lambda && stages < 48; tau *= 0.5) {
        MCFit stage = alternate(Y, mp.visible, counts, 2.0 * tau, std::move(state), 1e-5, 100,
                                /*record_trace=*/false);
        state = state_of(std::move(stage));
        ++stages;
    }

    // Never start the final stage worse than the FE-only model.
    const double warm_obj =
        visible_sse(Y, mp.visible, state.L, state.a, state.b) + lambda * state.nuclear;
    if (!(warm_obj <= base.objective)) state = base.state;

    return alternate(Y, mp.visible, counts, lambda, std::move(state), kRelObjTol, kMaxOuterIters,
                     /*record_trace=*/true, base.objective);
}

std::vector<double> default_mc_lambda_grid(const MaskedPanel& mp, int n_grid) {
    if (n_grid < 1) throw ConfigError("grid size must be >= 1");
    const MaskCounts counts = count_mask(mp.visible);
    require_coverage(counts);
    const FeBaseline base = fe_only_baseline(mp.panel.values, mp.visible, counts);
    const double smax = base.sigma_max;

    if (smax <= 1e-14 * std::max(1.0, mp.panel.values.cwiseAbs().maxCoeff()))
        return {0.0};
    std::vector<double> grid(static_cast<std::size_t>(n_grid));
    grid.front() = smax;
    if (n_grid > 1) {
        const double step = std::log(1e-4) / static_cast<double>(n_grid - 1);
        for (int k = 1; k < n_grid - 1; ++k)
            grid[static_cast<std::size_t>(k)] = smax * std::exp(step * k);
        grid.back() = smax * 1e-4;
    }
    return grid;
}

double select_lambda_mc(const MaskedPanel& mp, const std::vector<double>& grid,
                        std::uint64_t seed) {
    if (grid.empty()) throw ConfigError("empty lambda grid");
    if (grid.size() == 1) return grid.front();

    const Eigen::Index n = mp.n_units(), t = mp.n_periods();
    std::vector<std::pair<Eigen::Index, Eigen::Index>> cells;
    for (Eigen::Index k = 0; k < t; ++k)
        for (Eigen::Index i = 0; i < n; ++i)
            if (mp.visible(i, k)) cells.emplace_back(i, k);
    if (cells.size() < 20)
        throw ConfigError("lambda cross-validation needs at least 20 visible cells");

    const std::size_t n_hold = std::max<std::size_t>(
        1, static_cast<std::size_t>(kMcHoldout * static_cast<double>(cells.size())));
    auto rng = make_rng(mix_seed(seed, seed_tag::mc_folds));

    std::vector<double> score(grid.size(), 0.0);
    for (int fold = 0; fold < kMcFolds; ++fold) {
        VisibleMask train;
        // Redraw if the holdout empties a row or column.
        bool ok = false;
        for (int attempt = 0; attempt < 32 && !ok; ++attempt) {
            std::shuffle(cells.begin(), cells.end(), rng);
            train = mp.visible;
            for (std::size_t h = 0; h < n_hold; ++h)
                train(cells[h].first, cells[h].second) = false;
            const MaskCounts c = count_mask(train);
            ok = !((c.row.array() < 1.0).any() || (c.col.array() < 1.0).any());
        }
        if (!ok) throw DegenerateMask("could not draw a holdout that keeps all rows/cols covered");

        const MaskCounts counts = count_mask(train);
        CoreState state = zero_state(n, t);
        for (std::size_t g = 0; g < grid.size(); ++g) {  // descending: warm start down the path
            MCFit f = alternate(mp.panel.values, train, counts, grid[g], std::move(state),
                                kRelObjTol, kMaxOuterIters, /*record_trace=*/false);
            double sse = 0.0;
            for (std::size_t h = 0; h < n_hold; ++h) {
                const auto [i, k] = cells[h];
                const double e = mp.panel.values(i, k) - f.predict(i, k);
                sse += e * e;
            }
            score[g] += sse / static_cast<double>(n_hold);
            state = state_of(std::move(f));
        }
    }

    std::size_t best = 0;  // grid is descending: first strict minimum prefers larger lambda
    for (std::size_t g = 1; g < grid.size(); ++g)
        if (score[g] < score[best]) best = g;
    return grid[best];
}

ImputationResult impute_mc(const MaskedPanel& mp, const MCOptions& opts) {
    double lambda;
    if (opts.lambda) {
        lambda = *opts.lambda;
    } else {
        const std::vector<double> grid = default_mc_lambda_grid(mp, opts.grid_size);
        lambda = select_lambda_mc(mp, grid, opts.seed);
    }
    const MCFit fit = fit_mc(mp, lambda);
    ImputationResult res;
    res.value = fit.predict(mp.target.unit, mp.target.period);
    res.method = Method::MC;
    res.complexity = static_cast<double>(fit.rank);
    res.diagnostics = fit.singular_values;
    res.penalty = Penalty{lambda, std::nullopt};
    return res;
}

}  // namespace panelcf
