#include "panelcf/ensemble.hpp"

#include <Eigen/Dense>
#include <cmath>
#include <limits>
#include <vector>

#include "panelcf/imputers.hpp"
#include "panelcf/matrix_completion.hpp"

namespace panelcf {

double stacking_loss(const StackingProblem& sp, const EnsembleWeights& w) {
    double loss = 0.0;
    for (Eigen::Index r = 0; r < sp.targets.size(); ++r) {
        const double pred = w.vr * sp.predictions(r, 0) + w.hz * sp.predictions(r, 1) +
                            w.mc * sp.predictions(r, 2);
        const double e = sp.targets(r) - pred;
        loss += e * e;
    }
    return loss;
}

namespace {

EnsembleWeights from_vector(const Eigen::Vector3d& v) { return EnsembleWeights{v(0), v(1), v(2)}; }

EnsembleWeights clamp_to_simplex(EnsembleWeights w) {
    double parts[3] = {w.vr, w.hz, w.mc};
    double sum = 0.0;
    for (double& x : parts) {
        if (x < 0.0) x = 0.0;  // candidates are feasible up to ~1e-12 noise
        sum += x;
    }
    if (sum <= 0.0) return EnsembleWeights{1.0, 0.0, 0.0};
    return EnsembleWeights{parts[0] / sum, parts[1] / sum, parts[2] / sum};
}

}  // namespace

EnsembleWeights solve_simplex_ls(const StackingProblem& sp) {
    if (sp.targets.size() < 1) throw ConfigError("stacking problem needs at least one row");
    if (sp.predictions.rows() != sp.targets.size() || sp.predictions.cols() != 3)
        throw ConfigError("predictions must be m x 3 with m matching targets");
    if (!sp.predictions.allFinite() || !sp.targets.allFinite())
        throw NumericalError("non-finite entries in stacking problem");

    const Eigen::Matrix3d G = sp.predictions.transpose() * sp.predictions;
    const Eigen::Vector3d h = sp.predictions.transpose() * sp.targets;

    std::vector<EnsembleWeights> candidates;
    candidates.reserve(7);
    candidates.push_back({1.0, 0.0, 0.0});
    candidates.push_back({0.0, 1.0, 0.0});
    candidates.push_back({0.0, 0.0, 1.0});

    // Edges: minimize over theta_k = s, theta_l = 1-s, feasible s in [0, 1].
    constexpr int edges[3][2] = {{0, 1}, {0, 2}, {1, 2}};
    for (const auto& e : edges) {
        const Eigen::VectorXd d = sp.predictions.col(e[0]) - sp.predictions.col(e[1]);
        const double denom = d.squaredNorm();
        if (denom <= 0.0) continue;  // identical columns: covered by the vertices
        const double s = (sp.targets - sp.predictions.col(e[1])).dot(d) / denom;
        if (s < 0.0 || s > 1.0) continue;
        Eigen::Vector3d v = Eigen::Vector3d::Zero();
        v(e[0]) = s;
        v(e[1]) = 1.0 - s;
        candidates.push_back(from_vector(v));
    }

    // Interior: equality-constrained least squares via the KKT system.
    {
        Eigen::Matrix4d kkt = Eigen::Matrix4d::Zero();
        kkt.topLeftCorner<3, 3>() = 2.0 * G;
        kkt.topRightCorner<3, 1>().setOnes();
        kkt.bottomLeftCorner<1, 3>().setOnes();
        Eigen::Vector4d rhs;
        rhs << 2.0 * h, 1.0;
        Eigen::FullPivLU<Eigen::Matrix4d> lu(kkt);
        if (lu.isInvertible()) {
            const Eigen::Vector4d sol = lu.solve(rhs);
            const Eigen::Vector3d v = sol.head<3>();
            if ((v.array() >= -1e-12).all()) candidates.push_back(from_vector(v));
        }
    }

    // Keep the first candidate attaining the minimum: enumeration order is
    // the tie-break (VR vertex, HZ vertex, MC vertex, edges, interior).
    double best = std::numeric_limits<double>::infinity();
    EnsembleWeights pick{1.0, 0.0, 0.0};
    for (const auto& c : candidates) {
        const double loss = stacking_loss(sp, c);
        if (loss < best) {
            best = loss;
            pick = c;
        }
    }

    EnsembleWeights final = clamp_to_simplex(pick);
    // Clamping can only move the loss by rounding noise, but never let the
    // returned point lose to a pure vertex.
    if (stacking_loss(sp, final) > best) final = pick;
    return final;
}

namespace {

struct Mains {
    ImputationResult vr, hz, mc;
};

Mains main_imputations(const MaskedPanel& mp, const EnsembleOptions& opts) {
    if (opts.mains) {
        return Mains{(*opts.mains)[0], (*opts.mains)[1], (*opts.mains)[2]};
    }
    ImputeOptions io;
    io.seed = opts.seed;
    MCOptions mo;
    mo.seed = opts.seed;
    return Mains{impute_vertical(mp, io), impute_horizontal(mp, io), impute_mc(mp, mo)};
}

ImputeOptions inner_regression_options(std::uint64_t seed, bool fast,
                                       const ImputationResult& main) {
    ImputeOptions io;
    io.seed = seed;
    if (fast && main.penalty)
        io.penalties = PenaltyChoice{main.penalty->lambda, main.penalty->mixing.value_or(1.0)};
    return io;
}

MCOptions inner_mc_options(std::uint64_t seed, bool fast, const ImputationResult& main) {
    MCOptions mo;
    mo.seed = seed;
    if (fast && main.penalty) mo.lambda = main.penalty->lambda;
    return mo;
}

ImputationResult combine(const Mains& mains, const StackingProblem& sp, Method tag) {
    const EnsembleWeights w = solve_simplex_ls(sp);
    ImputationResult res;
    res.value = w.vr * mains.vr.value + w.hz * mains.hz.value + w.mc * mains.mc.value;
    res.method = tag;
    res.diagnostics = Eigen::Vector3d(w.vr, w.hz, w.mc);
    return res;
}

MaskedPanel drop_unit(const MaskedPanel& mp, Eigen::Index drop, Eigen::Index hidden_unit,
                      Eigen::Index hidden_period) {
    const Eigen::Index n = mp.n_units(), t = mp.n_periods();
    MaskedPanel inner;
    inner.panel.values.resize(n - 1, t);
    inner.panel.unit_labels.reserve(static_cast<std::size_t>(n - 1));
    Eigen::Index r = 0;
    for (Eigen::Index i = 0; i < n; ++i) {
        if (i == drop) continue;
        inner.panel.values.row(r) = mp.panel.values.row(i);
        inner.panel.unit_labels.push_back(mp.panel.unit_labels[static_cast<std::size_t>(i)]);
        ++r;
    }
    inner.panel.period_labels = mp.panel.period_labels;
    inner.panel.transform = mp.panel.transform;
    const Eigen::Index hidden_row = hidden_unit < drop ? hidden_unit : hidden_unit - 1;
    inner.visible = VisibleMask::Constant(n - 1, t, true);
    inner.visible(hidden_row, hidden_period) = false;
    inner.target = CellRef{hidden_row, hidden_period};
    return inner;
}

MaskedPanel truncate_periods(const MaskedPanel& mp, Eigen::Index last_period,
                             Eigen::Index hidden_unit) {
    MaskedPanel inner;
    inner.panel.values = mp.panel.values.leftCols(last_period + 1);
    inner.panel.unit_labels = mp.panel.unit_labels;
    inner.panel.period_labels.assign(mp.panel.period_labels.begin(),
                                     mp.panel.period_labels.begin() + last_period + 1);
    inner.panel.transform = mp.panel.transform;
    inner.visible = VisibleMask::Constant(mp.n_units(), last_period + 1, true);
    inner.visible(hidden_unit, last_period) = false;
    inner.target = CellRef{hidden_unit, last_period};
    return inner;
}

}  // namespace

ImputationResult ensemble_vc(const MaskedPanel& mp, const EnsembleOptions& opts) {
    if (mp.n_units() < 4)
        throw ConfigError("vertical cross-validation needs at least 4 units");
    const Eigen::Index i_star = mp.target.unit;
    const Eigen::Index t_star = mp.target.period;

    const Mains mains = main_imputations(mp, opts);

    std::vector<Eigen::Vector3d> preds;
    std::vector<double> truths;
    for (Eigen::Index j = 0; j < mp.n_units(); ++j) {
        if (j == i_star) continue;
        const MaskedPanel inner = drop_unit(mp, i_star, j, t_star);
        const std::uint64_t s = mix_seed(opts.seed, seed_tag::vc_inner,
                                         static_cast<std::uint64_t>(j));
        try {
            const ImputationResult pv =
                impute_vertical(inner, inner_regression_options(s, opts.fast_mode, mains.vr));
            const ImputationResult ph =
                impute_horizontal(inner, inner_regression_options(s, opts.fast_mode, mains.hz));
            const ImputationResult pm =
                impute_mc(inner, inner_mc_options(s, opts.fast_mode, mains.mc));
            preds.emplace_back(pv.value, ph.value, pm.value);
            truths.push_back(mp.panel.values(j, t_star));
        } catch (const Error&) {
            // fold dropped
        }
    }
    if (preds.size() < 2)
        throw EnsembleError("fewer than 2 stacking folds survived");

    StackingProblem sp;
    sp.predictions.resize(static_cast<Eigen::Index>(preds.size()), 3);
    sp.targets.resize(static_cast<Eigen::Index>(truths.size()));
    for (std::size_t r = 0; r < preds.size(); ++r) {
        sp.predictions.row(static_cast<Eigen::Index>(r)) = preds[r].transpose();
        sp.targets(static_cast<Eigen::Index>(r)) = truths[r];
    }
    return combine(mains, sp, Method::EnsVC);
}

ImputationResult ensemble_hc(const MaskedPanel& mp, int s_periods, const EnsembleOptions& opts) {
    const Eigen::Index t_star = mp.target.period;
    const int s_max = static_cast<int>(t_star) - 2;  // keeps >= 2 pre-periods in every inner fit
    const int S = s_periods < 0 ? std::min(10, s_max) : s_periods;
    if (S < 2) throw ConfigError("horizontal cross-validation needs at least 2 stacking periods");
    if (S > s_max)
        throw ConfigError("horizontal cross-validation with " + std::to_string(S) +
                          " periods needs a target period of at least " + std::to_string(S + 2));
    const Eigen::Index i_star = mp.target.unit;

    const Mains mains = main_imputations(mp, opts);

    std::vector<Eigen::Vector3d> preds;
    std::vector<double> truths;
    for (int s = 1; s <= S; ++s) {
        const Eigen::Index hidden = t_star - s;
        const MaskedPanel inner = truncate_periods(mp, hidden, i_star);
        const std::uint64_t sd = mix_seed(opts.seed, seed_tag::hc_inner,
                                          static_cast<std::uint64_t>(s));
        try {
            const ImputationResult pv =
                impute_vertical(inner, inner_regression_options(sd, opts.fast_mode, mains.vr));
            const ImputationResult ph =
                impute_horizontal(inner, inner_regression_options(sd, opts.fast_mode, mains.hz));
            const ImputationResult pm =
                impute_mc(inner, inner_mc_options(sd, opts.fast_mode, mains.mc));
            preds.emplace_back(pv.value, ph.value, pm.value);
            truths.push_back(mp.panel.values(i_star, hidden));
        } catch (const Error&) {
            // fold dropped
        }
    }
    if (preds.size() < 2)
        throw EnsembleError("fewer than 2 stacking folds survived");

    StackingProblem sp;
    sp.predictions.resize(static_cast<Eigen::Index>(preds.size()), 3);
    sp.targets.resize(static_cast<Eigen::Index>(truths.size()));
    for (std::size_t r = 0; r < preds.size(); ++r) {
        sp.predictions.row(static_cast<Eigen::Index>(r)) = preds[r].transpose();
        sp.targets(static_cast<Eigen::Index>(r)) = truths[r];
    }
    return combine(mains, sp, Method::EnsHC);
}

}  // namespace panelcf
