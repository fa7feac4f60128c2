#include <doctest.h>

#include <Eigen/Dense>
#include <Eigen/SVD>
#include <cmath>
#include <random>

#include "panelcf/matrix_completion.hpp"
#include "panelcf/rng.hpp"

using namespace panelcf;
using Eigen::MatrixXd;
using Eigen::VectorXd;

namespace {

MatrixXd random_matrix(std::mt19937_64& rng, Eigen::Index n, Eigen::Index p, double scale = 1.0) {
    std::normal_distribution<double> g(0.0, scale);
    MatrixXd m(n, p);
    for (Eigen::Index j = 0; j < p; ++j)
        for (Eigen::Index i = 0; i < n; ++i) m(i, j) = g(rng);
    return m;
}

MaskedPanel single_hidden(const MatrixXd& values, Eigen::Index unit, Eigen::Index period) {
    MaskedPanel mp;
    mp.panel.values = values;
    for (Eigen::Index i = 0; i < values.rows(); ++i)
        mp.panel.unit_labels.push_back("U" + std::to_string(i + 1));
    for (Eigen::Index t = 0; t < values.cols(); ++t)
        mp.panel.period_labels.push_back(std::to_string(t + 1));
    mp.visible = VisibleMask::Constant(values.rows(), values.cols(), true);
    mp.visible(unit, period) = false;
    mp.target = CellRef{unit, period};
    return mp;
}

// Independent reconstruction for the oracle: Jacobi SVD plus a scalar loop,
// sharing no code with the library's svt.
MatrixXd svt_oracle(const MatrixXd& M, double tau) {
    Eigen::JacobiSVD<MatrixXd> svd(M, Eigen::ComputeThinU | Eigen::ComputeThinV);
    VectorXd s = svd.singularValues();
    for (Eigen::Index i = 0; i < s.size(); ++i) s(i) = std::max(s(i) - tau, 0.0);
    return svd.matrixU() * s.asDiagonal() * svd.matrixV().transpose();
}

double nuclear(const MatrixXd& M) {
    return Eigen::JacobiSVD<MatrixXd>(M).singularValues().sum();
}

}  // namespace

TEST_CASE("svt on a diagonal matrix is analytic") {
    MatrixXd M = MatrixXd::Zero(2, 2);
    M(0, 0) = 3.0;
    M(1, 1) = 1.0;
    const MatrixXd S = svt(M, 2.0);
    CHECK(S(0, 0) == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(std::abs(S(1, 1)) < 1e-12);
    CHECK(std::abs(S(0, 1)) < 1e-12);
}

TEST_CASE("svt with zero threshold is the identity") {
    auto rng = make_rng(31);
    const MatrixXd M = random_matrix(rng, 5, 7);
    CHECK((svt(M, 0.0) - M).cwiseAbs().maxCoeff() < 1e-10);
}

TEST_CASE("svt matches the independent oracle and is a prox point") {
    auto rng = make_rng(32);
    const MatrixXd M = random_matrix(rng, 4, 5);
    const double tau = 0.8;
    const MatrixXd Z = svt(M, tau);
    CHECK((Z - svt_oracle(M, tau)).cwiseAbs().maxCoeff() < 1e-9);

    // prox objective: 0.5*||M - Z||_F^2 + tau*||Z||_*; random perturbations
    // must not do better.
    auto prox_obj = [&](const MatrixXd& W) {
        return 0.5 * (M - W).squaredNorm() + tau * nuclear(W);
    };
    const double base = prox_obj(Z);
    for (int k = 0; k < 20; ++k) {
        const MatrixXd W = Z + random_matrix(rng, 4, 5, 1e-3);
        CHECK(prox_obj(W) >= base - 1e-12);
    }
}

TEST_CASE("svt is non-expansive") {
    auto rng = make_rng(33);
    for (int k = 0; k < 10; ++k) {
        const MatrixXd A = random_matrix(rng, 6, 4);
        const MatrixXd B = random_matrix(rng, 6, 4);
        const double tau = 0.5 + 0.1 * k;
        CHECK((svt(A, tau) - svt(B, tau)).norm() <= (A - B).norm() + 1e-12);
    }
}

TEST_CASE("svt nuclear norm equals the soft-thresholded singular values") {
    auto rng = make_rng(34);
    const MatrixXd M = random_matrix(rng, 6, 5);
    const double tau = 1.1;
    const VectorXd s = Eigen::JacobiSVD<MatrixXd>(M).singularValues();
    double expect = 0.0;
    for (Eigen::Index i = 0; i < s.size(); ++i) expect += std::max(s(i) - tau, 0.0);
    CHECK(nuclear(svt(M, tau)) == doctest::Approx(expect).epsilon(1e-9));
}

TEST_CASE("a very large lambda leaves only the fixed effects") {
    auto rng = make_rng(35);
    MatrixXd Y = random_matrix(rng, 6, 7);
    const MaskedPanel mp = single_hidden(Y, 5, 6);
    const MCFit fit = fit_mc(mp, 1e6);
    CHECK(fit.rank == 0);
    CHECK(fit.low_rank.cwiseAbs().maxCoeff() == 0.0);
    CHECK(fit.predict(5, 6) ==
          doctest::Approx(fit.unit_effects(5) + fit.time_effects(6)).epsilon(1e-12));

    // Fixed-effect stationarity on the visible cells.
    for (Eigen::Index i = 0; i < 6; ++i) {
        double g = 0.0;
        for (Eigen::Index t = 0; t < 7; ++t)
            if (mp.visible(i, t)) g += Y(i, t) - fit.unit_effects(i) - fit.time_effects(t);
        CHECK(std::abs(2.0 * g) < 1e-8);
    }
    for (Eigen::Index t = 0; t < 7; ++t) {
        double g = 0.0;
        for (Eigen::Index i = 0; i < 6; ++i)
            if (mp.visible(i, t)) g += Y(i, t) - fit.unit_effects(i) - fit.time_effects(t);
        CHECK(std::abs(2.0 * g) < 1e-8);
    }
    CHECK(std::abs(fit.unit_effects.mean()) < 1e-12);
}

TEST_CASE("noiseless rank-1 panel: the hidden cell is recovered") {
    auto rng = make_rng(36);
    VectorXd u = VectorXd::Zero(8), v = VectorXd::Zero(8);
    std::normal_distribution<double> g(0.0, 1.0);
    for (int i = 0; i < 8; ++i) u(i) = 1.0 + std::abs(g(rng));
    for (int i = 0; i < 8; ++i) v(i) = 1.0 + std::abs(g(rng));
    const MatrixXd Y = u * v.transpose();
    const MaskedPanel mp = single_hidden(Y, 7, 7);

    const double sigma1 = Eigen::JacobiSVD<MatrixXd>(Y).singularValues()(0);
    const MCFit fit = fit_mc(mp, 1e-6 * sigma1);
    const double truth = Y(7, 7);
    CHECK(std::abs(fit.predict(7, 7) - truth) / std::abs(truth) < 1e-4);
}

TEST_CASE("objective trace is non-increasing and beats the FE-only start") {
    auto rng = make_rng(37);
    const MatrixXd Y = random_matrix(rng, 7, 9) + 2.0 * random_matrix(rng, 7, 1) *
                                                       random_matrix(rng, 1, 9);
    const MaskedPanel mp = single_hidden(Y, 3, 8);
    for (double lambda : {0.05, 0.5, 5.0}) {
        const MCFit fit = fit_mc(mp, lambda);
        REQUIRE(fit.objective_trace.size() >= 2);
        for (std::size_t k = 1; k < fit.objective_trace.size(); ++k)
            CHECK(fit.objective_trace[k] <= fit.objective_trace[k - 1] + 1e-12);
        // trace[0] is the fixed-effects-only objective
        CHECK(fit.objective_trace.back() <= fit.objective_trace.front() + 1e-12);
    }
}

TEST_CASE("rank is monotone non-increasing in lambda") {
    auto rng = make_rng(38);
    const MatrixXd Y = random_matrix(rng, 8, 8, 0.3) +
                       random_matrix(rng, 8, 2) * random_matrix(rng, 2, 8);
    const MaskedPanel mp = single_hidden(Y, 0, 7);
    const std::vector<double> grid = default_mc_lambda_grid(mp, 12);
    int prev_rank = -1;
    for (double lambda : grid) {  // descending, so rank may only grow
        const MCFit fit = fit_mc(mp, lambda);
        if (prev_rank >= 0) CHECK(fit.rank >= prev_rank);
        prev_rank = fit.rank;
    }
}

TEST_CASE("empty rows or columns are rejected") {
    auto rng = make_rng(39);
    MaskedPanel mp = single_hidden(random_matrix(rng, 4, 5), 0, 4);
    mp.visible.row(2).setConstant(false);
    CHECK_THROWS_AS(fit_mc(mp, 0.1), DegenerateMask);
}

TEST_CASE("lambda selection: rank-1 signal lands low, pure noise lands high") {
    auto rng = make_rng(40);
    SUBCASE("rank-1 noiseless") {
        VectorXd u = VectorXd::Zero(7), v = VectorXd::Zero(7);
        std::normal_distribution<double> g(0.0, 1.0);
        for (int i = 0; i < 7; ++i) u(i) = 1.0 + std::abs(g(rng));
        for (int i = 0; i < 7; ++i) v(i) = 1.0 + std::abs(g(rng));
        const MaskedPanel mp = single_hidden(u * v.transpose(), 6, 6);
        const std::vector<double> grid = default_mc_lambda_grid(mp);
        const double lambda = select_lambda_mc(mp, grid, 7);
        std::size_t index = 0;
        while (grid[index] != lambda) ++index;
        CHECK(index >= grid.size() / 2);  // bottom half of the descending grid

        // Held-out error at the pick beats the FE-only (largest-lambda) fit.
        const MCFit best = fit_mc(mp, lambda);
        const MCFit fe_only = fit_mc(mp, 1e9);
        const double truth = mp.panel.values(6, 6);
        CHECK(std::abs(best.predict(6, 6) - truth) < std::abs(fe_only.predict(6, 6) - truth));
    }
    SUBCASE("pure noise") {
        const MaskedPanel mp = single_hidden(random_matrix(rng, 7, 7), 6, 6);
        const std::vector<double> grid = default_mc_lambda_grid(mp);
        const double lambda = select_lambda_mc(mp, grid, 7);
        std::size_t index = 0;
        while (grid[index] != lambda) ++index;
        CHECK(index < (grid.size() + 9) / 10);  // top decile
    }
    SUBCASE("grid of length 1") {
        const MaskedPanel mp = single_hidden(random_matrix(rng, 7, 7), 6, 6);
        CHECK(select_lambda_mc(mp, {0.25}, 7) == 0.25);
    }
    SUBCASE("empty grid") {
        const MaskedPanel mp = single_hidden(random_matrix(rng, 7, 7), 6, 6);
        CHECK_THROWS_AS(select_lambda_mc(mp, {}, 7), ConfigError);
    }
}

TEST_CASE("constant panel imputes the constant with rank zero") {
    const MatrixXd Y = MatrixXd::Constant(5, 5, 3.25);
    const MaskedPanel mp = single_hidden(Y, 4, 4);
    const ImputationResult res = impute_mc(mp);
    CHECK(res.value == doctest::Approx(3.25).epsilon(1e-12));
    REQUIRE(res.complexity.has_value());
    CHECK(*res.complexity == 0.0);
    CHECK(res.method == Method::MC);
}

TEST_CASE("two-factor synthetic data recovers rank 2-3 in most replications") {
    int hits = 0;
    const int reps = 25;
    for (int rep = 0; rep < reps; ++rep) {
        auto rng = make_rng(100 + static_cast<std::uint64_t>(rep));
        const MatrixXd F = random_matrix(rng, 14, 2) * random_matrix(rng, 2, 14);
        const MatrixXd Y = F + random_matrix(rng, 14, 14, 0.05);
        const MaskedPanel mp = single_hidden(Y, 13, 13);
        const ImputationResult res = impute_mc(mp, MCOptions{static_cast<std::uint64_t>(rep), {}, 30});
        const int rank = static_cast<int>(*res.complexity);
        if (rank == 2 || rank == 3) ++hits;
    }
    CHECK(hits >= reps * 8 / 10);
}
