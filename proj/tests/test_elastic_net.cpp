#include <doctest.h>

#include <Eigen/Dense>
#include <cmath>
#include <random>

#include "panelcf/elastic_net.hpp"
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

VectorXd random_vector(std::mt19937_64& rng, Eigen::Index n, double scale = 1.0) {
    std::normal_distribution<double> g(0.0, scale);
    VectorXd v(n);
    for (Eigen::Index i = 0; i < n; ++i) v(i) = g(rng);
    return v;
}

// Objective in the solver's standardized coordinates, recomputed from scratch
// for oracle checks: centered y, centered unit-length columns.
struct StdProblem {
    MatrixXd X;
    VectorXd y;
};

StdProblem standardized(const MatrixXd& X, const VectorXd& y) {
    StdProblem s;
    s.y = y.array() - y.mean();
    s.X.resize(X.rows(), X.cols());
    for (Eigen::Index j = 0; j < X.cols(); ++j) {
        VectorXd c = X.col(j).array() - X.col(j).mean();
        s.X.col(j) = c / c.norm();
    }
    return s;
}

double std_objective(const StdProblem& s, const VectorXd& coef, double lambda, double mixing) {
    const double rss = (s.y - s.X * coef).squaredNorm();
    return 0.5 * rss + lambda * (mixing * coef.lpNorm<1>() +
                                 0.5 * (1.0 - mixing) * coef.squaredNorm());
}

VectorXd standardized_coef(const ElasticNetFit& fit, const MatrixXd& X) {
    VectorXd c(fit.coefficients.size());
    for (Eigen::Index j = 0; j < X.cols(); ++j) {
        VectorXd col = X.col(j).array() - X.col(j).mean();
        c(j) = fit.coefficients(j) * col.norm();
    }
    return c;
}

}  // namespace

TEST_CASE("lambda = 0 with a tall full-rank design reproduces least squares") {
    auto rng = make_rng(11);
    const MatrixXd X = random_matrix(rng, 30, 4);
    const VectorXd beta = random_vector(rng, 4);
    const VectorXd y = X * beta + random_vector(rng, 30, 0.05);

    const ElasticNetFit fit = fit_elastic_net(X, y, 0.0, 1.0);

    MatrixXd D(30, 5);
    D.col(0).setOnes();
    D.rightCols(4) = X;
    const VectorXd ols = (D.transpose() * D).ldlt().solve(D.transpose() * y);
    CHECK(std::abs(fit.intercept - ols(0)) < 1e-7);
    for (int j = 0; j < 4; ++j) CHECK(std::abs(fit.coefficients(j) - ols(j + 1)) < 1e-7);
    CHECK(kkt_residual(fit, X, y) < 1e-8);
}

TEST_CASE("lambda at or above lambda_max shrinks everything to zero") {
    auto rng = make_rng(12);
    const MatrixXd X = random_matrix(rng, 20, 6);
    const VectorXd y = random_vector(rng, 20);
    const double lmax = lambda_max(X, y, 0.75);

    const ElasticNetFit at = fit_elastic_net(X, y, lmax * (1.0 + 1e-9), 0.75);
    CHECK(at.n_nonzero == 0);
    CHECK(at.intercept == doctest::Approx(y.mean()).epsilon(1e-12));
    CHECK(kkt_residual(at, X, y) < 1e-8);

    const ElasticNetFit below = fit_elastic_net(X, y, lmax * 0.99, 0.75);
    CHECK(below.n_nonzero >= 1);
}

TEST_CASE("orthonormal design with mixing 1 soft-thresholds the inner products") {
    // Columns are zero-mean, unit-length, orthogonal, so the solver's
    // standardization leaves them untouched.
    MatrixXd X(4, 2);
    X << 0.5, 0.5, 0.5, -0.5, -0.5, 0.5, -0.5, -0.5;
    auto rng = make_rng(13);
    const VectorXd y = random_vector(rng, 4);

    for (double lambda : {0.0, 0.05, 0.3, 1.0}) {
        const ElasticNetFit fit = fit_elastic_net(X, y, lambda, 1.0);
        for (int j = 0; j < 2; ++j) {
            const double z = X.col(j).dot(y);
            const double expect = std::abs(z) > lambda ? z - std::copysign(lambda, z) : 0.0;
            CHECK(fit.coefficients(j) == doctest::Approx(expect).epsilon(1e-9));
        }
    }
}

TEST_CASE("two-predictor fit beats a dense grid search over coefficient space") {
    auto rng = make_rng(14);
    const MatrixXd X = random_matrix(rng, 12, 2);
    const VectorXd y = random_vector(rng, 12);
    const double lambda = 0.4, mixing = 0.8;

    const ElasticNetFit fit = fit_elastic_net(X, y, lambda, mixing);
    const StdProblem s = standardized(X, y);
    const double fit_obj = std_objective(s, standardized_coef(fit, X), lambda, mixing);

    double best = fit_obj;
    for (double c1 = -3.0; c1 <= 3.0; c1 += 0.01) {
        for (double c2 = -3.0; c2 <= 3.0; c2 += 0.01) {
            const double obj = std_objective(s, Eigen::Vector2d(c1, c2), lambda, mixing);
            best = std::min(best, obj);
        }
    }
    CHECK(fit_obj <= best + 1e-6);
}

TEST_CASE("lambda_max analytic cases") {
    auto rng = make_rng(15);
    const MatrixXd X = random_matrix(rng, 10, 3);

    SUBCASE("constant response gives zero") {
        const VectorXd y = VectorXd::Constant(10, 4.2);
        CHECK(lambda_max(X, y, 1.0) == 0.0);
    }
    SUBCASE("single standardized predictor with inner product 3") {
        VectorXd x(4);
        x << 0.5, 0.5, -0.5, -0.5;  // zero mean, unit norm
        MatrixXd X1(4, 1);
        X1.col(0) = x;
        VectorXd y = 3.0 * x;  // centered; <x, y> = 3
        CHECK(lambda_max(X1, y, 1.0) == doctest::Approx(3.0).epsilon(1e-12));
        CHECK(lambda_max(X1, y, 0.5) == doctest::Approx(6.0).epsilon(1e-12));
    }
    SUBCASE("mixing 0 has no finite zeroing lambda") {
        const VectorXd y = random_vector(rng, 10);
        CHECK_THROWS_AS(lambda_max(X, y, 0.0), MixingError);
    }
}

TEST_CASE("pure ridge matches the closed form in standardized coordinates") {
    auto rng = make_rng(16);
    const MatrixXd X = random_matrix(rng, 15, 3);
    const VectorXd y = random_vector(rng, 15);
    const double lambda = 0.7;

    const ElasticNetFit fit = fit_elastic_net(X, y, lambda, 0.0);
    const StdProblem s = standardized(X, y);
    const MatrixXd A = s.X.transpose() * s.X + lambda * MatrixXd::Identity(3, 3);
    const VectorXd closed = A.ldlt().solve(s.X.transpose() * s.y);
    const VectorXd got = standardized_coef(fit, X);
    CHECK((got - closed).cwiseAbs().maxCoeff() < 1e-7);
}

TEST_CASE("objective is non-increasing across coordinate-descent sweeps") {
    auto rng = make_rng(17);
    const MatrixXd X = random_matrix(rng, 10, 8);
    const VectorXd y = random_vector(rng, 10);
    for (double lambda : {0.01, 0.5}) {
        const ElasticNetFit fit = fit_elastic_net(X, y, lambda, 0.9);
        REQUIRE(fit.objective_trace.size() >= 1);
        for (std::size_t k = 1; k < fit.objective_trace.size(); ++k)
            CHECK(fit.objective_trace[k] <= fit.objective_trace[k - 1] + 1e-12);
    }
}

TEST_CASE("warm-started path never flips a coefficient's sign without a zero between") {
    auto rng = make_rng(18);
    const MatrixXd X = random_matrix(rng, 14, 6);
    const VectorXd y = random_vector(rng, 14);
    const PenaltyGrid grid = default_penalty_grid(X, y);

    Eigen::MatrixXd path(static_cast<Eigen::Index>(grid.lambdas.size()), 6);
    for (std::size_t k = 0; k < grid.lambdas.size(); ++k) {
        const ElasticNetFit fit = fit_elastic_net(X, y, grid.lambdas[k], 1.0);
        path.row(static_cast<Eigen::Index>(k)) = fit.coefficients.transpose();
    }
    for (Eigen::Index j = 0; j < 6; ++j)
        for (Eigen::Index k = 1; k < path.rows(); ++k)
            CHECK(path(k, j) * path(k - 1, j) >= 0.0);
}

TEST_CASE("scaling the response scales the solution") {
    auto rng = make_rng(19);
    const MatrixXd X = random_matrix(rng, 12, 4);
    const VectorXd y = random_vector(rng, 12);
    const double c = 3.5;

    SUBCASE("unpenalized") {
        const ElasticNetFit f1 = fit_elastic_net(X, y, 0.0, 1.0);
        const ElasticNetFit f2 = fit_elastic_net(X, c * y, 0.0, 1.0);
        CHECK((f2.coefficients - c * f1.coefficients).cwiseAbs().maxCoeff() < 1e-8);
        CHECK(std::abs(f2.intercept - c * f1.intercept) < 1e-8);
    }
    SUBCASE("penalized, with lambda scaled too") {
        // Exact for the L1 penalty; the quadratic penalty term is not
        // degree-1 homogeneous, so mixing < 1 only scales approximately.
        const double lambda = 0.3;
        const ElasticNetFit f1 = fit_elastic_net(X, y, lambda, 1.0);
        const ElasticNetFit f2 = fit_elastic_net(X, c * y, c * lambda, 1.0);
        CHECK((f2.coefficients - c * f1.coefficients).cwiseAbs().maxCoeff() < 1e-8);
    }
}

TEST_CASE("penalty grid shape") {
    auto rng = make_rng(20);
    const MatrixXd X = random_matrix(rng, 10, 3);
    const VectorXd y = random_vector(rng, 10);
    const PenaltyGrid grid = default_penalty_grid(X, y);
    REQUIRE(grid.lambdas.size() == 50);
    CHECK(grid.lambdas.front() == lambda_max(X, y, 0.05));
    CHECK(grid.lambdas.back() == doctest::Approx(1e-4 * grid.lambdas.front()).epsilon(1e-12));
    for (std::size_t k = 1; k < grid.lambdas.size(); ++k)
        CHECK(grid.lambdas[k] < grid.lambdas[k - 1]);
}

TEST_CASE("cross-validation finds a noiseless signal") {
    auto rng = make_rng(21);
    MatrixXd X = random_matrix(rng, 16, 4);
    VectorXd y = 2.0 * X.col(1);
    const PenaltyGrid grid = default_penalty_grid(X, y);
    std::vector<int> folds(16);
    for (int i = 0; i < 16; ++i) folds[static_cast<std::size_t>(i)] = i % 4;

    const PenaltyChoice pick = select_penalties_cv(X, y, folds, grid);
    const ElasticNetFit fit = fit_elastic_net(X, y, pick.lambda, pick.mixing);
    CHECK(fit.coefficients(1) != 0.0);

    // The selected pair must beat the all-zero fit out of sample.
    double null_sse = 0.0, fit_sse = 0.0;
    for (int i = 0; i < 16; ++i) {
        const double e0 = y(i) - y.mean();
        null_sse += e0 * e0;
        const double e1 = y(i) - (fit.intercept + X.row(i).dot(fit.coefficients));
        fit_sse += e1 * e1;
    }
    CHECK(fit_sse < null_sse);
}

TEST_CASE("cross-validation on pure noise picks heavy shrinkage") {
    auto rng = make_rng(22);
    const MatrixXd X = random_matrix(rng, 20, 5);
    const VectorXd y = random_vector(rng, 20);
    const PenaltyGrid grid = default_penalty_grid(X, y);
    std::vector<int> folds(20);
    for (int i = 0; i < 20; ++i) folds[static_cast<std::size_t>(i)] = i % 5;

    const PenaltyChoice pick = select_penalties_cv(X, y, folds, grid);
    // Top decile of the descending grid.
    std::size_t index = grid.lambdas.size();
    for (std::size_t k = 0; k < grid.lambdas.size(); ++k)
        if (grid.lambdas[k] == pick.lambda) {
            index = k;
            break;
        }
    REQUIRE(index < grid.lambdas.size());
    CHECK(index < grid.lambdas.size() / 10);
}

TEST_CASE("2-fold selection matches an independent exhaustive evaluation") {
    auto rng = make_rng(23);
    const MatrixXd X = random_matrix(rng, 4, 2);
    VectorXd y = X.col(0) + random_vector(rng, 4, 0.2);
    const PenaltyGrid grid = default_penalty_grid(X, y);
    const std::vector<int> folds = {0, 1, 0, 1};

    const PenaltyChoice pick = select_penalties_cv(X, y, folds, grid);

    // Hand-rolled oracle: refit every (lambda, mixing) on each training half
    // and score the other half, no warm starts, no shared code path beyond
    // fit_elastic_net itself.
    double best = std::numeric_limits<double>::infinity();
    PenaltyChoice expect{};
    std::vector<double> mixings_desc = grid.mixings;
    std::sort(mixings_desc.begin(), mixings_desc.end(), std::greater<>());
    for (double lambda : grid.lambdas) {
        for (double mixing : mixings_desc) {
            double score = 0.0;
            for (int f = 0; f < 2; ++f) {
                MatrixXd Xtr(2, 2), Xte(2, 2);
                VectorXd ytr(2), yte(2);
                Eigen::Index tr = 0, te = 0;
                for (int i = 0; i < 4; ++i) {
                    if (folds[static_cast<std::size_t>(i)] == f) {
                        Xte.row(te) = X.row(i);
                        yte(te++) = y(i);
                    } else {
                        Xtr.row(tr) = X.row(i);
                        ytr(tr++) = y(i);
                    }
                }
                const ElasticNetFit fit = fit_elastic_net(Xtr, ytr, lambda, mixing);
                double sse = 0.0;
                for (Eigen::Index i = 0; i < 2; ++i) {
                    const double e = yte(i) - (fit.intercept + Xte.row(i).dot(fit.coefficients));
                    sse += e * e;
                }
                score += sse / 2.0;
            }
            if (score < best) {
                best = score;
                expect = PenaltyChoice{lambda, mixing};
            }
        }
    }
    CHECK(pick.lambda == expect.lambda);
    CHECK(pick.mixing == expect.mixing);
}

TEST_CASE("cross-validation rejects degenerate folds") {
    auto rng = make_rng(24);
    const MatrixXd X = random_matrix(rng, 4, 2);
    const VectorXd y = random_vector(rng, 4);
    const PenaltyGrid grid = default_penalty_grid(X, y);
    CHECK_THROWS_AS(select_penalties_cv(X, y, {0, 0, 0, 0}, grid), FoldError);
}

TEST_CASE("kkt residual flags perturbed optima") {
    auto rng = make_rng(25);
    const MatrixXd X = random_matrix(rng, 12, 3);
    const VectorXd y = random_vector(rng, 12);
    const double lambda = 0.2, mixing = 0.7;
    const ElasticNetFit fit = fit_elastic_net(X, y, lambda, mixing);
    CHECK(kkt_residual(fit, X, y) < 1e-7);

    const StdProblem s = standardized(X, y);
    const VectorXd at = standardized_coef(fit, X);
    const double base = std_objective(s, at, lambda, mixing);
    for (Eigen::Index j = 0; j < 3; ++j) {
        for (double d : {1e-3, -1e-3}) {
            VectorXd moved = at;
            moved(j) += d;
            CHECK(std_objective(s, moved, lambda, mixing) > base);
        }
    }
}

TEST_CASE("degenerate designs fall back to the intercept") {
    SUBCASE("no predictors") {
        const MatrixXd X(5, 0);
        VectorXd y(5);
        y << 1, 2, 3, 4, 5;
        const ElasticNetFit fit = fit_elastic_net(X, y, 0.1, 0.5);
        CHECK(fit.intercept == doctest::Approx(3.0));
        CHECK(fit.n_nonzero == 0);
    }
    SUBCASE("all-constant predictor") {
        MatrixXd X = MatrixXd::Constant(5, 1, 2.0);
        VectorXd y(5);
        y << 1, 2, 3, 4, 5;
        const ElasticNetFit fit = fit_elastic_net(X, y, 0.1, 0.5);
        CHECK(fit.coefficients(0) == 0.0);
        CHECK(fit.intercept == doctest::Approx(3.0));
    }
}

TEST_CASE("non-finite input raises NumericalError") {
    MatrixXd X = MatrixXd::Ones(3, 2);
    X(1, 1) = std::nan("");
    const VectorXd y = VectorXd::Ones(3);
    CHECK_THROWS_AS(fit_elastic_net(X, y, 0.1, 0.5), NumericalError);
}
