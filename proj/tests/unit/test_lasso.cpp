#include "oracles.hpp"
#include "test_support.hpp"

#include <medzisc/errors.hpp>
#include <medzisc/lasso.hpp>

#include <gtest/gtest.h>

namespace medzisc {
namespace {

struct Problem {
    Eigen::VectorXd y;
    DesignMatrix X;
    std::vector<std::string> unpenalized;
};

// Two unpenalised columns (exposure-like, covariate-like) and p sparse penalised ones.
Problem sparse_problem(std::uint64_t seed, Eigen::Index n = 100, Eigen::Index p = 20) {
    Engine engine(seed);
    Problem pr;
    const Eigen::MatrixXd u = oracle::random_normal(n, 2, engine);
    const Eigen::MatrixXd x = oracle::random_normal(n, p, engine, 2.0);
    pr.X.add_column("X", u.col(0));
    pr.X.add_column("Z1", u.col(1));
    for (Eigen::Index j = 0; j < p; ++j) pr.X.add_column("g" + std::to_string(j + 1), x.col(j));
    pr.unpenalized = {"X", "Z1"};
    pr.y = 1.0 + 2.0 * u.col(0).array() - 0.5 * u.col(1).array() + 1.5 * x.col(0).array() -
           1.0 * x.col(3).array() + oracle::random_normal(n, 1, engine).col(0).array();
    return pr;
}

TEST(Lasso, LambdaZeroMatchesOls) {
    EXPECT_LE(oracle::lasso_ols_gap(31), 1e-6);
    EXPECT_LE(oracle::lasso_ols_gap(32), 1e-6);
}

TEST(Lasso, SoftThresholdOnOrthonormalDesign) {
    EXPECT_LE(oracle::soft_threshold_gap(41), 1e-9);
}

TEST(Lasso, LambdaMaxZeroesEveryPenalisedCoefficient) {
    const Problem pr = sparse_problem(1);
    const double lmax = lasso_lambda_max(pr.y, pr.X, pr.unpenalized);
    ASSERT_GT(lmax, 0.0);
    LassoOptions at_max;
    at_max.lambda = lmax;
    const LassoFit fit = fit_lasso(pr.y, pr.X, pr.unpenalized, at_max);
    EXPECT_TRUE(fit.selected.empty());
    for (Eigen::Index j = 2; j < pr.X.cols(); ++j) EXPECT_EQ(fit.coefficients(j), 0.0);
    EXPECT_NE(fit.coefficient("X"), 0.0);
    EXPECT_DOUBLE_EQ(fit.lambda_max, lmax);

    // Just below lambda_max something enters.
    LassoOptions below;
    below.lambda = 0.98 * lmax;
    EXPECT_FALSE(fit_lasso(pr.y, pr.X, pr.unpenalized, below).selected.empty());
}

TEST(Lasso, LambdaMaxMatchesKktFormula) {
    // No unpenalised columns: lambda_max = max_j |x~_j'(y - ybar)| / n on standardised columns.
    Engine engine(2);
    const Eigen::MatrixXd x = oracle::random_normal(50, 5, engine, 3.0);
    const Eigen::VectorXd y = oracle::random_normal(50, 1, engine).col(0);
    DesignMatrix d;
    for (Eigen::Index j = 0; j < 5; ++j) d.add_column("x" + std::to_string(j), x.col(j));
    double expected = 0.0;
    for (Eigen::Index j = 0; j < 5; ++j) {
        const Eigen::VectorXd c = x.col(j).array() - x.col(j).mean();
        const double sd = std::sqrt(c.squaredNorm() / 50.0);
        expected = std::max(expected, std::abs(c.dot(y) / sd) / 50.0);
    }
    EXPECT_NEAR(lasso_lambda_max(y, d, {}), expected, 1e-12);
}

TEST(Lasso, SatisfiesKktConditions) {
    for (std::uint64_t seed : {3u, 4u, 5u}) {
        const Problem pr = sparse_problem(seed);
        const double lmax = lasso_lambda_max(pr.y, pr.X, pr.unpenalized);
        for (double ratio : {0.5, 0.1, 0.01}) {
            LassoOptions options;
            options.lambda = ratio * lmax;
            options.tolerance = 1e-10;
            const LassoFit fit = fit_lasso(pr.y, pr.X, pr.unpenalized, options);
            ASSERT_TRUE(fit.converged);
            EXPECT_LE(oracle::kkt_violation(pr.y, pr.X, pr.unpenalized, fit), 1e-6)
                << "seed " << seed << " ratio " << ratio;
        }
    }
}

TEST(Lasso, SelectedMatchesNonzeroPenalised) {
    const Problem pr = sparse_problem(6);
    const LassoFit fit = fit_lasso(pr.y, pr.X, pr.unpenalized);
    std::vector<std::string> nonzero;
    for (Eigen::Index j = 0; j < pr.X.cols(); ++j) {
        if (j >= 2 && fit.coefficients(j) != 0.0) nonzero.push_back(pr.X.names[j]);
    }
    EXPECT_EQ(fit.selected, nonzero);
    EXPECT_TRUE(fit.is_selected("g1"));
    EXPECT_TRUE(fit.is_selected("g4"));
    EXPECT_EQ(fit.unpenalized, pr.unpenalized);
}

TEST(Lasso, ObjectiveNonIncreasingAcrossSweeps) {
    const Problem pr = sparse_problem(7);
    LassoOptions options;
    options.lambda = 0.05 * lasso_lambda_max(pr.y, pr.X, pr.unpenalized);
    options.record_objective = true;
    const LassoFit fit = fit_lasso(pr.y, pr.X, pr.unpenalized, options);
    ASSERT_GE(fit.objective_trace.size(), 2u);
    for (std::size_t k = 1; k < fit.objective_trace.size(); ++k) {
        EXPECT_LE(fit.objective_trace[k], fit.objective_trace[k - 1] + 1e-12);
    }
}

TEST(Lasso, CrossValidationIsDeterministicAndSeedDependent) {
    const Problem pr = sparse_problem(8);
    LassoOptions options;
    options.seed = 99;
    const LassoFit a = fit_lasso(pr.y, pr.X, pr.unpenalized, options);
    const LassoFit b = fit_lasso(pr.y, pr.X, pr.unpenalized, options);
    EXPECT_EQ(a.lambda, b.lambda);
    EXPECT_EQ(a.coefficients, b.coefficients);
    EXPECT_EQ(a.cv_errors, b.cv_errors);
    ASSERT_FALSE(a.cv_lambdas.empty());
    EXPECT_EQ(a.cv_lambdas.size(), a.cv_errors.size());
    // Chosen lambda has the smallest CV error on the path.
    const auto best = std::min_element(a.cv_errors.begin(), a.cv_errors.end()) - a.cv_errors.begin();
    EXPECT_DOUBLE_EQ(a.lambda, a.cv_lambdas[static_cast<std::size_t>(best)]);
    // Path is log-spaced downward from lambda_max.
    EXPECT_DOUBLE_EQ(a.cv_lambdas.front(), a.lambda_max);
    for (std::size_t k = 1; k < a.cv_lambdas.size(); ++k) EXPECT_LT(a.cv_lambdas[k], a.cv_lambdas[k - 1]);
}

TEST(Lasso, ReportsCoefficientsOnOriginalScale) {
    Problem pr = sparse_problem(9);
    LassoOptions options;
    options.lambda = 0.1;
    const LassoFit base = fit_lasso(pr.y, pr.X, pr.unpenalized, options);
    const Eigen::Index g1 = pr.X.index_of("g1");
    pr.X.values.col(g1) *= 10.0;
    const LassoFit scaled = fit_lasso(pr.y, pr.X, pr.unpenalized, options);
    EXPECT_NEAR(scaled.coefficient("g1"), base.coefficient("g1") / 10.0, 1e-8);
}

TEST(Lasso, ConstantPenalisedColumnDropped) {
    Problem pr = sparse_problem(10);
    pr.X.add_column("flat", Eigen::VectorXd::Constant(pr.y.size(), 3.0));
    const LassoFit fit = fit_lasso(pr.y, pr.X, pr.unpenalized);
    ASSERT_EQ(fit.dropped.size(), 1u);
    EXPECT_EQ(fit.dropped.front(), "flat");
    EXPECT_EQ(fit.coefficient("flat"), 0.0);
    EXPECT_FALSE(fit.warnings.empty());
}

TEST(Lasso, NegativeLambdaRejected) {
    const Problem pr = sparse_problem(11);
    LassoOptions options;
    options.lambda = -1.0;
    EXPECT_THROW(fit_lasso(pr.y, pr.X, pr.unpenalized, options), DomainError);
}

TEST(Lasso, UnknownUnpenalisedNameRejected) {
    const Problem pr = sparse_problem(12);
    EXPECT_THROW(fit_lasso(pr.y, pr.X, {"nope"}), Error);
}

}  // namespace
}  // namespace medzisc
