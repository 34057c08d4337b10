#include <medzisc/beta_regression.hpp>
#include <medzisc/lasso.hpp>
#include <medzisc/nb_regression.hpp>
#include <medzisc/ols.hpp>
#include <medzisc/rng.hpp>

#include <benchmark/benchmark.h>

#include <boost/random/beta_distribution.hpp>
#include <boost/random/gamma_distribution.hpp>
#include <boost/random/normal_distribution.hpp>
#include <boost/random/poisson_distribution.hpp>

#include <cmath>

namespace {

using namespace medzisc;

// Intercept, a binary exposure and three normal covariates.
DesignMatrix mediator_design(Eigen::Index n, Engine& engine) {
    boost::random::normal_distribution<double> normal;
    DesignMatrix d;
    d.add_column("(Intercept)", Eigen::VectorXd::Ones(n));
    Eigen::VectorXd x(n);
    for (Eigen::Index i = 0; i < n; ++i) x(i) = static_cast<double>(i % 2);
    d.add_column("X", x);
    for (int k = 1; k <= 3; ++k) {
        Eigen::VectorXd z(n);
        for (auto& v : z) v = normal(engine);
        d.add_column("Z" + std::to_string(k), z);
    }
    return d;
}

void BM_Ols(benchmark::State& state) {
    Engine engine(1);
    const auto n = static_cast<Eigen::Index>(state.range(0));
    const DesignMatrix d = mediator_design(n, engine);
    boost::random::normal_distribution<double> normal;
    Eigen::VectorXd y(n);
    for (auto& v : y) v = normal(engine);
    for (auto _ : state) benchmark::DoNotOptimize(fit_ols(y, d));
}
BENCHMARK(BM_Ols)->Arg(100)->Arg(400)->Arg(2000);

void BM_BetaRegression(benchmark::State& state) {
    Engine engine(2);
    const auto n = static_cast<Eigen::Index>(state.range(0));
    const DesignMatrix d = mediator_design(n, engine);
    Eigen::VectorXd y(n);
    for (Eigen::Index i = 0; i < n; ++i) {
        const double mu = 1.0 / (1.0 + std::exp(-(0.3 + d.values(i, 1))));
        boost::random::beta_distribution<double> beta(mu * 20.0, (1.0 - mu) * 20.0);
        y(i) = std::clamp(beta(engine), 0.001, 0.999);
    }
    for (auto _ : state) benchmark::DoNotOptimize(fit_beta_regression(y, d));
}
BENCHMARK(BM_BetaRegression)->Arg(100)->Arg(400)->Arg(2000);

void BM_NbRegression(benchmark::State& state) {
    Engine engine(3);
    const auto n = static_cast<Eigen::Index>(state.range(0));
    const DesignMatrix d = mediator_design(n, engine);
    Eigen::VectorXd y(n);
    for (Eigen::Index i = 0; i < n; ++i) {
        boost::random::gamma_distribution<double> gamma(1.0, std::exp(1.0 + 0.5 * d.values(i, 1)));
        boost::random::poisson_distribution<int, double> pois(std::max(gamma(engine), 1e-12));
        y(i) = pois(engine);
    }
    for (auto _ : state) benchmark::DoNotOptimize(fit_nb_regression(y, d));
}
BENCHMARK(BM_NbRegression)->Arg(100)->Arg(400)->Arg(2000);

// Outcome-model screening shape: n subjects, X plus three covariates unpenalised, 2g penalised columns.
void lasso_problem(Eigen::Index n, Eigen::Index g, Eigen::VectorXd& y, DesignMatrix& d) {
    Engine engine(4);
    boost::random::normal_distribution<double> normal;
    d = mediator_design(n, engine);
    d.names.erase(d.names.begin());
    d.values = d.values.rightCols(d.values.cols() - 1).eval();
    for (Eigen::Index j = 0; j < 2 * g; ++j) {
        Eigen::VectorXd c(n);
        for (auto& v : c) v = normal(engine);
        d.add_column("g" + std::to_string(j), c);
    }
    y = 3.0 * d.values.col(0) + 2.0 * d.values.col(4) - 1.5 * d.values.col(5);
    for (auto& v : y) v += normal(engine);
}

void BM_LassoCrossValidated(benchmark::State& state) {
    Eigen::VectorXd y;
    DesignMatrix d;
    lasso_problem(static_cast<Eigen::Index>(state.range(0)), static_cast<Eigen::Index>(state.range(1)), y, d);
    for (auto _ : state) benchmark::DoNotOptimize(fit_lasso(y, d, {"X", "Z1", "Z2", "Z3"}));
}
BENCHMARK(BM_LassoCrossValidated)->Args({100, 100})->Args({400, 100})->Unit(benchmark::kMillisecond);

void BM_LassoFixedLambda(benchmark::State& state) {
    Eigen::VectorXd y;
    DesignMatrix d;
    lasso_problem(static_cast<Eigen::Index>(state.range(0)), static_cast<Eigen::Index>(state.range(1)), y, d);
    LassoOptions options;
    options.lambda = 0.1;
    for (auto _ : state) benchmark::DoNotOptimize(fit_lasso(y, d, {"X", "Z1", "Z2", "Z3"}, options));
}
BENCHMARK(BM_LassoFixedLambda)->Args({100, 100})->Args({400, 100})->Unit(benchmark::kMillisecond);

}  // namespace
