#ifndef MEDZISC_LASSO_HPP
#define MEDZISC_LASSO_HPP

#include "medzisc/design.hpp"

#include <Eigen/Dense>

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace medzisc {

struct LassoOptions {
    std::optional<double> lambda;  // nullopt: choose by K-fold cross-validation
    int folds = 10;
    int path_length = 100;
    double lambda_min_ratio = 1e-3;
    double tolerance = 1e-7;
    int max_sweeps = 10000;
    std::uint64_t seed = 1;        // fold assignment
    bool record_objective = false;
};

/**
 * Penalised least squares
 *
 *   (1 / 2n) ||y - b0 - X b||^2 + lambda * sum_{j penalised} |b_j|
 *
 * on internally standardised columns (population variance). The intercept is
 * always fit and never penalised. Coefficients are reported on the original
 * column scale.
 */
struct LassoFit {
    std::vector<std::string> names;
    Eigen::VectorXd coefficients;
    double intercept = 0.0;
    double lambda = 0.0;
    double lambda_max = 0.0;

    std::vector<std::string> selected;     // penalised columns with nonzero coefficient
    std::vector<std::string> unpenalized;
    std::vector<std::string> dropped;      // constant penalised columns

    bool converged = false;
    int sweeps = 0;
    std::vector<double> objective_trace;   // one value per sweep at the final lambda
    std::vector<double> cv_lambdas;
    std::vector<double> cv_errors;
    std::vector<std::string> warnings;

    bool is_selected(std::string_view name) const;
    double coefficient(std::string_view name) const;
};

/// Smallest lambda at which every penalised coefficient is zero.
double lasso_lambda_max(const Eigen::VectorXd& y, const DesignMatrix& X,
                        const std::vector<std::string>& unpenalized);

LassoFit fit_lasso(const Eigen::VectorXd& y, const DesignMatrix& X,
                   const std::vector<std::string>& unpenalized, const LassoOptions& options = {});

}  // namespace medzisc

#endif  // MEDZISC_LASSO_HPP
