#ifndef MEDZISC_BETA_REGRESSION_HPP
#define MEDZISC_BETA_REGRESSION_HPP

#include "medzisc/design.hpp"

#include <Eigen/Dense>

namespace medzisc {

struct BetaRegressionOptions {
    int max_iterations = 200;
    double tolerance = 1e-8;
};

/*
 * Beta regression with logit mean link and constant precision phi:
 *   y_i ~ Beta(mu_i * phi, (1 - mu_i) * phi),  logit(mu_i) = x_i' beta.
 *
 * The free functions below expose the log-likelihood and its derivatives in
 * (beta, phi) so they can be checked against finite differences.
 */

double beta_log_likelihood(const Eigen::VectorXd& y, const Eigen::MatrixXd& X,
                           const Eigen::VectorXd& beta, double phi);

/// Gradient of the log-likelihood; entries 0..p-1 are d/dbeta, entry p is d/dphi.
Eigen::VectorXd beta_score(const Eigen::VectorXd& y, const Eigen::MatrixXd& X,
                           const Eigen::VectorXd& beta, double phi);

/// Negative Hessian of the log-likelihood in (beta, phi).
Eigen::MatrixXd beta_observed_information(const Eigen::VectorXd& y, const Eigen::MatrixXd& X,
                                          const Eigen::VectorXd& beta, double phi);

/**
 * Maximum-likelihood fit. Requires every y strictly inside (0, 1); clamp first.
 *
 * Starts from OLS on logit(y) with a moment estimate of phi, then takes Newton
 * steps in (beta, log phi) with step halving, falling back to Fisher scoring
 * when the observed information is not positive definite. Standard errors come
 * from the inverse observed information. A fit that runs out of iterations is
 * returned with converged = false.
 */
RegressionFit fit_beta_regression(const Eigen::VectorXd& y, const DesignMatrix& X,
                                  const BetaRegressionOptions& options = {});

}  // namespace medzisc

#endif  // MEDZISC_BETA_REGRESSION_HPP
