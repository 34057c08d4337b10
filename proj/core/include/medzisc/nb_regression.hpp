#ifndef MEDZISC_NB_REGRESSION_HPP
#define MEDZISC_NB_REGRESSION_HPP

#include "medzisc/design.hpp"

#include <Eigen/Dense>

namespace medzisc {

struct NbRegressionOptions {
    int max_iterations = 200;
    double tolerance = 1e-8;
    double theta_cap = 1e6;  // theta at the cap means the data look Poisson (or underdispersed)
};

/*
 * Negative binomial regression with log link, var(y) = mu + mu^2 / theta.
 * The log-likelihood goes through log-gamma, so non-integer responses such as
 * pseudobulk means are accepted.
 */

double nb_log_likelihood(const Eigen::VectorXd& y, const Eigen::MatrixXd& X,
                         const Eigen::VectorXd& beta, double theta);

/// Gradient of the log-likelihood; entries 0..p-1 are d/dbeta, entry p is d/dtheta.
Eigen::VectorXd nb_score(const Eigen::VectorXd& y, const Eigen::MatrixXd& X,
                         const Eigen::VectorXd& beta, double theta);

/**
 * Alternating maximum likelihood: Newton/IRLS updates of beta at fixed theta,
 * then a one-dimensional Newton/bisection solve for theta on the profile
 * likelihood. Standard errors come from the observed information of beta at
 * the final theta.
 *
 * Throws DegenerateResponseError when y is identically zero.
 */
RegressionFit fit_nb_regression(const Eigen::VectorXd& y, const DesignMatrix& X,
                                const NbRegressionOptions& options = {});

}  // namespace medzisc

#endif  // MEDZISC_NB_REGRESSION_HPP
