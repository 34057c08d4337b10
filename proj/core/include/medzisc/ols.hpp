#ifndef MEDZISC_OLS_HPP
#define MEDZISC_OLS_HPP

#include "medzisc/design.hpp"

#include <Eigen/Dense>

namespace medzisc {

/**
 * Ordinary least squares.
 *
 * Standard errors use the unbiased residual variance RSS / (n - p), which is
 * reported as `aux`. P-values use the standard normal reference (not Student t)
 * so all coefficient tests in the pipeline share one statistic.
 *
 * Throws SingularDesignError listing the dependent columns when X is rank deficient.
 */
RegressionFit fit_ols(const Eigen::VectorXd& y, const DesignMatrix& X);

}  // namespace medzisc

#endif  // MEDZISC_OLS_HPP
