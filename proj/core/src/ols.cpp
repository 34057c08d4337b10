#include "medzisc/ols.hpp"

#include "medzisc/errors.hpp"
#include "medzisc/stats.hpp"

#include <cmath>
#include <limits>
#include <numbers>
#include <string>

namespace medzisc {

RegressionFit fit_ols(const Eigen::VectorXd& y, const DesignMatrix& X) {
    X.validate();
    const Eigen::Index n = X.rows();
    const Eigen::Index p = X.cols();
    if (y.size() != n) {
        throw StructuralError("fit_ols: response has " + std::to_string(y.size()) + " rows, design has " +
                              std::to_string(n));
    }
    if (!y.allFinite()) {
        throw DomainError("fit_ols: response contains non-finite values");
    }
    if (n <= p) {
        throw SingularDesignError({}, "fit_ols: need more observations (" + std::to_string(n) +
                                          ") than columns (" + std::to_string(p) + ")");
    }

    if (auto dependent = dependent_columns(X.values); !dependent.empty()) {
        std::vector<std::string> names;
        std::string list;
        for (auto j : dependent) {
            names.push_back(X.names[static_cast<std::size_t>(j)]);
            list += (list.empty() ? "" : ", ") + names.back();
        }
        throw SingularDesignError(names, "fit_ols: design is rank deficient; dependent columns: " + list);
    }

    Eigen::HouseholderQR<Eigen::MatrixXd> qr(X.values);
    RegressionFit fit;
    fit.names = X.names;
    fit.coefficients = qr.solve(y);

    const Eigen::VectorXd residual = y - X.values * fit.coefficients;
    const double rss = residual.squaredNorm();
    const double sigma2 = rss / static_cast<double>(n - p);

    // (X'X)^{-1} = R^{-1} R^{-T}
    const Eigen::MatrixXd R = qr.matrixQR().topRows(p).triangularView<Eigen::Upper>();
    const Eigen::MatrixXd R_inv =
        R.triangularView<Eigen::Upper>().solve(Eigen::MatrixXd::Identity(p, p));
    const Eigen::VectorXd diag = R_inv.rowwise().squaredNorm();

    fit.standard_errors = (sigma2 * diag.array()).sqrt();
    fit.p_values.resize(p);
    for (Eigen::Index j = 0; j < p; ++j) {
        fit.p_values(j) = wald_pvalue_or_degenerate(fit.coefficients(j), fit.standard_errors(j));
    }

    fit.aux_kind = AuxKind::ResidualVariance;
    fit.aux = sigma2;
    fit.converged = true;
    fit.iterations = 1;
    const double mle_var = rss / static_cast<double>(n);
    fit.log_likelihood = mle_var > 0.0
                             ? -0.5 * static_cast<double>(n) * (std::log(2.0 * std::numbers::pi * mle_var) + 1.0)
                             : std::numeric_limits<double>::infinity();
    fit.log_likelihood_trace = {fit.log_likelihood};
    return fit;
}

}  // namespace medzisc
