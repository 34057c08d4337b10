#include "medzisc/beta_regression.hpp"

#include "medzisc/errors.hpp"
#include "medzisc/stats.hpp"

#include <boost/math/special_functions/digamma.hpp>
#include <boost/math/special_functions/trigamma.hpp>

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

namespace medzisc {

namespace {

enum class Need { Value, Gradient, Hessian };

// Log-likelihood and derivatives in (beta, phi) at one parameter point.
struct BetaTerms {
    double log_likelihood = 0.0;
    Eigen::VectorXd gradient;
    Eigen::MatrixXd observed;  // negative Hessian
    Eigen::MatrixXd expected;  // Fisher information
};

BetaTerms evaluate(const Eigen::VectorXd& y, const Eigen::MatrixXd& X, const Eigen::VectorXd& beta,
                   double phi, Need need) {
    using boost::math::digamma;
    using boost::math::trigamma;

    const Eigen::Index n = X.rows();
    const Eigen::Index p = X.cols();
    const Eigen::VectorXd eta = X * beta;

    BetaTerms out;
    out.gradient = Eigen::VectorXd::Zero(p + 1);
    if (need == Need::Hessian) {
        out.observed = Eigen::MatrixXd::Zero(p + 1, p + 1);
        out.expected = Eigen::MatrixXd::Zero(p + 1, p + 1);
    }

    const double lgamma_phi = std::lgamma(phi);
    const double digamma_phi = need != Need::Value ? digamma(phi) : 0.0;
    const double trigamma_phi = need == Need::Hessian ? trigamma(phi) : 0.0;

    Eigen::VectorXd w_obs(n), w_exp(n), w_cross_obs(n), w_cross_exp(n);
    double h_phiphi = 0.0;

    for (Eigen::Index i = 0; i < n; ++i) {
        const double mu = std::clamp(expit(eta(i)), 1e-15, 1.0 - 1e-15);
        const double a = mu * phi;
        const double b = (1.0 - mu) * phi;
        const double log_y = std::log(y(i));
        const double log_1my = std::log1p(-y(i));

        out.log_likelihood += lgamma_phi - std::lgamma(a) - std::lgamma(b) + (a - 1.0) * log_y +
                              (b - 1.0) * log_1my;
        if (need == Need::Value) {
            continue;
        }

        const double psi_a = digamma(a);
        const double psi_b = digamma(b);
        const double r = (log_y - log_1my) - (psi_a - psi_b);
        const double d = mu * (1.0 - mu);

        out.gradient.head(p) += (phi * r * d) * X.row(i).transpose();
        out.gradient(p) += mu * r + log_1my - psi_b + digamma_phi;

        if (need == Need::Hessian) {
            const double psi1_a = trigamma(a);
            const double psi1_b = trigamma(b);
            const double curvature = phi * phi * (psi1_a + psi1_b) * d * d;
            w_exp(i) = curvature;
            w_obs(i) = curvature - phi * r * d * (1.0 - 2.0 * mu);
            const double cross = phi * (mu * psi1_a - (1.0 - mu) * psi1_b) * d;
            w_cross_exp(i) = cross;
            w_cross_obs(i) = cross - r * d;
            h_phiphi += trigamma_phi - mu * mu * psi1_a - (1.0 - mu) * (1.0 - mu) * psi1_b;
        }
    }

    if (need == Need::Hessian) {
        auto fill = [&](Eigen::MatrixXd& info, const Eigen::VectorXd& w, const Eigen::VectorXd& cross) {
            info.topLeftCorner(p, p) = X.transpose() * w.asDiagonal() * X;
            const Eigen::VectorXd off = X.transpose() * cross;
            info.block(0, p, p, 1) = off;
            info.block(p, 0, 1, p) = off.transpose();
            info(p, p) = -h_phiphi;
        };
        fill(out.observed, w_obs, w_cross_obs);
        fill(out.expected, w_exp, w_cross_exp);
    }
    return out;
}

// Maps (beta, phi) derivatives onto (beta, omega = log phi).
void to_log_phi(BetaTerms& terms, double phi) {
    const Eigen::Index p = terms.gradient.size() - 1;
    const double g_phi = terms.gradient(p);
    terms.gradient(p) = phi * g_phi;
    for (Eigen::MatrixXd* info : {&terms.observed, &terms.expected}) {
        info->block(0, p, p, 1) *= phi;
        info->block(p, 0, 1, p) *= phi;
        (*info)(p, p) *= phi * phi;
    }
    // The score has mean zero, so only the observed information picks up the chain-rule term.
    terms.observed(p, p) -= phi * g_phi;
}

}  // namespace

double beta_log_likelihood(const Eigen::VectorXd& y, const Eigen::MatrixXd& X,
                           const Eigen::VectorXd& beta, double phi) {
    return evaluate(y, X, beta, phi, Need::Value).log_likelihood;
}

Eigen::VectorXd beta_score(const Eigen::VectorXd& y, const Eigen::MatrixXd& X,
                           const Eigen::VectorXd& beta, double phi) {
    return evaluate(y, X, beta, phi, Need::Gradient).gradient;
}

Eigen::MatrixXd beta_observed_information(const Eigen::VectorXd& y, const Eigen::MatrixXd& X,
                                          const Eigen::VectorXd& beta, double phi) {
    return evaluate(y, X, beta, phi, Need::Hessian).observed;
}

RegressionFit fit_beta_regression(const Eigen::VectorXd& y, const DesignMatrix& X,
                                  const BetaRegressionOptions& options) {
    X.validate();
    const Eigen::Index n = X.rows();
    const Eigen::Index p = X.cols();
    if (y.size() != n) {
        throw StructuralError("fit_beta_regression: response length does not match design rows");
    }
    if (!((y.array() > 0.0).all() && (y.array() < 1.0).all())) {
        throw DomainError("fit_beta_regression: response must lie strictly inside (0, 1); clamp it first");
    }
    if (n <= p) {
        throw SingularDesignError({}, "fit_beta_regression: need more observations than columns");
    }
    if (auto dependent = dependent_columns(X.values); !dependent.empty()) {
        std::vector<std::string> names;
        for (auto j : dependent) {
            names.push_back(X.names[static_cast<std::size_t>(j)]);
        }
        throw SingularDesignError(names, "fit_beta_regression: design is rank deficient (" + names.front() + ")");
    }

    // Warm start: OLS on the logit scale, phi by moments.
    const Eigen::VectorXd z = y.unaryExpr([](double v) { return logit(v); });
    Eigen::VectorXd beta = X.values.householderQr().solve(z);
    double omega = 0.0;
    {
        const Eigen::VectorXd eta = X.values * beta;
        const double s2 = (z - eta).squaredNorm() / static_cast<double>(n - p);
        double acc = 0.0;
        for (Eigen::Index i = 0; i < n; ++i) {
            const double mu = expit(eta(i));
            const double d = mu * (1.0 - mu);
            // var(y_i) ~= s2 * d^2 by the delta method
            acc += d / std::max(s2 * d * d, 1e-12);
        }
        double phi0 = acc / static_cast<double>(n) - 1.0;
        if (!std::isfinite(phi0) || phi0 <= 0.0) {
            phi0 = 1.0;
        }
        omega = std::log(std::min(phi0, 1e8));
    }

    RegressionFit fit;
    fit.names = X.names;
    fit.aux_kind = AuxKind::Precision;

    BetaTerms terms = evaluate(y, X.values, beta, std::exp(omega), Need::Hessian);
    to_log_phi(terms, std::exp(omega));
    double ll = terms.log_likelihood;
    fit.log_likelihood_trace.push_back(ll);

    bool converged = false;
    int iteration = 0;
    for (; iteration < options.max_iterations && !converged; ++iteration) {
        Eigen::VectorXd step;
        Eigen::LLT<Eigen::MatrixXd> newton(terms.observed);
        if (newton.info() == Eigen::Success) {
            step = newton.solve(terms.gradient);
        }
        if (step.size() == 0 || !step.allFinite()) {
            Eigen::LLT<Eigen::MatrixXd> fisher(terms.expected);
            if (fisher.info() != Eigen::Success) {
                break;
            }
            step = fisher.solve(terms.gradient);
        }

        double scale = 1.0;
        bool accepted = false;
        Eigen::VectorXd next_beta;
        double next_omega = omega;
        double next_ll = ll;
        for (int halving = 0; halving < 40; ++halving, scale *= 0.5) {
            next_beta = beta + scale * step.head(p);
            next_omega = std::clamp(omega + scale * step(p), -30.0, 30.0);
            next_ll = beta_log_likelihood(y, X.values, next_beta, std::exp(next_omega));
            if (std::isfinite(next_ll) && next_ll >= ll) {
                accepted = true;
                break;
            }
        }
        if (!accepted) {
            // No ascent left along the step; accept as optimal only if the gradient is negligible.
            converged = terms.gradient.lpNorm<Eigen::Infinity>() <
                        std::sqrt(options.tolerance) * (1.0 + std::abs(ll));
            break;
        }

        const double change_beta = ((next_beta - beta).array().abs() / (1.0 + beta.array().abs())).maxCoeff();
        const double change_omega = std::abs(next_omega - omega) / (1.0 + std::abs(omega));
        beta = next_beta;
        omega = next_omega;
        ll = next_ll;
        fit.log_likelihood_trace.push_back(ll);

        terms = evaluate(y, X.values, beta, std::exp(omega), Need::Hessian);
        to_log_phi(terms, std::exp(omega));
        converged = std::max(change_beta, change_omega) < options.tolerance;
    }

    const double phi = std::exp(omega);
    fit.coefficients = beta;
    fit.aux = phi;
    fit.iterations = iteration;
    fit.log_likelihood = ll;

    const Eigen::MatrixXd info = beta_observed_information(y, X.values, beta, phi);
    Eigen::LDLT<Eigen::MatrixXd> ldlt(info);
    Eigen::VectorXd variances = Eigen::VectorXd::Constant(p, std::numeric_limits<double>::quiet_NaN());
    if (ldlt.info() == Eigen::Success && ldlt.isPositive()) {
        const Eigen::MatrixXd cov = ldlt.solve(Eigen::MatrixXd::Identity(p + 1, p + 1));
        variances = cov.diagonal().head(p);
    }
    const bool usable = variances.allFinite() && (variances.array() > 0.0).all();
    fit.converged = converged && usable && phi < 1e12;
    fit.standard_errors = variances.array().max(0.0).sqrt();
    fit.p_values.resize(p);
    for (Eigen::Index j = 0; j < p; ++j) {
        fit.p_values(j) = usable ? wald_pvalue_or_degenerate(beta(j), fit.standard_errors(j))
                                 : std::numeric_limits<double>::quiet_NaN();
    }
    return fit;
}

}  // namespace medzisc
