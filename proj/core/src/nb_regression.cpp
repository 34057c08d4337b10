#include "medzisc/nb_regression.hpp"

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

constexpr double kThetaFloor = 1e-8;
constexpr int kInnerNewtonSteps = 50;

double log_likelihood_at(const Eigen::VectorXd& y, const Eigen::VectorXd& mu, double theta) {
    double ll = 0.0;
    const double lgamma_theta = std::lgamma(theta);
    for (Eigen::Index i = 0; i < y.size(); ++i) {
        const double denom = theta + mu(i);
        ll += std::lgamma(y(i) + theta) - lgamma_theta - std::lgamma(y(i) + 1.0) +
              theta * std::log(theta / denom);
        if (y(i) > 0.0) {
            ll += y(i) * std::log(mu(i) / denom);
        }
    }
    return ll;
}

// d ell / d theta and d^2 ell / d theta^2 at fixed mu.
std::pair<double, double> theta_derivatives(const Eigen::VectorXd& y, const Eigen::VectorXd& mu, double theta) {
    using boost::math::digamma;
    using boost::math::trigamma;
    const double psi = digamma(theta);
    const double psi1 = trigamma(theta);
    double first = 0.0;
    double second = 0.0;
    for (Eigen::Index i = 0; i < y.size(); ++i) {
        const double denom = theta + mu(i);
        const double yt = y(i) + theta;
        first += digamma(yt) - psi + std::log(theta / denom) + 1.0 - yt / denom;
        second += trigamma(yt) - psi1 + 1.0 / theta - 2.0 / denom + yt / (denom * denom);
    }
    return {first, second};
}

Eigen::VectorXd mean_of(const Eigen::MatrixXd& X, const Eigen::VectorXd& beta) {
    return (X * beta).array().min(700.0).exp();
}

// Maximise the profile likelihood over t = log(theta) on [log floor, log cap].
double solve_theta(const Eigen::VectorXd& y, const Eigen::VectorXd& mu, double theta, double cap) {
    auto score_t = [&](double t) {
        const double th = std::exp(t);
        return th * theta_derivatives(y, mu, th).first;
    };
    double lo = std::log(kThetaFloor);
    double hi = std::log(cap);
    if (score_t(hi) >= 0.0) {
        return cap;
    }
    if (score_t(lo) <= 0.0) {
        return kThetaFloor;
    }

    double t = std::clamp(std::log(theta), lo, hi);
    for (int iteration = 0; iteration < 200; ++iteration) {
        const double th = std::exp(t);
        const auto [d1, d2] = theta_derivatives(y, mu, th);
        const double s = th * d1;
        if (s > 0.0) {
            lo = t;
        } else {
            hi = t;
        }
        const double slope = th * d1 + th * th * d2;
        double next = (slope < 0.0) ? t - s / slope : 0.5 * (lo + hi);
        if (!(next > lo && next < hi)) {
            next = 0.5 * (lo + hi);
        }
        if (std::abs(next - t) < 1e-12 * (1.0 + std::abs(t)) || hi - lo < 1e-12) {
            t = next;
            break;
        }
        t = next;
    }
    return std::exp(t);
}

}  // namespace

double nb_log_likelihood(const Eigen::VectorXd& y, const Eigen::MatrixXd& X,
                         const Eigen::VectorXd& beta, double theta) {
    return log_likelihood_at(y, mean_of(X, beta), theta);
}

Eigen::VectorXd nb_score(const Eigen::VectorXd& y, const Eigen::MatrixXd& X,
                         const Eigen::VectorXd& beta, double theta) {
    const Eigen::Index p = X.cols();
    const Eigen::VectorXd mu = mean_of(X, beta);
    Eigen::VectorXd score(p + 1);
    const Eigen::VectorXd working = theta * (y - mu).array() / (theta + mu.array());
    score.head(p) = X.transpose() * working;
    score(p) = theta_derivatives(y, mu, theta).first;
    return score;
}

RegressionFit fit_nb_regression(const Eigen::VectorXd& y, const DesignMatrix& X,
                                const NbRegressionOptions& options) {
    X.validate();
    const Eigen::Index n = X.rows();
    const Eigen::Index p = X.cols();
    if (y.size() != n) {
        throw StructuralError("fit_nb_regression: response length does not match design rows");
    }
    if (!y.allFinite() || (y.array() < 0.0).any()) {
        throw DomainError("fit_nb_regression: response must be finite and nonnegative");
    }
    if ((y.array() == 0.0).all()) {
        throw DegenerateResponseError("fit_nb_regression: response is zero for every observation");
    }
    if (n <= p) {
        throw SingularDesignError({}, "fit_nb_regression: need more observations than columns");
    }
    if (auto dependent = dependent_columns(X.values); !dependent.empty()) {
        std::vector<std::string> names;
        for (auto j : dependent) {
            names.push_back(X.names[static_cast<std::size_t>(j)]);
        }
        throw SingularDesignError(names, "fit_nb_regression: design is rank deficient (" + names.front() + ")");
    }

    const double cap = options.theta_cap;
    const double y_mean = y.mean();

    // Start from least squares on log(y + small offset) and a moment estimate of theta.
    const Eigen::VectorXd z = (y.array() + 0.1 * y_mean).log();
    Eigen::VectorXd beta = X.values.householderQr().solve(z);
    Eigen::VectorXd mu = mean_of(X.values, beta);
    double theta = cap;
    {
        const double excess = ((y - mu).array().square() - mu.array()).sum();
        if (excess > 0.0) {
            theta = std::clamp(mu.squaredNorm() / excess, 1e-3, cap);
        }
    }

    RegressionFit fit;
    fit.names = X.names;
    fit.aux_kind = AuxKind::Dispersion;

    double ll = log_likelihood_at(y, mu, theta);
    fit.log_likelihood_trace.push_back(ll);

    bool converged = false;
    int outer = 0;
    for (; outer < options.max_iterations && !converged; ++outer) {
        const Eigen::VectorXd beta_start = beta;
        const double ll_start = ll;

        // beta | theta: Newton with the observed information, which is positive definite for NB.
        for (int inner = 0; inner < kInnerNewtonSteps; ++inner) {
            const Eigen::ArrayXd denom = theta + mu.array();
            const Eigen::VectorXd working = theta * (y - mu).array() / denom;
            const Eigen::VectorXd weight = theta * mu.array() * (theta + y.array()) / denom.square();
            const Eigen::VectorXd gradient = X.values.transpose() * working;
            const Eigen::MatrixXd info = X.values.transpose() * weight.asDiagonal() * X.values;
            Eigen::LLT<Eigen::MatrixXd> llt(info);
            if (llt.info() != Eigen::Success) {
                break;
            }
            const Eigen::VectorXd step = llt.solve(gradient);

            double scale = 1.0;
            bool accepted = false;
            for (int halving = 0; halving < 40; ++halving, scale *= 0.5) {
                const Eigen::VectorXd candidate = beta + scale * step;
                const Eigen::VectorXd candidate_mu = mean_of(X.values, candidate);
                const double candidate_ll = log_likelihood_at(y, candidate_mu, theta);
                if (std::isfinite(candidate_ll) && candidate_ll >= ll) {
                    beta = candidate;
                    mu = candidate_mu;
                    ll = candidate_ll;
                    accepted = true;
                    break;
                }
            }
            if (!accepted) {
                break;
            }
            fit.log_likelihood_trace.push_back(ll);
            if ((scale * step).lpNorm<Eigen::Infinity>() < options.tolerance) {
                break;
            }
        }

        // theta | beta
        const double next_theta = solve_theta(y, mu, theta, cap);
        const double next_ll = log_likelihood_at(y, mu, next_theta);
        if (std::isfinite(next_ll) && next_ll >= ll) {
            theta = next_theta;
            ll = next_ll;
            fit.log_likelihood_trace.push_back(ll);
        }

        const double beta_change = ((beta - beta_start).array().abs() / (1.0 + beta_start.array().abs())).maxCoeff();
        converged = beta_change < options.tolerance &&
                    std::abs(ll - ll_start) <= options.tolerance * (1.0 + std::abs(ll));
    }

    fit.coefficients = beta;
    fit.aux = theta;
    fit.near_poisson = theta >= cap;
    fit.iterations = outer;
    fit.log_likelihood = ll;

    const Eigen::ArrayXd denom = theta + mu.array();
    const Eigen::VectorXd weight = theta * mu.array() * (theta + y.array()) / denom.square();
    const Eigen::MatrixXd info = X.values.transpose() * weight.asDiagonal() * X.values;
    Eigen::LLT<Eigen::MatrixXd> llt(info);
    Eigen::VectorXd variances = Eigen::VectorXd::Constant(p, std::numeric_limits<double>::quiet_NaN());
    if (llt.info() == Eigen::Success) {
        variances = llt.solve(Eigen::MatrixXd::Identity(p, p)).diagonal();
    }
    const bool usable = variances.allFinite() && (variances.array() > 0.0).all();
    fit.converged = converged && usable;
    fit.standard_errors = variances.array().max(0.0).sqrt();
    fit.p_values.resize(p);
    for (Eigen::Index j = 0; j < p; ++j) {
        fit.p_values(j) = usable ? wald_pvalue_or_degenerate(beta(j), fit.standard_errors(j))
                                 : std::numeric_limits<double>::quiet_NaN();
    }
    return fit;
}

}  // namespace medzisc
