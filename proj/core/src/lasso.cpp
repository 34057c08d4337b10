#include "medzisc/lasso.hpp"

#include "medzisc/errors.hpp"
#include "medzisc/rng.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

namespace medzisc {

namespace {

// Lasso problem after centring, standardising the penalised columns and
// projecting the unpenalised columns out of everything.
struct Problem {
    Eigen::Index n = 0;
    std::vector<Eigen::Index> penalized;    // design column indices
    std::vector<Eigen::Index> unpenalized;  // non-constant unpenalised design columns
    Eigen::VectorXd means;                  // per design column
    Eigen::VectorXd scales;                 // per penalised column (aligned with `penalized`)
    double y_mean = 0.0;

    Eigen::MatrixXd unpen_centered;         // n x |U|
    Eigen::MatrixXd pen_standardized;       // n x |P|, before projection
    Eigen::VectorXd y_centered;

    Eigen::MatrixXd pen_projected;          // n x |P|
    Eigen::VectorXd y_projected;
    Eigen::VectorXd curvature;              // ||column||^2 / n after projection
    double response_scale = 0.0;
};

bool is_constant(double mean, double sd) {
    return sd <= 1e-12 * (1.0 + std::abs(mean));
}

Problem prepare(const Eigen::VectorXd& y, const Eigen::MatrixXd& X, const std::vector<bool>& is_unpenalized,
                std::vector<std::string>* dropped, const std::vector<std::string>& names) {
    Problem pr;
    pr.n = X.rows();
    const double n = static_cast<double>(pr.n);
    pr.means = X.colwise().mean().transpose();
    pr.y_mean = y.mean();
    pr.y_centered = y.array() - pr.y_mean;

    std::vector<double> scales;
    for (Eigen::Index j = 0; j < X.cols(); ++j) {
        const double sd = std::sqrt((X.col(j).array() - pr.means(j)).square().sum() / n);
        const bool constant = is_constant(pr.means(j), sd);
        if (is_unpenalized[static_cast<std::size_t>(j)]) {
            if (!constant) {
                pr.unpenalized.push_back(j);
            }
        } else if (constant) {
            if (dropped) {
                dropped->push_back(names[static_cast<std::size_t>(j)]);
            }
        } else {
            pr.penalized.push_back(j);
            scales.push_back(sd);
        }
    }
    pr.scales = Eigen::Map<Eigen::VectorXd>(scales.data(), static_cast<Eigen::Index>(scales.size()));

    const auto u = static_cast<Eigen::Index>(pr.unpenalized.size());
    const auto p = static_cast<Eigen::Index>(pr.penalized.size());
    pr.unpen_centered.resize(pr.n, u);
    for (Eigen::Index k = 0; k < u; ++k) {
        const auto j = pr.unpenalized[static_cast<std::size_t>(k)];
        pr.unpen_centered.col(k) = X.col(j).array() - pr.means(j);
    }
    pr.pen_standardized.resize(pr.n, p);
    for (Eigen::Index k = 0; k < p; ++k) {
        const auto j = pr.penalized[static_cast<std::size_t>(k)];
        pr.pen_standardized.col(k) = (X.col(j).array() - pr.means(j)) / pr.scales(k);
    }

    pr.pen_projected = pr.pen_standardized;
    pr.y_projected = pr.y_centered;
    if (u > 0) {
        if (auto dependent = dependent_columns(pr.unpen_centered); !dependent.empty()) {
            std::vector<std::string> bad;
            for (auto k : dependent) {
                bad.push_back(names[static_cast<std::size_t>(pr.unpenalized[static_cast<std::size_t>(k)])]);
            }
            throw SingularDesignError(bad, "fit_lasso: unpenalized columns are collinear (" + bad.front() + ")");
        }
        Eigen::HouseholderQR<Eigen::MatrixXd> qr(pr.unpen_centered);
        const Eigen::MatrixXd Q = qr.householderQ() * Eigen::MatrixXd::Identity(pr.n, u);
        pr.y_projected -= Q * (Q.transpose() * pr.y_projected);
        pr.pen_projected -= Q * (Q.transpose() * pr.pen_projected);
    }
    pr.curvature = pr.pen_projected.colwise().squaredNorm().transpose() / n;
    pr.response_scale = std::sqrt(pr.y_projected.squaredNorm() / n);
    return pr;
}

double lambda_max_of(const Problem& pr) {
    if (pr.pen_projected.cols() == 0) {
        return 0.0;
    }
    // Same expression as the first coordinate update from zero, so that at
    // lambda_max every penalised coefficient stays exactly zero.
    const double n = static_cast<double>(pr.n);
    double out = 0.0;
    for (Eigen::Index j = 0; j < pr.pen_projected.cols(); ++j) {
        out = std::max(out, std::abs(pr.pen_projected.col(j).dot(pr.y_projected) / n));
    }
    return out;
}

double soft_threshold(double value, double threshold) {
    if (value > threshold) {
        return value - threshold;
    }
    if (value < -threshold) {
        return value + threshold;
    }
    return 0.0;
}

struct SolveStats {
    int sweeps = 0;
    bool converged = false;
};

// Coordinate descent at one lambda, warm-started from `b` (standardised scale).
SolveStats solve_at(const Problem& pr, double lambda, Eigen::VectorXd& b, Eigen::VectorXd& residual,
                    const LassoOptions& options, std::vector<double>* trace) {
    const double n = static_cast<double>(pr.n);
    const Eigen::Index p = b.size();
    const double threshold = options.tolerance * std::max(pr.response_scale, std::numeric_limits<double>::min());
    SolveStats stats;

    auto objective = [&] { return 0.5 * residual.squaredNorm() / n + lambda * b.lpNorm<1>(); };

    auto sweep = [&](bool active_only) {
        double max_change = 0.0;
        for (Eigen::Index j = 0; j < p; ++j) {
            if (active_only && b(j) == 0.0) {
                continue;
            }
            const double v = pr.curvature(j);
            if (v <= 1e-12) {
                continue;  // column lies in the span of the unpenalised ones
            }
            const double old = b(j);
            const double rho = pr.pen_projected.col(j).dot(residual) / n + v * old;
            const double updated = soft_threshold(rho, lambda) / v;
            if (updated != old) {
                residual.noalias() -= (updated - old) * pr.pen_projected.col(j);
                b(j) = updated;
                max_change = std::max(max_change, std::abs(updated - old));
            }
        }
        ++stats.sweeps;
        if (trace) {
            trace->push_back(objective());
        }
        return max_change;
    };

    if (trace) {
        trace->push_back(objective());
    }
    while (stats.sweeps < options.max_sweeps) {
        if (sweep(false) < threshold) {
            stats.converged = true;
            break;
        }
        while (stats.sweeps < options.max_sweeps) {
            if (sweep(true) < threshold) {
                break;
            }
        }
    }
    return stats;
}

std::vector<double> lambda_path(double lambda_max, const LassoOptions& options) {
    std::vector<double> path;
    if (lambda_max <= 0.0) {
        return {0.0};
    }
    const int length = std::max(options.path_length, 2);
    for (int k = 0; k < length; ++k) {
        const double frac = static_cast<double>(k) / static_cast<double>(length - 1);
        path.push_back(lambda_max * std::pow(options.lambda_min_ratio, frac));
    }
    return path;
}

// Original-scale coefficients (all design columns) and intercept for standardised b.
std::pair<Eigen::VectorXd, double> unscale(const Problem& pr, const Eigen::VectorXd& b, Eigen::Index total_cols) {
    Eigen::VectorXd coef = Eigen::VectorXd::Zero(total_cols);
    for (std::size_t k = 0; k < pr.penalized.size(); ++k) {
        coef(pr.penalized[k]) = b(static_cast<Eigen::Index>(k)) / pr.scales(static_cast<Eigen::Index>(k));
    }
    if (!pr.unpenalized.empty()) {
        const Eigen::VectorXd target = pr.y_centered - pr.pen_standardized * b;
        const Eigen::VectorXd c = pr.unpen_centered.householderQr().solve(target);
        for (std::size_t k = 0; k < pr.unpenalized.size(); ++k) {
            coef(pr.unpenalized[k]) = c(static_cast<Eigen::Index>(k));
        }
    }
    const double intercept = pr.y_mean - pr.means.dot(coef);
    return {coef, intercept};
}

std::vector<bool> unpenalized_mask(const DesignMatrix& X, const std::vector<std::string>& unpenalized) {
    std::vector<bool> mask(static_cast<std::size_t>(X.cols()), false);
    for (const auto& name : unpenalized) {
        mask[static_cast<std::size_t>(X.index_of(name))] = true;
    }
    return mask;
}

}  // namespace

bool LassoFit::is_selected(std::string_view name) const {
    return std::find(selected.begin(), selected.end(), name) != selected.end();
}

double LassoFit::coefficient(std::string_view name) const {
    for (std::size_t j = 0; j < names.size(); ++j) {
        if (names[j] == name) {
            return coefficients(static_cast<Eigen::Index>(j));
        }
    }
    throw StructuralError("lasso fit has no coefficient named " + std::string(name));
}

double lasso_lambda_max(const Eigen::VectorXd& y, const DesignMatrix& X,
                        const std::vector<std::string>& unpenalized) {
    X.validate();
    const Problem pr = prepare(y, X.values, unpenalized_mask(X, unpenalized), nullptr, X.names);
    return lambda_max_of(pr);
}

LassoFit fit_lasso(const Eigen::VectorXd& y, const DesignMatrix& X,
                   const std::vector<std::string>& unpenalized, const LassoOptions& options) {
    X.validate();
    if (options.lambda && !(*options.lambda >= 0.0)) {
        throw DomainError("fit_lasso: lambda must be nonnegative");
    }
    const Eigen::Index n = X.rows();
    if (n < 2) {
        throw DomainError("fit_lasso: need at least two observations");
    }
    if (y.size() != n || !y.allFinite()) {
        throw StructuralError("fit_lasso: response must be finite with one entry per design row");
    }
    const auto mask = unpenalized_mask(X, unpenalized);

    LassoFit fit;
    fit.names = X.names;
    fit.unpenalized = unpenalized;
    const Problem full = prepare(y, X.values, mask, &fit.dropped, X.names);
    for (const auto& name : fit.dropped) {
        fit.warnings.push_back("constant penalized column " + name + " dropped");
    }
    fit.lambda_max = lambda_max_of(full);
    const auto path = lambda_path(fit.lambda_max, options);
    const auto p = static_cast<Eigen::Index>(full.penalized.size());

    Eigen::VectorXd b = Eigen::VectorXd::Zero(p);
    Eigen::VectorXd residual = full.y_projected;
    if (options.lambda) {
        // Walk the path down to the requested lambda for warm starts.
        for (double lambda : path) {
            if (lambda <= *options.lambda) {
                break;
            }
            fit.sweeps += solve_at(full, lambda, b, residual, options, nullptr).sweeps;
        }
        const auto stats = solve_at(full, *options.lambda, b, residual, options,
                                    options.record_objective ? &fit.objective_trace : nullptr);
        fit.sweeps += stats.sweeps;
        fit.converged = stats.converged;
        fit.lambda = *options.lambda;
    } else {
        // Full-data path, kept so the chosen solution needs no refit.
        std::vector<Eigen::VectorXd> solutions;
        std::vector<bool> converged;
        for (double lambda : path) {
            const auto stats = solve_at(full, lambda, b, residual, options, nullptr);
            fit.sweeps += stats.sweeps;
            solutions.push_back(b);
            converged.push_back(stats.converged);
        }

        const int folds = static_cast<int>(std::clamp<Eigen::Index>(options.folds, 2, n));
        Engine engine = make_stream(options.seed, {stream::kAnalysis, 0x6c6173736fULL});
        const auto order = random_permutation(static_cast<std::size_t>(n), engine);
        std::vector<int> fold_of(static_cast<std::size_t>(n));
        for (std::size_t i = 0; i < order.size(); ++i) {
            fold_of[order[i]] = static_cast<int>(i % static_cast<std::size_t>(folds));
        }

        std::vector<double> sse(path.size(), 0.0);
        for (int f = 0; f < folds; ++f) {
            std::vector<Eigen::Index> train, test;
            for (Eigen::Index i = 0; i < n; ++i) {
                (fold_of[static_cast<std::size_t>(i)] == f ? test : train).push_back(i);
            }
            const Eigen::MatrixXd X_train = X.values(train, Eigen::all);
            const Eigen::VectorXd y_train = y(train);
            const Eigen::MatrixXd X_test = X.values(test, Eigen::all);
            const Eigen::VectorXd y_test = y(test);

            const Problem pr = prepare(y_train, X_train, mask, nullptr, X.names);
            Eigen::VectorXd fold_b = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(pr.penalized.size()));
            Eigen::VectorXd fold_residual = pr.y_projected;
            for (std::size_t k = 0; k < path.size(); ++k) {
                solve_at(pr, path[k], fold_b, fold_residual, options, nullptr);
                const auto [coef, intercept] = unscale(pr, fold_b, X.cols());
                const Eigen::VectorXd err = y_test.array() - intercept - (X_test * coef).array();
                sse[k] += err.squaredNorm();
            }
        }
        std::size_t best = 0;
        for (std::size_t k = 0; k < path.size(); ++k) {
            fit.cv_lambdas.push_back(path[k]);
            fit.cv_errors.push_back(sse[k] / static_cast<double>(n));
            if (sse[k] < sse[best]) {
                best = k;
            }
        }
        fit.lambda = path[best];
        if (options.record_objective) {
            b = best > 0 ? solutions[best - 1] : Eigen::VectorXd::Zero(p);
            residual = full.y_projected - full.pen_projected * b;
            const auto stats = solve_at(full, fit.lambda, b, residual, options, &fit.objective_trace);
            fit.sweeps += stats.sweeps;
            fit.converged = stats.converged;
        } else {
            b = solutions[best];
            fit.converged = converged[best];
        }
    }
    if (!fit.converged) {
        fit.warnings.push_back("coordinate descent hit the sweep limit");
    }

    std::tie(fit.coefficients, fit.intercept) = unscale(full, b, X.cols());
    for (std::size_t k = 0; k < full.penalized.size(); ++k) {
        if (b(static_cast<Eigen::Index>(k)) != 0.0) {
            fit.selected.push_back(X.names[static_cast<std::size_t>(full.penalized[k])]);
        }
    }
    return fit;
}

}  // namespace medzisc
