#include "medzisc/pipeline.hpp"

#include "medzisc/beta_regression.hpp"
#include "medzisc/errors.hpp"
#include "medzisc/nb_regression.hpp"
#include "medzisc/ols.hpp"
#include "medzisc/parallel.hpp"
#include "medzisc/stats.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>

namespace medzisc {

namespace {

DesignMatrix mediator_design(const PseudobulkDataset& dataset, bool intercept) {
    const SubjectTable& s = dataset.subjects;
    return exposure_design(s.exposure, s.covariates, s.covariate_names, intercept);
}

/// Covariate profile with a leading 1 when the models carry an intercept.
Eigen::VectorXd with_intercept(const Eigen::VectorXd& z, bool intercept) {
    if (!intercept) {
        return z;
    }
    Eigen::VectorXd out(z.size() + 1);
    out(0) = 1.0;
    out.tail(z.size()) = z;
    return out;
}

/// Coefficients of a mediator model other than the exposure, in design order.
Eigen::VectorXd non_exposure_coefficients(const RegressionFit& fit) {
    const Eigen::Index x = fit.index_of("X");
    Eigen::VectorXd out(fit.coefficients.size() - 1);
    Eigen::Index k = 0;
    for (Eigen::Index j = 0; j < fit.coefficients.size(); ++j) {
        if (j != x) {
            out(k++) = fit.coefficients(j);
        }
    }
    return out;
}

struct Profiles {
    Eigen::VectorXd reference;              // configured profile, intercept-augmented
    std::vector<Eigen::VectorXd> subjects;  // per-subject profiles, intercept-augmented
};

Profiles covariate_profiles(const PseudobulkDataset& dataset, const AnalysisConfig& config) {
    const SubjectTable& s = dataset.subjects;
    Eigen::VectorXd z;
    if (config.covariate_profile) {
        const auto& values = *config.covariate_profile;
        if (static_cast<Eigen::Index>(values.size()) != s.covariate_count()) {
            throw InputError("covariate_profile", "length " + std::to_string(values.size()) +
                                                      " does not match the " +
                                                      std::to_string(s.covariate_count()) + " covariates");
        }
        z = Eigen::Map<const Eigen::VectorXd>(values.data(), static_cast<Eigen::Index>(values.size()));
    } else if (s.covariate_count() > 0 && s.size() > 0) {
        z = s.covariates.colwise().mean().transpose();
    } else {
        z = Eigen::VectorXd::Zero(s.covariate_count());
    }
    Profiles out;
    out.reference = with_intercept(z, config.intercept);
    for (Eigen::Index i = 0; i < s.covariates.rows(); ++i) {
        out.subjects.push_back(with_intercept(s.covariates.row(i).transpose(), config.intercept));
    }
    return out;
}

/**
 * Pathway entry for one gene. `outcome` supplies the path coefficient under
 * `term`; `mediator` is the marginal NB (M) or beta (F) fit. Returns nullopt
 * when a component p-value is unavailable.
 */
std::optional<GeneMediationResult> mediation_entry(Pathway pathway, const std::string& gene, std::size_t index,
                                                   const RegressionFit& outcome, const std::string& term,
                                                   const RegressionFit& mediator, const Profiles& profiles,
                                                   const AnalysisConfig& config, std::vector<std::string>& warnings) {
    GeneMediationResult r;
    r.gene = gene;
    r.gene_index = index;
    r.pathway = pathway;
    const Eigen::Index t = outcome.index_of(term);
    r.path_coefficient = outcome.coefficients(t);
    r.path_se = outcome.standard_errors(t);
    r.path_p = outcome.p_values(t);
    const Eigen::Index x = mediator.index_of("X");
    r.exposure_coefficient = mediator.coefficients(x);
    r.exposure_se = mediator.standard_errors(x);
    r.exposure_p = mediator.p_values(x);
    if (!std::isfinite(r.path_p) || !std::isfinite(r.exposure_p)) {
        warnings.push_back(gene + ": " + to_string(pathway) + " pathway skipped, component p-value unavailable");
        return std::nullopt;
    }

    const Eigen::VectorXd rest = non_exposure_coefficients(mediator);
    auto iie_at = [&](const Eigen::VectorXd& z) {
        return pathway == Pathway::M
                   ? estimate_iie_m(r.path_coefficient, r.exposure_coefficient, rest, z, config.x1, config.x2)
                   : estimate_iie_f(r.path_coefficient, r.exposure_coefficient, rest, z, config.x1, config.x2);
    };
    r.iie = iie_at(profiles.reference);
    double total = 0.0;
    for (const auto& z : profiles.subjects) {
        total += iie_at(z);
    }
    r.iie_subject_average = profiles.subjects.empty() ? std::numeric_limits<double>::quiet_NaN()
                                                      : total / static_cast<double>(profiles.subjects.size());
    if (!std::isfinite(r.iie) || !std::isfinite(r.iie_subject_average)) {
        r.diagnostic = "IIE overflowed";
        warnings.push_back(gene + ": " + to_string(pathway) + " IIE is not finite");
    }
    r.p_max = js_test(r.path_p, r.exposure_p);
    return r;
}

bool has_term(const RegressionFit& fit, const std::string& name) {
    return std::find(fit.names.begin(), fit.names.end(), name) != fit.names.end();
}

void adjust_family(std::vector<GeneMediationResult>& family, double level) {
    std::vector<double> p;
    p.reserve(family.size());
    for (const auto& r : family) {
        p.push_back(r.p_max);
    }
    const auto adjusted = bh_adjust(p);
    for (std::size_t k = 0; k < family.size(); ++k) {
        family[k].p_adjusted = adjusted[k];
        family[k].significant = adjusted[k] <= level;
    }
}

template <class Fit>
std::optional<RegressionFit> try_fit(const std::string& label, std::vector<std::string>& warnings, Fit&& fit) {
    try {
        RegressionFit result = fit();
        if (!result.converged) {
            warnings.push_back(label + " did not converge; excluded");
            return std::nullopt;
        }
        return result;
    } catch (const Error& e) {
        warnings.push_back(label + " failed: " + e.what());
        return std::nullopt;
    }
}

void append(std::vector<std::string>& to, const std::vector<std::string>& from) {
    to.insert(to.end(), from.begin(), from.end());
}

double seconds_since(std::chrono::steady_clock::time_point start) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
}

}  // namespace

const char* to_string(ScreeningRule rule) {
    return rule == ScreeningRule::Conjunction ? "conjunction" : "union";
}

const char* to_string(NaiveOutcome outcome) { return outcome == NaiveOutcome::Joint ? "joint" : "separate"; }

const char* to_string(Method method) { return method == Method::MedZIsc ? "medzisc" : "naive"; }

const char* to_string(Pathway pathway) { return pathway == Pathway::M ? "M" : "F"; }

ScreeningRule screening_rule_from_string(const std::string& text) {
    if (text == "conjunction") return ScreeningRule::Conjunction;
    if (text == "union") return ScreeningRule::Union;
    throw InputError("rule", "expected 'conjunction' or 'union', got '" + text + "'");
}

NaiveOutcome naive_outcome_from_string(const std::string& text) {
    if (text == "joint") return NaiveOutcome::Joint;
    if (text == "separate") return NaiveOutcome::Separate;
    throw InputError("naive_outcome", "expected 'joint' or 'separate', got '" + text + "'");
}

Method method_from_string(const std::string& text) {
    if (text == "medzisc") return Method::MedZIsc;
    if (text == "naive") return Method::Naive;
    throw InputError("method", "expected 'medzisc' or 'naive', got '" + text + "'");
}

void AnalysisConfig::validate() const {
    if (!(level > 0.0 && level <= 1.0)) {
        throw InputError("level", "must lie in (0, 1]");
    }
    if (!(screening_level > 0.0 && screening_level <= 1.0)) {
        throw InputError("screening_level", "must lie in (0, 1]");
    }
    if (!std::isfinite(x1) || !std::isfinite(x2)) {
        throw InputError("contrast", "x1 and x2 must be finite");
    }
    if (covariate_profile) {
        for (double v : *covariate_profile) {
            if (!std::isfinite(v)) {
                throw InputError("covariate_profile", "entries must be finite");
            }
        }
    }
    if (lambda && !(*lambda >= 0.0 && std::isfinite(*lambda))) {
        throw InputError("lambda", "must be finite and nonnegative");
    }
    if (folds < 2) {
        throw InputError("folds", "must be at least 2");
    }
    if (threads < 0) {
        throw InputError("threads", "must be nonnegative");
    }
}

std::string mean_term(const std::string& gene) { return "M:" + gene; }

std::string zero_term(const std::string& gene) { return "F:" + gene; }

std::vector<std::string> ScreeningResult::candidate_names(const PseudobulkDataset& dataset) const {
    std::vector<std::string> names;
    for (auto g : candidates) {
        names.push_back(dataset.gene_names[g]);
    }
    return names;
}

std::vector<std::string> MediationReport::significant_genes(Pathway pathway) const {
    std::vector<std::string> genes;
    for (const auto& r : pathway == Pathway::M ? m_results : f_results) {
        if (r.significant) {
            genes.push_back(r.gene);
        }
    }
    return genes;
}

std::vector<MarginalFits> fit_marginal_models(const PseudobulkDataset& dataset, const AnalysisConfig& config,
                                              std::vector<std::string>* warnings) {
    const DesignMatrix design = mediator_design(dataset, config.intercept);
    const std::size_t genes = dataset.gene_count();
    std::vector<MarginalFits> fits(genes);
    std::vector<std::vector<std::string>> notes(genes);

    parallel_for(genes, config.threads, [&](std::size_t g) {
        const auto col = static_cast<Eigen::Index>(g);
        const std::string& name = dataset.gene_names[g];
        const Eigen::VectorXd m = dataset.mean_expression.col(col);
        fits[g].nb = try_fit(name + ": NB model for M", notes[g], [&] { return fit_nb_regression(m, design); });
        if (dataset.f_modeled[g]) {
            const Eigen::VectorXd f = dataset.zero_fraction.col(col);
            fits[g].beta =
                try_fit(name + ": beta model for F", notes[g], [&] { return fit_beta_regression(f, design); });
        }
    });

    if (warnings) {
        for (const auto& n : notes) {
            append(*warnings, n);
        }
    }
    return fits;
}

ScreeningResult screen_mediators(const PseudobulkDataset& dataset, const AnalysisConfig& config) {
    config.validate();
    dataset.validate();
    dataset.subjects.require_outcome();
    const SubjectTable& s = dataset.subjects;
    const std::size_t genes = dataset.gene_count();

    ScreeningResult result;
    result.marginal = fit_marginal_models(dataset, config, &result.warnings);

    // Lasso on [X, Z | every M_g, every modelled F_g].
    DesignMatrix lasso_design = exposure_design(s.exposure, s.covariates, s.covariate_names, false);
    std::vector<std::string> unpenalized = lasso_design.names;
    for (std::size_t g = 0; g < genes; ++g) {
        const auto col = static_cast<Eigen::Index>(g);
        lasso_design.add_column(mean_term(dataset.gene_names[g]), dataset.mean_expression.col(col));
        if (dataset.f_modeled[g]) {
            lasso_design.add_column(zero_term(dataset.gene_names[g]), dataset.zero_fraction.col(col));
        }
    }
    LassoOptions options;
    options.lambda = config.lambda;
    options.folds = config.folds;
    options.seed = config.seed;
    try {
        result.lasso = fit_lasso(*s.outcome, lasso_design, unpenalized, options);
    } catch (const Error& e) {
        throw Error(std::string("screening: Lasso fit failed: ") + e.what());
    }
    append(result.warnings, result.lasso.warnings);

    std::vector<bool> in_y(genes), in_m(genes), in_f(genes);
    for (std::size_t g = 0; g < genes; ++g) {
        const std::string& name = dataset.gene_names[g];
        in_y[g] = result.lasso.is_selected(mean_term(name)) || result.lasso.is_selected(zero_term(name));
        const auto& fits = result.marginal[g];
        in_m[g] = fits.nb && fits.nb->p_value("X") < config.screening_level;
        in_f[g] = fits.beta && fits.beta->p_value("X") < config.screening_level;
        if (in_y[g]) result.g_y.push_back(name);
        if (in_m[g]) result.g_m.push_back(name);
        if (in_f[g]) result.g_f.push_back(name);

        bool keep = false;
        bool m = false;
        bool f = false;
        if (config.rule == ScreeningRule::Conjunction) {
            keep = in_y[g] && (in_m[g] || in_f[g]);
            m = in_m[g];
            f = in_f[g];
        } else {
            // Union: every available term enters; the JS test then sorts out the paths.
            keep = in_y[g] || in_m[g] || in_f[g];
            m = fits.nb.has_value();
            f = fits.beta.has_value();
        }
        if (keep && (m || f)) {
            result.candidates.push_back(g);
            result.m_term.push_back(m);
            result.f_term.push_back(f);
        } else if (keep) {
            result.warnings.push_back(name + ": selected but no mediator model is available; excluded");
        }
    }
    return result;
}

FinalModels fit_final_models(const PseudobulkDataset& dataset, const ScreeningResult& screening,
                             const AnalysisConfig& config) {
    dataset.subjects.require_outcome();
    FinalModels out;
    DesignMatrix design = mediator_design(dataset, config.intercept);
    const Eigen::Index base = design.cols();
    for (std::size_t k = 0; k < screening.candidates.size(); ++k) {
        const std::size_t g = screening.candidates[k];
        const auto col = static_cast<Eigen::Index>(g);
        if (screening.m_term[k]) {
            design.add_column(mean_term(dataset.gene_names[g]), dataset.mean_expression.col(col));
        }
        if (screening.f_term[k]) {
            design.add_column(zero_term(dataset.gene_names[g]), dataset.zero_fraction.col(col));
        }
    }

    const auto dependent = dependent_columns(design.values);
    if (!dependent.empty()) {
        DesignMatrix kept;
        kept.values.resize(design.rows(), design.cols() - static_cast<Eigen::Index>(dependent.size()));
        Eigen::Index next = 0;
        for (Eigen::Index j = 0; j < design.cols(); ++j) {
            if (std::find(dependent.begin(), dependent.end(), j) != dependent.end()) {
                if (j < base) {
                    throw SingularDesignError({design.names[static_cast<std::size_t>(j)]},
                                              "outcome model: exposure/covariate design is rank deficient");
                }
                out.dropped.push_back(design.names[static_cast<std::size_t>(j)]);
                out.warnings.push_back(design.names[static_cast<std::size_t>(j)] +
                                       ": collinear with earlier outcome terms; dropped");
                continue;
            }
            kept.values.col(next++) = design.values.col(j);
            kept.names.push_back(design.names[static_cast<std::size_t>(j)]);
        }
        design = std::move(kept);
    }
    out.outcome = fit_ols(*dataset.subjects.outcome, design);
    return out;
}

double estimate_iie_m(double beta_m, double gamma_x, const Eigen::VectorXd& gamma_z, const Eigen::VectorXd& z,
                      double x1, double x2) {
    if (gamma_z.size() != z.size()) {
        throw StructuralError("estimate_iie_m: coefficient and profile lengths differ");
    }
    if (x1 == x2) {
        return 0.0;
    }
    return beta_m * std::exp(gamma_z.dot(z)) * (std::exp(gamma_x * x2) - std::exp(gamma_x * x1));
}

double estimate_iie_f(double beta_f, double alpha_x, const Eigen::VectorXd& alpha_z, const Eigen::VectorXd& z,
                      double x1, double x2) {
    if (alpha_z.size() != z.size()) {
        throw StructuralError("estimate_iie_f: coefficient and profile lengths differ");
    }
    if (x1 == x2) {
        return 0.0;
    }
    const double offset = alpha_z.dot(z);
    return beta_f * (expit(alpha_x * x2 + offset) - expit(alpha_x * x1 + offset));
}

MediationReport run_medzisc(const PseudobulkDataset& dataset, const AnalysisConfig& config) {
    const auto start = std::chrono::steady_clock::now();
    MediationReport report;
    report.method = Method::MedZIsc;

    ScreeningResult screening = screen_mediators(dataset, config);
    FinalModels final_models = fit_final_models(dataset, screening, config);
    append(report.warnings, screening.warnings);
    append(report.warnings, final_models.warnings);

    const RegressionFit& outcome = final_models.outcome;
    report.direct_effect = EffectEstimate{outcome.coefficient("X"), outcome.standard_error("X"), outcome.p_value("X")};

    const Profiles profiles = covariate_profiles(dataset, config);
    for (std::size_t k = 0; k < screening.candidates.size(); ++k) {
        const std::size_t g = screening.candidates[k];
        const std::string& gene = dataset.gene_names[g];
        const MarginalFits& fits = screening.marginal[g];
        if (screening.m_term[k] && has_term(outcome, mean_term(gene)) && fits.nb) {
            if (auto r = mediation_entry(Pathway::M, gene, g, outcome, mean_term(gene), *fits.nb, profiles, config,
                                         report.warnings)) {
                report.m_results.push_back(std::move(*r));
            }
        }
        if (screening.f_term[k] && has_term(outcome, zero_term(gene)) && fits.beta) {
            if (auto r = mediation_entry(Pathway::F, gene, g, outcome, zero_term(gene), *fits.beta, profiles, config,
                                         report.warnings)) {
                report.f_results.push_back(std::move(*r));
            }
        }
    }
    adjust_family(report.m_results, config.level);
    adjust_family(report.f_results, config.level);

    report.outcome_fit = std::move(final_models.outcome);
    report.screening = std::move(screening);
    report.seconds = seconds_since(start);
    return report;
}

MediationReport run_naive(const PseudobulkDataset& dataset, const AnalysisConfig& config) {
    const auto start = std::chrono::steady_clock::now();
    config.validate();
    dataset.validate();
    dataset.subjects.require_outcome();
    const Eigen::VectorXd& y = *dataset.subjects.outcome;

    MediationReport report;
    report.method = Method::Naive;
    const std::vector<MarginalFits> marginal = fit_marginal_models(dataset, config, &report.warnings);
    const Profiles profiles = covariate_profiles(dataset, config);
    const DesignMatrix base = mediator_design(dataset, config.intercept);

    const std::size_t genes = dataset.gene_count();
    std::vector<std::optional<GeneMediationResult>> m_slots(genes), f_slots(genes);
    std::vector<std::vector<std::string>> notes(genes);

    parallel_for(genes, config.threads, [&](std::size_t g) {
        const auto col = static_cast<Eigen::Index>(g);
        const std::string& gene = dataset.gene_names[g];
        const bool with_f = dataset.f_modeled[g];

        std::optional<RegressionFit> m_outcome, f_outcome;
        if (config.naive_outcome == NaiveOutcome::Joint) {
            DesignMatrix design = base;
            design.add_column(mean_term(gene), dataset.mean_expression.col(col));
            if (with_f) {
                design.add_column(zero_term(gene), dataset.zero_fraction.col(col));
            }
            m_outcome = try_fit(gene + ": outcome model", notes[g], [&] { return fit_ols(y, design); });
            f_outcome = m_outcome;
        } else {
            DesignMatrix design_m = base;
            design_m.add_column(mean_term(gene), dataset.mean_expression.col(col));
            m_outcome = try_fit(gene + ": outcome model for M", notes[g], [&] { return fit_ols(y, design_m); });
            if (with_f) {
                DesignMatrix design_f = base;
                design_f.add_column(zero_term(gene), dataset.zero_fraction.col(col));
                f_outcome = try_fit(gene + ": outcome model for F", notes[g], [&] { return fit_ols(y, design_f); });
            }
        }

        if (m_outcome && marginal[g].nb) {
            m_slots[g] = mediation_entry(Pathway::M, gene, g, *m_outcome, mean_term(gene), *marginal[g].nb, profiles,
                                         config, notes[g]);
        }
        if (with_f && f_outcome && marginal[g].beta) {
            f_slots[g] = mediation_entry(Pathway::F, gene, g, *f_outcome, zero_term(gene), *marginal[g].beta,
                                         profiles, config, notes[g]);
        }
    });

    for (std::size_t g = 0; g < genes; ++g) {
        append(report.warnings, notes[g]);
        if (m_slots[g]) report.m_results.push_back(std::move(*m_slots[g]));
        if (f_slots[g]) report.f_results.push_back(std::move(*f_slots[g]));
    }
    adjust_family(report.m_results, config.level);
    adjust_family(report.f_results, config.level);
    report.seconds = seconds_since(start);
    return report;
}

MediationReport run_method(Method method, const PseudobulkDataset& dataset, const AnalysisConfig& config) {
    return method == Method::MedZIsc ? run_medzisc(dataset, config) : run_naive(dataset, config);
}

}  // namespace medzisc
