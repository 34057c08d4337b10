#ifndef MEDZISC_PIPELINE_HPP
#define MEDZISC_PIPELINE_HPP

#include "medzisc/data.hpp"
#include "medzisc/design.hpp"
#include "medzisc/lasso.hpp"

#include <Eigen/Dense>

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace medzisc {

/// How the Lasso selection G_Y combines with the marginal exposure screens G_M, G_F.
enum class ScreeningRule {
    Conjunction,  // S = G_Y ∩ (G_M ∪ G_F)
    Union,        // S = G_Y ∪ G_M ∪ G_F
};

/// Outcome model used by the naive per-gene baseline.
enum class NaiveOutcome {
    Joint,     // Y ~ X + Z + M_g + F_g
    Separate,  // Y ~ X + Z + M_g and Y ~ X + Z + F_g
};

enum class Method { MedZIsc, Naive };
enum class Pathway { M, F };

const char* to_string(ScreeningRule rule);
const char* to_string(NaiveOutcome outcome);
const char* to_string(Method method);
const char* to_string(Pathway pathway);
ScreeningRule screening_rule_from_string(const std::string& text);
NaiveOutcome naive_outcome_from_string(const std::string& text);
Method method_from_string(const std::string& text);

struct AnalysisConfig {
    ScreeningRule rule = ScreeningRule::Conjunction;
    double level = 0.05;            // BH-adjusted significance level
    double screening_level = 0.05;  // marginal exposure tests during screening
    double x1 = 0.0;
    double x2 = 1.0;
    std::optional<std::vector<double>> covariate_profile;  // default: sample mean of Z
    std::optional<double> lambda;                          // default: cross-validated
    int folds = 10;
    bool intercept = true;
    NaiveOutcome naive_outcome = NaiveOutcome::Separate;  // one fit per co-mediator
    std::uint64_t seed = 20240917;
    int threads = 1;

    /// Throws InputError naming the offending field.
    void validate() const;
};

/// Lasso column names for the two co-mediators of a gene.
std::string mean_term(const std::string& gene);
std::string zero_term(const std::string& gene);

/// Marginal mediator models for one gene: NB for M, beta for F.
struct MarginalFits {
    std::optional<RegressionFit> nb;    // M_g ~ X + Z
    std::optional<RegressionFit> beta;  // F_g ~ X + Z, absent when F is not modelled
};

struct ScreeningResult {
    std::vector<std::string> g_y;
    std::vector<std::string> g_m;
    std::vector<std::string> g_f;

    // Candidate set S in gene order, with the terms that enter the outcome model.
    std::vector<std::size_t> candidates;
    std::vector<bool> m_term;
    std::vector<bool> f_term;

    LassoFit lasso;
    std::vector<MarginalFits> marginal;  // indexed by gene
    std::vector<std::string> warnings;

    std::vector<std::string> candidate_names(const PseudobulkDataset& dataset) const;
};

/// Per-gene NB and beta fits of the mediators on X and Z.
std::vector<MarginalFits> fit_marginal_models(const PseudobulkDataset& dataset, const AnalysisConfig& config,
                                              std::vector<std::string>* warnings);

ScreeningResult screen_mediators(const PseudobulkDataset& dataset, const AnalysisConfig& config);

struct FinalModels {
    RegressionFit outcome;             // Y ~ X + Z + selected M terms + selected F terms
    std::vector<std::string> dropped;  // collinear terms removed before fitting
    std::vector<std::string> warnings;
};

/// Outcome regression on the screened terms; marginal fits are reused from screening.
FinalModels fit_final_models(const PseudobulkDataset& dataset, const ScreeningResult& screening,
                             const AnalysisConfig& config);

/// beta_m * exp(gamma_z' z) * (exp(gamma_x x2) - exp(gamma_x x1)).
double estimate_iie_m(double beta_m, double gamma_x, const Eigen::VectorXd& gamma_z, const Eigen::VectorXd& z,
                      double x1, double x2);

/// beta_f * (expit(alpha_x x2 + alpha_z' z) - expit(alpha_x x1 + alpha_z' z)).
double estimate_iie_f(double beta_f, double alpha_x, const Eigen::VectorXd& alpha_z, const Eigen::VectorXd& z,
                      double x1, double x2);

struct GeneMediationResult {
    std::string gene;
    std::size_t gene_index = 0;
    Pathway pathway = Pathway::M;

    double path_coefficient = 0.0;  // beta_M or beta_F from the outcome model
    double path_se = 0.0;
    double path_p = 1.0;
    double exposure_coefficient = 0.0;  // gamma_X (NB) or alpha_X (beta)
    double exposure_se = 0.0;
    double exposure_p = 1.0;

    double iie = 0.0;                 // at the configured covariate profile
    double iie_subject_average = 0.0; // mean of per-subject IIEs
    double p_max = 1.0;
    double p_adjusted = 1.0;
    bool significant = false;
    std::string diagnostic;           // e.g. non-finite IIE
};

struct EffectEstimate {
    double estimate = 0.0;
    double standard_error = 0.0;
    double p_value = 1.0;
};

struct MediationReport {
    Method method = Method::MedZIsc;
    std::optional<EffectEstimate> direct_effect;  // beta_X of the joint outcome model
    std::optional<RegressionFit> outcome_fit;
    std::vector<GeneMediationResult> m_results;
    std::vector<GeneMediationResult> f_results;
    std::optional<ScreeningResult> screening;
    std::vector<std::string> warnings;
    double seconds = 0.0;

    std::vector<std::string> significant_genes(Pathway pathway) const;
};

/// Screening, outcome model, IIEs, JS test and BH within each family.
MediationReport run_medzisc(const PseudobulkDataset& dataset, const AnalysisConfig& config);

/// Every gene tested on its own, with BH over all genes per family.
MediationReport run_naive(const PseudobulkDataset& dataset, const AnalysisConfig& config);

MediationReport run_method(Method method, const PseudobulkDataset& dataset, const AnalysisConfig& config);

}  // namespace medzisc

#endif  // MEDZISC_PIPELINE_HPP
