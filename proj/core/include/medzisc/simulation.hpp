#ifndef MEDZISC_SIMULATION_HPP
#define MEDZISC_SIMULATION_HPP

#include "medzisc/data.hpp"
#include "medzisc/rng.hpp"

#include <Eigen/Dense>

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

namespace medzisc {

struct Range {
    double low = 0.0;
    double high = 0.0;
};

/// Fractions of the true mediators in each group; must sum to one.
struct MediatorSplit {
    double both = 0.5;
    double m_only = 0.25;
    double f_only = 0.25;
};

/**
 * Generator parameters for one simulation cell.
 *
 * Per true mediator the exposure effects alpha_x (zero-inflation logit) and
 * gamma_x (log mean) and the outcome effects beta_m, beta_f are drawn uniformly
 * from the group's ranges. M-only mediators get an exposure effect on the
 * count mean and F-only mediators on the zero-inflation probability; set
 * `literal_assignment` to swap the two (alpha_x for M-only, gamma_x for F-only).
 */
struct ScenarioConfig {
    std::size_t subjects = 100;
    std::size_t cells = 100;
    std::size_t genes = 100;
    std::size_t n_true = 8;
    MediatorSplit split;

    Range both_alpha_x{1.0, 2.0};
    Range both_gamma_x{2.0, 6.0};
    Range both_beta_m{4.0, 5.0};
    Range both_beta_f{12.0, 14.0};
    Range m_only_exposure{1.0, 1.5};
    Range m_only_beta_m{5.0, 8.0};
    Range f_only_exposure{1.8, 3.0};
    Range f_only_beta_f{10.0, 15.0};
    bool literal_assignment = false;

    double alpha_z = 0.1;  // every gene, every covariate
    double gamma_z = 0.3;
    double beta_x = 3.0;
    std::vector<double> beta_z{0.5, -0.3, 0.2};  // its length sets the covariate count
    Range dispersion{0.6, 1.2};
    double noise_sd = 1.0;
    double exposure_probability = 0.5;

    std::uint64_t seed = 20240917;
    std::size_t replicates = 100;

    std::size_t covariate_count() const { return beta_z.size(); }

    /// Throws InputError naming the offending field.
    void validate() const;
};

enum class MediatorType { None, Both, MOnly, FOnly };

const char* to_string(MediatorType type);
MediatorType mediator_type_from_string(const std::string& text);

struct GeneTruth {
    MediatorType type = MediatorType::None;
    double alpha_x = 0.0;
    double gamma_x = 0.0;
    double beta_m = 0.0;
    double beta_f = 0.0;
    double dispersion = 1.0;
};

struct SimulationTruth {
    std::vector<std::string> gene_names;
    std::vector<GeneTruth> genes;
    std::vector<std::size_t> m_family;  // both + M-only
    std::vector<std::size_t> f_family;  // both + F-only
};

struct SimulatedDataset {
    SubjectTable subjects;  // X, Z and Y populated
    std::vector<CellCountMatrix> cells;
    SimulationTruth truth;
};

/// Pseudobulk form of a replicate, produced without materialising the cell matrices.
struct SimulatedPseudobulk {
    PseudobulkDataset dataset;  // before filter_degenerate_genes, Y populated
    SimulationTruth truth;
};

/**
 * `count` draws from ZINB(mu, delta, pi): zero with probability pi, otherwise
 * NB with mean mu and size delta (variance mu + mu^2 / delta), drawn as a
 * Poisson-gamma mixture.
 */
std::vector<double> sample_zinb(double mu, double delta, double pi, std::size_t count, Engine& engine);

std::string gene_name(std::size_t index, std::size_t total);
std::string subject_name(std::size_t index, std::size_t total);

/// Mediator-group assignment and coefficients for one replicate.
SimulationTruth draw_truth(const ScenarioConfig& config, std::size_t replicate);

/// X ~ Bernoulli(p), Z ~ N(0, I); outcome left empty.
SubjectTable draw_subjects(const ScenarioConfig& config, std::size_t replicate);

/// Y = beta_x X + beta_z'Z + sum_g beta_m M_g + beta_f F_g + N(0, noise_sd^2).
Eigen::VectorXd simulate_outcome(const SimulationTruth& truth, const Eigen::MatrixXd& mean_expression,
                                 const Eigen::MatrixXd& zero_fraction, const SubjectTable& subjects,
                                 double beta_x, const std::vector<double>& beta_z, double noise_sd,
                                 Engine& engine);

/// Full cell-level replicate; a pure function of (config, replicate).
SimulatedDataset generate_replicate(const ScenarioConfig& config, std::size_t replicate, int threads = 1);

/// Same replicate as generate_replicate, aggregated on the fly.
SimulatedPseudobulk generate_pseudobulk_replicate(const ScenarioConfig& config, std::size_t replicate,
                                                  int threads = 1);

}  // namespace medzisc

#endif  // MEDZISC_SIMULATION_HPP
