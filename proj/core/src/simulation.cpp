#include "medzisc/simulation.hpp"

#include "medzisc/errors.hpp"
#include "medzisc/parallel.hpp"
#include "medzisc/stats.hpp"

#include <boost/random/gamma_distribution.hpp>
#include <boost/random/normal_distribution.hpp>
#include <boost/random/poisson_distribution.hpp>
#include <boost/random/uniform_01.hpp>

#include <algorithm>
#include <cmath>
#include <string>

namespace medzisc {

namespace {

void check_range(const Range& range, const std::string& field) {
    if (!std::isfinite(range.low) || !std::isfinite(range.high)) {
        throw InputError(field, "range bounds must be finite");
    }
    if (range.low > range.high) {
        throw InputError(field, "range low must not exceed high");
    }
}

double draw_uniform(const Range& range, Engine& engine) {
    const double u = boost::random::uniform_01<double>()(engine);
    return range.low + u * (range.high - range.low);
}

struct GroupSizes {
    std::size_t both = 0;
    std::size_t m_only = 0;
    std::size_t f_only = 0;
};

GroupSizes group_sizes(const ScenarioConfig& config) {
    GroupSizes sizes;
    const auto total = static_cast<double>(config.n_true);
    sizes.both = std::min(config.n_true, static_cast<std::size_t>(std::llround(total * config.split.both)));
    sizes.m_only = std::min(config.n_true - sizes.both,
                            static_cast<std::size_t>(std::llround(total * config.split.m_only)));
    sizes.f_only = config.n_true - sizes.both - sizes.m_only;
    return sizes;
}

std::string padded(const std::string& prefix, std::size_t index, std::size_t total) {
    const std::string digits = std::to_string(index + 1);
    const std::size_t width = std::max<std::size_t>(std::to_string(std::max<std::size_t>(total, 1)).size(), 3);
    return prefix + std::string(width > digits.size() ? width - digits.size() : 0, '0') + digits;
}

// Subject-level ZINB parameters for one gene.
struct CellParameters {
    double mu;
    double pi;
};

CellParameters cell_parameters(const GeneTruth& gene, const ScenarioConfig& config, double exposure,
                               const Eigen::Ref<const Eigen::RowVectorXd>& covariates) {
    const double z_sum = covariates.sum();
    return {std::exp(gene.gamma_x * exposure + config.gamma_z * z_sum),
            expit(gene.alpha_x * exposure + config.alpha_z * z_sum)};
}

}  // namespace

void ScenarioConfig::validate() const {
    if (subjects < 1) {
        throw InputError("n", "must be at least 1");
    }
    if (cells < 1) {
        throw InputError("c", "must be at least 1");
    }
    if (genes < 1) {
        throw InputError("g", "must be at least 1");
    }
    if (replicates < 1) {
        throw InputError("replicates", "must be at least 1");
    }
    if (n_true > genes) {
        throw InputError("n_true", "cannot exceed the number of genes");
    }
    for (auto [value, name] : {std::pair{split.both, "split.both"}, std::pair{split.m_only, "split.m_only"},
                               std::pair{split.f_only, "split.f_only"}}) {
        if (!std::isfinite(value) || value < 0.0 || value > 1.0) {
            throw InputError(name, "fraction must lie in [0, 1]");
        }
    }
    if (std::abs(split.both + split.m_only + split.f_only - 1.0) > 1e-9) {
        throw InputError("split", "fractions both + m_only + f_only must sum to 1");
    }
    check_range(both_alpha_x, "both.alpha_x");
    check_range(both_gamma_x, "both.gamma_x");
    check_range(both_beta_m, "both.beta_m");
    check_range(both_beta_f, "both.beta_f");
    check_range(m_only_exposure, "m_only.exposure");
    check_range(m_only_beta_m, "m_only.beta_m");
    check_range(f_only_exposure, "f_only.exposure");
    check_range(f_only_beta_f, "f_only.beta_f");
    check_range(dispersion, "dispersion");
    if (!(dispersion.low > 0.0)) {
        throw InputError("dispersion", "must be positive");
    }
    if (!std::isfinite(alpha_z) || !std::isfinite(gamma_z) || !std::isfinite(beta_x)) {
        throw InputError("alpha_z/gamma_z/beta_x", "must be finite");
    }
    for (double b : beta_z) {
        if (!std::isfinite(b)) {
            throw InputError("beta_z", "entries must be finite");
        }
    }
    if (!(noise_sd >= 0.0) || !std::isfinite(noise_sd)) {
        throw InputError("noise_sd", "must be finite and nonnegative");
    }
    if (!(exposure_probability >= 0.0 && exposure_probability <= 1.0)) {
        throw InputError("exposure_probability", "must lie in [0, 1]");
    }
}

const char* to_string(MediatorType type) {
    switch (type) {
        case MediatorType::None:
            return "none";
        case MediatorType::Both:
            return "both";
        case MediatorType::MOnly:
            return "M-only";
        case MediatorType::FOnly:
            return "F-only";
    }
    return "none";
}

MediatorType mediator_type_from_string(const std::string& text) {
    if (text == "none") return MediatorType::None;
    if (text == "both") return MediatorType::Both;
    if (text == "M-only") return MediatorType::MOnly;
    if (text == "F-only") return MediatorType::FOnly;
    throw InputError("mediator_type", "unknown mediator type '" + text + "'");
}

std::vector<double> sample_zinb(double mu, double delta, double pi, std::size_t count, Engine& engine) {
    if (!(mu > 0.0) || !std::isfinite(mu)) {
        throw DomainError("sample_zinb: mu must be positive and finite");
    }
    if (!(delta > 0.0) || !std::isfinite(delta)) {
        throw DomainError("sample_zinb: delta must be positive and finite");
    }
    if (!(pi >= 0.0 && pi <= 1.0)) {
        throw DomainError("sample_zinb: pi must lie in [0, 1]");
    }
    if (count < 1) {
        throw DomainError("sample_zinb: count must be at least 1");
    }

    std::vector<double> draws(count, 0.0);
    boost::random::uniform_01<double> unit;
    boost::random::gamma_distribution<double> rate(delta, mu / delta);
    for (auto& draw : draws) {
        if (unit(engine) < pi) {
            continue;  // structural zero
        }
        const double lambda = rate(engine);
        if (lambda > 0.0) {
            boost::random::poisson_distribution<long long, double> poisson(lambda);
            draw = static_cast<double>(poisson(engine));
        }
    }
    return draws;
}

std::string gene_name(std::size_t index, std::size_t total) { return padded("gene", index, total); }

std::string subject_name(std::size_t index, std::size_t total) { return padded("subject", index, total); }

SimulationTruth draw_truth(const ScenarioConfig& config, std::size_t replicate) {
    config.validate();
    SimulationTruth truth;
    truth.genes.resize(config.genes);
    for (std::size_t g = 0; g < config.genes; ++g) {
        truth.gene_names.push_back(gene_name(g, config.genes));
    }

    Engine selection = make_stream(config.seed, {replicate, stream::kTruth});
    const auto order = random_permutation(config.genes, selection);
    const auto sizes = group_sizes(config);
    for (std::size_t k = 0; k < config.n_true; ++k) {
        MediatorType type = MediatorType::FOnly;
        if (k < sizes.both) {
            type = MediatorType::Both;
        } else if (k < sizes.both + sizes.m_only) {
            type = MediatorType::MOnly;
        }
        truth.genes[order[k]].type = type;
    }

    for (std::size_t g = 0; g < config.genes; ++g) {
        Engine engine = make_stream(config.seed, {replicate, stream::kGenes, g});
        GeneTruth& gene = truth.genes[g];
        gene.dispersion = draw_uniform(config.dispersion, engine);
        // Four uniforms are always consumed so every gene's stream stays aligned.
        const double u_alpha = boost::random::uniform_01<double>()(engine);
        const double u_gamma = boost::random::uniform_01<double>()(engine);
        const double u_beta_m = boost::random::uniform_01<double>()(engine);
        const double u_beta_f = boost::random::uniform_01<double>()(engine);
        auto at = [](const Range& r, double u) { return r.low + u * (r.high - r.low); };

        switch (gene.type) {
            case MediatorType::None:
                break;
            case MediatorType::Both:
                gene.alpha_x = at(config.both_alpha_x, u_alpha);
                gene.gamma_x = at(config.both_gamma_x, u_gamma);
                gene.beta_m = at(config.both_beta_m, u_beta_m);
                gene.beta_f = at(config.both_beta_f, u_beta_f);
                break;
            case MediatorType::MOnly:
                if (config.literal_assignment) {
                    gene.alpha_x = at(config.m_only_exposure, u_alpha);
                } else {
                    gene.gamma_x = at(config.m_only_exposure, u_gamma);
                }
                gene.beta_m = at(config.m_only_beta_m, u_beta_m);
                break;
            case MediatorType::FOnly:
                if (config.literal_assignment) {
                    gene.gamma_x = at(config.f_only_exposure, u_gamma);
                } else {
                    gene.alpha_x = at(config.f_only_exposure, u_alpha);
                }
                gene.beta_f = at(config.f_only_beta_f, u_beta_f);
                break;
        }
        if (gene.type == MediatorType::Both || gene.type == MediatorType::MOnly) {
            truth.m_family.push_back(g);
        }
        if (gene.type == MediatorType::Both || gene.type == MediatorType::FOnly) {
            truth.f_family.push_back(g);
        }
    }
    return truth;
}

SubjectTable draw_subjects(const ScenarioConfig& config, std::size_t replicate) {
    config.validate();
    const auto n = static_cast<Eigen::Index>(config.subjects);
    const auto k = static_cast<Eigen::Index>(config.covariate_count());
    SubjectTable table;
    table.exposure.resize(n);
    table.covariates.resize(n, k);
    for (Eigen::Index j = 0; j < k; ++j) {
        table.covariate_names.push_back("Z" + std::to_string(j + 1));
    }

    Engine engine = make_stream(config.seed, {replicate, stream::kSubjects});
    boost::random::uniform_01<double> unit;
    boost::random::normal_distribution<double> normal(0.0, 1.0);
    for (Eigen::Index i = 0; i < n; ++i) {
        table.ids.push_back(subject_name(static_cast<std::size_t>(i), config.subjects));
        table.exposure(i) = unit(engine) < config.exposure_probability ? 1.0 : 0.0;
        for (Eigen::Index j = 0; j < k; ++j) {
            table.covariates(i, j) = normal(engine);
        }
    }
    return table;
}

Eigen::VectorXd simulate_outcome(const SimulationTruth& truth, const Eigen::MatrixXd& mean_expression,
                                 const Eigen::MatrixXd& zero_fraction, const SubjectTable& subjects,
                                 double beta_x, const std::vector<double>& beta_z, double noise_sd,
                                 Engine& engine) {
    const auto n = static_cast<Eigen::Index>(subjects.size());
    if (static_cast<Eigen::Index>(beta_z.size()) != subjects.covariate_count()) {
        throw StructuralError("simulate_outcome: beta_z length does not match covariate count");
    }
    if (mean_expression.rows() != n || zero_fraction.rows() != n ||
        mean_expression.cols() != static_cast<Eigen::Index>(truth.genes.size()) ||
        zero_fraction.cols() != mean_expression.cols()) {
        throw StructuralError("simulate_outcome: aggregates must be subjects x genes");
    }

    Eigen::VectorXd beta_m(mean_expression.cols()), beta_f(mean_expression.cols());
    for (std::size_t g = 0; g < truth.genes.size(); ++g) {
        beta_m(static_cast<Eigen::Index>(g)) = truth.genes[g].beta_m;
        beta_f(static_cast<Eigen::Index>(g)) = truth.genes[g].beta_f;
    }
    const Eigen::Map<const Eigen::VectorXd> bz(beta_z.data(), static_cast<Eigen::Index>(beta_z.size()));

    Eigen::VectorXd y = beta_x * subjects.exposure + subjects.covariates * bz + mean_expression * beta_m +
                        zero_fraction * beta_f;
    boost::random::normal_distribution<double> noise(0.0, 1.0);
    for (Eigen::Index i = 0; i < n; ++i) {
        y(i) += noise_sd * noise(engine);
    }
    return y;
}

SimulatedDataset generate_replicate(const ScenarioConfig& config, std::size_t replicate, int threads) {
    config.validate();
    SimulatedDataset out;
    out.truth = draw_truth(config, replicate);
    out.subjects = draw_subjects(config, replicate);

    const auto g = static_cast<Eigen::Index>(config.genes);
    out.cells.resize(config.subjects);
    parallel_for(config.subjects, threads, [&](std::size_t i) {
        const auto row = static_cast<Eigen::Index>(i);
        CellCountMatrix& matrix = out.cells[i];
        matrix.subject_id = out.subjects.ids[i];
        matrix.gene_names = out.truth.gene_names;
        matrix.counts.resize(static_cast<Eigen::Index>(config.cells), g);
        for (Eigen::Index j = 0; j < g; ++j) {
            const auto gene_index = static_cast<std::size_t>(j);
            const auto params = cell_parameters(out.truth.genes[gene_index], config, out.subjects.exposure(row),
                                                out.subjects.covariates.row(row));
            Engine engine = make_stream(config.seed, {replicate, stream::kCells, i, gene_index});
            const auto draws =
                sample_zinb(params.mu, out.truth.genes[gene_index].dispersion, params.pi, config.cells, engine);
            matrix.counts.col(j) = Eigen::Map<const Eigen::VectorXd>(draws.data(), static_cast<Eigen::Index>(draws.size()));
        }
    });

    const PseudobulkDataset aggregates = aggregate_pseudobulk(out.cells, out.subjects, threads);
    Engine noise = make_stream(config.seed, {replicate, stream::kOutcome});
    out.subjects.outcome = simulate_outcome(out.truth, aggregates.mean_expression, aggregates.zero_fraction,
                                            out.subjects, config.beta_x, config.beta_z, config.noise_sd, noise);
    return out;
}

SimulatedPseudobulk generate_pseudobulk_replicate(const ScenarioConfig& config, std::size_t replicate,
                                                  int threads) {
    config.validate();
    SimulatedPseudobulk out;
    out.truth = draw_truth(config, replicate);
    PseudobulkDataset& data = out.dataset;
    data.subjects = draw_subjects(config, replicate);
    data.gene_names = out.truth.gene_names;

    const auto n = static_cast<Eigen::Index>(config.subjects);
    const auto g = static_cast<Eigen::Index>(config.genes);
    data.mean_expression.resize(n, g);
    data.zero_fraction.resize(n, g);
    Eigen::MatrixXd raw_zero(n, g);

    parallel_for(config.subjects, threads, [&](std::size_t i) {
        const auto row = static_cast<Eigen::Index>(i);
        for (Eigen::Index j = 0; j < g; ++j) {
            const auto gene_index = static_cast<std::size_t>(j);
            const auto params = cell_parameters(out.truth.genes[gene_index], config, data.subjects.exposure(row),
                                                data.subjects.covariates.row(row));
            Engine engine = make_stream(config.seed, {replicate, stream::kCells, i, gene_index});
            const auto draws =
                sample_zinb(params.mu, out.truth.genes[gene_index].dispersion, params.pi, config.cells, engine);
            const auto summary = summarize_cells(draws);
            data.mean_expression(row, j) = summary.mean;
            raw_zero(row, j) = summary.zero_fraction;
            data.zero_fraction(row, j) = clamp_zero_proportion(summary.zero_fraction);
        }
    });

    data.f_modeled.assign(config.genes, true);
    for (Eigen::Index j = 0; j < g; ++j) {
        const bool all_expressed = (raw_zero.col(j).array() == 0.0).all();
        const bool never_expressed = (raw_zero.col(j).array() == 1.0).all();
        data.f_modeled[static_cast<std::size_t>(j)] =
            !(all_expressed || never_expressed || is_degenerate_zero_fraction(data.zero_fraction.col(j)));
    }

    Engine noise = make_stream(config.seed, {replicate, stream::kOutcome});
    data.subjects.outcome = simulate_outcome(out.truth, data.mean_expression, data.zero_fraction, data.subjects,
                                             config.beta_x, config.beta_z, config.noise_sd, noise);
    return out;
}

}  // namespace medzisc
