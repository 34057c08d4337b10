#ifndef MEDZISC_DATA_HPP
#define MEDZISC_DATA_HPP

#include <Eigen/Dense>

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace medzisc {

/// Lower and upper bound applied to subject-level zero proportions before beta regression.
inline constexpr double kZeroFractionFloor = 0.001;
inline constexpr double kZeroFractionCeiling = 0.999;

/**
 * Subject-level exposure, covariates and (optionally) outcome.
 *
 * Row i of `covariates` belongs to `ids[i]`. The outcome may be absent while
 * data is being ingested; it must be present before any outcome model is fit.
 */
struct SubjectTable {
    std::vector<std::string> ids;
    Eigen::VectorXd exposure;
    Eigen::MatrixXd covariates;  // n x K
    std::vector<std::string> covariate_names;
    std::optional<Eigen::VectorXd> outcome;

    std::size_t size() const { return ids.size(); }
    Eigen::Index covariate_count() const { return covariates.cols(); }

    /// Throws StructuralError on ragged fields, DomainError on non-finite values.
    void validate() const;
    /// validate() plus a populated, finite outcome.
    void require_outcome() const;
};

/// Cell-by-gene counts for one subject. Values are nonnegative; exact zeros count as zeros.
struct CellCountMatrix {
    std::string subject_id;
    Eigen::MatrixXd counts;  // cells x genes
    std::vector<std::string> gene_names;

    void validate() const;
};

/**
 * Analysis-ready co-mediators: per subject and gene, the mean expression (M)
 * and the clamped proportion of zero cells (F).
 */
struct PseudobulkDataset {
    SubjectTable subjects;
    Eigen::MatrixXd mean_expression;  // n x G
    Eigen::MatrixXd zero_fraction;    // n x G, entries in [0.001, 0.999]
    std::vector<std::string> gene_names;
    std::vector<bool> f_modeled;      // false when F_g carries no variation

    std::size_t gene_count() const { return gene_names.size(); }
    std::size_t subject_count() const { return subjects.size(); }

    void validate() const;
};

/// Genes touched by filter_degenerate_genes.
struct FilterReport {
    std::vector<std::string> removed;    // no expression in any subject
    std::vector<std::string> f_dropped;  // F constant at a boundary, kept for M only
};

struct FilterResult {
    PseudobulkDataset dataset;
    FilterReport report;
};

/// Mean and raw (unclamped) zero fraction of one subject-gene cell vector.
struct CellSummary {
    double mean = 0.0;
    double zero_fraction = 0.0;
};

CellSummary summarize_cells(std::span<const double> values);

/// min(max(f, 0.001), 0.999). Throws DomainError unless 0 <= f <= 1.
double clamp_zero_proportion(double f);

/// True when a clamped F column sits on one boundary for every subject.
bool is_degenerate_zero_fraction(const Eigen::Ref<const Eigen::VectorXd>& column);

/**
 * Collapse cell-level counts into subject-level M and F.
 *
 * `cells` is matched to `subjects` by subject id; the output row order follows
 * `subjects`. Each subject uses its own cell count. `threads` bounds the
 * per-subject parallelism (0 = library default).
 */
PseudobulkDataset aggregate_pseudobulk(const std::vector<CellCountMatrix>& cells,
                                       const SubjectTable& subjects,
                                       int threads = 0);

/// Remove never-expressed genes and turn off the F path where it cannot vary.
FilterResult filter_degenerate_genes(const PseudobulkDataset& dataset);

}  // namespace medzisc

#endif  // MEDZISC_DATA_HPP
