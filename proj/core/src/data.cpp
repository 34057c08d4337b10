#include "medzisc/data.hpp"

#include "medzisc/errors.hpp"
#include "medzisc/parallel.hpp"

#include <algorithm>
#include <cmath>
#include <string>
#include <unordered_map>

namespace medzisc {

void SubjectTable::validate() const {
    const auto n = static_cast<Eigen::Index>(ids.size());
    if (exposure.size() != n) {
        throw StructuralError("subject table: exposure has " + std::to_string(exposure.size()) +
                              " entries for " + std::to_string(n) + " subjects");
    }
    if (covariates.rows() != n) {
        throw StructuralError("subject table: covariate matrix has " + std::to_string(covariates.rows()) +
                              " rows for " + std::to_string(n) + " subjects");
    }
    if (static_cast<Eigen::Index>(covariate_names.size()) != covariates.cols()) {
        throw StructuralError("subject table: covariate names do not match covariate columns");
    }
    if (outcome && outcome->size() != n) {
        throw StructuralError("subject table: outcome has " + std::to_string(outcome->size()) +
                              " entries for " + std::to_string(n) + " subjects");
    }
    if (!exposure.allFinite()) {
        throw DomainError("subject table: exposure X contains missing or non-finite values");
    }
    if (!covariates.allFinite()) {
        throw DomainError("subject table: covariates contain missing or non-finite values");
    }
}

void SubjectTable::require_outcome() const {
    validate();
    if (!outcome) {
        throw InputError("Y", "outcome column is required for analysis");
    }
    if (!outcome->allFinite()) {
        throw DomainError("subject table: outcome Y contains missing or non-finite values");
    }
}

void CellCountMatrix::validate() const {
    if (counts.rows() < 1) {
        throw StructuralError("subject " + subject_id + " has no cells");
    }
    if (static_cast<Eigen::Index>(gene_names.size()) != counts.cols()) {
        throw StructuralError("subject " + subject_id + ": gene names do not match count columns");
    }
    if (!counts.allFinite() || (counts.array() < 0.0).any()) {
        throw DomainError("subject " + subject_id + ": counts must be finite and nonnegative");
    }
}

void PseudobulkDataset::validate() const {
    subjects.validate();
    const auto n = static_cast<Eigen::Index>(subjects.size());
    const auto g = static_cast<Eigen::Index>(gene_names.size());
    if (mean_expression.rows() != n || mean_expression.cols() != g || zero_fraction.rows() != n ||
        zero_fraction.cols() != g) {
        throw StructuralError("pseudobulk dataset: M/F matrices must be subjects x genes");
    }
    if (f_modeled.size() != gene_names.size()) {
        throw StructuralError("pseudobulk dataset: f_modeled must have one flag per gene");
    }
    if (!mean_expression.allFinite() || (mean_expression.array() < 0.0).any()) {
        throw DomainError("pseudobulk dataset: M must be finite and nonnegative");
    }
    if (!zero_fraction.allFinite() || (zero_fraction.array() < kZeroFractionFloor).any() ||
        (zero_fraction.array() > kZeroFractionCeiling).any()) {
        throw DomainError("pseudobulk dataset: F must lie in [0.001, 0.999]");
    }
}

CellSummary summarize_cells(std::span<const double> values) {
    if (values.empty()) {
        throw StructuralError("cannot summarize an empty cell vector");
    }
    double sum = 0.0;
    std::size_t zeros = 0;
    for (double v : values) {
        sum += v;
        zeros += (v == 0.0);
    }
    const auto cells = static_cast<double>(values.size());
    return {sum / cells, static_cast<double>(zeros) / cells};
}

double clamp_zero_proportion(double f) {
    if (!(f >= 0.0 && f <= 1.0)) {
        throw DomainError("zero proportion must lie in [0, 1], got " + std::to_string(f));
    }
    return std::min(std::max(f, kZeroFractionFloor), kZeroFractionCeiling);
}

bool is_degenerate_zero_fraction(const Eigen::Ref<const Eigen::VectorXd>& column) {
    if (column.size() == 0) {
        return true;
    }
    const bool all_floor = (column.array() <= kZeroFractionFloor).all();
    const bool all_ceiling = (column.array() >= kZeroFractionCeiling).all();
    return all_floor || all_ceiling;
}

PseudobulkDataset aggregate_pseudobulk(const std::vector<CellCountMatrix>& cells,
                                       const SubjectTable& subjects,
                                       int threads) {
    subjects.validate();
    if (subjects.size() == 0) {
        throw StructuralError("aggregation needs at least one subject");
    }

    std::unordered_map<std::string, std::size_t> by_subject;
    for (std::size_t k = 0; k < cells.size(); ++k) {
        if (!by_subject.emplace(cells[k].subject_id, k).second) {
            throw StructuralError("duplicate cell matrix for subject " + cells[k].subject_id);
        }
    }

    std::vector<std::size_t> source(subjects.size());
    std::vector<std::string> missing;
    for (std::size_t i = 0; i < subjects.size(); ++i) {
        auto it = by_subject.find(subjects.ids[i]);
        if (it == by_subject.end()) {
            missing.push_back(subjects.ids[i]);
        } else {
            source[i] = it->second;
        }
    }
    if (!missing.empty()) {
        std::string list;
        for (const auto& id : missing) {
            list += (list.empty() ? "" : ", ") + id;
        }
        throw StructuralError("subjects without cell counts: " + list);
    }

    const auto& genes = cells[source.front()].gene_names;
    for (std::size_t i = 0; i < subjects.size(); ++i) {
        const auto& matrix = cells[source[i]];
        matrix.validate();
        if (matrix.gene_names != genes) {
            throw StructuralError("gene list of subject " + matrix.subject_id +
                                  " differs from subject " + cells[source.front()].subject_id);
        }
    }

    const auto n = static_cast<Eigen::Index>(subjects.size());
    const auto g = static_cast<Eigen::Index>(genes.size());
    PseudobulkDataset out;
    out.subjects = subjects;
    out.gene_names = genes;
    out.mean_expression.resize(n, g);
    out.zero_fraction.resize(n, g);
    Eigen::MatrixXd raw_zero(n, g);

    parallel_for(subjects.size(), threads, [&](std::size_t i) {
        const auto& counts = cells[source[i]].counts;
        const auto row = static_cast<Eigen::Index>(i);
        for (Eigen::Index j = 0; j < g; ++j) {
            const Eigen::VectorXd column = counts.col(j);
            const auto summary = summarize_cells({column.data(), static_cast<std::size_t>(column.size())});
            out.mean_expression(row, j) = summary.mean;
            raw_zero(row, j) = summary.zero_fraction;
            out.zero_fraction(row, j) = clamp_zero_proportion(summary.zero_fraction);
        }
    });

    out.f_modeled.assign(genes.size(), true);
    for (Eigen::Index j = 0; j < g; ++j) {
        const bool all_expressed = (raw_zero.col(j).array() == 0.0).all();
        const bool never_expressed = (raw_zero.col(j).array() == 1.0).all();
        out.f_modeled[static_cast<std::size_t>(j)] =
            !(all_expressed || never_expressed || is_degenerate_zero_fraction(out.zero_fraction.col(j)));
    }
    return out;
}

FilterResult filter_degenerate_genes(const PseudobulkDataset& dataset) {
    FilterResult result;
    std::vector<Eigen::Index> keep;
    for (std::size_t j = 0; j < dataset.gene_count(); ++j) {
        const auto col = static_cast<Eigen::Index>(j);
        if ((dataset.mean_expression.col(col).array() <= 0.0).all()) {
            result.report.removed.push_back(dataset.gene_names[j]);
        } else {
            keep.push_back(col);
        }
    }

    auto& out = result.dataset;
    out.subjects = dataset.subjects;
    const auto n = dataset.mean_expression.rows();
    out.mean_expression.resize(n, static_cast<Eigen::Index>(keep.size()));
    out.zero_fraction.resize(n, static_cast<Eigen::Index>(keep.size()));
    for (std::size_t k = 0; k < keep.size(); ++k) {
        const auto dst = static_cast<Eigen::Index>(k);
        const auto src = keep[k];
        out.mean_expression.col(dst) = dataset.mean_expression.col(src);
        out.zero_fraction.col(dst) = dataset.zero_fraction.col(src);
        out.gene_names.push_back(dataset.gene_names[static_cast<std::size_t>(src)]);

        bool modeled = dataset.f_modeled[static_cast<std::size_t>(src)];
        if (modeled && is_degenerate_zero_fraction(out.zero_fraction.col(dst))) {
            modeled = false;
        }
        if (!modeled) {
            result.report.f_dropped.push_back(out.gene_names.back());
        }
        out.f_modeled.push_back(modeled);
    }
    return result;
}

}  // namespace medzisc
