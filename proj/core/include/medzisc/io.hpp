#ifndef MEDZISC_IO_HPP
#define MEDZISC_IO_HPP

#include "medzisc/data.hpp"
#include "medzisc/simulation.hpp"

#include <filesystem>
#include <string>
#include <vector>

namespace medzisc {

/*
 * Plain TSV files, one header line, tab separated. Every reader accepts gzip
 * input transparently. Numbers are written in shortest round-trip form, so
 * equal data always produce identical bytes. Column layouts are described in
 * docs/file-formats.md.
 */

struct TsvTable {
    std::vector<std::string> header;
    std::vector<std::vector<std::string>> rows;

    /// Column position of `name`; InputError naming the column when absent.
    std::size_t column(const std::string& name) const;
};

/// Read a whole (possibly gzip-compressed) file.
std::string read_text_file(const std::filesystem::path& path);
TsvTable parse_tsv(const std::string& text, const std::string& source);
TsvTable read_tsv(const std::filesystem::path& path);

/// Number in shortest round-trip form.
std::string format_number(double value);

/// subject_id, X, covariates..., optional Y. Every column other than subject_id, X and Y is a covariate.
SubjectTable read_subject_metadata(const std::filesystem::path& path);
void write_subject_metadata(const std::filesystem::path& path, const SubjectTable& subjects);

/// One subject: header cell_id, gene..., one row per cell.
CellCountMatrix read_counts_matrix(const std::filesystem::path& path, const std::string& subject_id);
void write_counts_matrix(const std::filesystem::path& path, const CellCountMatrix& matrix);

/// Counts for every subject from `<dir>/<subject_id>.tsv[.gz]`; StructuralError lists missing subjects.
std::vector<CellCountMatrix> read_counts_directory(const std::filesystem::path& dir, const SubjectTable& subjects);

/**
 * Long format: subject_id, cell_id, gene, count. (cell, gene) pairs that do not
 * appear are zero. Genes and cells keep their order of first appearance, so a
 * cell without any row does not exist. The writer lists every gene for each
 * subject's first cell and one zero entry for every other all-zero cell, which
 * makes write/read an exact round trip.
 */
std::vector<CellCountMatrix> read_long_counts(const std::filesystem::path& path);
void write_long_counts(const std::filesystem::path& path, const std::vector<CellCountMatrix>& cells);

/// Throws StructuralError listing subjects present on one side only.
void check_subjects_match(const SubjectTable& subjects, const std::vector<CellCountMatrix>& cells);

/// M.tsv, F.tsv (subject_id, gene...) and gene_flags.tsv (gene, f_modeled) in `dir`.
void write_pseudobulk(const std::filesystem::path& dir, const PseudobulkDataset& dataset);

/**
 * Rebuild a dataset from M/F matrices and metadata. F values are clamped on
 * read. Without a flags file, f_modeled is recomputed from F.
 */
PseudobulkDataset read_pseudobulk(const std::filesystem::path& mean_path, const std::filesystem::path& zero_path,
                                  const SubjectTable& subjects, const std::filesystem::path& flags_path = {});

/// gene, mediator_type, alpha_x, gamma_x, beta_m, beta_f, dispersion.
void write_truth(const std::filesystem::path& path, const SimulationTruth& truth);
SimulationTruth read_truth(const std::filesystem::path& path);

/// Write `text` to `path`, creating parent directories.
void write_text_file(const std::filesystem::path& path, const std::string& text);

}  // namespace medzisc

#endif  // MEDZISC_IO_HPP
