#include "medzisc/io.hpp"

#include "medzisc/errors.hpp"

#include <fmt/format.h>
#include <zlib.h>

#include <algorithm>
#include <charconv>
#include <fstream>
#include <map>
#include <set>
#include <unordered_map>

namespace medzisc {

namespace {

namespace fs = std::filesystem;

double parse_number(const std::string& text, const std::string& where) {
    double value = 0.0;
    const char* begin = text.data();
    const char* end = text.data() + text.size();
    const auto [ptr, ec] = std::from_chars(begin, end, value);
    if (ec != std::errc() || ptr != end || text.empty()) {
        throw InputError(where, "'" + text + "' is not a number");
    }
    return value;
}

std::string cell_location(const std::string& source, std::size_t row, const std::string& column) {
    return source + ":" + std::to_string(row + 2) + " (" + column + ")";
}

std::string join_ids(const std::vector<std::string>& ids) {
    std::string out;
    for (std::size_t k = 0; k < ids.size(); ++k) {
        out += (k ? ", " : "") + ids[k];
    }
    return out;
}

std::string matrix_tsv(const std::vector<std::string>& row_ids, const std::string& first,
                       const std::vector<std::string>& columns, const Eigen::MatrixXd& values) {
    std::string out = first;
    for (const auto& c : columns) {
        out += '\t' + c;
    }
    out += '\n';
    for (Eigen::Index i = 0; i < values.rows(); ++i) {
        out += row_ids[static_cast<std::size_t>(i)];
        for (Eigen::Index j = 0; j < values.cols(); ++j) {
            out += '\t' + format_number(values(i, j));
        }
        out += '\n';
    }
    return out;
}

struct NamedMatrix {
    std::vector<std::string> row_ids;
    std::vector<std::string> columns;
    Eigen::MatrixXd values;
};

NamedMatrix read_matrix(const fs::path& path) {
    const TsvTable table = read_tsv(path);
    NamedMatrix m;
    m.columns.assign(table.header.begin() + 1, table.header.end());
    m.values.resize(static_cast<Eigen::Index>(table.rows.size()), static_cast<Eigen::Index>(m.columns.size()));
    for (std::size_t i = 0; i < table.rows.size(); ++i) {
        m.row_ids.push_back(table.rows[i][0]);
        for (std::size_t j = 0; j < m.columns.size(); ++j) {
            m.values(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) =
                parse_number(table.rows[i][j + 1], cell_location(path.string(), i, m.columns[j]));
        }
    }
    return m;
}

}  // namespace

std::size_t TsvTable::column(const std::string& name) const {
    const auto it = std::find(header.begin(), header.end(), name);
    if (it == header.end()) {
        throw InputError(name, "required column is missing");
    }
    return static_cast<std::size_t>(it - header.begin());
}

std::string read_text_file(const fs::path& path) {
    gzFile file = gzopen(path.string().c_str(), "rb");
    if (file == nullptr) {
        throw InputError(path.string(), "cannot open file");
    }
    std::string text;
    char buffer[1 << 16];
    int got = 0;
    while ((got = gzread(file, buffer, sizeof buffer)) > 0) {
        text.append(buffer, static_cast<std::size_t>(got));
    }
    const bool failed = got < 0;
    gzclose(file);
    if (failed) {
        throw InputError(path.string(), "read error (corrupt gzip stream?)");
    }
    return text;
}

TsvTable parse_tsv(const std::string& text, const std::string& source) {
    TsvTable table;
    std::size_t line_number = 0;
    std::size_t pos = 0;
    while (pos <= text.size()) {
        std::size_t end = text.find('\n', pos);
        if (end == std::string::npos) {
            end = text.size();
        }
        std::string line = text.substr(pos, end - pos);
        pos = end + 1;
        ++line_number;
        if (!line.empty() && line.back() == '\r') {
            line.pop_back();
        }
        if (line.empty()) {
            if (pos > text.size()) break;
            continue;
        }
        std::vector<std::string> fields;
        std::size_t start = 0;
        while (true) {
            const std::size_t tab = line.find('\t', start);
            fields.push_back(line.substr(start, tab == std::string::npos ? std::string::npos : tab - start));
            if (tab == std::string::npos) break;
            start = tab + 1;
        }
        if (table.header.empty()) {
            table.header = std::move(fields);
            continue;
        }
        if (fields.size() != table.header.size()) {
            throw InputError(source + ":" + std::to_string(line_number),
                             "expected " + std::to_string(table.header.size()) + " fields, found " +
                                 std::to_string(fields.size()));
        }
        table.rows.push_back(std::move(fields));
    }
    if (table.header.empty()) {
        throw InputError(source, "file is empty");
    }
    return table;
}

TsvTable read_tsv(const fs::path& path) { return parse_tsv(read_text_file(path), path.string()); }

std::string format_number(double value) { return fmt::format("{}", value); }

SubjectTable read_subject_metadata(const fs::path& path) {
    const TsvTable table = read_tsv(path);
    const std::size_t id_col = table.column("subject_id");
    const std::size_t x_col = table.column("X");
    const auto y_it = std::find(table.header.begin(), table.header.end(), "Y");
    const bool has_y = y_it != table.header.end();
    const std::size_t y_col = static_cast<std::size_t>(y_it - table.header.begin());

    std::vector<std::size_t> z_cols;
    SubjectTable s;
    for (std::size_t j = 0; j < table.header.size(); ++j) {
        if (j != id_col && j != x_col && !(has_y && j == y_col)) {
            z_cols.push_back(j);
            s.covariate_names.push_back(table.header[j]);
        }
    }
    const auto n = static_cast<Eigen::Index>(table.rows.size());
    s.exposure.resize(n);
    s.covariates.resize(n, static_cast<Eigen::Index>(z_cols.size()));
    Eigen::VectorXd y(n);
    std::set<std::string> seen;
    for (std::size_t i = 0; i < table.rows.size(); ++i) {
        const auto& row = table.rows[i];
        const auto r = static_cast<Eigen::Index>(i);
        if (!seen.insert(row[id_col]).second) {
            throw InputError("subject_id", "duplicate subject '" + row[id_col] + "'");
        }
        s.ids.push_back(row[id_col]);
        s.exposure(r) = parse_number(row[x_col], cell_location(path.string(), i, "X"));
        for (std::size_t k = 0; k < z_cols.size(); ++k) {
            s.covariates(r, static_cast<Eigen::Index>(k)) =
                parse_number(row[z_cols[k]], cell_location(path.string(), i, table.header[z_cols[k]]));
        }
        if (has_y) {
            y(r) = parse_number(row[y_col], cell_location(path.string(), i, "Y"));
        }
    }
    if (has_y) {
        s.outcome = y;
    }
    s.validate();
    return s;
}

void write_subject_metadata(const fs::path& path, const SubjectTable& s) {
    std::string out = "subject_id\tX";
    for (const auto& name : s.covariate_names) {
        out += '\t' + name;
    }
    if (s.outcome) {
        out += "\tY";
    }
    out += '\n';
    for (std::size_t i = 0; i < s.size(); ++i) {
        const auto r = static_cast<Eigen::Index>(i);
        out += s.ids[i] + '\t' + format_number(s.exposure(r));
        for (Eigen::Index k = 0; k < s.covariates.cols(); ++k) {
            out += '\t' + format_number(s.covariates(r, k));
        }
        if (s.outcome) {
            out += '\t' + format_number((*s.outcome)(r));
        }
        out += '\n';
    }
    write_text_file(path, out);
}

CellCountMatrix read_counts_matrix(const fs::path& path, const std::string& subject_id) {
    NamedMatrix m = read_matrix(path);
    CellCountMatrix out;
    out.subject_id = subject_id;
    out.gene_names = std::move(m.columns);
    out.counts = std::move(m.values);
    out.validate();
    return out;
}

void write_counts_matrix(const fs::path& path, const CellCountMatrix& matrix) {
    std::vector<std::string> cells;
    for (Eigen::Index c = 0; c < matrix.counts.rows(); ++c) {
        cells.push_back("cell" + std::to_string(c + 1));
    }
    write_text_file(path, matrix_tsv(cells, "cell_id", matrix.gene_names, matrix.counts));
}

std::vector<CellCountMatrix> read_counts_directory(const fs::path& dir, const SubjectTable& subjects) {
    std::vector<CellCountMatrix> out;
    std::vector<std::string> missing;
    for (const auto& id : subjects.ids) {
        fs::path file = dir / (id + ".tsv");
        if (!fs::exists(file)) {
            file = dir / (id + ".tsv.gz");
        }
        if (!fs::exists(file)) {
            missing.push_back(id);
            continue;
        }
        out.push_back(read_counts_matrix(file, id));
    }
    if (!missing.empty()) {
        throw StructuralError("no counts file for subjects: " + join_ids(missing));
    }
    return out;
}

std::vector<CellCountMatrix> read_long_counts(const fs::path& path) {
    const TsvTable table = read_tsv(path);
    const std::size_t s_col = table.column("subject_id");
    const std::size_t c_col = table.column("cell_id");
    const std::size_t g_col = table.column("gene");
    const std::size_t n_col = table.column("count");

    std::vector<std::string> genes;
    std::unordered_map<std::string, Eigen::Index> gene_index;
    struct Subject {
        std::vector<std::string> cells;
        std::unordered_map<std::string, Eigen::Index> cell_index;
        std::vector<std::tuple<Eigen::Index, Eigen::Index, double>> entries;
    };
    std::vector<std::string> order;
    std::map<std::string, Subject> subjects;

    for (std::size_t i = 0; i < table.rows.size(); ++i) {
        const auto& row = table.rows[i];
        const double count = parse_number(row[n_col], cell_location(path.string(), i, "count"));
        auto [g_it, new_gene] = gene_index.try_emplace(row[g_col], static_cast<Eigen::Index>(genes.size()));
        if (new_gene) {
            genes.push_back(row[g_col]);
        }
        auto [s_it, new_subject] = subjects.try_emplace(row[s_col]);
        if (new_subject) {
            order.push_back(row[s_col]);
        }
        Subject& subject = s_it->second;
        auto [c_it, new_cell] = subject.cell_index.try_emplace(row[c_col], static_cast<Eigen::Index>(subject.cells.size()));
        if (new_cell) {
            subject.cells.push_back(row[c_col]);
        }
        subject.entries.emplace_back(c_it->second, g_it->second, count);
    }

    std::vector<CellCountMatrix> out;
    for (const auto& id : order) {
        const Subject& subject = subjects.at(id);
        CellCountMatrix m;
        m.subject_id = id;
        m.gene_names = genes;
        m.counts = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(subject.cells.size()),
                                         static_cast<Eigen::Index>(genes.size()));
        for (const auto& [c, g, v] : subject.entries) {
            m.counts(c, g) += v;
        }
        m.validate();
        out.push_back(std::move(m));
    }
    return out;
}

void write_long_counts(const fs::path& path, const std::vector<CellCountMatrix>& cells) {
    std::string out = "subject_id\tcell_id\tgene\tcount\n";
    // Zeros are implicit, except that each subject's first cell lists every gene
    // (fixing gene order and keeping unexpressed genes) and an all-zero cell
    // keeps one explicit entry so that it is still counted.
    for (const auto& m : cells) {
        for (Eigen::Index c = 0; c < m.counts.rows(); ++c) {
            const bool empty_cell = (m.counts.row(c).array() == 0.0).all();
            for (Eigen::Index g = 0; g < m.counts.cols(); ++g) {
                if (m.counts(c, g) != 0.0 || c == 0 || (empty_cell && g == 0)) {
                    out += m.subject_id + "\tcell" + std::to_string(c + 1) + '\t' +
                           m.gene_names[static_cast<std::size_t>(g)] + '\t' + format_number(m.counts(c, g)) + '\n';
                }
            }
        }
    }
    write_text_file(path, out);
}

void check_subjects_match(const SubjectTable& subjects, const std::vector<CellCountMatrix>& cells) {
    const std::set<std::string> meta(subjects.ids.begin(), subjects.ids.end());
    std::set<std::string> counted;
    for (const auto& m : cells) {
        counted.insert(m.subject_id);
    }
    std::vector<std::string> no_counts, no_metadata;
    for (const auto& id : subjects.ids) {
        if (!counted.count(id)) no_counts.push_back(id);
    }
    for (const auto& m : cells) {
        if (!meta.count(m.subject_id)) no_metadata.push_back(m.subject_id);
    }
    if (no_counts.empty() && no_metadata.empty()) {
        return;
    }
    std::string message = "subjects differ between counts and metadata";
    if (!no_counts.empty()) message += "; no counts for: " + join_ids(no_counts);
    if (!no_metadata.empty()) message += "; no metadata for: " + join_ids(no_metadata);
    throw StructuralError(message);
}

void write_pseudobulk(const fs::path& dir, const PseudobulkDataset& d) {
    write_text_file(dir / "M.tsv", matrix_tsv(d.subjects.ids, "subject_id", d.gene_names, d.mean_expression));
    write_text_file(dir / "F.tsv", matrix_tsv(d.subjects.ids, "subject_id", d.gene_names, d.zero_fraction));
    std::string flags = "gene\tf_modeled\n";
    for (std::size_t g = 0; g < d.gene_names.size(); ++g) {
        flags += d.gene_names[g] + '\t' + (d.f_modeled[g] ? "true" : "false") + '\n';
    }
    write_text_file(dir / "gene_flags.tsv", flags);
}

PseudobulkDataset read_pseudobulk(const fs::path& mean_path, const fs::path& zero_path, const SubjectTable& subjects,
                                  const fs::path& flags_path) {
    NamedMatrix m = read_matrix(mean_path);
    NamedMatrix f = read_matrix(zero_path);
    if (m.columns != f.columns) {
        throw StructuralError("M and F matrices list different genes");
    }
    if (m.row_ids != f.row_ids) {
        throw StructuralError("M and F matrices list different subjects");
    }
    // Reorder rows to the metadata order.
    std::unordered_map<std::string, Eigen::Index> row_of;
    for (std::size_t i = 0; i < m.row_ids.size(); ++i) {
        row_of[m.row_ids[i]] = static_cast<Eigen::Index>(i);
    }
    std::vector<std::string> missing;
    for (const auto& id : subjects.ids) {
        if (!row_of.count(id)) missing.push_back(id);
    }
    std::vector<std::string> extra;
    const std::set<std::string> meta(subjects.ids.begin(), subjects.ids.end());
    for (const auto& id : m.row_ids) {
        if (!meta.count(id)) extra.push_back(id);
    }
    if (!missing.empty() || !extra.empty()) {
        std::string message = "subjects differ between M/F matrices and metadata";
        if (!missing.empty()) message += "; no M/F rows for: " + join_ids(missing);
        if (!extra.empty()) message += "; no metadata for: " + join_ids(extra);
        throw StructuralError(message);
    }

    PseudobulkDataset d;
    d.subjects = subjects;
    d.gene_names = m.columns;
    const auto n = static_cast<Eigen::Index>(subjects.size());
    const auto g = static_cast<Eigen::Index>(d.gene_names.size());
    d.mean_expression.resize(n, g);
    d.zero_fraction.resize(n, g);
    for (Eigen::Index i = 0; i < n; ++i) {
        const Eigen::Index src = row_of.at(subjects.ids[static_cast<std::size_t>(i)]);
        d.mean_expression.row(i) = m.values.row(src);
        for (Eigen::Index j = 0; j < g; ++j) {
            d.zero_fraction(i, j) = clamp_zero_proportion(f.values(src, j));
        }
    }

    d.f_modeled.assign(d.gene_names.size(), true);
    if (!flags_path.empty()) {
        const TsvTable flags = read_tsv(flags_path);
        const std::size_t gene_col = flags.column("gene");
        const std::size_t flag_col = flags.column("f_modeled");
        std::unordered_map<std::string, bool> flag_of;
        for (const auto& row : flags.rows) {
            if (row[flag_col] != "true" && row[flag_col] != "false") {
                throw InputError("f_modeled", "expected true or false, got '" + row[flag_col] + "'");
            }
            flag_of[row[gene_col]] = row[flag_col] == "true";
        }
        for (std::size_t j = 0; j < d.gene_names.size(); ++j) {
            auto it = flag_of.find(d.gene_names[j]);
            if (it == flag_of.end()) {
                throw StructuralError("gene flags file has no entry for " + d.gene_names[j]);
            }
            d.f_modeled[j] = it->second;
        }
    }
    for (Eigen::Index j = 0; j < g; ++j) {
        if (is_degenerate_zero_fraction(d.zero_fraction.col(j))) {
            d.f_modeled[static_cast<std::size_t>(j)] = false;
        }
    }
    d.validate();
    return d;
}

void write_truth(const fs::path& path, const SimulationTruth& truth) {
    std::string out = "gene\tmediator_type\talpha_x\tgamma_x\tbeta_m\tbeta_f\tdispersion\n";
    for (std::size_t g = 0; g < truth.genes.size(); ++g) {
        const GeneTruth& t = truth.genes[g];
        out += truth.gene_names[g] + '\t' + to_string(t.type) + '\t' + format_number(t.alpha_x) + '\t' +
               format_number(t.gamma_x) + '\t' + format_number(t.beta_m) + '\t' + format_number(t.beta_f) + '\t' +
               format_number(t.dispersion) + '\n';
    }
    write_text_file(path, out);
}

SimulationTruth read_truth(const fs::path& path) {
    const TsvTable table = read_tsv(path);
    const std::string source = path.string();
    SimulationTruth truth;
    for (std::size_t i = 0; i < table.rows.size(); ++i) {
        const auto& row = table.rows[i];
        auto num = [&](const char* name) { return parse_number(row[table.column(name)], cell_location(source, i, name)); };
        GeneTruth t;
        t.type = mediator_type_from_string(row[table.column("mediator_type")]);
        t.alpha_x = num("alpha_x");
        t.gamma_x = num("gamma_x");
        t.beta_m = num("beta_m");
        t.beta_f = num("beta_f");
        t.dispersion = num("dispersion");
        if (t.type == MediatorType::Both || t.type == MediatorType::MOnly) truth.m_family.push_back(i);
        if (t.type == MediatorType::Both || t.type == MediatorType::FOnly) truth.f_family.push_back(i);
        truth.gene_names.push_back(row[table.column("gene")]);
        truth.genes.push_back(t);
    }
    return truth;
}

void write_text_file(const fs::path& path, const std::string& text) {
    if (path.has_parent_path()) {
        fs::create_directories(path.parent_path());
    }
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) {
        throw Error("cannot open " + path.string() + " for writing");
    }
    out << text;
    if (!out) {
        throw Error("failed writing " + path.string());
    }
}

}  // namespace medzisc
