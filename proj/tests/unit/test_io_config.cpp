#include "test_support.hpp"

#include <medzisc/config.hpp>
#include <medzisc/errors.hpp>
#include <medzisc/io.hpp>
#include <medzisc/report.hpp>

#include <gtest/gtest.h>
#include <zlib.h>

#include <set>

namespace medzisc {
namespace {

using nlohmann::json;

void gzip_file(const std::filesystem::path& path, const std::string& text) {
    gzFile out = gzopen(path.string().c_str(), "wb");
    ASSERT_NE(out, nullptr);
    ASSERT_EQ(gzwrite(out, text.data(), static_cast<unsigned>(text.size())), static_cast<int>(text.size()));
    gzclose(out);
}

std::string input_field(const std::function<void()>& f) {
    try {
        f();
    } catch (const InputError& e) {
        return e.field();
    }
    return "<none>";
}

// TSV

TEST(Tsv, ParsesHeaderAndRows) {
    const TsvTable t = parse_tsv("a\tb\n1\t2\n\n3\t4\n", "mem");
    EXPECT_EQ(t.header, (std::vector<std::string>{"a", "b"}));
    ASSERT_EQ(t.rows.size(), 2u);
    EXPECT_EQ(t.rows[1][0], "3");
    EXPECT_EQ(t.column("b"), 1u);
    EXPECT_EQ(input_field([&] { t.column("c"); }), "c");
}

TEST(Tsv, RaggedRowNamesLine) {
    try {
        parse_tsv("a\tb\n1\t2\n3\n", "mem");
        FAIL();
    } catch (const InputError& e) {
        EXPECT_EQ(e.field(), "mem:3");
    }
    EXPECT_THROW(parse_tsv("", "mem"), InputError);
}

TEST(Tsv, GzipIsTransparent) {
    test::TempDir dir;
    const std::string text = "subject_id\tX\tZ1\tY\ns1\t0\t0.5\t1.25\ns2\t1\t-1\t2\n";
    test::spit(dir / "meta.tsv", text);
    gzip_file(dir / "meta.tsv.gz", text);
    EXPECT_EQ(read_text_file(dir / "meta.tsv.gz"), text);
    const SubjectTable a = read_subject_metadata(dir / "meta.tsv");
    const SubjectTable b = read_subject_metadata(dir / "meta.tsv.gz");
    EXPECT_EQ(a.ids, b.ids);
    EXPECT_EQ(a.covariates, b.covariates);
    EXPECT_EQ(*a.outcome, *b.outcome);
}

TEST(Tsv, MissingFileIsInputError) {
    EXPECT_THROW(read_text_file("/nonexistent/medzisc/file.tsv"), InputError);
}

TEST(FormatNumber, ShortestRoundTrip) {
    EXPECT_EQ(format_number(0.1), "0.1");
    EXPECT_EQ(format_number(3.0), "3");
    Engine engine(5);
    for (double v : test::normal_vector(200, engine)) {
        const double x = v * 1e3;
        EXPECT_EQ(std::stod(format_number(x)), x);
    }
}

// Metadata

TEST(Metadata, RoundTripWithAndWithoutOutcome) {
    test::TempDir dir;
    Engine engine(1);
    SubjectTable s = test::make_subjects(7, engine, 3);
    s.outcome = test::normal_vector(7, engine);
    write_subject_metadata(dir / "m.tsv", s);
    const SubjectTable r = read_subject_metadata(dir / "m.tsv");
    EXPECT_EQ(r.ids, s.ids);
    EXPECT_EQ(r.exposure, s.exposure);
    EXPECT_EQ(r.covariates, s.covariates);
    EXPECT_EQ(r.covariate_names, s.covariate_names);
    EXPECT_EQ(*r.outcome, *s.outcome);

    s.outcome.reset();
    write_subject_metadata(dir / "n.tsv", s);
    EXPECT_FALSE(read_subject_metadata(dir / "n.tsv").outcome.has_value());
}

TEST(Metadata, Errors) {
    test::TempDir dir;
    test::spit(dir / "nox.tsv", "subject_id\tZ1\ns1\t0\n");
    EXPECT_EQ(input_field([&] { read_subject_metadata(dir / "nox.tsv"); }), "X");
    test::spit(dir / "dup.tsv", "subject_id\tX\ns1\t0\ns1\t1\n");
    EXPECT_EQ(input_field([&] { read_subject_metadata(dir / "dup.tsv"); }), "subject_id");
    test::spit(dir / "nan.tsv", "subject_id\tX\ns1\tabc\n");
    EXPECT_THROW(read_subject_metadata(dir / "nan.tsv"), InputError);
    test::spit(dir / "noy.tsv", "subject_id\tX\ns1\t0\n");
    try {
        read_subject_metadata(dir / "noy.tsv").require_outcome();
        FAIL();
    } catch (const InputError& e) {
        EXPECT_EQ(e.field(), "Y");
    }
}

// Counts

std::vector<CellCountMatrix> small_counts(const SubjectTable& s) {
    std::vector<CellCountMatrix> out;
    for (std::size_t i = 0; i < s.size(); ++i) {
        CellCountMatrix m;
        m.subject_id = s.ids[i];
        m.gene_names = {"a", "b", "c"};
        m.counts.resize(static_cast<Eigen::Index>(2 + i), 3);
        for (Eigen::Index r = 0; r < m.counts.rows(); ++r) {
            m.counts.row(r) << static_cast<double>(r), 0.0, static_cast<double>((r + static_cast<Eigen::Index>(i)) % 3);
        }
        out.push_back(m);
    }
    return out;
}

TEST(Counts, DirectoryRoundTrip) {
    test::TempDir dir;
    Engine engine(2);
    const SubjectTable s = test::make_subjects(3, engine);
    const auto cells = small_counts(s);
    for (const auto& m : cells) write_counts_matrix(dir / "counts" / (m.subject_id + ".tsv"), m);
    const auto back = read_counts_directory(dir / "counts", s);
    ASSERT_EQ(back.size(), 3u);
    for (std::size_t i = 0; i < 3; ++i) {
        EXPECT_EQ(back[i].subject_id, cells[i].subject_id);
        EXPECT_EQ(back[i].gene_names, cells[i].gene_names);
        EXPECT_EQ(back[i].counts, cells[i].counts);
    }
}

TEST(Counts, MissingSubjectFileListsIds) {
    test::TempDir dir;
    Engine engine(3);
    const SubjectTable s = test::make_subjects(3, engine);
    const auto cells = small_counts(s);
    write_counts_matrix(dir / "c" / (cells[0].subject_id + ".tsv"), cells[0]);
    try {
        read_counts_directory(dir / "c", s);
        FAIL();
    } catch (const StructuralError& e) {
        EXPECT_NE(std::string(e.what()).find(s.ids[1]), std::string::npos);
        EXPECT_NE(std::string(e.what()).find(s.ids[2]), std::string::npos);
    }
}

TEST(Counts, LongFormatRoundTripAndImplicitZeros) {
    test::TempDir dir;
    Engine engine(4);
    const SubjectTable s = test::make_subjects(2, engine);
    const auto cells = small_counts(s);
    write_long_counts(dir / "long.tsv", cells);
    const auto back = read_long_counts(dir / "long.tsv");
    ASSERT_EQ(back.size(), 2u);
    for (std::size_t i = 0; i < 2; ++i) {
        EXPECT_EQ(back[i].subject_id, cells[i].subject_id);
        EXPECT_EQ(back[i].gene_names, cells[i].gene_names);
        EXPECT_EQ(back[i].counts, cells[i].counts);  // includes all-zero cells and the all-zero gene
    }

    test::spit(dir / "sparse.tsv", "subject_id\tcell_id\tgene\tcount\ns1\tc1\tg1\t4\ns1\tc2\tg2\t1\n");
    const auto sparse = read_long_counts(dir / "sparse.tsv");
    ASSERT_EQ(sparse.size(), 1u);
    Eigen::MatrixXd expected(2, 2);
    expected << 4, 0, 0, 1;
    EXPECT_EQ(sparse[0].counts, expected);
    EXPECT_EQ(sparse[0].gene_names, (std::vector<std::string>{"g1", "g2"}));
}

TEST(Counts, SubjectMismatchNamesBothSides) {
    Engine engine(5);
    const SubjectTable s = test::make_subjects(3, engine);
    auto cells = small_counts(s);
    cells[2].subject_id = "stranger";
    try {
        check_subjects_match(s, cells);
        FAIL();
    } catch (const StructuralError& e) {
        const std::string what = e.what();
        EXPECT_NE(what.find(s.ids[2]), std::string::npos);
        EXPECT_NE(what.find("stranger"), std::string::npos);
    }
    EXPECT_NO_THROW(check_subjects_match(s, small_counts(s)));
}

// Pseudobulk and truth

TEST(Pseudobulk, WriteReadRoundTrip) {
    test::TempDir dir;
    const SimulatedPseudobulk sim = generate_pseudobulk_replicate(test::small_scenario(20, 10, 10), 0);
    PseudobulkDataset d = filter_degenerate_genes(sim.dataset).dataset;
    d.f_modeled[1] = false;
    write_pseudobulk(dir.path(), d);
    const PseudobulkDataset r = read_pseudobulk(dir / "M.tsv", dir / "F.tsv", d.subjects, dir / "gene_flags.tsv");
    EXPECT_EQ(r.gene_names, d.gene_names);
    EXPECT_EQ(r.mean_expression, d.mean_expression);
    EXPECT_EQ(r.zero_fraction, d.zero_fraction);
    EXPECT_EQ(r.f_modeled, d.f_modeled);

    // Writing is byte-stable.
    test::TempDir again;
    write_pseudobulk(again.path(), r);
    EXPECT_EQ(test::slurp(dir / "M.tsv"), test::slurp(again / "M.tsv"));
    EXPECT_EQ(test::slurp(dir / "F.tsv"), test::slurp(again / "F.tsv"));
}

TEST(Pseudobulk, RowsFollowMetadataOrderAndFIsClamped) {
    test::TempDir dir;
    test::spit(dir / "M.tsv", "subject_id\tg1\ns2\t2\ns1\t1\n");
    test::spit(dir / "F.tsv", "subject_id\tg1\ns2\t0\ns1\t1\n");
    SubjectTable s;
    s.ids = {"s1", "s2"};
    s.exposure = Eigen::Vector2d(0, 1);
    s.covariates.resize(2, 0);
    const PseudobulkDataset d = read_pseudobulk(dir / "M.tsv", dir / "F.tsv", s);
    EXPECT_EQ(d.mean_expression(0, 0), 1.0);
    EXPECT_EQ(d.zero_fraction(0, 0), kZeroFractionCeiling);
    EXPECT_EQ(d.zero_fraction(1, 0), kZeroFractionFloor);

    s.ids = {"s1", "s3"};
    try {
        read_pseudobulk(dir / "M.tsv", dir / "F.tsv", s);
        FAIL();
    } catch (const StructuralError& e) {
        EXPECT_NE(std::string(e.what()).find("s3"), std::string::npos);
        EXPECT_NE(std::string(e.what()).find("s2"), std::string::npos);
    }
}

TEST(Truth, RoundTrip) {
    test::TempDir dir;
    const SimulationTruth t = draw_truth(test::small_scenario(), 1);
    write_truth(dir / "truth.tsv", t);
    const SimulationTruth r = read_truth(dir / "truth.tsv");
    EXPECT_EQ(r.gene_names, t.gene_names);
    EXPECT_EQ(r.m_family, t.m_family);
    EXPECT_EQ(r.f_family, t.f_family);
    for (std::size_t g = 0; g < t.genes.size(); ++g) {
        EXPECT_EQ(r.genes[g].type, t.genes[g].type);
        EXPECT_EQ(r.genes[g].beta_m, t.genes[g].beta_m);
        EXPECT_EQ(r.genes[g].alpha_x, t.genes[g].alpha_x);
        EXPECT_EQ(r.genes[g].dispersion, t.genes[g].dispersion);
    }
}

// JSON configuration

TEST(Config, ScenarioOverlayAndRoundTrip) {
    const ScenarioConfig c = scenario_from_json(json::parse(R"({"n": 40, "c": 12, "g": 30, "n_true": 4,
        "split": {"both": 0.5, "m_only": 0.5, "f_only": 0.0}, "ranges": {"both": {"beta_m": [1, 2]}},
        "beta_z": [0.1], "seed": 5})"));
    EXPECT_EQ(c.subjects, 40u);
    EXPECT_EQ(c.cells, 12u);
    EXPECT_EQ(c.genes, 30u);
    EXPECT_EQ(c.both_beta_m.low, 1.0);
    EXPECT_EQ(c.both_beta_f.low, ScenarioConfig{}.both_beta_f.low);
    EXPECT_EQ(c.covariate_count(), 1u);
    EXPECT_EQ(c.seed, 5u);
    const ScenarioConfig back = scenario_from_json(to_json(c));
    EXPECT_EQ(to_json(back), to_json(c));
}

TEST(Config, ErrorsNameDottedField) {
    EXPECT_EQ(input_field([] { scenario_from_json(json::parse(R"({"bogus": 1})")); }), "bogus");
    EXPECT_EQ(input_field([] { scenario_from_json(json::parse(R"({"split": {"both": 0.9}})")); }), "split");
    EXPECT_EQ(input_field([] { scenario_from_json(json::parse(R"({"split": {"all": 1}})")); }), "split.all");
    EXPECT_EQ(input_field([] { scenario_from_json(json::parse(R"({"ranges": {"both": {"beta_m": [1]}}})")); }),
              "ranges.both.beta_m");
    EXPECT_EQ(input_field([] { scenario_from_json(json::parse(R"({"n": -3})")); }), "n");
    EXPECT_EQ(input_field([] { scenario_from_json(json::parse(R"({"noise_sd": "x"})")); }), "noise_sd");
    EXPECT_EQ(input_field([] { analysis_from_json(json::parse(R"({"rule": "and"})")); }), "rule");
    EXPECT_EQ(input_field([] { analysis_from_json(json::parse(R"({"contrast": [0]})")); }), "analysis.contrast");
    EXPECT_EQ(input_field([] { analysis_from_json(json::parse(R"({"levels": 0.1})")); }), "analysis.levels");
}

TEST(Config, AnalysisRoundTrip) {
    const AnalysisConfig a = analysis_from_json(json::parse(R"({"rule": "union", "level": 0.1,
        "contrast": [0, 2], "covariate_profile": [1, 2], "lambda": 0.3, "folds": 5,
        "naive_outcome": "joint", "seed": 3})"));
    EXPECT_EQ(a.rule, ScreeningRule::Union);
    EXPECT_EQ(a.x2, 2.0);
    EXPECT_EQ(*a.lambda, 0.3);
    EXPECT_EQ(a.naive_outcome, NaiveOutcome::Joint);
    EXPECT_EQ(to_json(analysis_from_json(to_json(a))), to_json(a));
}

TEST(Config, GridIsCartesianProduct) {
    const GridConfig grid = grid_from_json(json::parse(R"({"n": [50, 100], "c": 20, "g": [10, 20, 30],
        "replicates": 3, "methods": ["medzisc"],
        "thresholds": [{"metric": "fdr_m", "max": 0.08}, {"metric": "power_m", "min": 0.9, "method": "naive", "label": "x"}]})"));
    ASSERT_EQ(grid.cells.size(), 6u);
    std::set<std::string> labels;
    for (const auto& cell : grid.cells) {
        labels.insert(cell.label);
        EXPECT_EQ(cell.scenario.cells, 20u);
        EXPECT_EQ(cell.scenario.replicates, 3u);
    }
    EXPECT_EQ(labels.size(), 6u);
    EXPECT_EQ(grid.cells.front().label, "n50_c20_g10");
    EXPECT_EQ(grid.cells.back().label, "n100_c20_g30");
    EXPECT_EQ(grid.methods, std::vector<Method>{Method::MedZIsc});
    ASSERT_EQ(grid.thresholds.size(), 2u);
    EXPECT_EQ(*grid.thresholds[0].max, 0.08);
    EXPECT_EQ(grid.thresholds[1].method, Method::Naive);
    EXPECT_EQ(*grid.thresholds[1].label, "x");
    EXPECT_TRUE(to_json(grid).contains("cells"));
}

TEST(Config, GridErrors) {
    EXPECT_EQ(input_field([] { grid_from_json(json::parse(R"({"n": []})")); }), "n");
    EXPECT_EQ(input_field([] { grid_from_json(json::parse(R"({"thresholds": [{"max": 1}]})")); }),
              "thresholds[0].metric");
    EXPECT_EQ(input_field([] { grid_from_json(json::parse(R"({"thresholds": [{"metric": "auc"}]})")); }),
              "thresholds.metric");
    EXPECT_EQ(input_field([] { grid_from_json(json::parse(R"({"methods": []})")); }), "methods");
}

TEST(Config, ReadJsonFile) {
    test::TempDir dir;
    test::spit(dir / "ok.json", R"({"n": 5})");
    EXPECT_EQ(read_json_file(dir / "ok.json").at("n"), 5);
    test::spit(dir / "bad.json", "{n: 5");
    EXPECT_EQ(input_field([&] { read_json_file(dir / "bad.json"); }), (dir / "bad.json").string());
    EXPECT_THROW(read_json_file(dir / "missing.json"), InputError);
}

// Report serialisation

TEST(Report, TsvAndJsonCarryEveryResult) {
    const SimulatedPseudobulk sim = generate_pseudobulk_replicate(test::small_scenario(60, 20, 10), 0);
    const PseudobulkDataset d = filter_degenerate_genes(sim.dataset).dataset;
    const MediationReport r = run_naive(d, AnalysisConfig{});
    const std::string tsv = mediation_tsv(r);
    const TsvTable t = parse_tsv(tsv, "report");
    EXPECT_EQ(t.rows.size(), r.m_results.size() + r.f_results.size());
    EXPECT_NO_THROW(t.column("p_adjusted"));
    EXPECT_NO_THROW(t.column("iie"));
    const json j = to_json(r, d);
    EXPECT_EQ(j.at("method"), "naive");
    EXPECT_EQ(mediation_tsv(run_naive(d, AnalysisConfig{})), tsv);
}

}  // namespace
}  // namespace medzisc
