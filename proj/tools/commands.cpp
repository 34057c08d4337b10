#include "commands.hpp"

#include "manifest.hpp"

#include <medzisc/config.hpp>
#include <medzisc/errors.hpp>
#include <medzisc/evaluation.hpp>
#include <medzisc/io.hpp>
#include <medzisc/report.hpp>
#include <medzisc/simulation.hpp>

#include <spdlog/spdlog.h>

#include <algorithm>
#include <chrono>

namespace medzisc::cli {

namespace fs = std::filesystem;

namespace {

double seconds_since(std::chrono::steady_clock::time_point start) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
}

struct LoadedInputs {
    PseudobulkDataset dataset;
    FilterReport filter;
    std::vector<fs::path> files;
};

std::vector<fs::path> files_under(const fs::path& dir) {
    std::vector<fs::path> files;
    for (const auto& entry : fs::directory_iterator(dir)) {
        if (entry.is_regular_file()) {
            files.push_back(entry.path());
        }
    }
    std::sort(files.begin(), files.end());
    return files;
}

/// Metadata plus exactly one of: counts directory, long counts file, or M/F matrices.
LoadedInputs load_inputs(const InputOptions& in, int threads) {
    if (in.metadata.empty()) {
        throw UsageError("--metadata is required");
    }
    const int sources = !in.counts_dir.empty() + !in.counts_long.empty() + (!in.mean.empty() || !in.zero.empty());
    if (sources != 1) {
        throw UsageError("give exactly one of --counts-dir, --counts-long or --mean/--zero");
    }
    LoadedInputs out;
    out.files.push_back(in.metadata);
    const SubjectTable subjects = read_subject_metadata(in.metadata);
    spdlog::info("metadata: {} subjects, {} covariates", subjects.size(), subjects.covariate_count());

    PseudobulkDataset dataset;
    if (!in.mean.empty() || !in.zero.empty()) {
        if (in.mean.empty() || in.zero.empty()) {
            throw UsageError("--mean and --zero must be given together");
        }
        dataset = read_pseudobulk(in.mean, in.zero, subjects, in.flags);
        out.files.push_back(in.mean);
        out.files.push_back(in.zero);
        if (!in.flags.empty()) {
            out.files.push_back(in.flags);
        }
    } else {
        std::vector<CellCountMatrix> cells;
        if (!in.counts_dir.empty()) {
            cells = read_counts_directory(in.counts_dir, subjects);
            for (const auto& f : files_under(in.counts_dir)) {
                out.files.push_back(f);
            }
        } else {
            cells = read_long_counts(in.counts_long);
            out.files.push_back(in.counts_long);
        }
        check_subjects_match(subjects, cells);
        spdlog::info("aggregating {} subjects", cells.size());
        dataset = aggregate_pseudobulk(cells, subjects, threads);
    }
    FilterResult filtered = filter_degenerate_genes(dataset);
    out.dataset = std::move(filtered.dataset);
    out.filter = std::move(filtered.report);
    spdlog::info("{} genes after filtering ({} removed, {} without an F model)", out.dataset.gene_count(),
                 out.filter.removed.size(), out.filter.f_dropped.size());
    return out;
}

nlohmann::json filter_json(const FilterReport& report) {
    return {{"removed", report.removed}, {"f_dropped", report.f_dropped}};
}

nlohmann::json inputs_json(const InputOptions& in) {
    return {{"metadata", in.metadata.string()}, {"counts_dir", in.counts_dir.string()},
            {"counts_long", in.counts_long.string()}, {"mean", in.mean.string()},
            {"zero", in.zero.string()}, {"flags", in.flags.string()}};
}

}  // namespace

int cmd_simulate(const SimulateOptions& options, const std::vector<std::string>& argv) {
    ScenarioConfig config;
    if (!options.config.empty()) {
        config = scenario_from_json(read_json_file(options.config));
    }
    if (options.seed) config.seed = *options.seed;
    if (options.n) config.subjects = *options.n;
    if (options.c) config.cells = *options.c;
    if (options.g) config.genes = *options.g;
    config.validate();

    spdlog::info("simulating replicate {} (n={}, c={}, g={}, seed={})", options.replicate, config.subjects,
                 config.cells, config.genes, config.seed);
    const SimulatedDataset data = generate_replicate(config, options.replicate, options.threads);

    RunManifest manifest;
    if (options.long_format) {
        write_long_counts(options.out / "counts_long.tsv", data.cells);
        manifest.outputs.push_back("counts_long.tsv");
    } else {
        for (const auto& m : data.cells) {
            write_counts_matrix(options.out / "counts" / (m.subject_id + ".tsv"), m);
        }
        manifest.outputs.push_back("counts/");
    }
    write_subject_metadata(options.out / "metadata.tsv", data.subjects);
    write_truth(options.out / "truth.tsv", data.truth);
    manifest.outputs.insert(manifest.outputs.end(), {"metadata.tsv", "truth.tsv"});

    manifest.command = "simulate";
    manifest.arguments = argv;
    manifest.config = {{"scenario", to_json(config)},
                       {"replicate", options.replicate},
                       {"format", options.long_format ? "long" : "per-subject"}};
    manifest.seed = config.seed;
    manifest.threads = options.threads;
    if (!options.config.empty()) {
        manifest.inputs.push_back(options.config);
    }
    manifest.write(options.out);
    spdlog::info("wrote {}", options.out.string());
    return kSuccess;
}

int cmd_aggregate(const AggregateOptions& options, const std::vector<std::string>& argv) {
    const LoadedInputs loaded = load_inputs(options.inputs, options.threads);
    write_pseudobulk(options.out, loaded.dataset);
    write_subject_metadata(options.out / "metadata.tsv", loaded.dataset.subjects);
    write_text_file(options.out / "filter_report.json", filter_json(loaded.filter).dump(2) + "\n");

    RunManifest manifest;
    manifest.command = "aggregate";
    manifest.arguments = argv;
    manifest.config = {{"inputs", inputs_json(options.inputs)}};
    manifest.threads = options.threads;
    manifest.inputs = loaded.files;
    manifest.outputs = {"M.tsv", "F.tsv", "gene_flags.tsv", "metadata.tsv", "filter_report.json"};
    manifest.write(options.out);
    return kSuccess;
}

int cmd_analyze(const AnalyzeOptions& options, const std::vector<std::string>& argv) {
    AnalysisConfig config;
    if (!options.config.empty()) {
        config = analysis_from_json(read_json_file(options.config));
    }
    if (options.rule) config.rule = screening_rule_from_string(*options.rule);
    if (options.level) config.level = *options.level;
    if (options.screening_level) config.screening_level = *options.screening_level;
    if (options.contrast) {
        if (options.contrast->size() != 2) {
            throw UsageError("--contrast takes two values: x1 x2");
        }
        config.x1 = (*options.contrast)[0];
        config.x2 = (*options.contrast)[1];
    }
    if (options.covariate_profile) config.covariate_profile = *options.covariate_profile;
    if (options.lambda) config.lambda = *options.lambda;
    if (options.folds) config.folds = *options.folds;
    if (options.no_intercept) config.intercept = false;
    if (options.naive_outcome) config.naive_outcome = naive_outcome_from_string(*options.naive_outcome);
    if (options.seed) config.seed = *options.seed;
    config.threads = options.threads;
    config.validate();

    std::vector<Method> methods;
    if (options.method == "both") {
        methods = {Method::MedZIsc, Method::Naive};
    } else {
        methods = {method_from_string(options.method)};
    }

    const LoadedInputs loaded = load_inputs(options.inputs, options.threads);
    loaded.dataset.subjects.require_outcome();

    RunManifest manifest;
    for (const Method method : methods) {
        const auto start = std::chrono::steady_clock::now();
        spdlog::info("running {} on {} genes", to_string(method), loaded.dataset.gene_count());
        const MediationReport report = run_method(method, loaded.dataset, config);
        const std::string stem = std::string("report_") + to_string(method);
        write_text_file(options.out / (stem + ".json"), to_json(report, loaded.dataset).dump(2) + "\n");
        write_text_file(options.out / (stem + ".tsv"), mediation_tsv(report));
        manifest.outputs.push_back(stem + ".json");
        manifest.outputs.push_back(stem + ".tsv");
        manifest.timing[to_string(method)] = seconds_since(start);
        spdlog::info("{}: {} M-family and {} F-family discoveries", to_string(method),
                     report.significant_genes(Pathway::M).size(), report.significant_genes(Pathway::F).size());
        for (const auto& w : report.warnings) {
            spdlog::warn("{}", w);
        }
    }
    write_text_file(options.out / "filter_report.json", filter_json(loaded.filter).dump(2) + "\n");
    manifest.outputs.push_back("filter_report.json");

    manifest.command = "analyze";
    manifest.arguments = argv;
    manifest.config = {{"analysis", to_json(config)}, {"method", options.method}, {"inputs", inputs_json(options.inputs)}};
    manifest.seed = config.seed;
    manifest.threads = options.threads;
    manifest.inputs = loaded.files;
    if (!options.config.empty()) {
        manifest.inputs.push_back(options.config);
    }
    manifest.write(options.out);
    return kSuccess;
}

int cmd_benchmark(const BenchmarkCommandOptions& options, const std::vector<std::string>& argv) {
    GridConfig grid = grid_from_json(read_json_file(options.grid));
    for (auto& cell : grid.cells) {
        if (options.replicates) cell.scenario.replicates = *options.replicates;
        if (options.seed) cell.scenario.seed = *options.seed;
        cell.scenario.validate();
    }

    BenchmarkOptions bench;
    bench.methods = grid.methods;
    bench.analysis = grid.analysis;
    bench.threads = options.threads;
    std::size_t done = 0;
    std::size_t total = 0;
    for (const auto& cell : grid.cells) {
        total += cell.scenario.replicates * grid.methods.size();
    }
    bench.on_record = [&](const ReplicateRecord& record) {
        ++done;
        if (!record.score) {
            spdlog::warn("{} {} replicate {} failed: {}", grid.cells[record.cell].label, to_string(record.method),
                         record.replicate, record.error);
        } else if (done % 10 == 0 || done == total) {
            spdlog::info("{}/{} replicate analyses done", done, total);
        }
    };

    const auto start = std::chrono::steady_clock::now();
    const BenchmarkTable table = run_benchmark(grid.cells, bench);
    const double elapsed = seconds_since(start);

    RunManifest manifest;
    write_text_file(options.out / "table.tsv", benchmark_tsv(table));
    write_text_file(options.out / "table.json", to_json(table).dump(2) + "\n");
    write_text_file(options.out / "timing.tsv", timing_tsv(table));
    manifest.outputs = {"table.tsv", "table.json", "timing.tsv"};
    if (options.per_replicate) {
        write_text_file(options.out / "replicates.csv", replicate_csv(table, grid.cells));
        manifest.outputs.push_back("replicates.csv");
    }

    const auto checks = check_thresholds(table, grid.thresholds);
    bool all_passed = true;
    nlohmann::json check_json = nlohmann::json::array();
    for (const auto& check : checks) {
        all_passed = all_passed && check.passed;
        check_json.push_back(to_json(check));
        const auto& t = check.threshold;
        spdlog::log(check.passed ? spdlog::level::info : spdlog::level::err, "threshold {} {} {}: value {} {}",
                    check.label, to_string(t.method), t.metric,
                    check.value ? format_number(*check.value) : std::string("NA"), check.passed ? "PASS" : "FAIL");
    }
    if (!checks.empty()) {
        write_text_file(options.out / "thresholds.json", check_json.dump(2) + "\n");
        manifest.outputs.push_back("thresholds.json");
    }

    manifest.command = "benchmark";
    manifest.arguments = argv;
    manifest.config = to_json(grid);
    manifest.seed = grid.cells.empty() ? 0 : grid.cells.front().scenario.seed;
    manifest.threads = options.threads;
    manifest.inputs = {options.grid};
    manifest.timing = {{"total", elapsed}};
    manifest.write(options.out);
    return all_passed ? kSuccess : kRuntimeFailure;
}

}  // namespace medzisc::cli
