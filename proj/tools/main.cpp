// medzisc: simulate, aggregate, analyze and benchmark from the command line.

#include "commands.hpp"

#include <medzisc/errors.hpp>
#include <medzisc/parallel.hpp>
#include <medzisc/version.hpp>

#ifdef MEDZISC_CLI11_PACKAGE
#include <CLI/CLI.hpp>
#else
#include <CLI11.hpp>
#endif
#include <spdlog/sinks/stdout_color_sinks.h>
#include <spdlog/spdlog.h>

#include <filesystem>
#include <nlohmann/json.hpp>

namespace {

using namespace medzisc::cli;

void add_inputs(CLI::App* cmd, InputOptions& in) {
    cmd->add_option("--metadata", in.metadata, "Subject metadata TSV (subject_id, X, Z..., Y)")->required();
    cmd->add_option("--counts-dir", in.counts_dir, "Directory of <subject_id>.tsv[.gz] cell-by-gene counts");
    cmd->add_option("--counts-long", in.counts_long, "Long-format counts TSV (subject_id, cell_id, gene, count)");
    cmd->add_option("--mean", in.mean, "Pseudobulk M matrix TSV");
    cmd->add_option("--zero", in.zero, "Pseudobulk F matrix TSV");
    cmd->add_option("--flags", in.flags, "Gene flags TSV (gene, f_modeled)");
}

void add_threads(CLI::App* cmd, int& threads) {
    threads = medzisc::default_thread_count();
    cmd->add_option("--threads", threads, "Worker threads (default: MEDZISC_THREADS or all cores)")
        ->check(CLI::PositiveNumber);
}

}  // namespace

int main(int argc, char** argv) {
    auto logger = spdlog::stderr_color_mt("medzisc");
    spdlog::set_default_logger(logger);
    spdlog::set_pattern("[%H:%M:%S] %^%l%$ %v");

    const std::vector<std::string> arguments(argv, argv + argc);

    CLI::App app{"Mediation analysis for zero-inflated single-cell data"};
    app.set_version_flag("--version", std::string(medzisc::kVersion));
    app.require_subcommand(1);
    app.fallthrough();  // accept -q after the subcommand
    bool quiet = false;
    app.add_flag("-q,--quiet", quiet, "Only log warnings and errors");

    SimulateOptions simulate;
    auto* sim = app.add_subcommand("simulate", "Generate one synthetic replicate");
    sim->add_option("--config", simulate.config, "Scenario JSON");
    sim->add_option("--out", simulate.out, "Output directory")->required();
    sim->add_option("--replicate", simulate.replicate, "Replicate index");
    sim->add_option("--seed", simulate.seed, "Override the scenario seed");
    sim->add_option("--n", simulate.n, "Subjects");
    sim->add_option("--c", simulate.c, "Cells per subject");
    sim->add_option("--g", simulate.g, "Genes");
    sim->add_flag("--long", simulate.long_format, "Write one long-format counts file");
    add_threads(sim, simulate.threads);

    AggregateOptions aggregate;
    auto* agg = app.add_subcommand("aggregate", "Collapse cell counts into M/F pseudobulk matrices");
    add_inputs(agg, aggregate.inputs);
    agg->add_option("--out", aggregate.out, "Output directory")->required();
    add_threads(agg, aggregate.threads);

    AnalyzeOptions analyze;
    auto* ana = app.add_subcommand("analyze", "Run the mediation analysis");
    add_inputs(ana, analyze.inputs);
    ana->add_option("--config", analyze.config, "Analysis JSON");
    ana->add_option("--out", analyze.out, "Output directory")->required();
    ana->add_option("--method", analyze.method, "medzisc, naive or both")
        ->check(CLI::IsMember({"medzisc", "naive", "both"}));
    ana->add_option("--rule", analyze.rule, "Screening rule: conjunction or union");
    ana->add_option("--level", analyze.level, "BH significance level");
    ana->add_option("--screening-level", analyze.screening_level, "Marginal screening level");
    ana->add_option("--contrast", analyze.contrast, "Exposure contrast x1 x2")->expected(2);
    ana->add_option("--covariate-profile", analyze.covariate_profile, "Covariate values for the IIE")
        ->expected(1, -1);
    ana->add_option("--lambda", analyze.lambda, "Fixed Lasso penalty (default: cross-validated)");
    ana->add_option("--folds", analyze.folds, "Cross-validation folds");
    ana->add_flag("--no-intercept", analyze.no_intercept, "Fit every model without an intercept");
    ana->add_option("--naive-outcome", analyze.naive_outcome, "Naive outcome model: separate or joint");
    ana->add_option("--seed", analyze.seed, "Seed for cross-validation folds");
    add_threads(ana, analyze.threads);

    BenchmarkCommandOptions benchmark;
    auto* bench = app.add_subcommand("benchmark", "Run a simulation grid and score both methods");
    bench->add_option("--grid", benchmark.grid, "Grid JSON")->required();
    bench->add_option("--out", benchmark.out, "Output directory")->required();
    bench->add_option("--replicates", benchmark.replicates, "Override the replicate count of every cell");
    bench->add_option("--seed", benchmark.seed, "Override the seed of every cell");
    bench->add_flag("--per-replicate", benchmark.per_replicate, "Also write replicates.csv");
    add_threads(bench, benchmark.threads);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? kSuccess : kInvalidInput;
    }
    if (quiet) {
        spdlog::set_level(spdlog::level::warn);
    }

    try {
        if (*sim) return cmd_simulate(simulate, arguments);
        if (*agg) return cmd_aggregate(aggregate, arguments);
        if (*ana) return cmd_analyze(analyze, arguments);
        if (*bench) return cmd_benchmark(benchmark, arguments);
    } catch (const UsageError& e) {
        spdlog::error("{}", e.what());
        return kInvalidInput;
    } catch (const medzisc::InputError& e) {
        spdlog::error("invalid input: {}", e.what());
        return kInvalidInput;
    } catch (const medzisc::StructuralError& e) {
        spdlog::error("invalid input: {}", e.what());
        return kInvalidInput;
    } catch (const nlohmann::json::exception& e) {
        spdlog::error("invalid input: {}", e.what());
        return kInvalidInput;
    } catch (const std::filesystem::filesystem_error& e) {
        spdlog::error("{}", e.what());
        return kRuntimeFailure;
    } catch (const std::exception& e) {
        spdlog::error("{}", e.what());
        return kRuntimeFailure;
    }
    return kSuccess;
}
