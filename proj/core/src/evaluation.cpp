#include "medzisc/evaluation.hpp"

#include "medzisc/errors.hpp"
#include "medzisc/parallel.hpp"
#include "medzisc/rng.hpp"

#include <mutex>
#include <set>

namespace medzisc {

namespace {

struct FamilyScore {
    std::optional<double> power;
    double fdr = 0.0;
    std::size_t discoveries = 0;
    std::size_t true_positives = 0;
};

FamilyScore score_family(const std::vector<std::string>& discovered, const std::set<std::string>& truth) {
    FamilyScore s;
    s.discoveries = discovered.size();
    for (const auto& gene : discovered) {
        if (truth.count(gene) > 0) {
            ++s.true_positives;
        }
    }
    if (!truth.empty()) {
        s.power = static_cast<double>(s.true_positives) / static_cast<double>(truth.size());
    }
    if (s.discoveries > 0) {
        s.fdr = static_cast<double>(s.discoveries - s.true_positives) / static_cast<double>(s.discoveries);
    }
    return s;
}

std::set<std::string> family_names(const SimulationTruth& truth, const std::vector<std::size_t>& family) {
    std::set<std::string> names;
    for (auto g : family) {
        names.insert(truth.gene_names[g]);
    }
    return names;
}

}  // namespace

ReplicateScore score_replicate(const MediationReport& report, const SimulationTruth& truth) {
    const FamilyScore m = score_family(report.significant_genes(Pathway::M), family_names(truth, truth.m_family));
    const FamilyScore f = score_family(report.significant_genes(Pathway::F), family_names(truth, truth.f_family));
    ReplicateScore score;
    score.power_m = m.power;
    score.power_f = f.power;
    score.fdr_m = m.fdr;
    score.fdr_f = f.fdr;
    score.discoveries_m = m.discoveries;
    score.discoveries_f = f.discoveries;
    score.true_positives_m = m.true_positives;
    score.true_positives_f = f.true_positives;
    score.seconds = report.seconds;
    return score;
}

const BenchmarkRow* BenchmarkTable::find(std::size_t cell_index, Method method) const {
    for (const auto& row : rows) {
        if (row.cell == cell_index && row.method == method) {
            return &row;
        }
    }
    return nullptr;
}

std::uint64_t analysis_seed(const ScenarioConfig& scenario, std::size_t replicate) {
    return derive_seed(scenario.seed, {replicate, stream::kAnalysis});
}

BenchmarkRow summarize(std::size_t cell_index, const BenchmarkCell& cell, Method method,
                       const std::vector<ReplicateRecord>& records) {
    BenchmarkRow row;
    row.cell = cell_index;
    row.label = cell.label;
    row.n = cell.scenario.subjects;
    row.c = cell.scenario.cells;
    row.g = cell.scenario.genes;
    row.method = method;

    double power_m = 0.0, power_f = 0.0;
    std::size_t power_m_count = 0, power_f_count = 0;
    for (const auto& record : records) {
        if (!record.score) {
            ++row.failures;
            continue;
        }
        const ReplicateScore& s = *record.score;
        ++row.replicates;
        if (s.power_m) {
            power_m += *s.power_m;
            ++power_m_count;
        }
        if (s.power_f) {
            power_f += *s.power_f;
            ++power_f_count;
        }
        row.fdr_m += s.fdr_m;
        row.fdr_f += s.fdr_f;
        row.mean_discoveries_m += static_cast<double>(s.discoveries_m);
        row.mean_discoveries_f += static_cast<double>(s.discoveries_f);
        row.mean_seconds += s.seconds;
    }
    if (power_m_count > 0) row.power_m = power_m / static_cast<double>(power_m_count);
    if (power_f_count > 0) row.power_f = power_f / static_cast<double>(power_f_count);
    if (row.replicates > 0) {
        const auto count = static_cast<double>(row.replicates);
        row.fdr_m /= count;
        row.fdr_f /= count;
        row.mean_discoveries_m /= count;
        row.mean_discoveries_f /= count;
        row.mean_seconds /= count;
    }
    return row;
}

BenchmarkTable run_benchmark(const std::vector<BenchmarkCell>& grid, const BenchmarkOptions& options) {
    if (options.methods.empty()) {
        throw InputError("methods", "at least one method is required");
    }
    for (const auto& cell : grid) {
        cell.scenario.validate();
    }
    options.analysis.validate();

    // One job per (cell, replicate); every method runs on the same generated data.
    struct Job {
        std::size_t cell;
        std::size_t replicate;
    };
    std::vector<Job> jobs;
    for (std::size_t c = 0; c < grid.size(); ++c) {
        for (std::size_t r = 0; r < grid[c].scenario.replicates; ++r) {
            jobs.push_back({c, r});
        }
    }
    const std::size_t methods = options.methods.size();
    std::vector<ReplicateRecord> records(jobs.size() * methods);
    std::mutex progress;

    parallel_for(jobs.size(), options.threads, [&](std::size_t j) {
        const Job& job = jobs[j];
        const ScenarioConfig& scenario = grid[job.cell].scenario;
        std::string generation_error;
        std::optional<SimulatedPseudobulk> replicate;
        try {
            replicate = generate_pseudobulk_replicate(scenario, job.replicate, 1);
        } catch (const std::exception& e) {
            generation_error = std::string("generation failed: ") + e.what();
        }

        AnalysisConfig analysis = options.analysis;
        analysis.seed = analysis_seed(scenario, job.replicate);
        analysis.threads = 1;
        std::optional<PseudobulkDataset> dataset;
        if (replicate) {
            dataset = filter_degenerate_genes(replicate->dataset).dataset;
        }

        for (std::size_t m = 0; m < methods; ++m) {
            ReplicateRecord& record = records[j * methods + m];
            record.cell = job.cell;
            record.method = options.methods[m];
            record.replicate = job.replicate;
            if (!dataset) {
                record.error = generation_error;
            } else {
                try {
                    const MediationReport report = run_method(record.method, *dataset, analysis);
                    record.score = score_replicate(report, replicate->truth);
                    record.score->replicate = job.replicate;
                } catch (const std::exception& e) {
                    record.error = e.what();
                }
            }
            if (options.on_record) {
                std::lock_guard lock(progress);
                options.on_record(record);
            }
        }
    });

    BenchmarkTable table;
    for (std::size_t c = 0; c < grid.size(); ++c) {
        for (const Method method : options.methods) {
            std::vector<ReplicateRecord> subset;
            for (const auto& record : records) {
                if (record.cell == c && record.method == method) {
                    subset.push_back(record);
                }
            }
            table.rows.push_back(summarize(c, grid[c], method, subset));
        }
    }
    // Keep the raw records cell-major, then method, then replicate.
    for (std::size_t c = 0; c < grid.size(); ++c) {
        for (const Method method : options.methods) {
            for (const auto& record : records) {
                if (record.cell == c && record.method == method) {
                    table.records.push_back(record);
                }
            }
        }
    }
    return table;
}

std::optional<double> metric_value(const BenchmarkRow& row, const std::string& metric) {
    if (metric == "power_m") return row.power_m;
    if (metric == "power_f") return row.power_f;
    if (metric == "fdr_m") return row.fdr_m;
    if (metric == "fdr_f") return row.fdr_f;
    if (metric == "mean_seconds") return row.mean_seconds;
    if (metric == "failures") return static_cast<double>(row.failures);
    throw InputError("thresholds.metric", "unknown metric '" + metric + "'");
}

std::vector<ThresholdCheck> check_thresholds(const BenchmarkTable& table, const std::vector<Threshold>& thresholds) {
    std::vector<ThresholdCheck> checks;
    for (const auto& threshold : thresholds) {
        for (const auto& row : table.rows) {
            if (row.method != threshold.method || (threshold.label && *threshold.label != row.label)) {
                continue;
            }
            ThresholdCheck check;
            check.threshold = threshold;
            check.label = row.label;
            check.value = metric_value(row, threshold.metric);
            check.passed = check.value.has_value() && (!threshold.min || *check.value >= *threshold.min) &&
                           (!threshold.max || *check.value <= *threshold.max);
            checks.push_back(std::move(check));
        }
    }
    return checks;
}

}  // namespace medzisc
