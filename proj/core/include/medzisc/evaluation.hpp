#ifndef MEDZISC_EVALUATION_HPP
#define MEDZISC_EVALUATION_HPP

#include "medzisc/pipeline.hpp"
#include "medzisc/simulation.hpp"

#include <cstddef>
#include <functional>
#include <optional>
#include <string>
#include <vector>

namespace medzisc {

/// Power and FDR of one report against the generating truth.
struct ReplicateScore {
    std::size_t replicate = 0;
    std::optional<double> power_m;  // missing when the family has no true mediators
    std::optional<double> power_f;
    double fdr_m = 0.0;             // 0 when nothing is discovered
    double fdr_f = 0.0;
    std::size_t discoveries_m = 0;
    std::size_t discoveries_f = 0;
    std::size_t true_positives_m = 0;
    std::size_t true_positives_f = 0;
    double seconds = 0.0;           // analysis only
};

/// Matches discoveries to truth by gene name, so filtered datasets score correctly.
ReplicateScore score_replicate(const MediationReport& report, const SimulationTruth& truth);

struct BenchmarkCell {
    std::string label;
    ScenarioConfig scenario;
};

/// One (cell, method, replicate) outcome. `error` is set when the replicate failed.
struct ReplicateRecord {
    std::size_t cell = 0;
    Method method = Method::MedZIsc;
    std::size_t replicate = 0;
    std::optional<ReplicateScore> score;
    std::string error;
};

struct BenchmarkRow {
    std::size_t cell = 0;  // index into the grid
    std::string label;
    std::size_t n = 0;
    std::size_t c = 0;
    std::size_t g = 0;
    Method method = Method::MedZIsc;
    std::size_t replicates = 0;  // successful replicates in the means
    std::size_t failures = 0;
    std::optional<double> power_m;  // mean over replicates where power is defined
    std::optional<double> power_f;
    double fdr_m = 0.0;
    double fdr_f = 0.0;
    double mean_discoveries_m = 0.0;
    double mean_discoveries_f = 0.0;
    double mean_seconds = 0.0;
};

struct BenchmarkTable {
    std::vector<BenchmarkRow> rows;  // cell-major, then method in the requested order
    std::vector<ReplicateRecord> records;

    const BenchmarkRow* find(std::size_t cell_index, Method method) const;
};

struct BenchmarkOptions {
    std::vector<Method> methods{Method::MedZIsc, Method::Naive};
    AnalysisConfig analysis;  // its seed is replaced per replicate; its threads are ignored
    int threads = 1;          // replicates run concurrently
    std::function<void(const ReplicateRecord&)> on_record;  // serialised progress hook
};

/// Analysis seed for a replicate, derived from the scenario seed.
std::uint64_t analysis_seed(const ScenarioConfig& scenario, std::size_t replicate);

/**
 * Generate every replicate of every cell, run each method, score it and
 * average. Results are assembled by (cell, method, replicate) index, so the
 * table does not depend on the thread count.
 */
BenchmarkTable run_benchmark(const std::vector<BenchmarkCell>& grid, const BenchmarkOptions& options);

/// Average a set of records for one (cell, method).
BenchmarkRow summarize(std::size_t cell_index, const BenchmarkCell& cell, Method method,
                       const std::vector<ReplicateRecord>& records);

/// A bound on one table column for one method, e.g. fdr_m <= 0.08 for medzisc.
struct Threshold {
    std::optional<std::string> label;  // nullopt: every cell
    Method method = Method::MedZIsc;
    std::string metric;                // power_m, power_f, fdr_m, fdr_f, mean_seconds
    std::optional<double> min;
    std::optional<double> max;
};

struct ThresholdCheck {
    Threshold threshold;
    std::string label;
    std::optional<double> value;
    bool passed = false;
};

/// Evaluate every threshold against every matching row. A missing value fails.
std::vector<ThresholdCheck> check_thresholds(const BenchmarkTable& table, const std::vector<Threshold>& thresholds);

std::optional<double> metric_value(const BenchmarkRow& row, const std::string& metric);

}  // namespace medzisc

#endif  // MEDZISC_EVALUATION_HPP
