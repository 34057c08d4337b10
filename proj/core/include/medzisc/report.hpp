#ifndef MEDZISC_REPORT_HPP
#define MEDZISC_REPORT_HPP

#include "medzisc/data.hpp"
#include "medzisc/evaluation.hpp"
#include "medzisc/pipeline.hpp"

#include <nlohmann/json.hpp>

#include <string>

namespace medzisc {

/*
 * Serialised results. Wall-clock time is kept out of the report and table
 * writers so that output bytes depend only on inputs and seeds; timings go to
 * the manifest (reports) or a separate timing table (benchmarks).
 */

nlohmann::json to_json(const LassoFit& fit);
nlohmann::json to_json(const ScreeningResult& screening, const PseudobulkDataset& dataset);
nlohmann::json to_json(const GeneMediationResult& result);
nlohmann::json to_json(const MediationReport& report, const PseudobulkDataset& dataset);

/// gene, pathway, estimates, SEs, component p-values, IIE, p_max, p_adjusted, significant.
std::string mediation_tsv(const MediationReport& report);

/// One row per (cell, method): means of power/FDR and discoveries, without timing.
std::string benchmark_tsv(const BenchmarkTable& table);
nlohmann::json to_json(const BenchmarkTable& table);
/// Per (cell, method) mean analysis seconds.
std::string timing_tsv(const BenchmarkTable& table);
/// Every (cell, method, replicate) score, comma separated.
std::string replicate_csv(const BenchmarkTable& table, const std::vector<BenchmarkCell>& grid);

nlohmann::json to_json(const ThresholdCheck& check);

}  // namespace medzisc

#endif  // MEDZISC_REPORT_HPP
