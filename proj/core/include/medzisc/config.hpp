#ifndef MEDZISC_CONFIG_HPP
#define MEDZISC_CONFIG_HPP

#include "medzisc/evaluation.hpp"
#include "medzisc/pipeline.hpp"
#include "medzisc/simulation.hpp"

#include <nlohmann/json.hpp>

#include <filesystem>
#include <vector>

namespace medzisc {

/*
 * JSON configuration. Every key is optional; absent keys keep their defaults
 * and unknown keys are rejected. Errors are InputErrors whose field is the
 * dotted key path, e.g. "split.both". The schema is documented in
 * docs/config.md.
 */

/// Overlay the keys of `json` onto `base`.
ScenarioConfig scenario_from_json(const nlohmann::json& json, ScenarioConfig base = {});
AnalysisConfig analysis_from_json(const nlohmann::json& json, AnalysisConfig base = {});

/// Fully materialised configs, suitable for a run manifest.
nlohmann::json to_json(const ScenarioConfig& config);
nlohmann::json to_json(const AnalysisConfig& config);

/**
 * A benchmark grid: scenario keys as in scenario_from_json except that n, c and
 * g may be lists (their Cartesian product forms the cells), plus "methods",
 * "analysis" and "thresholds".
 */
struct GridConfig {
    std::vector<BenchmarkCell> cells;
    std::vector<Method> methods{Method::MedZIsc, Method::Naive};
    AnalysisConfig analysis;
    std::vector<Threshold> thresholds;
};

GridConfig grid_from_json(const nlohmann::json& json);
nlohmann::json to_json(const GridConfig& grid);

/// Parse a JSON file; InputError (field = path) when unreadable or malformed.
nlohmann::json read_json_file(const std::filesystem::path& path);

}  // namespace medzisc

#endif  // MEDZISC_CONFIG_HPP
