#ifndef MEDZISC_TOOLS_COMMANDS_HPP
#define MEDZISC_TOOLS_COMMANDS_HPP

#include <medzisc/pipeline.hpp>

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

namespace medzisc::cli {

enum ExitCode : int { kSuccess = 0, kRuntimeFailure = 1, kInvalidInput = 2 };

/// Raised for bad flags or flag combinations; maps to kInvalidInput.
class UsageError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

struct SimulateOptions {
    std::filesystem::path config;  // optional scenario JSON
    std::filesystem::path out;
    std::size_t replicate = 0;
    std::optional<std::uint64_t> seed;
    std::optional<std::size_t> n, c, g;
    bool long_format = false;
    int threads = 1;
};

/// Where the cell counts or pseudobulk matrices come from.
struct InputOptions {
    std::filesystem::path metadata;
    std::filesystem::path counts_dir;
    std::filesystem::path counts_long;
    std::filesystem::path mean;
    std::filesystem::path zero;
    std::filesystem::path flags;
};

struct AggregateOptions {
    InputOptions inputs;
    std::filesystem::path out;
    int threads = 1;
};

struct AnalyzeOptions {
    InputOptions inputs;
    std::filesystem::path config;  // optional analysis JSON
    std::filesystem::path out;
    std::string method = "medzisc";  // medzisc, naive or both

    // Flag overrides; applied after the config file.
    std::optional<std::string> rule;
    std::optional<double> level;
    std::optional<double> screening_level;
    std::optional<std::vector<double>> contrast;
    std::optional<std::vector<double>> covariate_profile;
    std::optional<double> lambda;
    std::optional<int> folds;
    bool no_intercept = false;
    std::optional<std::string> naive_outcome;
    std::optional<std::uint64_t> seed;
    int threads = 1;
};

struct BenchmarkCommandOptions {
    std::filesystem::path grid;
    std::filesystem::path out;
    std::optional<std::size_t> replicates;
    std::optional<std::uint64_t> seed;
    bool per_replicate = false;
    int threads = 1;
};

int cmd_simulate(const SimulateOptions& options, const std::vector<std::string>& argv);
int cmd_aggregate(const AggregateOptions& options, const std::vector<std::string>& argv);
int cmd_analyze(const AnalyzeOptions& options, const std::vector<std::string>& argv);
int cmd_benchmark(const BenchmarkCommandOptions& options, const std::vector<std::string>& argv);

}  // namespace medzisc::cli

#endif  // MEDZISC_TOOLS_COMMANDS_HPP
