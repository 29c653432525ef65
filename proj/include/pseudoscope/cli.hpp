#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>

#include "pseudoscope/config.hpp"
#include "pseudoscope/experiments.hpp"
#include "pseudoscope/tails.hpp"

namespace pseudoscope::cli {

// Process exit codes.
inline constexpr int kExitOk = 0;
// A check failed: oracle-check distance, a tail verdict, or a runtime error.
inline constexpr int kExitCheckFailed = 1;
// Malformed command line or configuration.
inline constexpr int kExitUsage = 2;
// More than 1% of the Monte Carlo trials failed.
inline constexpr int kExitFailureCap = 3;

struct CommonOptions {
    std::optional<std::filesystem::path> config;
    std::filesystem::path out = ".";
    std::optional<std::uint64_t> seed;
    std::size_t threads = 0;
};

// Reads an [experiment] section: structure (required), d, eps, trials, seed,
// solver ("auto" or a solver name), region ("auto" or delta), tau. The
// returned configuration is resolved; ConfigError on any invalid value.
ExperimentConfig experiment_config(const ConfigFile& file, std::optional<std::uint64_t> seed_override);

struct ScalingSettings {
    Structure structure;
    std::vector<std::size_t> dims;
    double eps = 2.0;
    std::size_t trials = 200;
    std::uint64_t seed = 0;
};

// Reads a [scaling] section: structure and dims (required, at least three
// values, each at least 16), eps, trials, seed.
ScalingSettings scaling_settings(const ConfigFile& file, std::optional<std::uint64_t> seed_override);

// Which tail check and its parameters, from a [tails] section.
struct TailSettings {
    std::string which;
    std::size_t d = 100;
    std::size_t k = 0;
    std::vector<double> t;
    std::size_t samples = 100000;
    std::uint64_t seed = 0;
    std::vector<Complex> entries;
    double delta = 0.03;
};

TailSettings tail_settings(const ConfigFile& file, std::optional<std::uint64_t> seed_override);
TailTable run_tails(const TailSettings& settings, const ExecutionOptions& exec);

// Subcommands. Each writes its artifacts and manifest.json into options.out
// (created if needed) and returns an exit code; diagnostics go to `err`.
int cmd_experiment(const CommonOptions& options, std::ostream& out, std::ostream& err);
int cmd_scaling(const CommonOptions& options, std::ostream& out, std::ostream& err);
int cmd_tails(const CommonOptions& options, std::ostream& out, std::ostream& err);
int cmd_oracle_check(const CommonOptions& options, std::optional<std::size_t> d_max, bool corrupt_fast_path,
                     std::ostream& out, std::ostream& err);

// Full command-line entry point.
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace pseudoscope::cli
