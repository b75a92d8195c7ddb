#pragma once

#include "config.hpp"

#include <json.hpp>

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

namespace lab {

enum class Verdict { Pass, Fail, GuardStop };

[[nodiscard]] std::string_view verdict_name(Verdict v);
/// 0 on pass, 2 on guard stop, 3 when the run completed but its verdict failed.
[[nodiscard]] int exit_code(Verdict v);

struct ExperimentInfo {
    std::string name;
    std::string summary;
    std::vector<std::string> columns;  ///< CSV header, fixed per experiment
};

[[nodiscard]] const std::vector<ExperimentInfo>& experiment_catalog();
/// Throws std::out_of_range for unknown names.
[[nodiscard]] const ExperimentInfo& experiment_info(const std::string& name);

struct RunOptions {
    std::optional<std::filesystem::path> out_dir;  ///< overrides output.dir
    std::optional<std::uint64_t> seed;            ///< overrides the config seed
    std::optional<int> threads;                    ///< overrides the config thread count
};

struct RunResult {
    std::string experiment;
    Verdict verdict = Verdict::Fail;
    std::string status;
    std::uint64_t seed = 0;
    nlohmann::json metrics;
    std::filesystem::path csv;
    std::filesystem::path summary;
};

/// Validates the whole config, runs the experiment, writes the CSV trace and the JSON summary.
/// Throws ConfigError before any output is written when the config is invalid.
[[nodiscard]] RunResult run_experiment(Config cfg, const RunOptions& opts = {});

}  // namespace lab
