#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>

#include <json.hpp>

namespace fracpar::cli {

/// Exit statuses.
enum exit_code : int { ok = 0, config_failure = 1, certification_failure = 2, divergence = 3 };

struct run_options {
    std::string command;
    std::filesystem::path config;
    std::filesystem::path output = "out";
    bool quick = false;
    std::optional<std::uint64_t> seed;
};

/// Effective configuration: the file, then the --quick profile of the command, then --seed.
nlohmann::json effective_config(const run_options& opt);

/// Runs one command, writes its artifacts and returns the exit status. Errors are mapped to statuses here.
int run(const run_options& opt);

/// The pinned grids and tolerances of --quick for a command (empty object when none apply).
nlohmann::json quick_profile(const std::string& command);

}  // namespace fracpar::cli
