#pragma once

#include <iosfwd>
#include <string>
#include <variant>
#include <vector>

#include <json.hpp>

#include "spinbath/scenario.hpp"

namespace spinbath {

inline constexpr const char* kToolVersion = "0.1.0";

enum ExitCode : int {
    kExitOk = 0,
    kExitConfig = 2,
    kExitSelfCheck = 3,
    kExitIntegrator = 4,
    kExitSweepFailed = 5,
};

using Cell = std::variant<std::monostate, double, long, std::string>;

struct Table {
    std::vector<std::string> columns;
    std::vector<std::vector<Cell>> rows;
    /// Extra key/value metadata, emitted as '#' comments (csv) or "meta" (json).
    std::vector<std::pair<std::string, std::string>> meta;
    /// Optional per-sample density matrices (json only).
    nlohmann::json snapshots;
};

struct RunOptions {
    std::string format = "csv";
    int threads = 1;
    unsigned long long seed = 0;
};

/// Doubles are printed with 17 significant digits.
std::string format_cell(const Cell& cell);

void write_table(std::ostream& out, const Table& table, const std::string& command, const ScenarioConfig& config,
                 const RunOptions& options);

struct CommandResult {
    int exit_code = kExitOk;
    Table table;
    std::string message;
};

CommandResult cmd_rate(const ScenarioConfig& config);
CommandResult cmd_simulate(const ScenarioConfig& config);
CommandResult cmd_sweep(const ScenarioConfig& config, int threads);
CommandResult cmd_dfs(const ScenarioConfig& config);
CommandResult cmd_state(const ScenarioConfig& config);

/// Dispatches by name; config errors become exit code 2.
CommandResult run_command(const std::string& name, const ScenarioConfig& config, const RunOptions& options);

} // namespace spinbath
