#pragma once

#include "inls/config.hpp"

#include <json.hpp>

#include <filesystem>
#include <iosfwd>
#include <string>

namespace inls {

enum ExitCode : int { kExitOk = 0, kExitSuiteFailure = 1, kExitConfig = 2, kExitNumerics = 3 };

/// Outcome of one subcommand: exit code, run directory and the result block
/// stored in its manifest.
struct CommandResult {
    int exit_code = kExitOk;
    std::filesystem::path run_dir;
    bool reused = false;  ///< run directory already complete, nothing recomputed
    nlohmann::json result;
};

/// Each runs one subcommand under `config.outputs/<command>-<hash>`. Artifacts
/// are written to a scratch directory that is renamed into place only once
/// complete, so an interrupted run never looks finished. Exceptions are mapped
/// to exit codes: configuration and validation errors give 2, numerical
/// failures 3.
CommandResult cmd_ground_state(const RunConfig& config, std::ostream& log);
CommandResult cmd_classify(const RunConfig& config, std::ostream& log);
CommandResult cmd_evolve(const RunConfig& config, std::ostream& log);
CommandResult cmd_check_identities(const RunConfig& config, std::ostream& log);

/// Dispatch by name ("ground-state", "classify", "evolve", "check-identities").
CommandResult run_command(const std::string& command, const RunConfig& config, std::ostream& log);

/// Runs every sweep point on `workers` threads and writes
/// `<outputs>/sweep-<hash>/summary.csv`. Points whose run directory is already
/// complete are read back instead of recomputed.
struct SweepResult {
    int exit_code = kExitOk;
    std::filesystem::path summary;
    std::size_t computed = 0;
    std::size_t reused = 0;
    std::size_t failed = 0;
};
SweepResult cmd_sweep(const SweepManifest& manifest, int workers, std::ostream& log);

/// Identity suite behind check-identities, returned as JSON with one entry per
/// suite and an overall "pass" flag.
nlohmann::json identity_suite(const RunConfig& config, std::ostream& log);

}  // namespace inls
