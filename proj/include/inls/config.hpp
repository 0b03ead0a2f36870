#pragma once

#include "inls/criteria.hpp"
#include "inls/evolution.hpp"
#include "inls/ground_state.hpp"
#include "inls/problem.hpp"

#include <json.hpp>

#include <cstdint>
#include <filesystem>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace inls {

/// Malformed or inconsistent run configuration (maps to exit code 2).
class ConfigError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

struct GridConfig {
    int M = 1024;
    Decimal r_max{"15"};
};

struct RunConfig {
    ProblemSpec spec;
    GridConfig grid;
    EvolveControls controls;
    DatumSpec datum;
    /// Levels used when the ground state is solved. Unset means 3 for the
    /// ground-state command and 1 wherever the state is only an input.
    std::optional<int> gs_levels;
    std::filesystem::path outputs = "runs";
    std::uint64_t seed = 0;
    /// Number of random fields for the sampling suites of check-identities.
    int samples = 200;
};

/// Parses a RunConfig document. Physical numbers must be decimal strings.
/// Relative paths are resolved against `base_dir`.
RunConfig parse_run_config(const nlohmann::json& doc, const std::filesystem::path& base_dir = ".");
RunConfig load_run_config(const std::filesystem::path& path);

/// Canonical JSON form of everything that determines a result (the output
/// directory is excluded). Keys are sorted, numbers are kept as decimal text.
nlohmann::json canonical(const RunConfig& config);

/// Hex SHA-256 of `command` plus the canonical config.
std::string run_hash(const std::string& command, const RunConfig& config);

/// Creates `dir` if needed and checks that a file can be created in it.
void ensure_writable_dir(const std::filesystem::path& dir);

struct SweepAxis {
    std::string path;  ///< dotted path into the config document, e.g. "datum.c"
    std::vector<nlohmann::json> values;
};

struct SweepManifest {
    nlohmann::json base;  ///< raw RunConfig document
    std::string command = "evolve";
    std::vector<SweepAxis> axes;
    int max_parallel = 1;
    std::filesystem::path base_dir = ".";
};

constexpr std::size_t kMaxSweepSize = 100000;

SweepManifest parse_sweep_manifest(const nlohmann::json& doc, const std::filesystem::path& base_dir = ".");
SweepManifest load_sweep_manifest(const std::filesystem::path& path);

/// Cartesian product size; throws ConfigError above kMaxSweepSize.
std::size_t sweep_size(const SweepManifest& manifest);

/// Config document of sweep point `index` (row-major over the axes) together
/// with the axis values that produced it.
nlohmann::json sweep_point(const SweepManifest& manifest, std::size_t index, std::vector<std::string>* labels = nullptr);

}  // namespace inls

namespace inls {
/// Lower-case hex SHA-256 of `text`.
std::string sha256_hex(const std::string& text);
}  // namespace inls
