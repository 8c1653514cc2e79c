#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "json.hpp"

namespace nlevel {

inline constexpr int kSchemaVersion = 1;

// Experiment configuration. On disk: `key = value` lines (TOML subset),
// arrays in brackets, `#` comments; see README for the field table.
struct ExperimentConfig {
    int schema_version = kSchemaVersion;
    std::string experiment;  // zeros | empirical | als | predict | rmt | verify-explicit | constants | matchup
    std::vector<std::string> family;
    std::vector<double> Q;
    int n = 0;  // optional; must equal the family size when given
    std::vector<int> N;
    std::int64_t samples = 100000;
    int streams = 8;
    std::uint64_t seed = 1;
    int workers = 1;
    double tolerance = 1e-3;
    double height = 50.0;
    std::vector<double> t{0.0};
    int qmax = 20;
    int k = 1, r = 1;
    std::int64_t P = 1;
    std::string statistic = "L1";
    int gh_order = 40;
    std::filesystem::path out = "results";
    std::optional<std::filesystem::path> cache;
    bool csv = false;
};

class ConfigError : public std::runtime_error {
public:
    ConfigError(std::string field, const std::string& what);
    std::string field;  // e.g. "family[1]"
};

ExperimentConfig parse_config(std::istream& in);
ExperimentConfig load_config(const std::filesystem::path& file);
// Throws ConfigError for unknown experiments, missing fields and families
// that fail the support condition.
void validate(const ExperimentConfig& c);

// Stable hash of every field that changes results (not workers or paths).
std::string experiment_id(const ExperimentConfig& c);

// Cache directory: explicit value, else NLEVEL_CACHE, else ".nlevel_cache".
std::filesystem::path resolve_cache_dir(const ExperimentConfig& c);

struct RunResult {
    int status = 0;
    bool cache_hit = false;  // records already present, nothing appended
    std::vector<nlohmann::json> records;
    std::filesystem::path output;
};

// Executes the configured pipeline and appends JSONL records to
// out/<experiment>.jsonl unless the experiment id is already there.
RunResult run(const ExperimentConfig& c, std::ostream& log);

}  // namespace nlevel
