#pragma once

// Config-driven experiment runner: validated JSON configs, one experiment per
// run, CSV/JSON artifacts listed in a manifest and per-check pass/fail.

#include "rough_llg/analysis.hpp"

#include <filesystem>
#include <optional>
#include <string>

namespace rllg {

inline constexpr const char* kVersion = "0.1.0";
inline constexpr const char* kManifestSchema = "rough-llg-manifest/1";

/// Invalid configuration; `field` names the offending key path.
class ConfigError : public std::runtime_error {
public:
    ConfigError(const std::string& field, const std::string& why)
        : std::runtime_error(field + ": " + why), field_(field) {}
    const std::string& field() const { return field_; }

private:
    std::string field_;
};

/// g(x) = constant + sum_k cos_k cos(2 pi k x) + sin_k sin(2 pi k x), or explicit samples.
struct ProfileSpec {
    std::string kind = "trigonometric";  ///< constant | trigonometric | samples
    double constant = 1.0;
    std::vector<double> cos;
    std::vector<double> sin{0.5};
    std::vector<double> samples;

    std::vector<double> evaluate(const Grid& g) const;
};

struct InitialSpec {
    std::string kind = "cap";  ///< equator | tilted | cap | file
    double amplitude = 0.5;
    std::string path;

    GridField evaluate(const Grid& g) const;
};

struct RunConfig {
    std::string experiment;
    int n_space = 64;
    int M = 10;       ///< finest dyadic level; default steps = 2^M
    int n_min = 4;    ///< coarsest dyadic level (wongzakai)
    int n_max = -1;   ///< finest compared level (wongzakai), default M - 2
    double p = 2.5;
    int k = 2;
    double T = 0.5;
    int steps = 0;    ///< resolved from dt / steps / M
    std::uint64_t seed = 1;
    int q = 3;
    double noise_scale = 1.0;  ///< dilation lambda applied to the driver
    ProfileSpec g_profile;
    InitialSpec u0;
    SolverOptions solver;
    int seeds = 1;                                   ///< driver-check: number of consecutive seeds
    std::vector<double> eps{1.0, 0.25, 0.0625, 0.015625};  ///< smallnoise
    int window_min_log2 = 0;                         ///< remainder windows
    int window_max_log2 = 62;
    Vec3 velocity = Vec3::UnitX();                   ///< skeleton: h(t) = t v
    std::string trajectory_format = "csv";           ///< csv | binary | none
    double apriori_K = 1.0;
    nlohmann::json raw;                              ///< normalized config echoed in the manifest
};

/// Validates every field before any computation; unknown keys are rejected.
RunConfig parse_config(const nlohmann::json& j);
RunConfig load_config(const std::filesystem::path& path);
nlohmann::json to_json(const RunConfig& c);

struct Check {
    std::string name;
    double value = 0.0;
    std::string relation;  ///< e.g. "<= 1e-12", "in [0.7, 1.3]"
    bool passed = false;
};

struct RunResult {
    std::vector<Check> checks;
    nlohmann::json summary;
    std::vector<std::string> files;  ///< relative to the output directory
    bool passed() const;
};

/// Runs the configured experiment, writing artifacts, summary.json and
/// manifest.json into `out`.
RunResult run_experiment(const RunConfig& cfg, const std::filesystem::path& out);

/// Worker count from ROUGH_LLG_THREADS (default 1).
int thread_count();

/// Mode profiles phi_j = g e_{j mod 3} c_{j / 3}, c_0 = 1, c_m = cos(2 pi m x).
std::vector<std::vector<Vec3>> mode_profiles(const std::vector<double>& g, const Grid& grid, int q);
/// Driver of the rough path through the configured profiles (lift_simple for q = 3).
SpaceRoughDriver build_driver(const std::vector<double>& g, const Grid& grid, const ModeRoughPath& rp);

}  // namespace rllg
