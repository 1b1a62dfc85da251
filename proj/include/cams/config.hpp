#pragma once

#include <string>
#include <variant>

#include "cams/core.hpp"
#include "cams/montecarlo.hpp"
#include "cams/scenarios.hpp"
#include "cams/solver.hpp"

namespace cams {

struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct SweepSection {
    int n_points = 16;
    bool include_bcrb = true;
};

enum class OutputFormat { csv, json };

struct OutputSection {
    std::string dir = "out";
    OutputFormat format = OutputFormat::csv;
};

struct RunConfig {
    std::variant<DoaConfig, OfdmConfig> scenario = DoaConfig{};
    SolverConfig solver;
    SweepSection sweep;
    McRunConfig montecarlo;
    OutputSection output;
    std::uint64_t seed = 1;
};

/// Parse and validate a JSON run configuration. Unknown keys are rejected;
/// the CAMS_SEED environment variable overrides the configured seed.
RunConfig load_run_config(const std::string& path);
RunConfig parse_run_config(const std::string& text);

Scenario build_scenario(const RunConfig& cfg);

/// Full-precision text for doubles (17 significant digits; "inf" markers).
std::string format_full(double x);

/// Dense complex matrix JSON: {"dim": M, "entries": [[re, im], ...]} in
/// row-major order.
std::string cov_to_json(const CovMatrix& q);
CovMatrix cov_from_json(const std::string& text);

std::string tradeoff_to_json(const TradeoffPoint& pt);
std::string mc_summary_to_json(const McSummary& s);

}  // namespace cams
