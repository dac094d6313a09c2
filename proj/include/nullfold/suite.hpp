#pragma once

#include <map>
#include <optional>
#include <string>

#include "nullfold/config.hpp"
#include "nullfold/report.hpp"

namespace nullfold {

/// Knobs of the check battery. Timing fields left as NaN fall back to the
/// example's defaults. Named tolerance overrides are absolute; everything else
/// is the documented default multiplied by tol_scale.
struct BatteryParams {
    double tol_scale = 1.0;
    std::uint64_t seed = 42;
    double t_final = std::numeric_limits<double>::quiet_NaN();
    double dt = std::numeric_limits<double>::quiet_NaN();
    double t_transient = std::numeric_limits<double>::quiet_NaN();
    double t_sample = std::numeric_limits<double>::quiet_NaN();
    double eta = std::numeric_limits<double>::quiet_NaN();
    int ensemble = 16;
    std::map<std::string, double> tolerances;
    std::optional<Vec> x0;
};

/// Heavyweight intermediates of a battery run, exposed so callers can write
/// them out without recomputing.
struct BatteryArtifacts {
    Trajectory primary;
    ReducedTrajectory reduced;
    AttractorEstimate attractor;
    bool has_reduced = false;
    bool has_attractor = false;
    std::vector<Vec> ensemble_ics;
};

/// Runs every applicable check of the catalog against one example. Pipeline
/// exceptions inside a check are recorded as failures, never propagated.
DiagnosticsReport run_battery(const ExampleSystem& example, const BatteryParams& params,
                              BatteryArtifacts* artifacts = nullptr);

/// Full battery at default parameters; the repository's acceptance entry
/// point. Throws ConfigError for unknown names.
DiagnosticsReport check_suite(const std::string& example_name, double tol_scale = 1.0);

struct RunResult {
    DiagnosticsReport report;
    std::string out_dir;
};

/// Materializes the configured example, runs the battery, and writes
/// trajectory.csv, reduced.csv, cloud_m.csv, cloud_red.csv, and report.json
/// into the output directory. Output location: config `out`, else the
/// NULLFOLD_OUT environment variable, else ./nullfold_out.
RunResult run_experiment(const ExperimentConfig& config);

}  // namespace nullfold
