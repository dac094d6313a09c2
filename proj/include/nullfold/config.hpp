#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "nullfold/examples.hpp"

namespace nullfold {

/// One monomial of a polynomial coefficient table: coeff * prod_j x_j^powers[j],
/// contributing to component `component` (ignored for scalar tables).
struct InlineTerm {
    int component = 0;
    double coeff = 0.0;
    std::vector<int> powers;
};

/// Polynomial system defined directly in a config file (intrinsic chart,
/// constant diagonal form). Covers custom experiments without code changes;
/// anything non-polynomial goes through the library API instead.
struct InlineSystem {
    std::string name = "inline";
    int dim = 0;
    int corank = 0;
    std::vector<double> form_diag;
    std::vector<int> periodic;
    bool leaves_compact = false;
    std::vector<InlineTerm> field_terms;
    std::vector<InlineTerm> psi_terms;
    Vec x0;
    Vec box_lo;
    Vec box_hi;
};

/// Flat experiment description parsed from a TOML file. Timing fields left as
/// NaN fall back to the chosen example's defaults at run time.
struct ExperimentConfig {
    std::string example;
    std::optional<InlineSystem> inline_system;

    double t_final = std::numeric_limits<double>::quiet_NaN();
    double dt = std::numeric_limits<double>::quiet_NaN();
    double t_transient = std::numeric_limits<double>::quiet_NaN();
    double t_sample = std::numeric_limits<double>::quiet_NaN();
    double eta = std::numeric_limits<double>::quiet_NaN();

    int ensemble = 16;
    std::uint64_t seed = 42;
    double tol_scale = 1.0;
    std::map<std::string, double> tolerances;

    std::optional<Vec> x0;
    std::optional<Vec> box_lo;
    std::optional<Vec> box_hi;
    std::string out_dir;
};

/// Parses and validates a flat TOML config. Throws ConfigError with the
/// offending line/field on syntax errors, unknown keys, duplicates, or
/// invariant violations (dt > 0, t_transient < t_final, tolerances > 0,
/// ensemble >= 16).
ExperimentConfig parse_config_text(const std::string& text);
ExperimentConfig load_config(const std::string& path);

/// Builds an ExampleSystem from an inline polynomial definition. The field and
/// functional get exact polynomial Jacobians/differentials, and the constant
/// diagonal form yields an explicit axis-aligned foliation. No closed-form
/// expectations or degeneracy-set distance are attached, so checks needing
/// those are skipped.
ExampleSystem materialize_inline(const InlineSystem& sys);

/// Canonical `key = value` rendering of the effective config (sorted keys,
/// shortest-round-trip floats); its FNV-1a digest is the report's config hash.
std::string canonical_config_text(const ExperimentConfig& config);

}  // namespace nullfold
