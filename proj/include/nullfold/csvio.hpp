#pragma once

#include <string>
#include <vector>

#include "nullfold/dynamics.hpp"
#include "nullfold/reduction.hpp"

namespace nullfold {

/// Shortest-round-trip decimal rendering of a double ("%.17g").
std::string format_double(double value);

/// Writes `t, x0..x{d-1}, psi, vs_norm, phi_residual, dist_sigma`.
/// Columns whose backing arrays are empty are emitted as empty fields.
void write_trajectory_csv(const std::string& path, const Trajectory& traj);

/// Writes `t, x0..x{d-1}` for a quotient-space trajectory.
void write_reduced_csv(const std::string& path, const ReducedTrajectory& reduced);

/// Writes `x0..x{d-1}`, one point per row.
void write_points_csv(const std::string& path, const std::vector<Vec>& points);

}  // namespace nullfold
