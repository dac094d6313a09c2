#pragma once

#include <vector>

#include "nullfold/dynamics.hpp"

namespace nullfold {

/// A scalar functional on the manifold whose differential is expected to
/// annihilate the null distribution. Central differences back up a missing
/// analytic differential.
struct FunctionalSpec {
    ScalarFieldFn value;
    CovectorFieldFn differential;    // optional
    double lower_bound = 0.0;
    std::string name;

    Vec d(const Vec& x) const {
        return differential ? differential(x) : fd_gradient(value, x);
    }
};

/// Outcome of the empirical transversal-decay estimate.
struct DissipationEstimate {
    double c_hat = 0.0;              // inf over admissible samples of the decay ratio
    int admissible = 0;              // samples with ||V_S||_S above the floor
    bool no_transversal_motion = false;  // no admissible samples at all
};

struct BudgetResult {
    double lhs = 0.0;                // integral of ||V_S||_S^2 dt
    double rhs = 0.0;                // (psi(start) - psi(end)) / c_hat
};

/// Compatibility residual of the functional with the null distribution at X:
/// max over null basis columns b of |dpsi(X) . (b / ||b||_inf)| / max(1, ||dpsi||).
/// Values at rounding level certify that dpsi annihilates N_X.
double check_compatibility(const FunctionalSpec& functional, const TangentSplitting& splitting,
                           const Vec& x);

/// Empirical decay constant: inf over samples (with ||V_S||_S > floor) of
/// -dpsi(V_S) / ||V_S||_S^2. A nonpositive ratio at any sample disproves the
/// pointwise estimate and raises DissipationViolated with the witness point.
DissipationEstimate dissipation_constant(const FunctionalSpec& functional,
                                         const VectorFieldSpec& field,
                                         const DegenerateMetricManifold& manifold,
                                         const std::vector<Vec>& samples,
                                         double floor = 1e-6);

/// ||V_S(X)||_S: vanishes exactly on the set where the field is tangent to the
/// null distribution.
double z_indicator(const VectorFieldSpec& field, const TangentSplitting& splitting,
                   const DegenerateMetricManifold& manifold, const Vec& x);

/// Max over consecutive samples of psi(t_{i+1}) - psi(t_i). Nonpositive up to
/// integrator slack means the functional is nonincreasing along the trajectory.
double monotonicity_check(const Trajectory& trajectory, const FunctionalSpec& functional);

/// Slack allowance for discrete monotonicity: 10 * dt * max |dpsi(V)| along the
/// trajectory.
double monotonicity_slack(const Trajectory& trajectory, const FunctionalSpec& functional,
                          const VectorFieldSpec& field);

/// Trapezoidal integral of ||V_S||_S^2 against the drop of psi scaled by c_hat.
/// The decay estimate implies lhs <= rhs.
BudgetResult dissipation_budget(const Trajectory& trajectory, const FunctionalSpec& functional,
                                double c_hat);

/// Greedy radius clustering of the last tail_fraction of the trajectory.
/// Returns one representative per cluster (the first member, deterministic).
/// More than 64 clusters signals a non-convergent tail.
std::vector<Vec> omega_limit_estimate(const Trajectory& trajectory, double tail_fraction,
                                      double cluster_radius);

}  // namespace nullfold
