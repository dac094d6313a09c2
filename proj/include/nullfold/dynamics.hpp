#pragma once

#include <string>
#include <utility>
#include <vector>

#include "nullfold/geometry.hpp"

namespace nullfold {

/// A vector field on the phase manifold, in state coordinates. The Jacobian is
/// optional; central finite differences are used when it is absent.
struct VectorFieldSpec {
    VectorFieldFn eval;
    MatrixFieldFn jacobian;       // optional
    std::string name;

    Mat d(const Vec& x) const {
        Mat j = jacobian ? jacobian(x) : fd_jacobian(eval, x);
        if (!is_finite(j)) {
            throw NonFiniteJacobian("vector field Jacobian is not finite at " + name);
        }
        return j;
    }
};

/// Time-stamped states with per-sample diagnostics. Diagnostic arrays are
/// either empty (not recorded) or the same length as times.
struct Trajectory {
    std::vector<double> times;
    std::vector<Vec> states;
    std::vector<double> psi;            // functional value, when supplied
    std::vector<double> vs_norm;        // ||V_S||_S
    std::vector<double> phi_residual;   // |phi|, embedded mode only
    std::vector<double> dist_sigma;     // distance to the tangency set, when supplied
    std::vector<int> periodic;          // periodic coordinate indices

    std::size_t size() const { return times.size(); }
    double t_final() const { return times.empty() ? 0.0 : times.back(); }
};

/// Returns the sub-trajectory with t in [t_lo, t_hi] (diagnostics sliced too).
Trajectory slice(const Trajectory& traj, double t_lo, double t_hi);

struct IntegrateOptions {
    ScalarFieldFn psi;                 // record psi along the way when set
    ScalarFieldFn sigma_distance;      // record dist-to-Sigma when set
    int record_stride = 1;             // keep every record_stride-th step
    double rank_tol = kRankTol;
    bool record_vs_norm = true;
};

/// |dphi(V(X))| in embedded mode, 0 in intrinsic mode.
double check_tangency(const VectorFieldSpec& field, const DegenerateMetricManifold& manifold,
                      const Vec& x);

/// Splits V(X) = V_N + V_S along the given splitting. The two parts are
/// returned in state coordinates and sum back to V(X).
std::pair<Vec, Vec> decompose(const VectorFieldSpec& field, const TangentSplitting& splitting,
                              const Vec& x);
std::pair<Vec, Vec> decompose_vector(const Vec& v, const TangentSplitting& splitting);

/// sqrt(v_S^T G_S v_S) in the transversal metric. Requires the restricted form
/// to be positive definite.
double transversal_norm(const TangentSplitting& splitting,
                        const DegenerateMetricManifold& manifold, const Vec& v_s);

/// Classical fixed-step RK4. In embedded mode every step is followed by a
/// Newton projection back to the constraint set along the Euclidean gradient
/// of phi (at most 5 iterations). Periodic coordinates are wrapped.
Trajectory integrate(const DegenerateMetricManifold& manifold, const VectorFieldSpec& field,
                     const Vec& x0, double t_final, double dt, double tol = 1e-9,
                     const IntegrateOptions& options = {});

/// Projects x onto the constraint set (embedded mode); identity otherwise.
Vec project_to_manifold(const DegenerateMetricManifold& manifold, Vec x, double tol = 1e-9,
                        int max_iter = 5);

/// State plus first-variation samples: v(t) = D(phi_t)(x0) * v0.
struct VariationalTrajectory {
    std::vector<double> times;
    std::vector<Vec> states;
    std::vector<Vec> variations;
};

/// Jointly integrates the state and the first-variation equation
/// v' = DV(X(t)) * v with the same RK4 stepper.
VariationalTrajectory variational_trajectory(const DegenerateMetricManifold& manifold,
                                             const VectorFieldSpec& field, const Vec& x0,
                                             const Vec& v0, double t_final, double dt,
                                             int record_stride = 1);

/// Final value of the first variation, D(phi_t)(x0) * v0.
Vec variational_flow(const DegenerateMetricManifold& manifold, const VectorFieldSpec& field,
                     const Vec& x0, const Vec& v0, double t_final, double dt);

}  // namespace nullfold
