#pragma once

#include <limits>
#include <vector>

#include "nullfold/dissipation.hpp"

namespace nullfold {

/// The null foliation of an example: generating fields for the leaves, the
/// quotient map onto the leaf space, and declared global leaf topology.
struct FoliationDescriptor {
    std::vector<VectorFieldFn> generators;     // span N pointwise
    VectorFieldFn quotient_map;                // pi : state -> reduced point
    MatrixFieldFn quotient_differential;       // optional; FD fallback
    std::vector<int> quotient_periodic;        // periodic reduced coordinates
    bool leaves_compact = false;               // declared, not derivable numerically

    Mat dpi(const Vec& x) const {
        return quotient_differential ? quotient_differential(x)
                                     : fd_jacobian(quotient_map, x);
    }
};

/// Image of a trajectory under the quotient map.
struct ReducedTrajectory {
    std::vector<double> times;
    std::vector<Vec> states;
    std::vector<int> periodic;

    std::size_t size() const { return times.size(); }
};

/// Pooled late-time samples of an ensemble, in the manifold and in the
/// quotient. hausdorff_gap compares the two halves of the sampling window.
struct AttractorEstimate {
    std::vector<Vec> cloud_m;
    std::vector<Vec> cloud_red;
    double hausdorff_gap = 0.0;
    std::vector<int> periodic;            // manifold periodic coordinates
    std::vector<int> reduced_periodic;
};

struct LeafSample {
    std::vector<Vec> points;
    bool escaped = false;                 // left the chart bound: noncompact leaf evidence
};

struct BoxDimension {
    std::vector<double> scales;
    std::vector<long> counts;
    double slope = 0.0;                   // box-counting dimension estimate
    double fit_residual = 0.0;
};

struct AbsorbingReport {
    double max_entry_time = 0.0;          // latest first-entry time over the ensemble
    bool all_entered = false;
    bool stays_inside = false;            // no excursion after entry
    double max_radius_after_entry = 0.0;
};

/// Max transversal component of the Lie bracket [V, W] over samples and
/// generators W; a small value certifies that the field descends to the
/// quotient.
double verify_projectability(const VectorFieldSpec& field, const FoliationDescriptor& foliation,
                             const DegenerateMetricManifold& manifold,
                             const std::vector<Vec>& samples, double h);

/// Applies the quotient map samplewise; reduced periodic coordinates wrapped.
ReducedTrajectory project_trajectory(const Trajectory& trajectory,
                                     const FoliationDescriptor& foliation);

/// Max relative mismatch between the finite-difference reduced velocity and
/// dpi(V_S) at interior samples. O(dt^2) for smooth flows.
double projected_velocity_residual(const Trajectory& trajectory,
                                   const ReducedTrajectory& reduced,
                                   const DegenerateMetricManifold& manifold,
                                   const VectorFieldSpec& field,
                                   const FoliationDescriptor& foliation);

/// Metric on the quotient at pi(X): Gram matrix of the induced form on the
/// unique transversal lifts of the reduced coordinate frame. Independent of
/// the choice of representative X on a leaf.
Mat reduced_metric(const FoliationDescriptor& foliation,
                   const DegenerateMetricManifold& manifold, const Vec& x);

/// Trapezoidal integral of ||dY/dt||^2 over [t_lo, t_hi] (whole curve by
/// default), with dY/dt by central differences. The reduced metric of all
/// shipped examples is the identity in quotient coordinates, which is what the
/// plain Euclidean squared norm here computes.
double finite_energy_check(const ReducedTrajectory& reduced,
                           double t_lo = -std::numeric_limits<double>::infinity(),
                           double t_hi = std::numeric_limits<double>::infinity());

/// Points on the leaf through X obtained by flowing the generators; walks
/// count steps of size arc_step. Leaving the chart bound flags escape.
LeafSample leaf_sample(const FoliationDescriptor& foliation,
                       const DegenerateMetricManifold& manifold, const Vec& x, int count,
                       double arc_step, double chart_bound = 1e3);

/// Integrates an ensemble, discards [0, t_transient], pools samples over the
/// next t_sample time units, and compares the two halves of the window.
AttractorEstimate attractor_estimate(const DegenerateMetricManifold& manifold,
                                     const VectorFieldSpec& field,
                                     const FoliationDescriptor& foliation,
                                     const std::vector<Vec>& ensemble, double t_transient,
                                     double t_sample, double dt, int record_stride = 1);

/// Symmetric Hausdorff distance between finite point sets (chart metric,
/// periodic coordinates wrapped). Sets larger than cap are subsampled evenly.
double hausdorff_distance(const std::vector<Vec>& a, const std::vector<Vec>& b,
                          const std::vector<int>& periodic, std::size_t cap = 2000);

/// Fraction of leaf samples (through cloud representatives) that lie within
/// epsilon of the cloud; 1.0 means the estimated attractor is a union of
/// whole leaves.
double saturation_check(const AttractorEstimate& estimate, const FoliationDescriptor& foliation,
                        const DegenerateMetricManifold& manifold, double epsilon,
                        int leaf_count = 64, std::size_t max_representatives = 256);

/// Box-counting dimension estimate: least-squares slope of log(count) against
/// log(1/scale). Scales must number at least 4 and span at least 1.5 decades.
BoxDimension box_dimension(const std::vector<Vec>& cloud, const std::vector<double>& scales);

/// Dyadic default scales 2^-1 .. 2^-6 (1.5 decades).
std::vector<double> default_box_scales();

/// Runs trajectories from the given (typically inflated) ensemble and reports
/// when they enter the ball of the given radius around center (chart metric)
/// and whether they remain inside afterwards.
AbsorbingReport absorbing_entry(const DegenerateMetricManifold& manifold,
                                const VectorFieldSpec& field, const std::vector<Vec>& ensemble,
                                const Vec& center, double radius, double t_final, double dt);

}  // namespace nullfold
