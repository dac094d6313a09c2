#pragma once

#include <complex>
#include <vector>

#include "nullfold/reduction.hpp"

namespace nullfold {

/// Spectrum verdict for a transversal operator.
struct SpectrumGap {
    std::vector<std::complex<double>> eigenvalues;
    double spectral_abscissa = 0.0;       // max real part
    double center_tolerance = 0.0;
    bool gap_holds = false;               // every Re(lambda) < -eta
    bool center_free = false;             // no |Re(lambda)| within the center band
};

/// Full spectral snapshot at a point.
struct SpectralReport {
    Vec point;
    Mat l_full;                            // DV(X)
    Mat l_s;                               // transversal operator in basis_S coordinates
    SpectrumGap gap;
    double eta = 0.0;
    double eta_margin = 0.0;               // (-eta) - spectral_abscissa
};

/// Second-difference Hessian of a functional along the transversal directions.
struct TransversalHessian {
    Mat matrix;
    Vec eigenvalues;
    double threshold = 0.0;
    bool nondegenerate = false;
};

/// Sample plan for the hypothesis verifier.
struct TrialPlan {
    std::vector<Vec> points;
    double horizon = 20.0;
    double dt = 1e-3;
    double window_fraction = 0.25;         // regression window starts at this fraction of horizon
    double bound = 1e6;                    // boundedness threshold for H1
    int h4_samples = 8;
    double rank_tol = kRankTol;
    ScalarFieldFn sigma_distance;          // optional; fills the sigma fields
};

/// Aggregated verdicts for the four hypotheses (boundedness, constant corank,
/// exponential transversal contraction, linearized-flow invariance of N and S).
struct HypothesisReport {
    bool h1_bounded = false;
    double h1_radius = 0.0;
    bool h2_constant = false;
    std::vector<int> observed_coranks;
    double h3_c = 0.0;
    double h3_alpha = 0.0;
    double h3_fit_residual = 0.0;
    double h4_n_residual = 0.0;            // null probes leaking into S
    double h4_s_residual = 0.0;            // transversal probes leaking into N
    double sigma_rate = std::numeric_limits<double>::quiet_NaN();
    double sigma_final_dist = std::numeric_limits<double>::quiet_NaN();
};

struct SigmaConvergence {
    double rate = 0.0;
    double final_dist = 0.0;
    double max_dist = 0.0;
    bool proxy_used = false;               // distance proxied by ||V_S||_S
};

struct ProjectedConvergence {
    bool is_cauchy = false;
    Vec limit;
    std::vector<double> tail_diameters;    // over dyadically shrinking tails
    double arc_tail_ratio = 0.0;           // last/first tail arc length
};

/// Jacobian of the field at X (analytic when available, else central
/// differences).
Mat linearize(const VectorFieldSpec& field, const DegenerateMetricManifold& manifold,
              const Vec& x);

/// Transversal part of the linearization, in basis_S coordinates.
Mat transversal_operator(const Mat& l_full, const TangentSplitting& splitting);

/// True iff every eigenvalue has Re(lambda) < -eta; also reports whether the
/// spectrum stays clear of the imaginary axis (center band
/// 1e-6 * spectral radius, floored at 1e-9).
SpectrumGap spectrum_gap(const Mat& l_s, double eta);

/// Linearization + transversal restriction + spectrum at one point.
SpectralReport spectral_report(const VectorFieldSpec& field,
                               const DegenerateMetricManifold& manifold, const Vec& x,
                               double eta, double rank_tol = kRankTol);

/// Hessian of the functional along basis_S by second central differences.
/// Nondegenerate iff the smallest |eigenvalue| clears 1e-6 of the curvature
/// scale (largest |eigenvalue| or the unit-step variation of the functional,
/// whichever is larger), floored at 1e-10. The verdict is invariant under
/// rescaling the functional.
TransversalHessian hessian_transversal(const FunctionalSpec& functional,
                                       const TangentSplitting& splitting,
                                       const DegenerateMetricManifold& manifold, const Vec& x);

/// Newton solve of dpsi restricted to S = 0, moving only along transversal
/// directions from the seed. At most 50 iterations.
Vec critical_set_local(const FunctionalSpec& functional,
                       const DegenerateMetricManifold& manifold, const Vec& seed,
                       double tol = 1e-10);

/// Tangency of the critical set to the null distribution at a solved critical
/// point: re-solves from seeds displaced along N and measures the transversal
/// component of the resulting secant directions.
double critical_set_tangent_residual(const FunctionalSpec& functional,
                                     const DegenerateMetricManifold& manifold,
                                     const Vec& critical_point, double delta = 1e-3);

/// Runs the trial plan and reports on all four hypotheses.
HypothesisReport check_hypotheses(const DegenerateMetricManifold& manifold,
                                  const VectorFieldSpec& field, const TrialPlan& plan);

/// Regression of log dist(X(t), Sigma) over the late window. Falls back to the
/// recorded ||V_S||_S proxy when no analytic distance is available.
SigmaConvergence sigma_convergence(const Trajectory& trajectory,
                                   const ScalarFieldFn& analytic_sigma = {});

/// Cauchy diagnosis of a reduced trajectory: tail diameters over dyadically
/// shrinking windows must keep shrinking; the limit is the mean of the final
/// window.
ProjectedConvergence projected_convergence(const ReducedTrajectory& reduced);

}  // namespace nullfold
