#pragma once

#include <complex>
#include <functional>
#include <limits>
#include <string>
#include <vector>

#include "nullfold/spectral.hpp"

namespace nullfold {

/// Analytic facts about a built-in example. These drive default experiment
/// parameters and the expected outcomes of the check battery.
struct ExampleFacts {
    int state_dim = 0;
    int manifold_dim = 0;
    int corank = 0;
    bool leaves_compact = false;

    /// False for user-defined systems: comparisons against closed-form
    /// expectations are skipped and only structural checks run.
    bool has_oracles = true;

    /// Whether the transversal decay ratio is positive at every sample (the
    /// pointwise estimate); false means the battery expects a reported
    /// violation instead.
    bool pointwise_dissipation = true;
    double c_expected =
        std::numeric_limits<double>::quiet_NaN();  // exact decay constant when
                                                   // the estimate is tight
    bool h3_holds = false;            // exponential transversal contraction expected
    bool h4_holds = false;            // splitting invariance under the linearized flow
    double alpha_expected = 0.0;      // contraction rate when h3 holds
    double alpha_tol = 0.05;          // regression tolerance on the fitted rate
    double sigma_rate_expected = 0.0;
    double sigma_rate_tol = 0.05;

    std::vector<std::complex<double>> transversal_eigenvalues;
    Vec spectral_point;               // where the reference spectrum is taken
    double eta_default = 0.5;

    Vec default_x0;
    double default_t_final = 20.0;
    double default_dt = 1e-3;
    double default_t_transient = 12.0;
    double default_t_sample = 20.0;
    double ensemble_dt = 1e-2;

    Vec box_lo, box_hi;               // ensemble sampling box in state coordinates
    Vec absorb_center;
    double absorb_radius = 0.0;
    double omega_cluster_radius = 1e-3;

    Vec critical_seed;
    Vec critical_expected;
    Vec limit_expected;               // expected reduced limit
    double limit_tol = 1e-4;

    /// Window over which the reduced kinetic integral should have decayed to
    /// rounding level, and the expected dimension of the unreduced attractor
    /// cloud (NaN skips the comparison).
    double energy_tail_lo = 10.0;
    double energy_tail_hi = 20.0;
    double attractor_dim_expected = std::numeric_limits<double>::quiet_NaN();

    /// Draws a generic manifold point. Keeps a safety margin away from the
    /// degeneracy set so thresholded predicates are unambiguous on random
    /// draws.
    std::function<Vec(Rng&)> sampler;

    /// Draws a point of the degeneracy set (the field there lies in the null
    /// distribution).
    std::function<Vec(Rng&)> z_sampler;

    /// Points that witness failure of the pointwise decay estimate (empty when
    /// the estimate holds everywhere).
    std::vector<Vec> violation_points;
};

/// A fully specified built-in system.
struct ExampleSystem {
    std::string name;
    DegenerateMetricManifold manifold;
    VectorFieldSpec field;
    FunctionalSpec psi;
    FoliationDescriptor foliation;
    ScalarFieldFn sigma_distance;     // analytic distance to the tangency locus
    ExampleFacts facts;
};

/// The registry of shipped examples:
///   null-hyperplane   — embedded degenerate slice of a 3d indefinite space
///   circle-contract   — compact neutral circle with a contracting transversal
///   presymplectic-toy — damped oscillator times a drifting circle
const std::vector<ExampleSystem>& builtin_examples();

/// Lookup by name; throws ConfigError listing the available names.
const ExampleSystem& find_example(const std::string& name);

/// Member of the slice family: the zero set of x0 - s*x1 in the 3d space with
/// form diag(-1, 1, 1). The induced form degenerates exactly at s = 1.
DegenerateMetricManifold make_minkowski_slice(double s);

/// Directions drawn uniformly from the ensemble box of the example, projected
/// onto the manifold. Deterministic given the generator state.
std::vector<Vec> sample_ensemble(const ExampleSystem& example, int count, Rng& rng,
                                 double inflate = 1.0);

}  // namespace nullfold
