#pragma once

#include <optional>
#include <string>
#include <vector>

#include "nullfold/errors.hpp"
#include "nullfold/linalg.hpp"

namespace nullfold {

inline constexpr double kRankTol = 1e-8;

/// Phase space carrying a (possibly indefinite) nondegenerate bilinear form.
struct AmbientSpace {
    int dim = 0;
    MatrixFieldFn metric_field;                // X -> symmetric dim x dim matrix
    std::vector<int> expected_signature;       // optional list of +1/-1 signs
};

/// Scalar constraint whose regular zero level set is the phase manifold.
/// When no analytic differential is supplied, central differences are used.
struct Constraint {
    ScalarFieldFn value;                       // X -> phi(X)
    CovectorFieldFn differential;              // X -> dphi(X); optional

    Vec d(const Vec& x) const {
        return differential ? differential(x) : fd_gradient(value, x);
    }
};

enum class ManifoldMode { embedded, intrinsic };

/// The phase manifold, either cut out of an ambient space by a constraint
/// (embedded) or given directly by a chart with a degenerate form field
/// (intrinsic). Periodic chart coordinates have period 2*pi.
struct DegenerateMetricManifold {
    ManifoldMode mode = ManifoldMode::intrinsic;

    // Embedded mode.
    AmbientSpace ambient;
    Constraint constraint;

    // Intrinsic mode.
    int chart_dim = 0;                         // m
    MatrixFieldFn form_field;                  // X -> symmetric m x m matrix

    std::vector<int> periodic_coords;
    std::optional<int> declared_corank;        // registered k, checked when set
    double constraint_tol = 1e-8;

    /// Dimension of the vectors that represent states.
    int state_dim() const {
        return mode == ManifoldMode::embedded ? ambient.dim : chart_dim;
    }

    /// Dimension of the manifold itself (n - 1 embedded, m intrinsic).
    int manifold_dim() const {
        return mode == ManifoldMode::embedded ? ambient.dim - 1 : chart_dim;
    }

    bool on_manifold(const Vec& x) const {
        if (mode == ManifoldMode::intrinsic) return true;
        return std::abs(constraint.value(x)) <= constraint_tol;
    }
};

/// Pointwise splitting T_X M = N_X (+) S_X. All bases have Euclidean-orthonormal
/// columns in state coordinates; S is the Euclidean-orthogonal complement of N
/// inside the tangent space. gram_s holds the induced form in basis_S
/// coordinates (diagonal by construction).
struct TangentSplitting {
    Vec point;
    Mat basis_n;        // state_dim x k
    Mat basis_s;        // state_dim x (m - k)
    Mat proj_n;         // state_dim x state_dim
    Mat proj_s;
    Mat proj_tangent;   // proj_n + proj_s; identity in intrinsic mode
    Mat gram_s;         // (m - k) x (m - k) induced form on S
    int corank = 0;
};

/// g(X)^{-1} * dphi(X): the metric gradient of the constraint.
Vec ambient_gradient(const AmbientSpace& space, const Constraint& constraint, const Vec& x);

/// g(grad phi, grad phi); zero (within tolerance) signals a degenerate
/// induced form on the level set through X.
double normal_causal_character(const AmbientSpace& space, const Constraint& constraint,
                               const Vec& x);

/// Euclidean-orthonormal basis of the tangent space at X: kernel of the row
/// dphi(X) (embedded) or the chart identity (intrinsic).
Mat tangent_basis(const DegenerateMetricManifold& manifold, const Vec& x);

/// Gram matrix of the induced bilinear form on the given tangent basis.
Mat induced_form(const DegenerateMetricManifold& manifold, const Vec& x, const Mat& basis);

/// Computes the null/transversal splitting at X. corank = number of induced-form
/// eigenvalues with |lambda| below rank_tol * max(largest |lambda|, 1).
TangentSplitting null_splitting(const DegenerateMetricManifold& manifold, const Vec& x,
                                double rank_tol = kRankTol);

/// Max over sample points and generator pairs of the transversal component of
/// the Lie bracket [U, V], with derivatives by central differences of step h.
/// Small values are numerical evidence that the null distribution is involutive.
double involutivity_residual(const DegenerateMetricManifold& manifold,
                             const std::vector<VectorFieldFn>& null_generators,
                             const std::vector<Vec>& sample_points, double h);

/// Lie bracket [u, v](x) by central differences with step h.
Vec lie_bracket(const VectorFieldFn& u, const VectorFieldFn& v, const Vec& x, double h);

}  // namespace nullfold
