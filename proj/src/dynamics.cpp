#include "nullfold/dynamics.hpp"

#include <Eigen/SVD>

#include <cmath>
#include <sstream>

namespace nullfold {

namespace {

Vec rk4_step(const VectorFieldFn& f, const Vec& x, double dt) {
    const Vec k1 = f(x);
    const Vec k2 = f(x + 0.5 * dt * k1);
    const Vec k3 = f(x + 0.5 * dt * k2);
    const Vec k4 = f(x + dt * k3);
    return x + (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
}

}  // namespace

Trajectory slice(const Trajectory& traj, double t_lo, double t_hi) {
    Trajectory out;
    out.periodic = traj.periodic;
    const double eps = 1e-12 * std::max(1.0, std::abs(t_hi));
    for (std::size_t i = 0; i < traj.size(); ++i) {
        const double t = traj.times[i];
        if (t < t_lo - eps || t > t_hi + eps) continue;
        out.times.push_back(t);
        out.states.push_back(traj.states[i]);
        if (!traj.psi.empty()) out.psi.push_back(traj.psi[i]);
        if (!traj.vs_norm.empty()) out.vs_norm.push_back(traj.vs_norm[i]);
        if (!traj.phi_residual.empty()) out.phi_residual.push_back(traj.phi_residual[i]);
        if (!traj.dist_sigma.empty()) out.dist_sigma.push_back(traj.dist_sigma[i]);
    }
    return out;
}

double check_tangency(const VectorFieldSpec& field, const DegenerateMetricManifold& manifold,
                      const Vec& x) {
    if (manifold.mode == ManifoldMode::intrinsic) return 0.0;
    return std::abs(manifold.constraint.d(x).dot(field.eval(x)));
}

std::pair<Vec, Vec> decompose_vector(const Vec& v, const TangentSplitting& splitting) {
    const Eigen::Index k = splitting.basis_n.cols();
    const Eigen::Index s = splitting.basis_s.cols();
    Mat combined(v.size(), k + s);
    if (k > 0) combined.leftCols(k) = splitting.basis_n;
    if (s > 0) combined.rightCols(s) = splitting.basis_s;
    if (k + s > 0) {
        Eigen::JacobiSVD<Mat> svd(combined);
        if (svd.singularValues().minCoeff() < 1e-8) {
            throw SplittingIllConditioned("combined N/S basis is numerically rank deficient");
        }
    }
    const Vec v_n = splitting.proj_n * v;
    const Vec v_s = splitting.proj_s * v;
    const double residual = (v - v_n - v_s).norm();
    if (residual > 1e-6 * std::max(1.0, v.norm())) {
        std::ostringstream os;
        os << "vector is not tangent at the splitting point (residual " << residual << ")";
        throw TangencyViolated(os.str());
    }
    return {v_n, v_s};
}

std::pair<Vec, Vec> decompose(const VectorFieldSpec& field, const TangentSplitting& splitting,
                              const Vec& x) {
    return decompose_vector(field.eval(x), splitting);
}

double transversal_norm(const TangentSplitting& splitting,
                        const DegenerateMetricManifold& manifold, const Vec& v_s) {
    (void)manifold;
    if (splitting.basis_s.cols() == 0) return 0.0;
    for (Eigen::Index i = 0; i < splitting.gram_s.rows(); ++i) {
        if (splitting.gram_s(i, i) <= 0.0) {
            throw IndefiniteTransversalForm(
                "restricted form is not positive definite; no transversal norm");
        }
    }
    const Vec u = splitting.basis_s.transpose() * v_s;
    return std::sqrt(u.dot(splitting.gram_s * u));
}

Vec project_to_manifold(const DegenerateMetricManifold& manifold, Vec x, double tol,
                        int max_iter) {
    if (manifold.mode == ManifoldMode::intrinsic) return x;
    for (int iter = 0; iter < max_iter; ++iter) {
        const double value = manifold.constraint.value(x);
        if (std::abs(value) <= tol) return x;
        const Vec grad = manifold.constraint.d(x);  // Euclidean gradient direction
        const double gg = grad.squaredNorm();
        if (gg <= kRankTol * kRankTol) {
            throw RegularityViolated("constraint gradient vanished during projection");
        }
        x -= (value / gg) * grad;
    }
    if (std::abs(manifold.constraint.value(x)) > tol) {
        throw ProjectionDiverged("Newton projection onto the constraint set did not converge");
    }
    return x;
}

Trajectory integrate(const DegenerateMetricManifold& manifold, const VectorFieldSpec& field,
                     const Vec& x0, double t_final, double dt, double tol,
                     const IntegrateOptions& options) {
    if (dt <= 0.0) throw LabError("integration step must be positive");
    const long n_steps = std::lround(t_final / dt);

    Trajectory traj;
    traj.periodic = manifold.periodic_coords;
    const bool embedded = manifold.mode == ManifoldMode::embedded;

    Vec x = wrap_state(project_to_manifold(manifold, x0, tol), manifold.periodic_coords);

    auto record = [&](double t, const Vec& state) {
        traj.times.push_back(t);
        traj.states.push_back(state);
        if (options.psi) traj.psi.push_back(options.psi(state));
        if (options.record_vs_norm) {
            const TangentSplitting split = null_splitting(manifold, state, options.rank_tol);
            const auto [v_n, v_s] = decompose(field, split, state);
            (void)v_n;
            traj.vs_norm.push_back(transversal_norm(split, manifold, v_s));
        }
        if (embedded) traj.phi_residual.push_back(std::abs(manifold.constraint.value(state)));
        if (options.sigma_distance) traj.dist_sigma.push_back(options.sigma_distance(state));
    };

    record(0.0, x);
    const int stride = std::max(1, options.record_stride);
    for (long step = 1; step <= n_steps; ++step) {
        x = rk4_step(field.eval, x, dt);
        if (!is_finite(x)) {
            throw NonFiniteState("state became non-finite during integration of " + field.name);
        }
        if (embedded) x = project_to_manifold(manifold, x, tol);
        x = wrap_state(std::move(x), manifold.periodic_coords);
        if (step % stride == 0 || step == n_steps) record(step * dt, x);
    }
    return traj;
}

VariationalTrajectory variational_trajectory(const DegenerateMetricManifold& manifold,
                                             const VectorFieldSpec& field, const Vec& x0,
                                             const Vec& v0, double t_final, double dt,
                                             int record_stride) {
    if (dt <= 0.0) throw LabError("integration step must be positive");
    const long n_steps = std::lround(t_final / dt);
    const bool embedded = manifold.mode == ManifoldMode::embedded;

    VariationalTrajectory out;
    Vec x = wrap_state(project_to_manifold(manifold, x0), manifold.periodic_coords);
    Vec v = v0;

    auto record = [&](double t) {
        out.times.push_back(t);
        out.states.push_back(x);
        out.variations.push_back(v);
    };

    record(0.0);
    const int stride = std::max(1, record_stride);
    for (long step = 1; step <= n_steps; ++step) {
        // One RK4 step of the coupled system (x, v).
        const Vec k1x = field.eval(x);
        const Vec k1v = field.d(x) * v;
        const Vec x2 = x + 0.5 * dt * k1x;
        const Vec k2x = field.eval(x2);
        const Vec k2v = field.d(x2) * (v + 0.5 * dt * k1v);
        const Vec x3 = x + 0.5 * dt * k2x;
        const Vec k3x = field.eval(x3);
        const Vec k3v = field.d(x3) * (v + 0.5 * dt * k2v);
        const Vec x4 = x + dt * k3x;
        const Vec k4x = field.eval(x4);
        const Vec k4v = field.d(x4) * (v + dt * k3v);

        x += (dt / 6.0) * (k1x + 2.0 * k2x + 2.0 * k3x + k4x);
        v += (dt / 6.0) * (k1v + 2.0 * k2v + 2.0 * k3v + k4v);
        if (!is_finite(x) || !is_finite(v)) {
            throw NonFiniteState("variational integration became non-finite");
        }
        if (embedded) x = project_to_manifold(manifold, x);
        x = wrap_state(std::move(x), manifold.periodic_coords);
        if (step % stride == 0 || step == n_steps) record(step * dt);
    }
    return out;
}

Vec variational_flow(const DegenerateMetricManifold& manifold, const VectorFieldSpec& field,
                     const Vec& x0, const Vec& v0, double t_final, double dt) {
    const long n_steps = std::max(1L, std::lround(t_final / dt));
    const VariationalTrajectory vt = variational_trajectory(
        manifold, field, x0, v0, t_final, dt, static_cast<int>(n_steps));
    return vt.variations.back();
}

}  // namespace nullfold
