#include "nullfold/spectral.hpp"

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>
#include <set>

namespace nullfold {

namespace {

/// Hessian of psi along the columns of basis by second central differences.
Mat second_difference_hessian(const FunctionalSpec& functional, const Mat& basis, const Vec& x) {
    const int d = static_cast<int>(basis.cols());
    const double h = fd_step2(x.norm());
    Mat hess(d, d);
    const double psi0 = functional.value(x);
    for (int i = 0; i < d; ++i) {
        const Vec bi = basis.col(i);
        hess(i, i) = (functional.value(x + h * bi) - 2.0 * psi0 + functional.value(x - h * bi)) /
                     (h * h);
        for (int j = i + 1; j < d; ++j) {
            const Vec bj = basis.col(j);
            const double mixed =
                (functional.value(x + h * (bi + bj)) - functional.value(x + h * (bi - bj)) -
                 functional.value(x - h * (bi - bj)) + functional.value(x - h * (bi + bj))) /
                (4.0 * h * h);
            hess(i, j) = mixed;
            hess(j, i) = mixed;
        }
    }
    return hess;
}

}  // namespace

Mat linearize(const VectorFieldSpec& field, const DegenerateMetricManifold& manifold,
              const Vec& x) {
    (void)manifold;
    return field.d(x);
}

Mat transversal_operator(const Mat& l_full, const TangentSplitting& splitting) {
    return splitting.basis_s.transpose() * l_full * splitting.basis_s;
}

SpectrumGap spectrum_gap(const Mat& l_s, double eta) {
    SpectrumGap out;
    if (l_s.rows() == 0) {
        out.gap_holds = true;
        out.center_free = true;
        out.spectral_abscissa = -std::numeric_limits<double>::infinity();
        return out;
    }
    Eigen::EigenSolver<Mat> solver(l_s);
    if (solver.info() != Eigen::Success) {
        throw EigenFailure("eigenvalue computation for the transversal operator failed");
    }
    double abscissa = -std::numeric_limits<double>::infinity();
    double radius = 0.0;
    for (Eigen::Index i = 0; i < l_s.rows(); ++i) {
        const std::complex<double> lambda = solver.eigenvalues()[i];
        out.eigenvalues.push_back(lambda);
        abscissa = std::max(abscissa, lambda.real());
        radius = std::max(radius, std::abs(lambda));
    }
    std::sort(out.eigenvalues.begin(), out.eigenvalues.end(),
              [](const std::complex<double>& a, const std::complex<double>& b) {
                  return a.real() != b.real() ? a.real() < b.real() : a.imag() < b.imag();
              });
    out.spectral_abscissa = abscissa;
    out.center_tolerance = std::max(1e-6 * radius, 1e-9);
    out.gap_holds = abscissa < -eta;
    out.center_free = true;
    for (const auto& lambda : out.eigenvalues) {
        if (std::abs(lambda.real()) <= out.center_tolerance) out.center_free = false;
    }
    return out;
}

SpectralReport spectral_report(const VectorFieldSpec& field,
                               const DegenerateMetricManifold& manifold, const Vec& x,
                               double eta, double rank_tol) {
    SpectralReport report;
    report.point = x;
    report.l_full = linearize(field, manifold, x);
    const TangentSplitting split = null_splitting(manifold, x, rank_tol);
    report.l_s = transversal_operator(report.l_full, split);
    report.gap = spectrum_gap(report.l_s, eta);
    report.eta = eta;
    report.eta_margin = -eta - report.gap.spectral_abscissa;
    return report;
}

TransversalHessian hessian_transversal(const FunctionalSpec& functional,
                                       const TangentSplitting& splitting,
                                       const DegenerateMetricManifold& manifold, const Vec& x) {
    (void)manifold;
    TransversalHessian out;
    out.matrix = second_difference_hessian(functional, splitting.basis_s, x);
    Eigen::SelfAdjointEigenSolver<Mat> eig(out.matrix);
    out.eigenvalues = eig.eigenvalues();

    // Characteristic curvature of the functional near X: the largest Hessian
    // eigenvalue, or the unit-step variation along S when that is larger. The
    // latter keeps the verdict honest for flat-but-nonzero profiles (quartic
    // wells) and makes it invariant under rescaling psi.
    const double psi0 = functional.value(x);
    double variation = 0.0;
    for (Eigen::Index j = 0; j < splitting.basis_s.cols(); ++j) {
        const Vec b = splitting.basis_s.col(j);
        variation = std::max(variation, std::abs(functional.value(x + b) - psi0));
        variation = std::max(variation, std::abs(functional.value(x - b) - psi0));
    }
    const double eig_max = out.eigenvalues.size() > 0 ? out.eigenvalues.cwiseAbs().maxCoeff() : 0.0;
    const double curvature_scale = std::max(eig_max, variation);
    out.threshold = std::max(1e-6 * curvature_scale, 1e-10);
    const double eig_min = out.eigenvalues.size() > 0 ? out.eigenvalues.cwiseAbs().minCoeff() : 0.0;
    out.nondegenerate = eig_min > out.threshold;
    return out;
}

Vec critical_set_local(const FunctionalSpec& functional,
                       const DegenerateMetricManifold& manifold, const Vec& seed, double tol) {
    Vec x = project_to_manifold(manifold, seed);
    for (int iter = 0; iter < 50; ++iter) {
        const TangentSplitting split = null_splitting(manifold, x);
        const Vec residual = split.basis_s.transpose() * functional.d(x);
        if (residual.norm() <= tol) return x;
        const Mat hess = second_difference_hessian(functional, split.basis_s, x);
        const Vec delta = hess.fullPivLu().solve(-residual);
        if (!is_finite(delta)) {
            throw NewtonDiverged("transversal Newton step is not finite");
        }
        x = wrap_state(project_to_manifold(manifold, x + split.basis_s * delta),
                       manifold.periodic_coords);
    }
    throw NewtonDiverged("critical-point search did not converge in 50 iterations");
}

double critical_set_tangent_residual(const FunctionalSpec& functional,
                                     const DegenerateMetricManifold& manifold,
                                     const Vec& critical_point, double delta) {
    const TangentSplitting split = null_splitting(manifold, critical_point);
    double worst = 0.0;
    for (Eigen::Index j = 0; j < split.basis_n.cols(); ++j) {
        const Vec seed = critical_point + delta * split.basis_n.col(j);
        const Vec neighbor = critical_set_local(functional, manifold, seed);
        const Vec secant = chart_diff(neighbor, critical_point, manifold.periodic_coords);
        if (secant.norm() <= 1e-12) continue;
        worst = std::max(worst, (split.proj_s * secant).norm() / secant.norm());
    }
    return worst;
}

HypothesisReport check_hypotheses(const DegenerateMetricManifold& manifold,
                                  const VectorFieldSpec& field, const TrialPlan& plan) {
    if (plan.points.empty()) throw LabError("hypothesis verifier needs at least one trial point");
    HypothesisReport report;
    report.h1_bounded = true;
    report.h3_alpha = std::numeric_limits<double>::infinity();
    std::set<int> coranks;

    const long n_steps = std::lround(plan.horizon / plan.dt);
    const int stride = static_cast<int>(std::max(1L, n_steps / 512));

    for (const Vec& x0 : plan.points) {
        IntegrateOptions options;
        options.record_stride = stride;
        options.record_vs_norm = false;
        if (plan.sigma_distance) options.sigma_distance = plan.sigma_distance;
        const Trajectory traj =
            integrate(manifold, field, x0, plan.horizon, plan.dt, 1e-9, options);

        // H1: trajectories stay inside a finite radius.
        for (const Vec& x : traj.states) {
            report.h1_radius = std::max(report.h1_radius, x.norm());
        }
        if (!(report.h1_radius < plan.bound)) report.h1_bounded = false;

        // H2: corank at every visited sample.
        for (const Vec& x : traj.states) {
            coranks.insert(null_splitting(manifold, x, plan.rank_tol).corank);
        }

        // Probes from the splitting at the start point.
        const TangentSplitting split0 = null_splitting(manifold, x0, plan.rank_tol);
        const double window_lo = plan.window_fraction * plan.horizon;

        auto h4_scan = [&](const VariationalTrajectory& vt, bool null_probe) {
            const std::size_t n = vt.times.size();
            for (int l = 1; l <= plan.h4_samples; ++l) {
                const std::size_t idx =
                    std::min(n - 1, static_cast<std::size_t>(
                                        std::llround(static_cast<double>(l) *
                                                     static_cast<double>(n - 1) /
                                                     plan.h4_samples)));
                const TangentSplitting split_t =
                    null_splitting(manifold, vt.states[idx], plan.rank_tol);
                const Vec& v = vt.variations[idx];
                if (null_probe) {
                    report.h4_n_residual =
                        std::max(report.h4_n_residual, (split_t.proj_s * v).norm());
                } else {
                    report.h4_s_residual =
                        std::max(report.h4_s_residual, (split_t.proj_n * v).norm());
                }
            }
        };

        for (Eigen::Index j = 0; j < split0.basis_n.cols(); ++j) {
            const VariationalTrajectory vt = variational_trajectory(
                manifold, field, x0, split0.basis_n.col(j), plan.horizon, plan.dt, stride);
            h4_scan(vt, true);
        }
        for (Eigen::Index j = 0; j < split0.basis_s.cols(); ++j) {
            const VariationalTrajectory vt = variational_trajectory(
                manifold, field, x0, split0.basis_s.col(j), plan.horizon, plan.dt, stride);
            h4_scan(vt, false);

            // H3: exponential decay of the probe norm over the late window.
            std::vector<double> ts, lognorm;
            for (std::size_t i = 0; i < vt.times.size(); ++i) {
                if (vt.times[i] < window_lo) continue;
                const double norm = vt.variations[i].norm();
                if (norm <= 1e-300) continue;
                ts.push_back(vt.times[i]);
                lognorm.push_back(std::log(norm));
            }
            if (ts.size() < 10) throw LabError("too few samples in the contraction window");
            const LineFit fit = fit_line(ts, lognorm);
            report.h3_alpha = std::min(report.h3_alpha, -fit.slope);
            report.h3_c = std::max(report.h3_c, std::exp(fit.intercept));
            report.h3_fit_residual = std::max(report.h3_fit_residual, fit.max_residual);
        }

        if (plan.sigma_distance) {
            const SigmaConvergence sc = sigma_convergence(traj, plan.sigma_distance);
            if (std::isnan(report.sigma_rate) || sc.rate < report.sigma_rate) {
                report.sigma_rate = sc.rate;
            }
            if (std::isnan(report.sigma_final_dist) || sc.final_dist > report.sigma_final_dist) {
                report.sigma_final_dist = sc.final_dist;
            }
        }
    }

    report.observed_coranks.assign(coranks.begin(), coranks.end());
    report.h2_constant = coranks.size() == 1;
    return report;
}

SigmaConvergence sigma_convergence(const Trajectory& trajectory,
                                   const ScalarFieldFn& analytic_sigma) {
    SigmaConvergence out;
    std::vector<double> dist(trajectory.size());
    if (!trajectory.dist_sigma.empty()) {
        dist = trajectory.dist_sigma;
    } else if (analytic_sigma) {
        for (std::size_t i = 0; i < trajectory.size(); ++i) {
            dist[i] = analytic_sigma(trajectory.states[i]);
        }
    } else if (!trajectory.vs_norm.empty()) {
        dist = trajectory.vs_norm;
        out.proxy_used = true;
    } else {
        throw LabError("no distance-to-Sigma source available on this trajectory");
    }

    out.final_dist = dist.back();
    for (double d : dist) out.max_dist = std::max(out.max_dist, d);

    const double window_lo = 0.25 * trajectory.t_final();
    std::vector<double> ts, logd;
    for (std::size_t i = 0; i < trajectory.size(); ++i) {
        if (trajectory.times[i] < window_lo) continue;
        if (dist[i] <= 1e-14) continue;
        ts.push_back(trajectory.times[i]);
        logd.push_back(std::log(dist[i]));
    }
    if (ts.size() >= 10) {
        out.rate = -fit_line(ts, logd).slope;
    }
    return out;
}

ProjectedConvergence projected_convergence(const ReducedTrajectory& reduced) {
    if (reduced.size() < 100) {
        throw LabError("projected-convergence diagnosis needs at least 100 samples");
    }
    ProjectedConvergence out;
    const double t_end = reduced.times.back();

    auto tail_diameter = [&](double t_lo) {
        Vec lo, hi;
        bool first = true;
        for (std::size_t i = 0; i < reduced.size(); ++i) {
            if (reduced.times[i] < t_lo) continue;
            const Vec& y = reduced.states[i];
            if (first) {
                lo = y;
                hi = y;
                first = false;
            } else {
                lo = lo.cwiseMin(y);
                hi = hi.cwiseMax(y);
            }
        }
        return first ? 0.0 : (hi - lo).norm();
    };

    auto tail_arc = [&](double t_lo) {
        double arc = 0.0;
        for (std::size_t i = 1; i < reduced.size(); ++i) {
            if (reduced.times[i] < t_lo) continue;
            arc += chart_diff(reduced.states[i], reduced.states[i - 1], reduced.periodic).norm();
        }
        return arc;
    };

    double frac = 0.5;
    for (int j = 0; j < 4; ++j) {
        out.tail_diameters.push_back(tail_diameter(t_end * (1.0 - frac)));
        frac *= 0.5;
    }
    out.is_cauchy = true;
    for (std::size_t j = 1; j < out.tail_diameters.size(); ++j) {
        if (out.tail_diameters[j] > 0.75 * out.tail_diameters[j - 1] + 1e-12) {
            out.is_cauchy = false;
        }
    }
    const double arc_first = tail_arc(t_end * 0.5);
    const double arc_last = tail_arc(t_end * (1.0 - 0.0625));
    out.arc_tail_ratio = arc_first > 0.0 ? arc_last / arc_first : 0.0;
    if (out.arc_tail_ratio > 0.75) out.is_cauchy = false;

    // Limit: mean of the final 10% window.
    Vec sum = Vec::Zero(reduced.states.front().size());
    long count = 0;
    for (std::size_t i = 0; i < reduced.size(); ++i) {
        if (reduced.times[i] < 0.9 * t_end) continue;
        sum += reduced.states[i];
        ++count;
    }
    out.limit = sum / static_cast<double>(std::max(1L, count));
    return out;
}

}  // namespace nullfold
