#include "nullfold/reduction.hpp"

#include <Eigen/SVD>

#include <algorithm>
#include <cmath>
#include <future>
#include <limits>
#include <unordered_set>

namespace nullfold {

namespace {

std::vector<Vec> subsample(const std::vector<Vec>& points, std::size_t cap) {
    if (points.size() <= cap || cap == 0) return points;
    std::vector<Vec> out;
    out.reserve(cap);
    const double stride = static_cast<double>(points.size()) / static_cast<double>(cap);
    for (std::size_t j = 0; j < cap; ++j) {
        out.push_back(points[static_cast<std::size_t>(j * stride)]);
    }
    return out;
}

double directed_hausdorff(const std::vector<Vec>& a, const std::vector<Vec>& b,
                          const std::vector<int>& periodic) {
    double worst = 0.0;
    for (const Vec& x : a) {
        double best = std::numeric_limits<double>::infinity();
        for (const Vec& y : b) {
            best = std::min(best, chart_dist(x, y, periodic));
            if (best == 0.0) break;
        }
        worst = std::max(worst, best);
    }
    return worst;
}

}  // namespace

double verify_projectability(const VectorFieldSpec& field, const FoliationDescriptor& foliation,
                             const DegenerateMetricManifold& manifold,
                             const std::vector<Vec>& samples, double h) {
    double worst = 0.0;
    for (const Vec& x : samples) {
        const TangentSplitting split = null_splitting(manifold, x);
        for (const VectorFieldFn& w : foliation.generators) {
            const Vec bracket = lie_bracket(field.eval, w, x, h);
            worst = std::max(worst, (split.proj_s * bracket).norm());
        }
    }
    return worst;
}

ReducedTrajectory project_trajectory(const Trajectory& trajectory,
                                     const FoliationDescriptor& foliation) {
    ReducedTrajectory out;
    out.times = trajectory.times;
    out.periodic = foliation.quotient_periodic;
    out.states.reserve(trajectory.size());
    for (const Vec& x : trajectory.states) {
        out.states.push_back(wrap_state(foliation.quotient_map(x), foliation.quotient_periodic));
    }
    return out;
}

double projected_velocity_residual(const Trajectory& trajectory,
                                   const ReducedTrajectory& reduced,
                                   const DegenerateMetricManifold& manifold,
                                   const VectorFieldSpec& field,
                                   const FoliationDescriptor& foliation) {
    if (trajectory.size() != reduced.size() || trajectory.size() < 3) {
        throw LabError("projected velocity residual needs matching trajectories (>= 3 samples)");
    }
    double worst = 0.0;
    for (std::size_t i = 1; i + 1 < trajectory.size(); ++i) {
        const double span = trajectory.times[i + 1] - trajectory.times[i - 1];
        const Vec fd =
            chart_diff(reduced.states[i + 1], reduced.states[i - 1], reduced.periodic) / span;
        const TangentSplitting split = null_splitting(manifold, trajectory.states[i]);
        const auto [v_n, v_s] = decompose(field, split, trajectory.states[i]);
        (void)v_n;
        const Vec analytic = foliation.dpi(trajectory.states[i]) * v_s;
        worst = std::max(worst, (fd - analytic).norm() / std::max(1.0, analytic.norm()));
    }
    return worst;
}

Mat reduced_metric(const FoliationDescriptor& foliation,
                   const DegenerateMetricManifold& manifold, const Vec& x) {
    const TangentSplitting split = null_splitting(manifold, x);
    const Mat a = foliation.dpi(x) * split.basis_s;
    if (a.rows() != a.cols()) {
        throw QuotientRankError("quotient differential and transversal rank disagree");
    }
    Eigen::JacobiSVD<Mat> svd(a, Eigen::ComputeFullU | Eigen::ComputeFullV);
    const double smin = svd.singularValues().minCoeff();
    const double smax = svd.singularValues().maxCoeff();
    if (smin <= 1e-10 * std::max(1.0, smax)) {
        throw QuotientRankError("quotient differential is singular on the transversal space");
    }
    const Mat a_inv = svd.solve(Mat::Identity(a.rows(), a.rows()));
    Mat g_red = a_inv.transpose() * split.gram_s * a_inv;
    return 0.5 * (g_red + g_red.transpose());
}

double finite_energy_check(const ReducedTrajectory& reduced, double t_lo, double t_hi) {
    if (reduced.size() < 3) throw LabError("finite-energy check needs at least 3 samples");
    std::vector<double> ts;
    std::vector<double> speed_sq;
    for (std::size_t i = 0; i < reduced.size(); ++i) {
        const double t = reduced.times[i];
        if (t < t_lo || t > t_hi) continue;
        const std::size_t lo = i == 0 ? 0 : i - 1;
        const std::size_t hi = i + 1 < reduced.size() ? i + 1 : i;
        const double span = reduced.times[hi] - reduced.times[lo];
        const Vec rate =
            chart_diff(reduced.states[hi], reduced.states[lo], reduced.periodic) / span;
        ts.push_back(t);
        speed_sq.push_back(rate.squaredNorm());
    }
    if (ts.size() < 2) throw LabError("finite-energy window contains fewer than 2 samples");
    return trapezoid(ts, speed_sq);
}

LeafSample leaf_sample(const FoliationDescriptor& foliation,
                       const DegenerateMetricManifold& manifold, const Vec& x, int count,
                       double arc_step, double chart_bound) {
    if (foliation.generators.empty()) throw GeneratorSpanError("foliation has no generators");
    const VectorFieldFn& gen = foliation.generators.front();

    LeafSample out;
    Vec raw = x;  // unwrapped walker, used for the escape test
    for (int j = 0; j < count; ++j) {
        for (Eigen::Index i = 0; i < raw.size(); ++i) {
            const bool periodic = std::find(manifold.periodic_coords.begin(),
                                            manifold.periodic_coords.end(),
                                            static_cast<int>(i)) != manifold.periodic_coords.end();
            if (!periodic && std::abs(raw[i]) > chart_bound) out.escaped = true;
        }
        if (out.escaped) break;
        out.points.push_back(wrap_state(raw, manifold.periodic_coords));
        // One RK4 step of size arc_step along the generator.
        const Vec k1 = gen(raw);
        const Vec k2 = gen(raw + 0.5 * arc_step * k1);
        const Vec k3 = gen(raw + 0.5 * arc_step * k2);
        const Vec k4 = gen(raw + arc_step * k3);
        raw += (arc_step / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
        if (manifold.mode == ManifoldMode::embedded) {
            raw = project_to_manifold(manifold, raw);
        }
    }
    return out;
}

AttractorEstimate attractor_estimate(const DegenerateMetricManifold& manifold,
                                     const VectorFieldSpec& field,
                                     const FoliationDescriptor& foliation,
                                     const std::vector<Vec>& ensemble, double t_transient,
                                     double t_sample, double dt, int record_stride) {
    if (ensemble.size() < 16) {
        throw LabError("attractor estimation needs an ensemble of at least 16 points");
    }
    IntegrateOptions options;
    options.record_stride = record_stride;
    options.record_vs_norm = false;

    std::vector<std::future<Trajectory>> jobs;
    jobs.reserve(ensemble.size());
    for (const Vec& x0 : ensemble) {
        jobs.push_back(std::async(std::launch::async, [&, x0] {
            return integrate(manifold, field, x0, t_transient + t_sample, dt, 1e-9, options);
        }));
    }

    AttractorEstimate est;
    est.periodic = manifold.periodic_coords;
    est.reduced_periodic = foliation.quotient_periodic;
    std::vector<Vec> first_half, second_half;
    const double t_mid = t_transient + 0.5 * t_sample;
    // Merge in ensemble-index order so the cloud layout is deterministic.
    for (auto& job : jobs) {
        const Trajectory traj = job.get();
        for (std::size_t i = 0; i < traj.size(); ++i) {
            const double t = traj.times[i];
            if (t < t_transient) continue;
            est.cloud_m.push_back(traj.states[i]);
            est.cloud_red.push_back(
                wrap_state(foliation.quotient_map(traj.states[i]), foliation.quotient_periodic));
            (t < t_mid ? first_half : second_half).push_back(traj.states[i]);
        }
    }
    est.hausdorff_gap = hausdorff_distance(first_half, second_half, manifold.periodic_coords);
    return est;
}

double hausdorff_distance(const std::vector<Vec>& a, const std::vector<Vec>& b,
                          const std::vector<int>& periodic, std::size_t cap) {
    if (a.empty() || b.empty()) throw LabError("Hausdorff distance of an empty set");
    const std::vector<Vec> sa = subsample(a, cap);
    const std::vector<Vec> sb = subsample(b, cap);
    return std::max(directed_hausdorff(sa, sb, periodic), directed_hausdorff(sb, sa, periodic));
}

double saturation_check(const AttractorEstimate& estimate, const FoliationDescriptor& foliation,
                        const DegenerateMetricManifold& manifold, double epsilon,
                        int leaf_count, std::size_t max_representatives) {
    if (!foliation.leaves_compact) {
        throw LabError("saturation check requires compact leaves");
    }
    const std::vector<Vec> reps = subsample(estimate.cloud_m, max_representatives);
    long hits = 0, total = 0;
    const double arc_step = kTwoPi / leaf_count;
    for (const Vec& rep : reps) {
        const LeafSample leaf = leaf_sample(foliation, manifold, rep, leaf_count, arc_step);
        for (const Vec& p : leaf.points) {
            ++total;
            for (const Vec& q : estimate.cloud_m) {
                if (chart_dist(p, q, estimate.periodic) <= epsilon) {
                    ++hits;
                    break;
                }
            }
        }
    }
    if (total == 0) throw LabError("saturation check produced no leaf samples");
    return static_cast<double>(hits) / static_cast<double>(total);
}

std::vector<double> default_box_scales() {
    return {0.5, 0.25, 0.125, 0.0625, 0.03125, 0.015625};
}

BoxDimension box_dimension(const std::vector<Vec>& cloud, const std::vector<double>& scales) {
    if (scales.size() < 4) {
        throw DegenerateScaleRange("box counting needs at least 4 scales");
    }
    double smin = scales[0], smax = scales[0];
    for (double s : scales) {
        if (s <= 0.0) throw DegenerateScaleRange("box-counting scales must be positive");
        smin = std::min(smin, s);
        smax = std::max(smax, s);
    }
    if (std::log10(smax / smin) < 1.5 - 1e-9) {
        throw DegenerateScaleRange("box-counting scales must span at least 1.5 decades");
    }
    if (cloud.empty()) throw LabError("box counting of an empty cloud");

    const Eigen::Index dim = cloud.front().size();
    Vec lo = cloud.front();
    for (const Vec& p : cloud) lo = lo.cwiseMin(p);

    BoxDimension out;
    std::vector<double> log_inv_scale, log_count;
    for (double s : scales) {
        std::unordered_set<std::uint64_t> boxes;
        for (const Vec& p : cloud) {
            std::uint64_t key = 1469598103934665603ULL;  // FNV offset basis
            for (Eigen::Index i = 0; i < dim; ++i) {
                const auto cell = static_cast<std::uint64_t>(
                    static_cast<std::int64_t>(std::floor((p[i] - lo[i]) / s)));
                key ^= cell + 0x9e3779b97f4a7c15ULL + (key << 6) + (key >> 2);
                key *= 1099511628211ULL;
            }
            boxes.insert(key);
        }
        out.scales.push_back(s);
        out.counts.push_back(static_cast<long>(boxes.size()));
        log_inv_scale.push_back(std::log(1.0 / s));
        log_count.push_back(std::log(static_cast<double>(boxes.size())));
    }
    const LineFit fit = fit_line(log_inv_scale, log_count);
    out.slope = fit.slope;
    out.fit_residual = fit.max_residual;
    return out;
}

AbsorbingReport absorbing_entry(const DegenerateMetricManifold& manifold,
                                const VectorFieldSpec& field, const std::vector<Vec>& ensemble,
                                const Vec& center, double radius, double t_final, double dt) {
    AbsorbingReport report;
    report.all_entered = true;
    report.stays_inside = true;
    IntegrateOptions options;
    options.record_vs_norm = false;
    for (const Vec& x0 : ensemble) {
        const Trajectory traj = integrate(manifold, field, x0, t_final, dt, 1e-9, options);
        bool entered = false;
        for (std::size_t i = 0; i < traj.size(); ++i) {
            const double r = chart_dist(traj.states[i], center, manifold.periodic_coords);
            if (!entered && r <= radius) {
                entered = true;
                report.max_entry_time = std::max(report.max_entry_time, traj.times[i]);
            }
            if (entered) {
                report.max_radius_after_entry = std::max(report.max_radius_after_entry, r);
                if (r > radius * (1.0 + 1e-9)) report.stays_inside = false;
            }
        }
        if (!entered) report.all_entered = false;
    }
    return report;
}

}  // namespace nullfold
