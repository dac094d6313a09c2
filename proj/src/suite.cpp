#include "nullfold/suite.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>

#include "nullfold/csvio.hpp"
#include "nullfold/version.hpp"

namespace nullfold {

namespace {

double pick(double value, double fallback) {
    return std::isnan(value) ? fallback : value;
}

struct ResolvedTiming {
    double t_final = 0.0;
    double dt = 0.0;
    double t_transient = 0.0;
    double t_sample = 0.0;
    double eta = 0.0;
};

ResolvedTiming resolve_timing(const BatteryParams& params, const ExampleFacts& facts) {
    ResolvedTiming rt;
    rt.t_final = pick(params.t_final, facts.default_t_final);
    rt.dt = pick(params.dt, facts.default_dt);
    rt.t_transient = pick(params.t_transient, facts.default_t_transient);
    rt.t_sample = pick(params.t_sample, facts.default_t_sample);
    rt.eta = pick(params.eta, facts.eta_default);
    return rt;
}

void validate_timing(const ResolvedTiming& rt, int ensemble) {
    if (!(rt.dt > 0.0)) throw ConfigError("'dt' must be positive", 0, "dt");
    if (!(rt.t_final > 0.0)) throw ConfigError("'t_final' must be positive", 0, "t_final");
    if (!(rt.t_transient >= 0.0 && rt.t_transient < rt.t_final)) {
        throw ConfigError("'t_transient' must lie in [0, t_final)", 0, "t_transient");
    }
    if (!(rt.t_sample > 0.0)) throw ConfigError("'t_sample' must be positive", 0, "t_sample");
    if (!(rt.eta > 0.0)) throw ConfigError("'eta' must be positive", 0, "eta");
    if (ensemble < 16) throw ConfigError("'ensemble' must be at least 16", 0, "ensemble");
}

ordered_json vec_json(const Vec& v) {
    ordered_json arr = ordered_json::array();
    for (int j = 0; j < v.size(); ++j) arr.push_back(v(j));
    return arr;
}

ordered_json eig_json(const std::vector<std::complex<double>>& eigs) {
    ordered_json arr = ordered_json::array();
    for (const auto& z : eigs) arr.push_back({z.real(), z.imag()});
    return arr;
}

std::vector<std::complex<double>> sorted_eigs(std::vector<std::complex<double>> eigs) {
    std::sort(eigs.begin(), eigs.end(), [](const auto& a, const auto& b) {
        if (a.real() != b.real()) return a.real() < b.real();
        return a.imag() < b.imag();
    });
    return eigs;
}

}  // namespace

DiagnosticsReport run_battery(const ExampleSystem& example_in, const BatteryParams& params,
                              BatteryArtifacts* artifacts_out) {
    ExampleSystem example = example_in;
    const ExampleFacts& facts = example.facts;
    const DegenerateMetricManifold& manifold = example.manifold;
    const std::vector<int>& periodic = manifold.periodic_coords;

    const ResolvedTiming rt = resolve_timing(params, facts);
    validate_timing(rt, params.ensemble);

    Vec x0 = params.x0 ? *params.x0 : facts.default_x0;
    if (x0.size() != manifold.state_dim()) {
        throw ConfigError("'x0' must have one entry per state coordinate", 0, "x0");
    }
    x0 = project_to_manifold(manifold, wrap_state(x0, periodic));

    DiagnosticsReport report;
    report.example = example.name;
    report.version = kVersion;
    report.seed = params.seed;

    auto tol = [&](const std::string& name, double fallback) {
        auto it = params.tolerances.find(name);
        return it != params.tolerances.end() ? it->second : fallback * params.tol_scale;
    };
    auto guarded = [&report](const std::string& id, const std::function<void()>& body) {
        try {
            body();
        } catch (const std::exception& e) {
            report.add_failure(id, e.what());
        }
    };

    Rng rng(params.seed);
    std::vector<Vec> samples;
    if (facts.sampler) {
        for (int i = 0; i < 200; ++i) samples.push_back(facts.sampler(rng));
    } else {
        samples = sample_ensemble(example, 64, rng);
    }
    const std::vector<Vec> thin_samples(samples.begin(),
                                        samples.begin() + std::min<std::size_t>(20, samples.size()));
    const std::vector<Vec> mid_samples(samples.begin(),
                                       samples.begin() + std::min<std::size_t>(30, samples.size()));

    // ---- geometry ----------------------------------------------------------

    guarded("field_tangency", [&] {
        double worst = 0.0;
        for (const Vec& x : samples) {
            worst = std::max(worst, check_tangency(example.field, manifold, x));
        }
        const double limit = tol("tangency", 1e-10);
        report.add_verdict("field_tangency", worst <= limit,
                           {{"max_tangency_residual", worst}, {"samples", samples.size()}},
                           {{"tangency", limit}});
    });

    guarded("differential_consistency", [&] {
        double worst = 0.0;
        int compared = 0;
        auto compare_jac = [&](const MatrixFieldFn& analytic, const VectorFieldFn& fn,
                               const Vec& x) {
            if (!analytic || !fn) return;
            Mat a = analytic(x);
            Mat b = fd_jacobian(fn, x);
            worst = std::max(worst, (a - b).norm() / std::max(1.0, a.norm()));
            ++compared;
        };
        auto compare_grad = [&](const CovectorFieldFn& analytic, const ScalarFieldFn& fn,
                                const Vec& x) {
            if (!analytic || !fn) return;
            Vec a = analytic(x);
            Vec b = fd_gradient(fn, x);
            worst = std::max(worst, (a - b).norm() / std::max(1.0, a.norm()));
            ++compared;
        };
        for (const Vec& x : thin_samples) {
            compare_jac(example.field.jacobian, example.field.eval, x);
            compare_grad(example.psi.differential, example.psi.value, x);
            if (manifold.mode == ManifoldMode::embedded) {
                compare_grad(manifold.constraint.differential, manifold.constraint.value, x);
            }
            if (example.foliation.quotient_differential && example.foliation.quotient_map) {
                compare_jac(example.foliation.quotient_differential,
                            example.foliation.quotient_map, x);
            }
        }
        const double limit = tol("differential", 1e-6);
        report.add_verdict("differential_consistency", worst <= limit,
                           {{"max_relative_mismatch", worst}, {"comparisons", compared}},
                           {{"differential", limit}});
    });

    guarded("projector_algebra", [&] {
        double worst = 0.0;
        for (const Vec& x : thin_samples) {
            TangentSplitting split = null_splitting(manifold, x);
            worst = std::max({worst,
                              (split.proj_n * split.proj_n - split.proj_n).norm(),
                              (split.proj_s * split.proj_s - split.proj_s).norm(),
                              (split.proj_n * split.proj_s).norm(),
                              (split.proj_n + split.proj_s - split.proj_tangent).norm(),
                              (split.proj_n - split.proj_n.transpose()).norm(),
                              (split.proj_s - split.proj_s.transpose()).norm()});
        }
        const double limit = tol("projector", 1e-10);
        report.add_verdict("projector_algebra", worst <= limit,
                           {{"max_projector_residual", worst}},
                           {{"projector", limit}});
    });

    guarded("null_kernel", [&] {
        double worst = 0.0;
        for (const Vec& x : thin_samples) {
            TangentSplitting split = null_splitting(manifold, x);
            Mat g = manifold.mode == ManifoldMode::embedded
                        ? manifold.ambient.metric_field(x)
                        : manifold.form_field(x);
            if (split.corank > 0) {
                Mat gb = g * split.basis_n;
                if (split.basis_n.cols() > 0) {
                    worst = std::max(worst, (split.basis_n.transpose() * gb).norm());
                    if (split.basis_s.cols() > 0) {
                        worst = std::max(worst, (split.basis_s.transpose() * gb).norm());
                    }
                }
            }
            if (split.basis_s.cols() > 0) {
                Mat gram = split.basis_s.transpose() * g * split.basis_s;
                worst = std::max(worst, (gram - split.gram_s).norm());
            }
        }
        const double limit = tol("kernel", 1e-8);
        report.add_verdict("null_kernel", worst <= limit,
                           {{"max_kernel_residual", worst}},
                           {{"kernel", limit}});
    });

    guarded("corank_constant", [&] {
        std::vector<int> observed;
        bool constant = true;
        for (const Vec& x : samples) {
            int k = null_splitting(manifold, x).corank;
            if (std::find(observed.begin(), observed.end(), k) == observed.end()) {
                observed.push_back(k);
            }
            if (k != facts.corank) constant = false;
        }
        std::sort(observed.begin(), observed.end());
        report.add_verdict("corank_constant", constant,
                           {{"declared", facts.corank}, {"observed", observed}},
                           {{"exact_match", 0.0}});
    });

    // ---- primary trajectory ------------------------------------------------

    Trajectory primary;
    bool has_primary = false;
    guarded("constraint_residual", [&] {
        IntegrateOptions options;
        options.psi = example.psi.value;
        options.sigma_distance = example.sigma_distance;
        primary = integrate(manifold, example.field, x0, rt.t_final, rt.dt, 1e-9, options);
        has_primary = true;
        double worst = 0.0;
        for (double r : primary.phi_residual) worst = std::max(worst, r);
        const double limit = tol("constraint", 1e-8);
        report.add_verdict("constraint_residual", worst <= limit,
                           {{"max_phi_residual", worst}, {"samples", primary.size()}},
                           {{"constraint", limit}},
                           manifold.mode == ManifoldMode::intrinsic
                               ? "intrinsic chart: residual identically zero"
                               : "");
    });
    auto need = [&report](bool available, const std::string& id) {
        if (!available) report.add_failure(id, "prerequisite stage unavailable");
        return available;
    };

    // ---- dissipation -------------------------------------------------------

    guarded("functional_compatibility", [&] {
        double worst = 0.0;
        for (const Vec& x : mid_samples) {
            TangentSplitting split = null_splitting(manifold, x);
            worst = std::max(worst, check_compatibility(example.psi, split, x));
        }
        const double limit = tol("compatibility", 1e-8);
        report.add_verdict("functional_compatibility", worst <= limit,
                           {{"max_compatibility_residual", worst}},
                           {{"compatibility", limit}});
    });

    guarded("degeneracy_equivalence", [&] {
        if (!facts.pointwise_dissipation) {
            report.add_skipped("degeneracy_equivalence",
                               "the pointwise decay estimate does not hold for this "
                               "example, so the equivalence is not claimed");
            return;
        }
        if (!facts.sampler || !facts.z_sampler) {
            report.add_skipped("degeneracy_equivalence", "no degeneracy-set sampler");
            return;
        }
        const double dpsi_tol = tol("equiv_dpsi", 1e-8);
        const double vs_tol = tol("equiv_vs", 1e-6);
        int agree = 0, total = 0;
        auto test_point = [&](const Vec& x) {
            TangentSplitting split = null_splitting(manifold, x);
            const double rate = std::abs(example.psi.d(x).dot(example.field.eval(x)));
            const double vs = z_indicator(example.field, split, manifold, x);
            agree += ((rate <= dpsi_tol) == (vs <= vs_tol));
            ++total;
        };
        for (int i = 0; i < 100; ++i) test_point(facts.sampler(rng));
        for (int i = 0; i < 100; ++i) test_point(facts.z_sampler(rng));
        report.add_verdict("degeneracy_equivalence", agree == total,
                           {{"agreement", agree}, {"total", total}},
                           {{"equiv_dpsi", dpsi_tol}, {"equiv_vs", vs_tol}});
    });

    guarded("lyapunov_monotone", [&] {
        if (!need(has_primary, "lyapunov_monotone")) return;
        const double worst = monotonicity_check(primary, example.psi);
        const double slack = monotonicity_slack(primary, example.psi, example.field);
        report.add_verdict("lyapunov_monotone", worst <= slack,
                           {{"max_increment", worst}, {"slack", slack}},
                           {{"slack_model", slack}});
    });

    double c_hat = std::numeric_limits<double>::quiet_NaN();
    guarded("transversal_decay_constant", [&] {
        if (!facts.pointwise_dissipation) {
            report.add_skipped("transversal_decay_constant",
                               "no pointwise decay constant exists for this example");
            return;
        }
        DissipationEstimate est =
            dissipation_constant(example.psi, example.field, manifold, samples, 1e-6);
        if (est.no_transversal_motion) {
            report.add_verdict("transversal_decay_constant", true,
                               {{"admissible_samples", 0}}, ordered_json::object(),
                               "no transversal motion in the sample set");
            return;
        }
        c_hat = est.c_hat;
        bool ok;
        ordered_json tols;
        if (facts.has_oracles && !std::isnan(facts.c_expected)) {
            const double limit = tol("c_hat", 1e-6);
            ok = std::abs(est.c_hat - facts.c_expected) <= limit;
            tols = {{"c_hat", limit}};
        } else {
            ok = est.c_hat > 0.0;
            tols = {{"positive", 0.0}};
        }
        report.add_verdict("transversal_decay_constant", ok,
                           {{"c_hat", est.c_hat},
                            {"expected", facts.c_expected},
                            {"admissible_samples", est.admissible}},
                           tols);
    });

    guarded("dissipation_violation_detected", [&] {
        if (facts.pointwise_dissipation) {
            report.add_skipped("dissipation_violation_detected",
                               "the decay estimate holds everywhere; nothing to detect");
            return;
        }
        std::vector<Vec> probes = facts.violation_points;
        for (const Vec& x : mid_samples) probes.push_back(x);
        try {
            DissipationEstimate est =
                dissipation_constant(example.psi, example.field, manifold, probes, 1e-6);
            report.add_verdict("dissipation_violation_detected", false,
                               {{"c_hat", est.c_hat}}, ordered_json::object(),
                               "estimator accepted all probes, violation missed");
        } catch (const DissipationViolated& e) {
            report.add_verdict("dissipation_violation_detected", e.ratio <= 0.0,
                               {{"witness", vec_json(e.witness)}, {"ratio", e.ratio}},
                               {{"nonpositive_ratio", 0.0}});
        }
    });

    guarded("omega_limit_in_degeneracy_set", [&] {
        if (!need(has_primary, "omega_limit_in_degeneracy_set")) return;
        std::vector<Vec> reps =
            omega_limit_estimate(primary, 0.1, facts.omega_cluster_radius);
        double worst = 0.0;
        for (const Vec& rep : reps) {
            double sigma;
            if (example.sigma_distance) {
                sigma = example.sigma_distance(rep);
            } else {
                TangentSplitting split = null_splitting(manifold, rep);
                sigma = z_indicator(example.field, split, manifold, rep);
            }
            worst = std::max(worst, sigma);
        }
        const double limit = tol("omega_sigma", 1e-6);
        report.add_verdict("omega_limit_in_degeneracy_set", worst <= limit,
                           {{"clusters", reps.size()}, {"max_sigma", worst}},
                           {{"omega_sigma", limit}});
    });

    guarded("dissipation_budget", [&] {
        if (!facts.pointwise_dissipation) {
            report.add_skipped("dissipation_budget",
                               "no decay constant, so the budget bound is not claimed");
            return;
        }
        if (!need(has_primary, "dissipation_budget")) return;
        if (std::isnan(c_hat) || !(c_hat > 0.0)) {
            report.add_skipped("dissipation_budget", "no admissible decay constant");
            return;
        }
        BudgetResult budget = dissipation_budget(primary, example.psi, c_hat);
        // The trapezoidal integral on the left carries an O(dt^2) bias, so the
        // comparison cannot be held tighter than that.
        const double slack = std::max(tol("budget", 1e-6), rt.dt * rt.dt) *
                             std::max(1.0, std::abs(budget.rhs));
        report.add_verdict("dissipation_budget", budget.lhs <= budget.rhs + slack,
                           {{"lhs", budget.lhs}, {"rhs", budget.rhs}, {"c_hat", c_hat}},
                           {{"budget_slack", slack}});
    });

    // ---- reduction ---------------------------------------------------------

    const bool has_foliation =
        !example.foliation.generators.empty() && bool(example.foliation.quotient_map);

    guarded("involutivity", [&] {
        if (!has_foliation) {
            report.add_skipped("involutivity", "no foliation attached");
            return;
        }
        const double res = involutivity_residual(manifold, example.foliation.generators,
                                                 mid_samples, 1e-5);
        const double limit = tol("involutivity", 1e-8);
        report.add_verdict("involutivity", res <= limit,
                           {{"max_bracket_residual", res}}, {{"involutivity", limit}});
    });

    guarded("projectability", [&] {
        if (!has_foliation) {
            report.add_skipped("projectability", "no foliation attached");
            return;
        }
        const double res = verify_projectability(example.field, example.foliation,
                                                 manifold, mid_samples, 1e-5);
        const double limit = tol("projectability", 1e-8);
        report.add_verdict("projectability", res <= limit,
                           {{"max_bracket_residual", res}}, {{"projectability", limit}});
    });

    guarded("quotient_fibers", [&] {
        if (!has_foliation) {
            report.add_skipped("quotient_fibers", "no foliation attached");
            return;
        }
        double worst_map = 0.0, worst_dpi = 0.0;
        for (std::size_t i = 0; i < 10 && i < samples.size(); ++i) {
            const Vec& x = samples[i];
            LeafSample leaf = leaf_sample(example.foliation, manifold, x, 8, 0.5);
            const Vec base = example.foliation.quotient_map(x);
            for (const Vec& p : leaf.points) {
                worst_map = std::max(
                    worst_map, chart_dist(example.foliation.quotient_map(p), base,
                                          example.foliation.quotient_periodic));
            }
            Mat dpi = example.foliation.dpi(x);
            for (const VectorFieldFn& gen : example.foliation.generators) {
                worst_dpi = std::max(worst_dpi, (dpi * gen(x)).norm());
            }
        }
        const double limit = tol("fibers", 1e-8);
        report.add_verdict("quotient_fibers",
                           worst_map <= limit && worst_dpi <= limit,
                           {{"max_fiber_spread", worst_map},
                            {"max_dpi_generator", worst_dpi}},
                           {{"fibers", limit}});
    });

    guarded("reduced_metric_representative_independence", [&] {
        if (!has_foliation) {
            report.add_skipped("reduced_metric_representative_independence",
                               "no foliation attached");
            return;
        }
        double worst = 0.0;
        for (std::size_t i = 0; i < 10 && i < samples.size(); ++i) {
            const Vec& x = samples[i];
            Mat base = reduced_metric(example.foliation, manifold, x);
            LeafSample leaf = leaf_sample(example.foliation, manifold, x, 10, 0.5);
            for (const Vec& p : leaf.points) {
                Mat other = reduced_metric(example.foliation, manifold, p);
                worst = std::max(worst, (other - base).norm());
            }
        }
        const double limit = tol("reduced_metric", 1e-8);
        report.add_verdict("reduced_metric_representative_independence", worst <= limit,
                           {{"max_metric_spread", worst}}, {{"reduced_metric", limit}});
    });

    ReducedTrajectory reduced;
    bool has_reduced = false;
    guarded("projected_velocity", [&] {
        if (!has_foliation) {
            report.add_skipped("projected_velocity", "no foliation attached");
            return;
        }
        if (!need(has_primary, "projected_velocity")) return;
        reduced = project_trajectory(primary, example.foliation);
        has_reduced = true;
        const double res = projected_velocity_residual(primary, reduced, manifold,
                                                       example.field, example.foliation);
        // Central differencing of the reduced curve is itself O(dt^2).
        const double limit = std::max(tol("projected_velocity", 1e-5), rt.dt * rt.dt);
        report.add_verdict("projected_velocity", res <= limit,
                           {{"max_velocity_mismatch", res}},
                           {{"projected_velocity", limit}});
    });

    guarded("finite_energy_tail", [&] {
        if (!need(has_reduced, "finite_energy_tail")) return;
        const double energy =
            finite_energy_check(reduced, facts.energy_tail_lo, facts.energy_tail_hi);
        const double limit = tol("tail_energy", 1e-8);
        report.add_verdict("finite_energy_tail", energy <= limit,
                           {{"tail_energy", energy},
                            {"window", {facts.energy_tail_lo, facts.energy_tail_hi}}},
                           {{"tail_energy", limit}});
    });

    // ---- attractor ---------------------------------------------------------

    AttractorEstimate attractor;
    bool has_attractor = false;
    std::vector<Vec> ensemble_ics;
    guarded("attractor_stationarity", [&] {
        if (!has_foliation) {
            report.add_skipped("attractor_stationarity", "no foliation attached");
            return;
        }
        ensemble_ics = sample_ensemble(example, params.ensemble, rng);
        attractor = attractor_estimate(manifold, example.field, example.foliation,
                                       ensemble_ics, rt.t_transient, rt.t_sample,
                                       facts.ensemble_dt);
        has_attractor = true;
        const double limit = tol("stationarity", 0.05);
        report.add_verdict("attractor_stationarity", attractor.hausdorff_gap <= limit,
                           {{"hausdorff_gap", attractor.hausdorff_gap},
                            {"pooled_points", attractor.cloud_m.size()},
                            {"ensemble", ensemble_ics.size()}},
                           {{"stationarity", limit}});
    });

    guarded("attractor_saturation", [&] {
        if (!example.foliation.leaves_compact) {
            report.add_skipped("attractor_saturation",
                               "leaves are noncompact; saturation sampling is unbounded");
            return;
        }
        if (!need(has_attractor, "attractor_saturation")) return;
        const double eps = tol("saturation_eps", 1e-2);
        const double fraction =
            saturation_check(attractor, example.foliation, manifold, eps, 64, 64);
        report.add_verdict("attractor_saturation", fraction >= 1.0,
                           {{"fraction", fraction}, {"epsilon", eps}},
                           {{"full_fraction", 1.0}});
    });

    guarded("box_dimension_bound", [&] {
        if (!need(has_attractor, "box_dimension_bound")) return;
        BoxDimension bd = box_dimension(attractor.cloud_red, default_box_scales());
        const double bound = facts.manifold_dim - facts.corank;
        const double slack = tol("dim_slack", 0.2);
        report.add_verdict("box_dimension_bound", bd.slope <= bound + slack,
                           {{"reduced_slope", bd.slope},
                            {"bound", bound},
                            {"fit_residual", bd.fit_residual}},
                           {{"dim_slack", slack}});
    });

    guarded("attractor_dimension", [&] {
        if (!facts.has_oracles || std::isnan(facts.attractor_dim_expected)) {
            report.add_skipped("attractor_dimension", "no expected dimension declared");
            return;
        }
        if (!need(has_attractor, "attractor_dimension")) return;
        BoxDimension bd = box_dimension(attractor.cloud_m, default_box_scales());
        const double limit = tol("dim_unreduced", 0.15);
        report.add_verdict("attractor_dimension",
                           std::abs(bd.slope - facts.attractor_dim_expected) <= limit,
                           {{"slope", bd.slope},
                            {"expected", facts.attractor_dim_expected},
                            {"fit_residual", bd.fit_residual}},
                           {{"dim_unreduced", limit}});
    });

    guarded("absorbing_ball", [&] {
        if (!(facts.absorb_radius > 0.0)) {
            report.add_skipped("absorbing_ball", "no absorbing ball declared");
            return;
        }
        std::vector<Vec> inflated = sample_ensemble(example, 16, rng, 1.5);
        AbsorbingReport ball =
            absorbing_entry(manifold, example.field, inflated, facts.absorb_center,
                            facts.absorb_radius, rt.t_final, facts.ensemble_dt);
        report.add_verdict("absorbing_ball", ball.all_entered && ball.stays_inside,
                           {{"max_entry_time", ball.max_entry_time},
                            {"max_radius_after_entry", ball.max_radius_after_entry},
                            {"radius", facts.absorb_radius}},
                           {{"must_enter_and_stay", 1.0}});
    });

    // ---- spectral ----------------------------------------------------------

    guarded("transversal_spectrum", [&] {
        if (!facts.has_oracles || facts.transversal_eigenvalues.empty()) {
            report.add_skipped("transversal_spectrum", "no expected spectrum declared");
            return;
        }
        SpectralReport srep =
            spectral_report(example.field, manifold, facts.spectral_point, rt.eta);
        auto expected = sorted_eigs(facts.transversal_eigenvalues);
        auto got = sorted_eigs(srep.gap.eigenvalues);
        double worst = std::numeric_limits<double>::infinity();
        if (expected.size() == got.size()) {
            worst = 0.0;
            for (std::size_t i = 0; i < expected.size(); ++i) {
                worst = std::max(worst, std::abs(expected[i] - got[i]));
            }
        }
        const double limit = tol("spectrum", 1e-6);
        report.add_verdict("transversal_spectrum", worst <= limit,
                           {{"eigenvalues", eig_json(got)},
                            {"expected", eig_json(expected)},
                            {"max_mismatch", worst}},
                           {{"spectrum", limit}});
    });

    guarded("spectral_gap", [&] {
        std::vector<Vec> points;
        if (facts.spectral_point.size() == manifold.state_dim()) {
            points.push_back(facts.spectral_point);
        }
        for (std::size_t i = 0; i < 8 && i < samples.size(); ++i) {
            points.push_back(samples[i]);
        }
        bool all_hold = !points.empty();
        double abscissa = -std::numeric_limits<double>::infinity();
        for (const Vec& x : points) {
            SpectralReport srep = spectral_report(example.field, manifold, x, rt.eta);
            all_hold = all_hold && srep.gap.gap_holds;
            abscissa = std::max(abscissa, srep.gap.spectral_abscissa);
        }
        report.add_verdict("spectral_gap", all_hold,
                           {{"eta", rt.eta},
                            {"max_spectral_abscissa", abscissa},
                            {"points", points.size()}},
                           {{"abscissa_below", -rt.eta}});
    });

    guarded("morse_nondegenerate", [&] {
        if (!facts.has_oracles) {
            report.add_skipped("morse_nondegenerate", "no declared classification");
            return;
        }
        const Vec& x = facts.critical_expected.size() == manifold.state_dim()
                           ? facts.critical_expected
                           : facts.spectral_point;
        TangentSplitting split = null_splitting(manifold, x);
        TransversalHessian hess = hessian_transversal(example.psi, split, manifold, x);
        report.add_verdict("morse_nondegenerate", hess.nondegenerate,
                           {{"eigenvalues", vec_json(hess.eigenvalues)},
                            {"threshold", hess.threshold}},
                           {{"expected_nondegenerate", 1.0}});
    });

    guarded("critical_set_tangency", [&] {
        if (facts.critical_seed.size() != manifold.state_dim()) {
            report.add_skipped("critical_set_tangency", "no critical seed declared");
            return;
        }
        Vec crit = critical_set_local(example.psi, manifold, facts.critical_seed);
        const double res = critical_set_tangent_residual(example.psi, manifold, crit);
        const double limit = tol("critical_tangency", 1e-6);
        bool ok = res <= limit;
        ordered_json measured = {{"critical_point", vec_json(crit)},
                                 {"tangent_residual", res}};
        ordered_json tols = {{"critical_tangency", limit}};
        if (facts.has_oracles &&
            facts.critical_expected.size() == manifold.state_dim()) {
            const double err = chart_dist(crit, facts.critical_expected, periodic);
            const double loc_limit = tol("critical", 1e-6);
            ok = ok && err <= loc_limit;
            measured["location_error"] = err;
            tols["critical"] = loc_limit;
        }
        report.add_verdict("critical_set_tangency", ok, measured, tols);
    });

    // ---- hypothesis verifier ----------------------------------------------

    HypothesisReport hyp;
    bool has_hyp = false;
    guarded("h1_bounded", [&] {
        TrialPlan plan;
        plan.points.push_back(x0);
        for (std::size_t i = 0; i < 2 && i < samples.size(); ++i) {
            plan.points.push_back(samples[i]);
        }
        plan.horizon = rt.t_final;
        plan.dt = rt.dt;
        plan.sigma_distance = example.sigma_distance;
        hyp = check_hypotheses(manifold, example.field, plan);
        has_hyp = true;
        report.add_verdict("h1_bounded", hyp.h1_bounded,
                           {{"max_radius", hyp.h1_radius}, {"points", plan.points.size()}},
                           {{"bound", plan.bound}});
    });

    guarded("h2_constant_corank", [&] {
        if (!need(has_hyp, "h2_constant_corank")) return;
        const bool ok = hyp.h2_constant && hyp.observed_coranks.size() == 1 &&
                        hyp.observed_coranks[0] == facts.corank;
        report.add_verdict("h2_constant_corank", ok,
                           {{"observed", hyp.observed_coranks},
                            {"declared", facts.corank}},
                           {{"exact_match", 0.0}});
    });

    guarded("h3_transversal_contraction", [&] {
        if (!need(has_hyp, "h3_transversal_contraction")) return;
        if (!facts.has_oracles) {
            report.add_skipped("h3_transversal_contraction",
                               "no declared contraction behavior");
            return;
        }
        bool ok;
        ordered_json tols;
        if (facts.h3_holds) {
            const double limit = facts.alpha_tol * params.tol_scale;
            ok = std::abs(hyp.h3_alpha - facts.alpha_expected) <= limit;
            tols = {{"alpha", limit}};
        } else {
            const double limit = 0.05 * params.tol_scale;
            ok = std::abs(hyp.h3_alpha) <= limit;
            tols = {{"no_contraction_band", limit}};
        }
        report.add_verdict("h3_transversal_contraction", ok,
                           {{"alpha", hyp.h3_alpha},
                            {"expected", facts.h3_holds ? facts.alpha_expected : 0.0},
                            {"declared_to_hold", facts.h3_holds},
                            {"c", hyp.h3_c},
                            {"fit_residual", hyp.h3_fit_residual}},
                           tols);
    });

    guarded("h4_splitting_invariance", [&] {
        if (!need(has_hyp, "h4_splitting_invariance")) return;
        if (!facts.has_oracles) {
            report.add_skipped("h4_splitting_invariance",
                               "no declared invariance behavior");
            return;
        }
        bool ok;
        ordered_json tols;
        if (facts.h4_holds) {
            const double limit = tol("h4", 1e-8);
            ok = std::max(hyp.h4_n_residual, hyp.h4_s_residual) <= limit;
            tols = {{"h4", limit}};
        } else {
            ok = hyp.h4_s_residual > 1e-2;
            tols = {{"leak_floor", 1e-2}};
        }
        report.add_verdict("h4_splitting_invariance", ok,
                           {{"n_residual", hyp.h4_n_residual},
                            {"s_residual", hyp.h4_s_residual},
                            {"declared_to_hold", facts.h4_holds}},
                           tols);
    });

    guarded("sigma_convergence_rate", [&] {
        if (!need(has_hyp, "sigma_convergence_rate")) return;
        if (!facts.has_oracles || std::isnan(hyp.sigma_rate)) {
            report.add_skipped("sigma_convergence_rate",
                               "no expected decay rate or no distance available");
            return;
        }
        const double limit = facts.sigma_rate_tol * params.tol_scale;
        report.add_verdict("sigma_convergence_rate",
                           std::abs(hyp.sigma_rate - facts.sigma_rate_expected) <= limit,
                           {{"rate", hyp.sigma_rate},
                            {"expected", facts.sigma_rate_expected},
                            {"final_dist", hyp.sigma_final_dist}},
                           {{"rate", limit}});
    });

    guarded("sigma_positive_invariance", [&] {
        if (!facts.z_sampler) {
            report.add_skipped("sigma_positive_invariance", "no degeneracy-set sampler");
            return;
        }
        double worst = 0.0;
        for (int i = 0; i < 5; ++i) {
            Vec z0 = facts.z_sampler(rng);
            IntegrateOptions options;
            options.sigma_distance = example.sigma_distance;
            Trajectory traj =
                integrate(manifold, example.field, z0, 5.0, rt.dt, 1e-9, options);
            const std::vector<double>& dist =
                traj.dist_sigma.empty() ? traj.vs_norm : traj.dist_sigma;
            for (double d : dist) worst = std::max(worst, d);
        }
        const double limit = tol("sigma_invariance", 1e-10);
        report.add_verdict("sigma_positive_invariance", worst <= limit,
                           {{"max_sigma", worst}}, {{"sigma_invariance", limit}});
    });

    guarded("projected_limit", [&] {
        if (!need(has_reduced, "projected_limit")) return;
        ProjectedConvergence conv = projected_convergence(reduced);
        bool ok = conv.is_cauchy;
        ordered_json measured = {{"is_cauchy", conv.is_cauchy},
                                 {"limit", vec_json(conv.limit)},
                                 {"tail_diameters", conv.tail_diameters},
                                 {"arc_tail_ratio", conv.arc_tail_ratio}};
        ordered_json tols = {{"tail_contraction", 0.75}};
        if (facts.has_oracles &&
            facts.limit_expected.size() == conv.limit.size()) {
            const double err =
                chart_dist(conv.limit, facts.limit_expected, reduced.periodic);
            const double limit_tol = facts.limit_tol * params.tol_scale;
            ok = ok && err <= limit_tol;
            measured["limit_error"] = err;
            tols["limit"] = limit_tol;
        }
        report.add_verdict("projected_limit", ok, measured, tols);
    });

    // ---- numerics ----------------------------------------------------------

    guarded("rk4_order", [&] {
        const double horizon = 4.0;
        const double h = 0.04;
        auto end_state = [&](double step) {
            IntegrateOptions options;
            options.record_vs_norm = false;
            options.record_stride = 1 << 30;
            Trajectory traj =
                integrate(manifold, example.field, x0, horizon, step, 1e-9, options);
            return traj.states.back();
        };
        const Vec ref = end_state(h / 8.0);
        const double e1 = chart_dist(end_state(h), ref, periodic);
        const double e2 = chart_dist(end_state(h / 2.0), ref, periodic);
        if (e2 < 1e-14) {
            report.add_verdict("rk4_order", false,
                               {{"e_coarse", e1}, {"e_fine", e2}},
                               {{"ratio_band", {12.0, 20.0}}},
                               "refinement error below rounding; ratio unreliable");
            return;
        }
        const double ratio = e1 / e2;
        report.add_verdict("rk4_order", ratio >= 12.0 && ratio <= 20.0,
                           {{"ratio", ratio}, {"e_coarse", e1}, {"e_fine", e2}},
                           {{"ratio_band", {12.0, 20.0}}});
    });

    if (artifacts_out) {
        artifacts_out->primary = std::move(primary);
        artifacts_out->reduced = std::move(reduced);
        artifacts_out->attractor = std::move(attractor);
        artifacts_out->has_reduced = has_reduced;
        artifacts_out->has_attractor = has_attractor;
        artifacts_out->ensemble_ics = std::move(ensemble_ics);
    }
    return report;
}

namespace {

/// Fills every unresolved field of the config from the example so the
/// canonical text (and therefore the hash) names the values actually used.
ExperimentConfig resolve_config(const ExperimentConfig& config, const ExampleFacts& facts) {
    ExperimentConfig resolved = config;
    resolved.t_final = pick(config.t_final, facts.default_t_final);
    resolved.dt = pick(config.dt, facts.default_dt);
    resolved.t_transient = pick(config.t_transient, facts.default_t_transient);
    resolved.t_sample = pick(config.t_sample, facts.default_t_sample);
    resolved.eta = pick(config.eta, facts.eta_default);
    if (!resolved.x0) resolved.x0 = facts.default_x0;
    if (!resolved.box_lo) resolved.box_lo = facts.box_lo;
    if (!resolved.box_hi) resolved.box_hi = facts.box_hi;
    return resolved;
}

BatteryParams params_from(const ExperimentConfig& resolved) {
    BatteryParams params;
    params.tol_scale = resolved.tol_scale;
    params.seed = resolved.seed;
    params.t_final = resolved.t_final;
    params.dt = resolved.dt;
    params.t_transient = resolved.t_transient;
    params.t_sample = resolved.t_sample;
    params.eta = resolved.eta;
    params.ensemble = resolved.ensemble;
    params.tolerances = resolved.tolerances;
    params.x0 = resolved.x0;
    return params;
}

}  // namespace

DiagnosticsReport check_suite(const std::string& example_name, double tol_scale) {
    const ExampleSystem& example = find_example(example_name);
    ExperimentConfig config;
    config.example = example_name;
    config.tol_scale = tol_scale;
    ExperimentConfig resolved = resolve_config(config, example.facts);
    DiagnosticsReport report = run_battery(example, params_from(resolved));
    report.config_hash = fnv1a64_hex(canonical_config_text(resolved));
    return report;
}

RunResult run_experiment(const ExperimentConfig& config) {
    ExampleSystem example = config.inline_system
                                ? materialize_inline(*config.inline_system)
                                : find_example(config.example);

    if (config.x0 && config.x0->size() != example.manifold.state_dim()) {
        throw ConfigError("'x0' must have one entry per state coordinate", 0, "x0");
    }
    if (config.box_lo && config.box_hi) {
        if (config.box_lo->size() != example.manifold.state_dim() ||
            config.box_hi->size() != example.manifold.state_dim()) {
            throw ConfigError("'box_lo'/'box_hi' must match the state dimension", 0,
                              "box_lo");
        }
        example.facts.box_lo = *config.box_lo;
        example.facts.box_hi = *config.box_hi;
    } else if (config.box_lo || config.box_hi) {
        throw ConfigError("'box_lo' and 'box_hi' must be given together", 0, "box_lo");
    }

    ExperimentConfig resolved = resolve_config(config, example.facts);
    if (!(resolved.t_transient < resolved.t_final)) {
        throw ConfigError("'t_transient' must be below 't_final'", 0, "t_transient");
    }
    const std::string hash = fnv1a64_hex(canonical_config_text(resolved));

    BatteryArtifacts artifacts;
    DiagnosticsReport report = run_battery(example, params_from(resolved), &artifacts);
    report.config_hash = hash;

    std::string out_dir = config.out_dir;
    if (out_dir.empty()) {
        const char* env = std::getenv("NULLFOLD_OUT");
        out_dir = (env && *env) ? env : "nullfold_out";
    }
    std::filesystem::create_directories(out_dir);

    write_trajectory_csv(out_dir + "/trajectory.csv", artifacts.primary);
    if (artifacts.has_reduced) {
        write_reduced_csv(out_dir + "/reduced.csv", artifacts.reduced);
    }
    if (artifacts.has_attractor) {
        write_points_csv(out_dir + "/cloud_m.csv", artifacts.attractor.cloud_m);
        write_points_csv(out_dir + "/cloud_red.csv", artifacts.attractor.cloud_red);
    }
    {
        std::ofstream out(out_dir + "/report.json");
        if (!out) throw LabError("cannot open report file in " + out_dir);
        out << report.to_json().dump(2) << '\n';
    }
    return RunResult{std::move(report), std::move(out_dir)};
}

}  // namespace nullfold
