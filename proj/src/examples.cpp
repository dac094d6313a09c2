#include "nullfold/examples.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace nullfold {

namespace {

/// Uniform draw from +-[margin, scale], avoiding the region near zero where
/// thresholded predicates would be ambiguous.
double margin_draw(Rng& rng, double scale, double margin = 1e-3) {
    const double u = rng.uniform(-1.0, 1.0);
    const double sign = u < 0.0 ? -1.0 : 1.0;
    return sign * (margin + std::abs(u) * (scale - margin));
}

Mat diag3(double a, double b, double c) {
    Mat m = Mat::Zero(3, 3);
    m(0, 0) = a;
    m(1, 1) = b;
    m(2, 2) = c;
    return m;
}

ExampleSystem make_null_hyperplane() {
    ExampleSystem ex;
    ex.name = "null-hyperplane";

    ex.manifold.mode = ManifoldMode::embedded;
    ex.manifold.ambient.dim = 3;
    const Mat metric = diag3(-1.0, 1.0, 1.0);
    ex.manifold.ambient.metric_field = [metric](const Vec&) { return metric; };
    ex.manifold.ambient.expected_signature = {-1, 1, 1};
    ex.manifold.constraint.value = [](const Vec& x) { return x[0] - x[1]; };
    ex.manifold.constraint.differential = [](const Vec& x) {
        (void)x;
        Vec d(3);
        d << 1.0, -1.0, 0.0;
        return d;
    };
    ex.manifold.declared_corank = 1;

    ex.field.name = "null-hyperplane";
    ex.field.eval = [](const Vec& x) {
        Vec v(3);
        v << x[2] * x[2], x[2] * x[2], -x[2];
        return v;
    };
    ex.field.jacobian = [](const Vec& x) {
        Mat j = Mat::Zero(3, 3);
        j(0, 2) = 2.0 * x[2];
        j(1, 2) = 2.0 * x[2];
        j(2, 2) = -1.0;
        return j;
    };

    ex.psi.name = "transversal-energy";
    ex.psi.value = [](const Vec& x) { return 0.5 * x[2] * x[2]; };
    ex.psi.differential = [](const Vec& x) {
        Vec d(3);
        d << 0.0, 0.0, x[2];
        return d;
    };
    ex.psi.lower_bound = 0.0;

    Vec gen(3);
    gen << 1.0, 1.0, 0.0;
    ex.foliation.generators = {[gen](const Vec&) { return gen; }};
    ex.foliation.quotient_map = [](const Vec& x) {
        Vec y(1);
        y << x[2];
        return y;
    };
    ex.foliation.quotient_differential = [](const Vec&) {
        Mat d = Mat::Zero(1, 3);
        d(0, 2) = 1.0;
        return d;
    };
    ex.foliation.leaves_compact = false;

    ex.sigma_distance = [](const Vec& x) { return std::abs(x[2]); };

    ExampleFacts& f = ex.facts;
    f.state_dim = 3;
    f.manifold_dim = 2;
    f.corank = 1;
    f.leaves_compact = false;
    f.pointwise_dissipation = true;
    f.c_expected = 1.0;  // the decay ratio is identically one for this system
    f.h3_holds = false;  // transversal probes pick up a persistent drift component
    f.h4_holds = false;
    f.alpha_expected = 0.0;
    f.sigma_rate_expected = 1.0;
    f.sigma_rate_tol = 0.01;
    f.transversal_eigenvalues = {{-1.0, 0.0}};
    f.spectral_point = Vec::Zero(3);
    f.eta_default = 0.5;
    f.default_x0 = Vec::Zero(3);
    f.default_x0[2] = 1.0;
    f.default_t_final = 20.0;
    f.default_dt = 1e-3;
    f.default_t_transient = 12.0;
    f.default_t_sample = 20.0;
    f.ensemble_dt = 1e-2;
    f.box_lo = Vec(3);
    f.box_lo << -1.0, -1.0, 0.2;
    f.box_hi = Vec(3);
    f.box_hi << 1.0, 1.0, 1.0;
    f.absorb_center = Vec(3);
    f.absorb_center << 0.0, 0.0, 0.5;
    f.absorb_radius = 5.0;
    f.omega_cluster_radius = 1e-3;
    f.critical_seed = Vec(3);
    f.critical_seed << 0.3, 0.3, 0.2;
    f.critical_expected = Vec(3);
    f.critical_expected << 0.3, 0.3, 0.0;
    f.limit_expected = Vec::Zero(1);
    f.limit_tol = 1e-6;
    f.energy_tail_lo = 10.0;
    f.energy_tail_hi = 20.0;
    f.sampler = [](Rng& rng) {
        Vec x(3);
        x[0] = rng.uniform(-1.0, 1.0);
        x[1] = x[0];
        x[2] = margin_draw(rng, 1.0);
        return x;
    };
    f.z_sampler = [](Rng& rng) {
        Vec x(3);
        x[0] = rng.uniform(-1.0, 1.0);
        x[1] = x[0];
        x[2] = 0.0;
        return x;
    };
    return ex;
}

ExampleSystem make_circle_contract() {
    ExampleSystem ex;
    ex.name = "circle-contract";

    ex.manifold.mode = ManifoldMode::intrinsic;
    ex.manifold.chart_dim = 2;
    Mat form = Mat::Zero(2, 2);
    form(1, 1) = 1.0;
    ex.manifold.form_field = [form](const Vec&) { return form; };
    ex.manifold.periodic_coords = {0};
    ex.manifold.declared_corank = 1;

    const double alpha = 1.0;
    ex.field.name = "circle-contract";
    ex.field.eval = [alpha](const Vec& x) {
        Vec v(2);
        v << 1.0, -alpha * x[1];
        return v;
    };
    ex.field.jacobian = [alpha](const Vec&) {
        Mat j = Mat::Zero(2, 2);
        j(1, 1) = -alpha;
        return j;
    };

    ex.psi.name = "transversal-energy";
    ex.psi.value = [](const Vec& x) { return 0.5 * x[1] * x[1]; };
    ex.psi.differential = [](const Vec& x) {
        Vec d(2);
        d << 0.0, x[1];
        return d;
    };

    Vec gen(2);
    gen << 1.0, 0.0;
    ex.foliation.generators = {[gen](const Vec&) { return gen; }};
    ex.foliation.quotient_map = [](const Vec& x) {
        Vec y(1);
        y << x[1];
        return y;
    };
    ex.foliation.quotient_differential = [](const Vec&) {
        Mat d = Mat::Zero(1, 2);
        d(0, 1) = 1.0;
        return d;
    };
    ex.foliation.leaves_compact = true;

    ex.sigma_distance = [](const Vec& x) { return std::abs(x[1]); };

    ExampleFacts& f = ex.facts;
    f.state_dim = 2;
    f.manifold_dim = 2;
    f.corank = 1;
    f.leaves_compact = true;
    f.pointwise_dissipation = true;
    f.c_expected = alpha;  // the decay ratio is identically alpha
    f.h3_holds = true;
    f.h4_holds = true;
    f.alpha_expected = alpha;
    f.alpha_tol = 0.01;
    f.sigma_rate_expected = alpha;
    f.sigma_rate_tol = 0.01;
    f.transversal_eigenvalues = {{-alpha, 0.0}};
    f.spectral_point = Vec::Zero(2);
    f.eta_default = 0.5;
    f.default_x0 = Vec(2);
    f.default_x0 << 0.0, 2.0;
    f.default_t_final = 20.0;
    f.default_dt = 1e-3;
    f.default_t_transient = 12.0;
    f.default_t_sample = 20.0;
    f.ensemble_dt = 1e-2;
    f.box_lo = Vec(2);
    f.box_lo << 0.0, -2.0;
    f.box_hi = Vec(2);
    f.box_hi << kTwoPi, 2.0;
    f.absorb_center = Vec(2);
    f.absorb_center << 0.5 * kTwoPi, 0.0;
    f.absorb_radius = 5.2;
    f.omega_cluster_radius = 0.15;
    f.critical_seed = Vec(2);
    f.critical_seed << 0.3, 0.5;
    f.critical_expected = Vec(2);
    f.critical_expected << 0.3, 0.0;
    f.limit_expected = Vec::Zero(1);
    f.limit_tol = 1e-6;
    f.energy_tail_lo = 10.0;
    f.energy_tail_hi = 20.0;
    f.attractor_dim_expected = 1.0;  // the attractor is the whole neutral circle
    f.sampler = [](Rng& rng) {
        Vec x(2);
        x[0] = rng.uniform(0.0, kTwoPi);
        x[1] = margin_draw(rng, 2.0, 2e-3);
        return x;
    };
    f.z_sampler = [](Rng& rng) {
        Vec x(2);
        x[0] = rng.uniform(0.0, kTwoPi);
        x[1] = 0.0;
        return x;
    };
    return ex;
}

ExampleSystem make_presymplectic_toy() {
    ExampleSystem ex;
    ex.name = "presymplectic-toy";

    ex.manifold.mode = ManifoldMode::intrinsic;
    ex.manifold.chart_dim = 3;
    const Mat form = diag3(1.0, 1.0, 0.0);
    ex.manifold.form_field = [form](const Vec&) { return form; };
    ex.manifold.periodic_coords = {2};
    ex.manifold.declared_corank = 1;

    const double lambda = 1.0;
    const double drift = 0.3;
    ex.field.name = "presymplectic-toy";
    ex.field.eval = [lambda, drift](const Vec& x) {
        Vec v(3);
        v << x[1], -x[0] - lambda * x[1], drift;
        return v;
    };
    ex.field.jacobian = [lambda](const Vec&) {
        Mat j = Mat::Zero(3, 3);
        j(0, 1) = 1.0;
        j(1, 0) = -1.0;
        j(1, 1) = -lambda;
        return j;
    };

    ex.psi.name = "oscillator-energy";
    ex.psi.value = [](const Vec& x) { return 0.5 * (x[0] * x[0] + x[1] * x[1]); };
    ex.psi.differential = [](const Vec& x) {
        Vec d(3);
        d << x[0], x[1], 0.0;
        return d;
    };

    Vec gen(3);
    gen << 0.0, 0.0, 1.0;
    ex.foliation.generators = {[gen](const Vec&) { return gen; }};
    ex.foliation.quotient_map = [](const Vec& x) {
        Vec y(2);
        y << x[0], x[1];
        return y;
    };
    ex.foliation.quotient_differential = [](const Vec&) {
        Mat d = Mat::Zero(2, 3);
        d(0, 0) = 1.0;
        d(1, 1) = 1.0;
        return d;
    };
    ex.foliation.leaves_compact = true;

    ex.sigma_distance = [](const Vec& x) { return std::hypot(x[0], x[1]); };

    ExampleFacts& f = ex.facts;
    f.state_dim = 3;
    f.manifold_dim = 3;
    f.corank = 1;
    f.leaves_compact = true;
    f.pointwise_dissipation = false;  // the decay ratio vanishes where p1 = 0
    f.h3_holds = true;
    f.h4_holds = true;
    f.alpha_expected = 0.5;
    f.alpha_tol = 0.05;
    f.sigma_rate_expected = 0.5;
    f.sigma_rate_tol = 0.05;
    f.transversal_eigenvalues = {{-0.5, -0.8660254037844386},
                                 {-0.5, 0.8660254037844386}};
    f.spectral_point = Vec::Zero(3);
    f.eta_default = 0.4;
    f.default_x0 = Vec(3);
    f.default_x0 << 1.0, 0.0, 0.0;
    f.default_t_final = 40.0;
    f.default_dt = 1e-3;
    // Long transient so the sampled cloud hugs the limit circle tightly, and a
    // window long enough for the slow drift to wind all the way around it.
    f.default_t_transient = 16.0;
    f.default_t_sample = 21.0;
    f.ensemble_dt = 1e-2;
    f.box_lo = Vec(3);
    f.box_lo << -1.0, -1.0, 0.0;
    f.box_hi = Vec(3);
    f.box_hi << 1.0, 1.0, kTwoPi;
    f.absorb_center = Vec(3);
    f.absorb_center << 0.0, 0.0, 0.5 * kTwoPi;
    f.absorb_radius = 6.0;
    f.omega_cluster_radius = 0.15;
    f.critical_seed = Vec(3);
    f.critical_seed << 0.1, -0.1, 1.0;
    f.critical_expected = Vec(3);
    f.critical_expected << 0.0, 0.0, 1.0;
    f.limit_expected = Vec::Zero(2);
    f.limit_tol = 1e-4;
    f.energy_tail_lo = 30.0;  // the slower rate needs a later window to flatten out
    f.energy_tail_hi = 40.0;
    f.attractor_dim_expected = 1.0;  // the attractor is the drifting circle q = p = 0
    f.sampler = [](Rng& rng) {
        Vec x(3);
        x[0] = rng.uniform(-1.0, 1.0);
        x[1] = margin_draw(rng, 1.0);
        x[2] = rng.uniform(0.0, kTwoPi);
        return x;
    };
    f.z_sampler = [](Rng& rng) {
        Vec x(3);
        x[0] = 0.0;
        x[1] = 0.0;
        x[2] = rng.uniform(0.0, kTwoPi);
        return x;
    };
    Vec w1(3), w2(3);
    w1 << 0.5, 0.0, 0.0;
    w2 << -0.7, 0.0, 1.0;
    f.violation_points = {w1, w2};
    return ex;
}

}  // namespace

const std::vector<ExampleSystem>& builtin_examples() {
    static const std::vector<ExampleSystem> registry = {
        make_null_hyperplane(), make_circle_contract(), make_presymplectic_toy()};
    return registry;
}

const ExampleSystem& find_example(const std::string& name) {
    for (const ExampleSystem& ex : builtin_examples()) {
        if (ex.name == name) return ex;
    }
    std::ostringstream os;
    os << "unknown example \"" << name << "\"; available:";
    for (const ExampleSystem& ex : builtin_examples()) os << " " << ex.name;
    throw ConfigError(os.str(), 0, "example");
}

DegenerateMetricManifold make_minkowski_slice(double s) {
    DegenerateMetricManifold manifold;
    manifold.mode = ManifoldMode::embedded;
    manifold.ambient.dim = 3;
    const Mat metric = diag3(-1.0, 1.0, 1.0);
    manifold.ambient.metric_field = [metric](const Vec&) { return metric; };
    manifold.ambient.expected_signature = {-1, 1, 1};
    manifold.constraint.value = [s](const Vec& x) { return x[0] - s * x[1]; };
    manifold.constraint.differential = [s](const Vec&) {
        Vec d(3);
        d << 1.0, -s, 0.0;
        return d;
    };
    return manifold;
}

std::vector<Vec> sample_ensemble(const ExampleSystem& example, int count, Rng& rng,
                                 double inflate) {
    const ExampleFacts& f = example.facts;
    Vec lo = f.box_lo, hi = f.box_hi;
    for (Eigen::Index i = 0; i < lo.size(); ++i) {
        const bool periodic =
            std::find(example.manifold.periodic_coords.begin(),
                      example.manifold.periodic_coords.end(),
                      static_cast<int>(i)) != example.manifold.periodic_coords.end();
        if (periodic) continue;  // the periodic range already covers the whole circle
        const double center = 0.5 * (lo[i] + hi[i]);
        const double half = 0.5 * (hi[i] - lo[i]) * inflate;
        lo[i] = center - half;
        hi[i] = center + half;
    }
    std::vector<Vec> points;
    points.reserve(count);
    for (int j = 0; j < count; ++j) {
        points.push_back(wrap_state(
            project_to_manifold(example.manifold, rng.uniform_vec(lo, hi)),
            example.manifold.periodic_coords));
    }
    return points;
}

}  // namespace nullfold
