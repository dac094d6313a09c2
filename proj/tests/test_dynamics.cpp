#include <doctest.h>

#include <cmath>
#include <vector>

#include "nullfold/dynamics.hpp"
#include "nullfold/examples.hpp"
#include "support/oracles.hpp"

using namespace nullfold;
namespace oracle = nullfold::testing;

TEST_SUITE("dynamics") {

TEST_CASE("tangency residual of the shipped fields vanishes") {
    const ExampleSystem& ex = find_example("null-hyperplane");
    Vec x(3);
    x << 0.3, 0.3, 0.8;
    CHECK(check_tangency(ex.field, ex.manifold, x) <= 1e-12);

    // Intrinsic charts are tangent by construction.
    const ExampleSystem& circle = find_example("circle-contract");
    Vec y(2);
    y << 0.5, 1.0;
    CHECK(check_tangency(circle.field, circle.manifold, y) == 0.0);
}

TEST_CASE("field decomposition separates drift and decay parts") {
    const ExampleSystem& ex = find_example("null-hyperplane");
    Vec x(3);
    x << 0.0, 0.0, 1.0;
    const TangentSplitting split = null_splitting(ex.manifold, x);
    const auto [v_n, v_s] = decompose(ex.field, split, x);

    Vec n_expected(3), s_expected(3);
    n_expected << 1.0, 1.0, 0.0;
    s_expected << 0.0, 0.0, -1.0;
    CHECK((v_n - n_expected).norm() <= 1e-10);
    CHECK((v_s - s_expected).norm() <= 1e-10);
    CHECK((v_n + v_s - ex.field.eval(x)).norm() <= 1e-12);
}

TEST_CASE("decomposition rejects a vector that is not tangent") {
    const ExampleSystem& ex = find_example("null-hyperplane");
    Vec x(3);
    x << 0.0, 0.0, 1.0;
    const TangentSplitting split = null_splitting(ex.manifold, x);
    Vec off(3);
    off << 1.0, 0.0, 0.0;  // dphi . off = 1
    CHECK_THROWS_AS(decompose_vector(off, split), TangencyViolated);
}

TEST_CASE("transversal length uses the induced metric") {
    const ExampleSystem& ex = find_example("presymplectic-toy");
    Vec x(3);
    x << 0.0, 0.0, 1.0;
    const TangentSplitting split = null_splitting(ex.manifold, x);
    Vec v(3);
    v << 3.0, 4.0, 0.0;
    CHECK(transversal_norm(split, ex.manifold, v) == doctest::Approx(5.0).epsilon(1e-12));

    Vec zero = Vec::Zero(3);
    CHECK(transversal_norm(split, ex.manifold, zero) == doctest::Approx(0.0));
}

TEST_CASE("Newton projection lands on the constraint set") {
    const ExampleSystem& ex = find_example("null-hyperplane");
    Vec x(3);
    x << 0.31, 0.29, 0.5;  // slightly off the slice
    const Vec p = project_to_manifold(ex.manifold, x);
    CHECK(std::abs(ex.manifold.constraint.value(p)) <= 1e-9);

    // Intrinsic charts are returned untouched.
    const ExampleSystem& circle = find_example("circle-contract");
    Vec y(2);
    y << 0.4, 1.7;
    CHECK((project_to_manifold(circle.manifold, y) - y).norm() == 0.0);
}

TEST_CASE("Newton projection far from a curved constraint gives up loudly") {
    DegenerateMetricManifold m;
    m.mode = ManifoldMode::embedded;
    m.ambient.dim = 2;
    m.ambient.metric_field = [](const Vec&) { return Mat::Identity(2, 2).eval(); };
    m.constraint.value = [](const Vec& x) { return x.squaredNorm() - 1.0; };
    m.constraint.differential = [](const Vec& x) { return (2.0 * x).eval(); };

    Vec near(2), far(2);
    near << 1.05, 0.0;
    far << 10.0, 0.0;
    CHECK(std::abs(m.constraint.value(project_to_manifold(m, near))) <= 1e-9);
    CHECK_THROWS_AS(project_to_manifold(m, far), ProjectionDiverged);
}

TEST_CASE("integration reproduces the closed-form slice flow") {
    const ExampleSystem& ex = find_example("null-hyperplane");
    Vec x0(3);
    x0 << 0.0, 0.0, 1.0;
    const Trajectory traj = integrate(ex.manifold, ex.field, x0, 5.0, 1e-3);

    const Vec expected = oracle::null_hyperplane_closed(x0, 5.0);
    CHECK(traj.states.back()[2] ==
          doctest::Approx(std::exp(-5.0)).epsilon(1e-6));
    CHECK((traj.states.back() - expected).norm() <= 1e-8);
    CHECK(traj.t_final() == doctest::Approx(5.0));

    // The constraint residual stays at projection tolerance throughout.
    REQUIRE(traj.phi_residual.size() == traj.size());
    double worst = 0.0;
    for (double r : traj.phi_residual) worst = std::max(worst, r);
    CHECK(worst <= 1e-9);
}

TEST_CASE("integration wraps periodic coordinates") {
    const ExampleSystem& ex = find_example("circle-contract");
    Vec x0(2);
    x0 << 0.0, 2.0;
    const Trajectory traj = integrate(ex.manifold, ex.field, x0, 7.0, 1e-3);
    CHECK(traj.states.back()[0] == doctest::Approx(7.0 - kTwoPi).epsilon(1e-9));
    CHECK(traj.states.back()[1] == doctest::Approx(2.0 * std::exp(-7.0)).epsilon(1e-6));
    for (const Vec& x : traj.states) {
        CHECK(x[0] >= 0.0);
        CHECK(x[0] < kTwoPi);
    }
}

TEST_CASE("integration matches the damped-rotation closed form") {
    const ExampleSystem& ex = find_example("presymplectic-toy");
    Vec x0(3);
    x0 << 1.0, 0.0, 0.0;
    const Trajectory traj = integrate(ex.manifold, ex.field, x0, 2.5, 1e-3);
    const Vec expected = oracle::presym_closed(x0, 2.5);
    CHECK(chart_dist(traj.states.back(), expected, traj.periodic) <= 1e-6);
}

TEST_CASE("recording options control the per-sample diagnostics") {
    const ExampleSystem& ex = find_example("circle-contract");
    Vec x0(2);
    x0 << 0.0, 2.0;

    IntegrateOptions options;
    options.psi = ex.psi.value;
    options.sigma_distance = ex.sigma_distance;
    options.record_stride = 10;
    const Trajectory traj = integrate(ex.manifold, ex.field, x0, 1.0, 0.01, 1e-9, options);

    // 100 steps at stride 10: the initial sample plus every tenth step.
    CHECK(traj.size() == 11);
    CHECK(traj.times.back() == doctest::Approx(1.0));
    REQUIRE(traj.psi.size() == traj.size());
    REQUIRE(traj.vs_norm.size() == traj.size());
    REQUIRE(traj.dist_sigma.size() == traj.size());
    CHECK(traj.phi_residual.empty());  // intrinsic chart: nothing to report
    CHECK(traj.psi.front() == doctest::Approx(2.0));  // y^2/2 at y = 2

    IntegrateOptions bare;
    bare.record_vs_norm = false;
    const Trajectory plain = integrate(ex.manifold, ex.field, x0, 1.0, 0.01, 1e-9, bare);
    CHECK(plain.psi.empty());
    CHECK(plain.vs_norm.empty());
    CHECK(plain.dist_sigma.empty());
}

TEST_CASE("slicing a trajectory keeps diagnostics aligned") {
    const ExampleSystem& ex = find_example("circle-contract");
    Vec x0(2);
    x0 << 0.0, 1.0;
    IntegrateOptions options;
    options.psi = ex.psi.value;
    const Trajectory traj = integrate(ex.manifold, ex.field, x0, 2.0, 0.01, 1e-9, options);
    const Trajectory cut = slice(traj, 0.5, 1.5);
    REQUIRE(cut.size() > 0);
    CHECK(cut.times.front() >= 0.5 - 1e-12);
    CHECK(cut.times.back() <= 1.5 + 1e-12);
    CHECK(cut.psi.size() == cut.size());
    CHECK(cut.vs_norm.size() == cut.size());
    CHECK(cut.periodic == traj.periodic);
}

TEST_CASE("a finite-time blowup raises instead of returning garbage") {
    DegenerateMetricManifold line;
    line.mode = ManifoldMode::intrinsic;
    line.chart_dim = 1;
    line.form_field = [](const Vec&) { return Mat::Identity(1, 1).eval(); };

    VectorFieldSpec quad;
    quad.name = "quadratic-blowup";
    quad.eval = [](const Vec& x) { return (x.array() * x.array()).matrix().eval(); };
    quad.jacobian = [](const Vec& x) { return (2.0 * x.asDiagonal().toDenseMatrix()).eval(); };

    Vec x0(1);
    x0 << 1.5;  // escapes at t = 2/3
    CHECK_THROWS_AS(integrate(line, quad, x0, 1.0, 1e-3), NonFiniteState);
}

TEST_CASE("a nonpositive step is rejected") {
    const ExampleSystem& ex = find_example("circle-contract");
    Vec x0(2);
    x0 << 0.0, 1.0;
    CHECK_THROWS_AS(integrate(ex.manifold, ex.field, x0, 1.0, 0.0), LabError);
    CHECK_THROWS_AS(integrate(ex.manifold, ex.field, x0, 1.0, -0.1), LabError);
}

TEST_CASE("linearized flow along the contracting fiber") {
    const ExampleSystem& ex = find_example("circle-contract");
    Vec x0(2), v0(2);
    x0 << 0.5, 1.0;
    v0 << 0.0, 1.0;
    const Vec v = variational_flow(ex.manifold, ex.field, x0, v0, 2.0, 1e-3);
    CHECK(v[0] == doctest::Approx(0.0).epsilon(1e-10));
    CHECK(v[1] == doctest::Approx(std::exp(-2.0)).epsilon(1e-6));
    CHECK(v.norm() == doctest::Approx(0.1353352832366127).epsilon(1e-6));
}

TEST_CASE("linearized flow matches the block matrix exponential") {
    const ExampleSystem& ex = find_example("presymplectic-toy");
    Vec x0(3);
    x0 << 0.7, -0.2, 1.0;
    const double t = 1.7;
    for (int probe = 0; probe < 2; ++probe) {
        Vec v0 = Vec::Zero(3);
        v0[probe] = 1.0;
        const Vec v = variational_flow(ex.manifold, ex.field, x0, v0, t, 1e-3);
        const Vec expected_qp = oracle::presym_block_exp(t) * v0.head(2);
        CHECK((v.head(2) - expected_qp).norm() <= 1e-4);
        CHECK(std::abs(v[2]) <= 1e-12);
    }
}

TEST_CASE("variational probes along the slice show the known plateau") {
    // d/d(x2_0) of the closed flow is (x2_0 (1 - e^{-2t}), same, e^{-t}).
    const ExampleSystem& ex = find_example("null-hyperplane");
    Vec x0(3), v0(3);
    x0 << 0.0, 0.0, 1.0;
    v0 << 0.0, 0.0, 1.0;
    const double t = 2.0;
    const Vec v = variational_flow(ex.manifold, ex.field, x0, v0, t, 1e-3);
    const double g = 1.0 - std::exp(-2.0 * t);
    Vec expected(3);
    expected << g, g, std::exp(-t);
    CHECK((v - expected).norm() <= 1e-6);
}

TEST_CASE("variational trajectory records states and variations together") {
    const ExampleSystem& ex = find_example("circle-contract");
    Vec x0(2), v0(2);
    x0 << 0.0, 1.5;
    v0 << 1.0, 0.0;
    const VariationalTrajectory vt =
        variational_trajectory(ex.manifold, ex.field, x0, v0, 1.0, 0.01, 5);
    REQUIRE(vt.times.size() == vt.states.size());
    REQUIRE(vt.times.size() == vt.variations.size());
    CHECK(vt.times.back() == doctest::Approx(1.0));
    // The angular probe is carried unchanged by this product flow.
    CHECK((vt.variations.back() - v0).norm() <= 1e-10);
}

TEST_CASE("halving the step shrinks the flow error at fourth order") {
    const ExampleSystem& ex = find_example("circle-contract");
    Vec x0(2);
    x0 << 0.0, 2.0;
    const double t_final = 4.0;

    auto error_at = [&](double h) {
        const Trajectory traj = integrate(ex.manifold, ex.field, x0, t_final, h);
        return std::abs(traj.states.back()[1] - 2.0 * std::exp(-t_final));
    };
    const double e1 = error_at(0.04);
    const double e2 = error_at(0.02);
    REQUIRE(e2 > 1e-14);  // not yet at rounding level, so the ratio is meaningful
    CHECK(e1 / e2 >= 12.0);
    CHECK(e1 / e2 <= 20.0);
}

}  // TEST_SUITE("dynamics")
