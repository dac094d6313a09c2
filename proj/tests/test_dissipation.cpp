#include <doctest.h>

#include <cmath>
#include <cstdint>
#include <functional>
#include <vector>

#include "nullfold/dissipation.hpp"
#include "nullfold/dynamics.hpp"
#include "nullfold/examples.hpp"
#include "support/oracles.hpp"

using namespace nullfold;
namespace oracle = nullfold::testing;

namespace {

std::vector<Vec> draw(const std::function<Vec(Rng&)>& sampler, int n, std::uint64_t seed) {
    Rng rng(seed);
    std::vector<Vec> out;
    out.reserve(n);
    for (int i = 0; i < n; ++i) out.push_back(sampler(rng));
    return out;
}

}  // namespace

TEST_SUITE("dissipation") {

TEST_CASE("an adapted functional has rounding-level incompatibility") {
    const ExampleSystem& ex = find_example("null-hyperplane");
    for (const Vec& x : draw(ex.facts.sampler, 50, 11)) {
        const TangentSplitting split = null_splitting(ex.manifold, x);
        CHECK(check_compatibility(ex.psi, split, x) <= 1e-12);
    }
}

TEST_CASE("a functional that grades the null direction scores exactly one") {
    // d(height) pairs to 1 with the sup-normalized null direction (1,1,0).
    const ExampleSystem& ex = find_example("null-hyperplane");
    const FunctionalSpec height = oracle::make_height_functional();
    Vec x(3);
    x << 0.2, 0.2, 0.6;
    const TangentSplitting split = null_splitting(ex.manifold, x);
    CHECK(check_compatibility(height, split, x) == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("decay constant of the slice flow is exactly one") {
    const ExampleSystem& ex = find_example("null-hyperplane");
    const DissipationEstimate est = dissipation_constant(
        ex.psi, ex.field, ex.manifold, draw(ex.facts.sampler, 100, 5));
    CHECK(est.admissible == 100);
    CHECK_FALSE(est.no_transversal_motion);
    CHECK(est.c_hat == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("decay constant of the circle flow is exactly one") {
    const ExampleSystem& ex = find_example("circle-contract");
    const DissipationEstimate est = dissipation_constant(
        ex.psi, ex.field, ex.manifold, draw(ex.facts.sampler, 100, 5));
    CHECK(est.admissible == 100);
    CHECK(est.c_hat == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("a vanishing decay ratio is reported with its witness") {
    const ExampleSystem& ex = find_example("presymplectic-toy");
    REQUIRE_FALSE(ex.facts.violation_points.empty());
    try {
        dissipation_constant(ex.psi, ex.field, ex.manifold, ex.facts.violation_points);
        FAIL("expected a reported violation");
    } catch (const DissipationViolated& e) {
        CHECK(e.ratio <= 0.0);
        CHECK(e.witness.size() == 3);
        // The witness is one of the probe points.
        bool known = false;
        for (const Vec& p : ex.facts.violation_points) {
            if ((e.witness - p).norm() <= 1e-12) known = true;
        }
        CHECK(known);
    }
}

TEST_CASE("samples without transversal motion yield no estimate") {
    const ExampleSystem& ex = find_example("null-hyperplane");
    REQUIRE(ex.facts.z_sampler);
    const DissipationEstimate est = dissipation_constant(
        ex.psi, ex.field, ex.manifold, draw(ex.facts.z_sampler, 20, 3));
    CHECK(est.no_transversal_motion);
    CHECK(est.admissible == 0);
    CHECK(est.c_hat == 0.0);
}

TEST_CASE("the transversal speed indicator separates the degeneracy set") {
    const ExampleSystem& ex = find_example("null-hyperplane");
    for (const Vec& x : draw(ex.facts.z_sampler, 20, 9)) {
        const TangentSplitting split = null_splitting(ex.manifold, x);
        CHECK(z_indicator(ex.field, split, ex.manifold, x) <= 1e-12);
    }
    for (const Vec& x : draw(ex.facts.sampler, 20, 9)) {
        const TangentSplitting split = null_splitting(ex.manifold, x);
        CHECK(z_indicator(ex.field, split, ex.manifold, x) ==
              doctest::Approx(std::abs(x[2])).epsilon(1e-10));
    }
}

TEST_CASE("the functional is monotone along the circle flow") {
    const ExampleSystem& ex = find_example("circle-contract");
    Vec x0(2);
    x0 << 0.0, 2.0;
    IntegrateOptions options;
    options.psi = ex.psi.value;
    const Trajectory traj = integrate(ex.manifold, ex.field, x0, 3.0, 1e-3, 1e-9, options);

    const double worst = monotonicity_check(traj, ex.psi);
    CHECK(worst <= 0.0);  // strictly decreasing here; no slack needed
    CHECK(worst <= monotonicity_slack(traj, ex.psi, ex.field));

    // Closed form: psi(t)/psi(0) = e^{-2t} for psi = y^2/2.
    CHECK(traj.psi.back() / traj.psi.front() ==
          doctest::Approx(std::exp(-6.0)).epsilon(1e-5));
}

TEST_CASE("the slack scales with step size and the observed rate") {
    const ExampleSystem& ex = find_example("circle-contract");
    Vec x0(2);
    x0 << 0.0, 2.0;
    const Trajectory traj = integrate(ex.manifold, ex.field, x0, 1.0, 1e-2);
    // max |dpsi(V)| = max y^2 = 4 at the start, so the slack is 10*dt*4.
    CHECK(monotonicity_slack(traj, ex.psi, ex.field) ==
          doctest::Approx(10.0 * 1e-2 * 4.0).epsilon(1e-6));
}

TEST_CASE("the kinetic budget of the slice flow closes at one half") {
    const ExampleSystem& ex = find_example("null-hyperplane");
    Vec x0(3);
    x0 << 0.0, 0.0, 1.0;
    IntegrateOptions options;
    options.psi = ex.psi.value;
    const Trajectory traj = integrate(ex.manifold, ex.field, x0, 20.0, 1e-3, 1e-9, options);

    const BudgetResult budget = dissipation_budget(traj, ex.psi, 1.0);
    CHECK(budget.lhs == doctest::Approx(0.5).epsilon(1e-5));
    CHECK(budget.rhs == doctest::Approx(0.5).epsilon(1e-5));
    CHECK(budget.lhs <= budget.rhs + 1e-6);
}

TEST_CASE("the kinetic budget of the circle flow closes at two") {
    const ExampleSystem& ex = find_example("circle-contract");
    Vec x0(2);
    x0 << 0.0, 2.0;
    IntegrateOptions options;
    options.psi = ex.psi.value;
    const Trajectory traj = integrate(ex.manifold, ex.field, x0, 20.0, 1e-3, 1e-9, options);

    const BudgetResult budget = dissipation_budget(traj, ex.psi, 1.0);
    CHECK(budget.lhs == doctest::Approx(2.0).epsilon(1e-5));
    CHECK(budget.rhs == doctest::Approx(2.0).epsilon(1e-5));
    CHECK(budget.lhs <= budget.rhs + 2e-6);
}

TEST_CASE("budget preconditions are enforced") {
    const ExampleSystem& ex = find_example("circle-contract");
    Vec x0(2);
    x0 << 0.0, 1.0;
    IntegrateOptions no_vs;
    no_vs.record_vs_norm = false;
    const Trajectory bare = integrate(ex.manifold, ex.field, x0, 1.0, 1e-2, 1e-9, no_vs);
    CHECK_THROWS_AS(dissipation_budget(bare, ex.psi, 1.0), LabError);

    const Trajectory traj = integrate(ex.manifold, ex.field, x0, 1.0, 1e-2);
    CHECK_THROWS_AS(dissipation_budget(traj, ex.psi, 0.0), LabError);
    CHECK_THROWS_AS(dissipation_budget(traj, ex.psi, -1.0), LabError);
}

TEST_CASE("the late-time cluster of the slice flow is the predicted point") {
    const ExampleSystem& ex = find_example("null-hyperplane");
    Vec x0(3);
    x0 << 0.0, 0.0, 1.0;
    const Trajectory traj = integrate(ex.manifold, ex.field, x0, 30.0, 1e-3);

    const std::vector<Vec> omega = omega_limit_estimate(traj, 0.1, 1e-3);
    REQUIRE(omega.size() == 1);
    Vec expected(3);
    expected << 0.5, 0.5, 0.0;
    CHECK(chart_dist(omega.front(), expected, traj.periodic) <= 1e-4);
}

TEST_CASE("a non-convergent tail blows the cluster budget") {
    const ExampleSystem& ex = find_example("circle-contract");
    Vec x0(2);
    x0 << 0.0, 1.0;
    const Trajectory traj = integrate(ex.manifold, ex.field, x0, 30.0, 1e-3);
    // The angle keeps sweeping, so a 0.01-radius clustering cannot settle.
    CHECK_THROWS_AS(omega_limit_estimate(traj, 0.1, 0.01), ClusterBudgetExceeded);
}

TEST_CASE("omega-limit preconditions are enforced") {
    const ExampleSystem& ex = find_example("circle-contract");
    Vec x0(2);
    x0 << 0.0, 1.0;
    const Trajectory traj = integrate(ex.manifold, ex.field, x0, 1.0, 0.1);
    CHECK_THROWS_AS(omega_limit_estimate(traj, 0.1, 0.1), LabError);   // tail < 50 samples
    CHECK_THROWS_AS(omega_limit_estimate(traj, 0.0, 0.1), LabError);   // empty tail fraction
    CHECK_THROWS_AS(omega_limit_estimate(traj, 1.5, 0.1), LabError);   // fraction above one
}

}  // TEST_SUITE("dissipation")
