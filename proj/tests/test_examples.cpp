#include <doctest.h>

#include <cmath>
#include <vector>

#include "nullfold/dynamics.hpp"
#include "nullfold/examples.hpp"
#include "support/oracles.hpp"

using namespace nullfold;
namespace oracle = nullfold::testing;

TEST_SUITE("examples") {

TEST_CASE("the registry ships the three reference systems") {
    const auto& all = builtin_examples();
    REQUIRE(all.size() == 3);
    CHECK(find_example("null-hyperplane").name == "null-hyperplane");
    CHECK(find_example("circle-contract").name == "circle-contract");
    CHECK(find_example("presymplectic-toy").name == "presymplectic-toy");
}

TEST_CASE("an unknown name fails with the available choices listed") {
    try {
        find_example("no-such-system");
        FAIL("lookup should have thrown");
    } catch (const ConfigError& e) {
        CHECK(e.field == "example");
        CHECK(std::string(e.what()).find("null-hyperplane") != std::string::npos);
    }
}

TEST_CASE("registered dimensions and coranks match the computed splittings") {
    for (const ExampleSystem& ex : builtin_examples()) {
        CHECK(ex.manifold.state_dim() == ex.facts.state_dim);
        CHECK(ex.manifold.manifold_dim() == ex.facts.manifold_dim);
        Rng rng(21);
        for (int i = 0; i < 10; ++i) {
            const Vec x = ex.facts.sampler(rng);
            CHECK(null_splitting(ex.manifold, x).corank == ex.facts.corank);
        }
    }
}

TEST_CASE("shipped analytic derivatives agree with finite differences") {
    for (const ExampleSystem& ex : builtin_examples()) {
        Rng rng(31);
        for (int i = 0; i < 5; ++i) {
            const Vec x = ex.facts.sampler(rng);
            CHECK((ex.field.jacobian(x) - fd_jacobian(ex.field.eval, x)).cwiseAbs()
                      .maxCoeff() <= 1e-6);
            CHECK((ex.psi.differential(x) - fd_gradient(ex.psi.value, x)).norm() <= 1e-6);
        }
    }
}

TEST_CASE("flows agree with their closed forms") {
    struct Probe {
        const char* name;
        Vec (*closed)(const Vec&, double);
    };
    const Probe probes[] = {
        {"null-hyperplane", [](const Vec& x, double t) {
             return oracle::null_hyperplane_closed(x, t);
         }},
        {"circle-contract", [](const Vec& x, double t) {
             return oracle::circle_closed(x, t);
         }},
        {"presymplectic-toy", [](const Vec& x, double t) {
             return oracle::presym_closed(x, t);
         }},
    };
    for (const Probe& probe : probes) {
        const ExampleSystem& ex = find_example(probe.name);
        const double t = 2.0;
        const Trajectory traj =
            integrate(ex.manifold, ex.field, ex.facts.default_x0, t, 1e-3);
        CHECK(chart_dist(traj.states.back(), probe.closed(ex.facts.default_x0, t),
                         traj.periodic) <= 1e-6);
    }
}

TEST_CASE("the analytic tangency distances match the chart geometry") {
    const ExampleSystem& slice = find_example("null-hyperplane");
    Vec a(3);
    a << 0.4, 0.4, -0.6;
    CHECK(slice.sigma_distance(a) == doctest::Approx(0.6).epsilon(1e-12));

    const ExampleSystem& circle = find_example("circle-contract");
    Vec b(2);
    b << 1.0, -0.3;
    CHECK(circle.sigma_distance(b) == doctest::Approx(0.3).epsilon(1e-12));

    const ExampleSystem& toy = find_example("presymplectic-toy");
    Vec c(3);
    c << 0.3, -0.4, 2.0;
    CHECK(toy.sigma_distance(c) == doctest::Approx(0.5).epsilon(1e-12));
}

TEST_CASE("generic samples keep a margin from the degeneracy set") {
    const ExampleSystem& slice = find_example("null-hyperplane");
    Rng rng(17);
    for (int i = 0; i < 200; ++i) {
        const Vec x = slice.facts.sampler(rng);
        CHECK(std::abs(x[0] - x[1]) <= 1e-12);  // on the constraint
        CHECK(std::abs(x[2]) >= 1e-3 * (1.0 - 1e-12));
        CHECK(std::abs(x[2]) <= 1.0 + 1e-12);
    }
}

TEST_CASE("degeneracy-set samples are exactly degenerate") {
    for (const char* name : {"null-hyperplane", "circle-contract", "presymplectic-toy"}) {
        const ExampleSystem& ex = find_example(name);
        REQUIRE(ex.facts.z_sampler);
        Rng rng(23);
        for (int i = 0; i < 20; ++i) {
            const Vec z = ex.facts.z_sampler(rng);
            const TangentSplitting split = null_splitting(ex.manifold, z);
            const auto [v_n, v_s] = decompose(ex.field, split, z);
            (void)v_n;
            CHECK(transversal_norm(split, ex.manifold, v_s) <= 1e-12);
            CHECK(ex.sigma_distance(z) <= 1e-12);
        }
    }
}

TEST_CASE("registered dissipation facts are consistent") {
    CHECK(find_example("null-hyperplane").facts.pointwise_dissipation);
    CHECK(find_example("circle-contract").facts.pointwise_dissipation);
    CHECK_FALSE(find_example("presymplectic-toy").facts.pointwise_dissipation);
    CHECK(find_example("null-hyperplane").facts.c_expected == doctest::Approx(1.0));
    CHECK(find_example("presymplectic-toy").facts.violation_points.size() >= 1);
    CHECK(find_example("null-hyperplane").facts.violation_points.empty());
}

TEST_CASE("leaf compactness is declared per example") {
    CHECK_FALSE(find_example("null-hyperplane").foliation.leaves_compact);
    CHECK(find_example("circle-contract").foliation.leaves_compact);
    CHECK(find_example("presymplectic-toy").foliation.leaves_compact);
    for (const ExampleSystem& ex : builtin_examples()) {
        CHECK(ex.foliation.leaves_compact == ex.facts.leaves_compact);
    }
}

TEST_CASE("ensemble draws stay on the manifold and inside the box") {
    for (const ExampleSystem& ex : builtin_examples()) {
        Rng rng(99);
        const std::vector<Vec> ensemble = sample_ensemble(ex, 32, rng);
        REQUIRE(ensemble.size() == 32);
        for (const Vec& x : ensemble) {
            CHECK(ex.manifold.on_manifold(x));
            for (int i : ex.manifold.periodic_coords) {
                CHECK(x[i] >= 0.0);
                CHECK(x[i] < kTwoPi);
            }
        }
        Rng rng2(99);
        const std::vector<Vec> twin = sample_ensemble(ex, 32, rng2);
        for (int i = 0; i < 32; ++i) CHECK((ensemble[i] - twin[i]).norm() == 0.0);
    }
}

TEST_CASE("the slice family member at the degenerate parameter is the shipped one") {
    const DegenerateMetricManifold family = make_minkowski_slice(1.0);
    Vec x(3);
    x << 0.7, 0.7, 0.2;
    CHECK(family.on_manifold(x));
    const TangentSplitting split = null_splitting(family, x);
    CHECK(split.corank == 1);

    const ExampleSystem& ex = find_example("null-hyperplane");
    CHECK(std::abs(family.constraint.value(x) - ex.manifold.constraint.value(x)) <= 1e-12);
}

TEST_CASE("defaults describe runnable experiments") {
    for (const ExampleSystem& ex : builtin_examples()) {
        CHECK(ex.facts.default_dt > 0.0);
        CHECK(ex.facts.default_t_final > 0.0);
        CHECK(ex.facts.default_t_transient >= 0.0);
        CHECK(ex.facts.default_t_transient < ex.facts.default_t_final);
        CHECK(ex.facts.default_t_sample > 0.0);
        CHECK(ex.facts.ensemble_dt > 0.0);
        CHECK(static_cast<int>(ex.facts.box_lo.size()) == ex.facts.state_dim);
        CHECK(static_cast<int>(ex.facts.box_hi.size()) == ex.facts.state_dim);
        CHECK(ex.facts.absorb_radius > 0.0);
        CHECK(static_cast<int>(ex.facts.default_x0.size()) == ex.facts.state_dim);
        CHECK(ex.facts.has_oracles);
    }
}

}  // TEST_SUITE("examples")
