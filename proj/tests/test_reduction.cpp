#include <doctest.h>

#include <cmath>
#include <vector>

#include "nullfold/dynamics.hpp"
#include "nullfold/examples.hpp"
#include "nullfold/reduction.hpp"
#include "support/oracles.hpp"

using namespace nullfold;
namespace oracle = nullfold::testing;

namespace {

std::vector<Vec> slice_points() {
    std::vector<Vec> pts;
    for (double z : {0.3, -0.5, 0.8}) {
        Vec x(3);
        x << 0.2, 0.2, z;
        pts.push_back(x);
    }
    return pts;
}

}  // namespace

TEST_SUITE("reduction") {

TEST_CASE("the shipped fields descend to the quotient") {
    for (const char* name : {"null-hyperplane", "circle-contract", "presymplectic-toy"}) {
        const ExampleSystem& ex = find_example(name);
        Rng rng(13);
        std::vector<Vec> samples;
        for (int i = 0; i < 10; ++i) samples.push_back(ex.facts.sampler(rng));
        CHECK(verify_projectability(ex.field, ex.foliation, ex.manifold, samples, 1e-5) <=
              1e-8);
    }
}

TEST_CASE("a leaf-dependent transversal rate blocks descent") {
    const ExampleSystem& ex = find_example("null-hyperplane");
    const VectorFieldSpec drift = oracle::make_drifting_transversal_field();
    const double residual =
        verify_projectability(drift, ex.foliation, ex.manifold, slice_points(), 1e-5);
    // The bracket with the null generator is (0, 0, -x2): 0.8 at the largest sample.
    CHECK(residual > 0.1);
    CHECK(residual == doctest::Approx(0.8).epsilon(1e-3));
}

TEST_CASE("trajectory projection applies the quotient map pointwise") {
    const ExampleSystem& ex = find_example("circle-contract");
    Vec x0(2);
    x0 << 0.3, 1.0;
    const Trajectory traj = integrate(ex.manifold, ex.field, x0, 2.0, 1e-2);
    const ReducedTrajectory reduced = project_trajectory(traj, ex.foliation);
    REQUIRE(reduced.size() == traj.size());
    CHECK(reduced.periodic == ex.foliation.quotient_periodic);
    for (std::size_t i = 0; i < traj.size(); ++i) {
        CHECK((reduced.states[i] - ex.foliation.quotient_map(traj.states[i])).norm() <=
              1e-12);
    }
    CHECK(reduced.states.back()[0] ==
          doctest::Approx(1.0 * std::exp(-2.0)).epsilon(1e-6));
}

TEST_CASE("projected velocity matches the pushforward of the transversal part") {
    for (const char* name : {"null-hyperplane", "circle-contract", "presymplectic-toy"}) {
        const ExampleSystem& ex = find_example(name);
        const Trajectory traj =
            integrate(ex.manifold, ex.field, ex.facts.default_x0, 2.0, 1e-3);
        const ReducedTrajectory reduced = project_trajectory(traj, ex.foliation);
        CHECK(projected_velocity_residual(traj, reduced, ex.manifold, ex.field,
                                          ex.foliation) <= 1e-5);
    }
}

TEST_CASE("the reduced metric is the identity in the quotient charts") {
    const ExampleSystem& slice = find_example("null-hyperplane");
    Vec x(3);
    x << 0.0, 0.0, 1.0;
    const Mat g1 = reduced_metric(slice.foliation, slice.manifold, x);
    REQUIRE(g1.rows() == 1);
    CHECK(g1(0, 0) == doctest::Approx(1.0).epsilon(1e-10));

    const ExampleSystem& toy = find_example("presymplectic-toy");
    Vec y(3);
    y << 0.4, -0.3, 2.0;
    const Mat g2 = reduced_metric(toy.foliation, toy.manifold, y);
    REQUIRE(g2.rows() == 2);
    CHECK((g2 - Mat::Identity(2, 2)).cwiseAbs().maxCoeff() <= 1e-10);
}

TEST_CASE("the reduced metric does not depend on the leaf representative") {
    const ExampleSystem& ex = find_example("null-hyperplane");
    Vec a(3), b(3);
    a << 0.0, 0.0, 1.0;
    b << 5.0, 5.0, 1.0;  // same leaf: shifted along the null line
    const Mat ga = reduced_metric(ex.foliation, ex.manifold, a);
    const Mat gb = reduced_metric(ex.foliation, ex.manifold, b);
    CHECK((ga - gb).cwiseAbs().maxCoeff() <= 1e-10);
}

TEST_CASE("rank defects of the quotient differential are fatal") {
    const ExampleSystem& ex = find_example("circle-contract");
    Vec x(2);
    x << 0.3, 0.7;

    FoliationDescriptor too_wide = ex.foliation;
    too_wide.quotient_map = [](const Vec& v) { return v; };  // 2d target, 1d transversal
    too_wide.quotient_differential = [](const Vec&) { return Mat::Identity(2, 2).eval(); };
    CHECK_THROWS_AS(reduced_metric(too_wide, ex.manifold, x), QuotientRankError);

    FoliationDescriptor collapsed = ex.foliation;
    collapsed.quotient_map = [](const Vec&) { return Vec::Zero(1).eval(); };
    collapsed.quotient_differential = [](const Vec&) { return Mat::Zero(1, 2).eval(); };
    CHECK_THROWS_AS(reduced_metric(collapsed, ex.manifold, x), QuotientRankError);
}

TEST_CASE("reduced kinetic energy of the slice flow sums to one half") {
    const ExampleSystem& ex = find_example("null-hyperplane");
    Vec x0(3);
    x0 << 0.0, 0.0, 1.0;
    const Trajectory traj = integrate(ex.manifold, ex.field, x0, 20.0, 1e-3);
    const ReducedTrajectory reduced = project_trajectory(traj, ex.foliation);

    const double total = finite_energy_check(reduced, 0.0, 20.0);
    CHECK(total == doctest::Approx(0.5).epsilon(2e-4));

    const double tail = finite_energy_check(reduced, 10.0, 20.0);
    CHECK(tail <= 1e-8);
}

TEST_CASE("reduced kinetic energy matches an independent quadrature") {
    const ExampleSystem& ex = find_example("presymplectic-toy");
    Vec x0(3);
    x0 << 1.0, 0.0, 0.0;
    const Trajectory traj = integrate(ex.manifold, ex.field, x0, 10.0, 1e-3);
    const ReducedTrajectory reduced = project_trajectory(traj, ex.foliation);
    const double measured = finite_energy_check(reduced, 0.0, 10.0);

    // Quadrature of the closed-form reduced speed at 10x the resolution.
    std::vector<double> ts, speed_sq;
    for (int i = 0; i <= 100000; ++i) {
        const double t = 10.0 * i / 100000.0;
        const Vec z = oracle::presym_closed(x0, t);
        Vec rate(2);
        rate << z[1], -z[0] - z[1];
        ts.push_back(t);
        speed_sq.push_back(rate.squaredNorm());
    }
    CHECK(measured == doctest::Approx(trapezoid(ts, speed_sq)).epsilon(1e-4));
}

TEST_CASE("energy windows without enough samples are rejected") {
    ReducedTrajectory tiny;
    tiny.times = {0.0, 1.0};
    tiny.states = {Vec::Zero(1), Vec::Zero(1)};
    CHECK_THROWS_AS(finite_energy_check(tiny, 0.0, 1.0), LabError);

    const ExampleSystem& ex = find_example("circle-contract");
    Vec x0(2);
    x0 << 0.0, 1.0;
    const Trajectory traj = integrate(ex.manifold, ex.field, x0, 2.0, 1e-2);
    const ReducedTrajectory reduced = project_trajectory(traj, ex.foliation);
    CHECK_THROWS_AS(finite_energy_check(reduced, 100.0, 200.0), LabError);
}

TEST_CASE("a leaf walk steps along the generator and wraps") {
    const ExampleSystem& ex = find_example("circle-contract");
    Vec x(2);
    x << 1.0, 0.5;
    const LeafSample leaf = leaf_sample(ex.foliation, ex.manifold, x, 8, 0.5);
    REQUIRE(leaf.points.size() == 8);
    CHECK_FALSE(leaf.escaped);
    for (int j = 0; j < 8; ++j) {
        CHECK(leaf.points[j][0] == doctest::Approx(wrap_angle(1.0 + 0.5 * j)).epsilon(1e-9));
        CHECK(leaf.points[j][1] == doctest::Approx(0.5));
    }
}

TEST_CASE("a leaf walk escaping the chart window reports it") {
    const ExampleSystem& ex = find_example("null-hyperplane");
    Vec x(3);
    x << 1.9, 1.9, 0.5;
    const LeafSample leaf = leaf_sample(ex.foliation, ex.manifold, x, 10, 0.5, 2.0);
    CHECK(leaf.escaped);
    CHECK(leaf.points.size() < 10);
}

TEST_CASE("a foliation without generators cannot be sampled") {
    const ExampleSystem& ex = find_example("circle-contract");
    FoliationDescriptor empty = ex.foliation;
    empty.generators.clear();
    Vec x(2);
    x << 0.0, 0.0;
    CHECK_THROWS_AS(leaf_sample(empty, ex.manifold, x, 4, 0.1), GeneratorSpanError);
}

TEST_CASE("ensemble pooling lands on the contracted circle") {
    const ExampleSystem& ex = find_example("circle-contract");
    std::vector<Vec> ensemble;
    for (int j = 0; j < 16; ++j) {
        Vec x(2);
        x << kTwoPi * j / 16.0, 2.0 - 0.25 * j;
        ensemble.push_back(x);
    }
    const AttractorEstimate est =
        attractor_estimate(ex.manifold, ex.field, ex.foliation, ensemble, 12.0, 4.0, 1e-2);

    REQUIRE_FALSE(est.cloud_m.empty());
    REQUIRE(est.cloud_red.size() == est.cloud_m.size());
    // The stepper overshoots pure exponential decay by ~1e-9 relative over
    // 1200 steps; allow an order of magnitude on top of that.
    const double ceiling = 2.0 * std::exp(-12.0) * (1.0 + 1e-8);
    for (const Vec& p : est.cloud_m) CHECK(std::abs(p[1]) <= ceiling);
    for (const Vec& r : est.cloud_red) CHECK(std::abs(r[0]) <= ceiling);
    CHECK(est.hausdorff_gap <= 0.05);
    CHECK(est.periodic == ex.manifold.periodic_coords);
}

TEST_CASE("attractor estimation insists on a minimal ensemble") {
    const ExampleSystem& ex = find_example("circle-contract");
    std::vector<Vec> few(4, Vec::Zero(2));
    CHECK_THROWS_AS(
        attractor_estimate(ex.manifold, ex.field, ex.foliation, few, 1.0, 1.0, 1e-2),
        LabError);
}

TEST_CASE("Hausdorff distance on wrapped charts") {
    std::vector<Vec> a, b;
    Vec p(1), q(1);
    p << 0.1;
    q << kTwoPi - 0.1;
    a.push_back(p);
    b.push_back(q);
    CHECK(hausdorff_distance(a, b, {0}) == doctest::Approx(0.2).epsilon(1e-9));
    CHECK(hausdorff_distance(a, b, {}) == doctest::Approx(kTwoPi - 0.2).epsilon(1e-9));
    CHECK_THROWS_AS(hausdorff_distance({}, b, {}), LabError);
}

TEST_CASE("a fully saturated cloud scores one") {
    // Frozen generator: every leaf sample is its own base point, which is in
    // the cloud by construction.
    const ExampleSystem& ex = find_example("circle-contract");
    const FoliationDescriptor frozen = oracle::make_frozen_foliation();
    AttractorEstimate est;
    est.periodic = {0};
    for (int i = 0; i < 100; ++i) {
        Vec p(2);
        p << kTwoPi * i / 100.0, 0.0;
        est.cloud_m.push_back(p);
    }
    CHECK(saturation_check(est, frozen, ex.manifold, 1e-2, 16, 64) ==
          doctest::Approx(1.0));
}

TEST_CASE("a half-covered leaf scores about one half") {
    const ExampleSystem& ex = find_example("circle-contract");
    const AttractorEstimate est = oracle::half_circle_estimate();
    const double fraction = saturation_check(est, ex.foliation, ex.manifold, 1e-2, 64, 64);
    CHECK(std::abs(fraction - 0.5) <= 0.1);
}

TEST_CASE("saturation requires compact leaves") {
    const ExampleSystem& ex = find_example("circle-contract");
    FoliationDescriptor open = ex.foliation;
    open.leaves_compact = false;
    const AttractorEstimate est = oracle::half_circle_estimate();
    CHECK_THROWS_AS(saturation_check(est, open, ex.manifold, 1e-2, 16, 64), LabError);
}

TEST_CASE("box counts of a filled lattice fit slope two exactly") {
    const BoxDimension dim = box_dimension(oracle::grid_cloud(), default_box_scales());
    REQUIRE(dim.counts.size() == 6);
    const std::vector<long> expected = {4, 16, 64, 256, 1024, 4096};
    for (std::size_t i = 0; i < expected.size(); ++i) {
        CHECK(dim.counts[i] == expected[i]);
    }
    CHECK(dim.slope == doctest::Approx(2.0).epsilon(1e-9));
    CHECK(dim.fit_residual <= 1e-9);
}

TEST_CASE("box counts of a curve fit slope one") {
    const BoxDimension dim = box_dimension(oracle::circle_cloud(), default_box_scales());
    CHECK(std::abs(dim.slope - 1.0) <= 0.15);
}

TEST_CASE("box counts of a single point fit slope zero") {
    std::vector<Vec> point(1, Vec::Zero(3));
    const BoxDimension dim = box_dimension(point, default_box_scales());
    for (long c : dim.counts) CHECK(c == 1);
    CHECK(std::abs(dim.slope) <= 1e-12);
}

TEST_CASE("degenerate scale ranges are rejected") {
    const std::vector<Vec> cloud = oracle::circle_cloud(64);
    CHECK_THROWS_AS(box_dimension(cloud, {0.5, 0.25, 0.125}), DegenerateScaleRange);
    CHECK_THROWS_AS(box_dimension(cloud, {0.5, 0.4, 0.3, 0.25}), DegenerateScaleRange);
    CHECK_THROWS_AS(box_dimension(cloud, {0.5, 0.25, -0.125, 0.01}), DegenerateScaleRange);
}

TEST_CASE("trajectories from the sampling box enter the trapping ball and stay") {
    const ExampleSystem& ex = find_example("circle-contract");
    std::vector<Vec> ensemble;
    for (int j = 0; j < 8; ++j) {
        Vec x(2);
        x << kTwoPi * j / 8.0, (j % 2 == 0) ? 2.0 : -2.0;
        ensemble.push_back(x);
    }
    Vec center(2);
    center << 0.5 * kTwoPi, 0.0;
    const double radius = 3.3;  // exceeds the wrapped angular diameter
    const AbsorbingReport report =
        absorbing_entry(ex.manifold, ex.field, ensemble, center, radius, 6.0, 1e-2);
    CHECK(report.all_entered);
    CHECK(report.stays_inside);
    CHECK(report.max_entry_time < 2.0);
    CHECK(report.max_radius_after_entry <= radius * (1.0 + 1e-9));
}

}  // TEST_SUITE("reduction")
