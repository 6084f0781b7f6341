#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>

#include "shapetrack/simulator.hpp"

using namespace shapetrack;
using sim::ShapeClass;

TEST_CASE("shape class names round-trip") {
    for (int c = 0; c < sim::kNumClasses; ++c) {
        const auto cls = static_cast<ShapeClass>(c);
        CHECK(sim::shape_class_from_string(sim::to_string(cls)) == cls);
    }
    CHECK_THROWS_AS(sim::shape_class_from_string("hexagon"), InvalidConfig);
}

TEST_CASE("sample_shape honors the configured ranges") {
    sim::Rng rng(42);
    const sim::SizeRanges ranges;
    for (int i = 0; i < 1000; ++i) {
        const auto cls = static_cast<ShapeClass>(i % sim::kNumClasses);
        const sim::ShapeSpec spec = sim::sample_shape(cls, rng, ranges);
        CHECK(spec.type == cls);
        CHECK(spec.a > 0.0);
        switch (cls) {
            case ShapeClass::Circle:
                CHECK(spec.a >= ranges.circle_radius_lo);
                CHECK(spec.a <= ranges.circle_radius_hi);
                break;
            case ShapeClass::Triangle:
                CHECK(spec.a >= ranges.tri_circumradius_lo);
                CHECK(spec.a <= ranges.tri_circumradius_hi);
                break;
            case ShapeClass::Rectangle:
                CHECK(spec.a >= ranges.rect_half_lo);
                CHECK(spec.a <= ranges.rect_half_hi);
                CHECK(spec.b >= ranges.rect_half_lo);
                CHECK(spec.b <= ranges.rect_half_hi);
                break;
            case ShapeClass::Plus:
                CHECK(spec.a >= ranges.plus_arm_lo);
                CHECK(spec.a <= ranges.plus_arm_hi);
                CHECK(spec.b < spec.a);
                CHECK(spec.b >= ranges.plus_thickness_frac_lo * spec.a);
                CHECK(spec.b <= ranges.plus_thickness_frac_hi * spec.a);
                break;
        }
    }
}

TEST_CASE("sample_shape rejects invariant-breaking ranges") {
    sim::Rng rng(1);
    sim::SizeRanges bad;
    bad.circle_radius_lo = -1.0;
    CHECK_THROWS_AS(sim::sample_shape(ShapeClass::Circle, rng, bad), InvalidConfig);

    sim::SizeRanges flipped;
    flipped.rect_half_lo = 3.0;
    flipped.rect_half_hi = 1.0;
    CHECK_THROWS_AS(sim::sample_shape(ShapeClass::Rectangle, rng, flipped), InvalidConfig);
}

TEST_CASE("radial_true is positive, periodic and matches closed forms") {
    const sim::ShapeSpec circle{ShapeClass::Circle, 1.7, 0.0};
    const sim::ShapeSpec rect{ShapeClass::Rectangle, 2.0, 1.0};
    const sim::ShapeSpec plus{ShapeClass::Plus, 2.0, 0.5};

    CHECK(sim::radial_true(circle, 0.3) == doctest::Approx(1.7));
    CHECK(sim::radial_true(rect, 0.0) == doctest::Approx(2.0));
    CHECK(sim::radial_true(rect, M_PI / 2) == doctest::Approx(1.0));
    CHECK(sim::radial_true(rect, M_PI / 4) == doctest::Approx(std::sqrt(2.0)));
    CHECK(sim::radial_true(plus, 0.0) == doctest::Approx(2.0));
    CHECK(sim::radial_true(plus, M_PI / 4) == doctest::Approx(0.5 * std::sqrt(2.0)));

    for (const auto& spec : {circle, rect, plus}) {
        for (int i = 0; i < 400; ++i) {
            const double theta = 2.0 * M_PI * i / 400.0 - M_PI;
            const double r = sim::radial_true(spec, theta);
            CHECK(r > 0.0);
            CHECK(r == doctest::Approx(sim::radial_true(spec, theta + 2.0 * M_PI))
                           .epsilon(1e-12));
        }
    }
}

TEST_CASE("shape_outline vertices sit at the true radial distance") {
    const sim::ShapeSpec tri{ShapeClass::Triangle, 1.5, 0.0};
    const geom::Polygon outline = sim::shape_outline(tri);
    REQUIRE(outline.size() == 3);
    for (const auto& v : outline.vertices()) {
        const double theta = std::atan2(v.y, v.x);
        CHECK(v.norm() == doctest::Approx(sim::radial_true(tri, theta)).epsilon(1e-9));
    }
    // circumradius vertex at body angle zero
    CHECK(outline[0].x == doctest::Approx(1.5));
    CHECK(outline[0].y == doctest::Approx(0.0).scale(1.0));

    const sim::ShapeSpec plus{ShapeClass::Plus, 2.0, 0.5};
    CHECK(sim::shape_outline(plus).size() == 12);
}

TEST_CASE("simulate_scan pushes contour points through the pose") {
    const sim::ShapeSpec rect{ShapeClass::Rectangle, 2.0, 1.0};
    const sim::ObjectPose pose{{3.0, -1.0}, {0.0, 0.0}, 0.7};
    sim::Rng rng(9);
    const sim::Scan scan = sim::simulate_scan(rect, pose, 64, 1e-12, rng, 5);

    CHECK(scan.time_index == 5);
    CHECK(scan.measurements.size() == 64);
    for (const auto& z : scan.measurements) {
        const double dx = z.x - pose.center.x;
        const double dy = z.y - pose.center.y;
        const double body = std::atan2(dy, dx) - pose.orientation;
        const double r = std::hypot(dx, dy);
        CHECK(r == doctest::Approx(sim::radial_true(rect, body)).epsilon(1e-6));
    }
}

TEST_CASE("deterministic constant-velocity motion without process noise") {
    sim::SimConfig config;
    config.n_steps = 5;
    config.dt = 1.0;
    config.accel_noise_std = 0.0;
    config.orient_walk_std = 0.0;
    config.init_velocity = geom::Point2{1.0, 0.0};

    const sim::Scenario sc = sim::simulate_scenario(ShapeClass::Circle, config, 77);
    REQUIRE(sc.poses.size() == 5);
    const double x0 = sc.poses[0].center.x;
    for (int k = 0; k < 5; ++k) {
        CHECK(sc.poses[k].center.x == doctest::Approx(x0 + k).epsilon(1e-12));
        CHECK(sc.poses[k].center.y == doctest::Approx(sc.poses[0].center.y));
        CHECK(sc.poses[k].velocity.x == doctest::Approx(1.0));
        CHECK(sc.poses[k].orientation ==
              doctest::Approx(sc.poses[0].orientation).epsilon(1e-12));
    }
}

TEST_CASE("single-step scenario carries one pose and one scan") {
    sim::SimConfig config;
    config.n_steps = 1;
    const sim::Scenario sc = sim::simulate_scenario(ShapeClass::Triangle, config, 3);
    CHECK(sc.poses.size() == 1);
    CHECK(sc.scans.size() == 1);
    CHECK_FALSE(sc.scans[0].measurements.empty());
    CHECK(sc.poses[0].orientation >= 0.0);
    CHECK(sc.poses[0].orientation < 2.0 * M_PI);
}

TEST_CASE("fixed seed reproduces a bit-identical scenario") {
    sim::SimConfig config;
    config.dropout_prob = 0.3;
    const sim::Scenario a = sim::simulate_scenario(ShapeClass::Plus, config, 12345);
    const sim::Scenario b = sim::simulate_scenario(ShapeClass::Plus, config, 12345);

    REQUIRE(a.poses.size() == b.poses.size());
    REQUIRE(a.scans.size() == b.scans.size());
    CHECK(a.shape.a == b.shape.a);
    CHECK(a.shape.b == b.shape.b);
    for (std::size_t k = 0; k < a.scans.size(); ++k) {
        CHECK(a.poses[k].center == b.poses[k].center);
        CHECK(a.poses[k].orientation == b.poses[k].orientation);
        REQUIRE(a.scans[k].measurements.size() == b.scans[k].measurements.size());
        for (std::size_t i = 0; i < a.scans[k].measurements.size(); ++i)
            CHECK(a.scans[k].measurements[i] == b.scans[k].measurements[i]);
    }

    const sim::Scenario c = sim::simulate_scenario(ShapeClass::Plus, config, 12346);
    CHECK(a.shape.a != c.shape.a);
}

TEST_CASE("poisson floor keeps every scan non-empty without dropout") {
    sim::SimConfig config;
    config.meas_rate = 0.05;
    config.n_steps = 200;
    const sim::Scenario sc = sim::simulate_scenario(ShapeClass::Circle, config, 8);
    for (const auto& scan : sc.scans) CHECK(scan.measurements.size() >= 1);
}

TEST_CASE("dropout steps carry empty scans") {
    sim::SimConfig config;
    config.dropout_prob = 1.0;
    const sim::Scenario sc = sim::simulate_scenario(ShapeClass::Rectangle, config, 4);
    for (const auto& scan : sc.scans) CHECK(scan.measurements.empty());

    config.dropout_prob = 0.5;
    config.n_steps = 400;
    const sim::Scenario half = sim::simulate_scenario(ShapeClass::Rectangle, config, 4);
    int empty = 0;
    for (const auto& scan : half.scans) empty += scan.measurements.empty();
    CHECK(empty > 120);
    CHECK(empty < 280);
}

TEST_CASE("invalid simulator configuration is rejected") {
    sim::SimConfig config;
    config.dt = 0.0;
    CHECK_THROWS_AS(sim::simulate_scenario(ShapeClass::Circle, config, 1), InvalidConfig);

    sim::SimConfig rate;
    rate.meas_rate = -2.0;
    CHECK_THROWS_AS(sim::simulate_scenario(ShapeClass::Circle, rate, 1), InvalidConfig);

    sim::SimConfig steps;
    steps.n_steps = 0;
    CHECK_THROWS_AS(sim::simulate_scenario(ShapeClass::Circle, steps, 1), InvalidConfig);
}
