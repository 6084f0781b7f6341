#pragma once

#include <cstdint>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "shapetrack/geometry.hpp"

namespace shapetrack::sim {

using geom::Point2;

enum class ShapeClass { Circle, Triangle, Rectangle, Plus };

constexpr int kNumClasses = 4;

const char* to_string(ShapeClass c);
ShapeClass shape_class_from_string(const std::string& s);

/// Class plus its size parameters.
///   Circle:    a = radius
///   Triangle:  a = circumradius (equilateral, centered at its centroid)
///   Rectangle: a = half-width, b = half-height
///   Plus:      a = arm half-length, b = arm half-thickness (b < a)
struct ShapeSpec {
    ShapeClass type = ShapeClass::Circle;
    double a = 1.0;
    double b = 0.0;
};

struct ObjectPose {
    Point2 center;
    Point2 velocity;
    double orientation = 0.0;  // wrapped to [0, 2pi)
};

struct Scan {
    int time_index = 0;
    std::vector<Point2> measurements;
};

/// Uniform size-parameter ranges used by sample_shape. The plus thickness is
/// drawn as a fraction of the arm half-length so the thickness < length
/// invariant holds by construction.
struct SizeRanges {
    double circle_radius_lo = 0.5, circle_radius_hi = 2.0;
    double rect_half_lo = 0.5, rect_half_hi = 2.0;
    double tri_circumradius_lo = 0.7, tri_circumradius_hi = 2.5;
    double plus_arm_lo = 0.8, plus_arm_hi = 2.0;
    double plus_thickness_frac_lo = 0.2, plus_thickness_frac_hi = 0.5;
};

struct SimConfig {
    int n_steps = 50;
    double dt = 0.1;              // s
    double meas_rate = 20.0;      // mean measurements per scan
    double noise_std = 0.02;      // m
    double accel_noise_std = 0.1;     // m/s^2, nearly-constant-velocity motion
    double orient_walk_std = 0.01;    // rad per step
    double dropout_prob = 0.0;        // per-step chance of an empty scan
    double init_speed_std = 0.3;      // m/s per axis, when init_velocity unset
    std::optional<Point2> init_velocity;
    SizeRanges ranges;
};

struct Scenario {
    ShapeSpec shape;
    std::vector<ObjectPose> poses;
    std::vector<Scan> scans;
    double dt = 0.1;
    double noise_std = 0.02;
    std::uint64_t rng_seed = 0;
    SimConfig config;
};

using Rng = std::mt19937_64;

/// Draw size parameters for `cls` from the configured uniform ranges.
/// Throws InvalidConfig if a range admits non-positive or invariant-breaking
/// sizes.
ShapeSpec sample_shape(ShapeClass cls, Rng& rng, const SizeRanges& ranges = {});

/// Distance from the shape center to the contour along body-frame angle
/// theta. Strictly positive and 2pi-periodic for every class.
double radial_true(const ShapeSpec& shape, double theta);

/// Exact corner outline of the shape in the body frame (no sampling error);
/// the triangle vertex sits at body angle 0.
geom::Polygon shape_outline(const ShapeSpec& shape);

/// One scan: source angles uniform in [0, 2pi) body frame, points on the
/// contour pushed through the pose, plus isotropic Gaussian noise.
Scan simulate_scan(const ShapeSpec& shape, const ObjectPose& pose, int n_meas,
                   double noise_std, Rng& rng, int time_index = 0);

/// Full scenario: random shape, random initial orientation in [0, 2pi),
/// nearly-constant-velocity translation with an orientation random walk,
/// Poisson measurement counts (floor 1) with optional dropout steps.
Scenario simulate_scenario(ShapeClass cls, const SimConfig& config, std::uint64_t seed);

}  // namespace shapetrack::sim
