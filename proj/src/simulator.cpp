#include "shapetrack/simulator.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace shapetrack::sim {

namespace {

constexpr double kTwoPi = 2.0 * M_PI;

double wrap_angle(double a) {
    a = std::fmod(a, kTwoPi);
    return a < 0.0 ? a + kTwoPi : a;
}

void check_range(double lo, double hi, const char* what) {
    if (!(lo > 0.0) || !(hi >= lo)) {
        throw InvalidConfig(std::string("invalid size range for ") + what);
    }
}

/// Radial function of an axis-aligned rectangle with half-sizes (a, b).
double rect_radial(double a, double b, double theta) {
    const double c = std::abs(std::cos(theta));
    const double s = std::abs(std::sin(theta));
    const double ra = c > 1e-300 ? a / c : std::numeric_limits<double>::infinity();
    const double rb = s > 1e-300 ? b / s : std::numeric_limits<double>::infinity();
    return std::min(ra, rb);
}

}  // namespace

const char* to_string(ShapeClass c) {
    switch (c) {
        case ShapeClass::Circle: return "circle";
        case ShapeClass::Triangle: return "triangle";
        case ShapeClass::Rectangle: return "rectangle";
        case ShapeClass::Plus: return "plus";
    }
    return "?";
}

ShapeClass shape_class_from_string(const std::string& s) {
    if (s == "circle") return ShapeClass::Circle;
    if (s == "triangle") return ShapeClass::Triangle;
    if (s == "rectangle") return ShapeClass::Rectangle;
    if (s == "plus") return ShapeClass::Plus;
    throw InvalidConfig("unknown shape class: " + s);
}

ShapeSpec sample_shape(ShapeClass cls, Rng& rng, const SizeRanges& r) {
    auto uni = [&rng](double lo, double hi) {
        return std::uniform_real_distribution<double>(lo, hi)(rng);
    };
    ShapeSpec spec;
    spec.type = cls;
    switch (cls) {
        case ShapeClass::Circle:
            check_range(r.circle_radius_lo, r.circle_radius_hi, "circle radius");
            spec.a = uni(r.circle_radius_lo, r.circle_radius_hi);
            break;
        case ShapeClass::Triangle:
            check_range(r.tri_circumradius_lo, r.tri_circumradius_hi, "triangle circumradius");
            spec.a = uni(r.tri_circumradius_lo, r.tri_circumradius_hi);
            break;
        case ShapeClass::Rectangle:
            check_range(r.rect_half_lo, r.rect_half_hi, "rectangle half-size");
            spec.a = uni(r.rect_half_lo, r.rect_half_hi);
            spec.b = uni(r.rect_half_lo, r.rect_half_hi);
            break;
        case ShapeClass::Plus:
            check_range(r.plus_arm_lo, r.plus_arm_hi, "plus arm half-length");
            check_range(r.plus_thickness_frac_lo, r.plus_thickness_frac_hi,
                        "plus thickness fraction");
            if (r.plus_thickness_frac_hi >= 1.0) {
                throw InvalidConfig("plus thickness fraction must stay below 1");
            }
            spec.a = uni(r.plus_arm_lo, r.plus_arm_hi);
            spec.b = spec.a * uni(r.plus_thickness_frac_lo, r.plus_thickness_frac_hi);
            break;
    }
    return spec;
}

double radial_true(const ShapeSpec& shape, double theta) {
    const double th = wrap_angle(theta);
    switch (shape.type) {
        case ShapeClass::Circle:
            return shape.a;
        case ShapeClass::Rectangle:
            return rect_radial(shape.a, shape.b, th);
        case ShapeClass::Plus:
            // Union of the two constituent rectangles.
            return std::max(rect_radial(shape.a, shape.b, th),
                            rect_radial(shape.b, shape.a, th));
        case ShapeClass::Triangle: {
            // Equilateral triangle, vertex at body angle 0, centroid at the
            // origin. Each edge line sits at the inradius R/2 with outward
            // normals at pi/3, pi, 5pi/3.
            const double inradius = shape.a / 2.0;
            double best = std::numeric_limits<double>::infinity();
            for (double normal : {M_PI / 3.0, M_PI, 5.0 * M_PI / 3.0}) {
                const double c = std::cos(th - normal);
                if (c > 1e-12) best = std::min(best, inradius / c);
            }
            return best;
        }
    }
    return shape.a;
}

geom::Polygon shape_outline(const ShapeSpec& shape) {
    using geom::Point2;
    std::vector<Point2> v;
    switch (shape.type) {
        case ShapeClass::Circle: {
            // Fine polygonization; only used for containment-style checks.
            const int n = 720;
            for (int i = 0; i < n; ++i) {
                const double t = kTwoPi * i / n;
                v.push_back(geom::polar_dir(t) * shape.a);
            }
            break;
        }
        case ShapeClass::Triangle:
            for (double t : {0.0, kTwoPi / 3.0, 2.0 * kTwoPi / 3.0}) {
                v.push_back(geom::polar_dir(t) * shape.a);
            }
            break;
        case ShapeClass::Rectangle:
            v = {{shape.a, -shape.b}, {shape.a, shape.b}, {-shape.a, shape.b},
                 {-shape.a, -shape.b}};
            break;
        case ShapeClass::Plus: {
            const double a = shape.a, b = shape.b;
            v = {{a, -b}, {a, b}, {b, b}, {b, a}, {-b, a}, {-b, b},
                 {-a, b}, {-a, -b}, {-b, -b}, {-b, -a}, {b, -a}, {b, -b}};
            break;
        }
    }
    return geom::Polygon(std::move(v));
}

Scan simulate_scan(const ShapeSpec& shape, const ObjectPose& pose, int n_meas,
                   double noise_std, Rng& rng, int time_index) {
    Scan scan;
    scan.time_index = time_index;
    scan.measurements.reserve(static_cast<std::size_t>(std::max(n_meas, 0)));
    std::uniform_real_distribution<double> angle(0.0, kTwoPi);
    std::normal_distribution<double> noise(0.0, noise_std > 0.0 ? noise_std : 1.0);
    for (int i = 0; i < n_meas; ++i) {
        const double theta = angle(rng);
        const double r = radial_true(shape, theta);
        Point2 z = pose.center + geom::polar_dir(theta + pose.orientation) * r;
        if (noise_std > 0.0) {
            z.x += noise(rng);
            z.y += noise(rng);
        }
        scan.measurements.push_back(z);
    }
    return scan;
}

Scenario simulate_scenario(ShapeClass cls, const SimConfig& cfg, std::uint64_t seed) {
    if (cfg.n_steps < 1) throw InvalidConfig("n_steps must be >= 1");
    if (!(cfg.dt > 0.0)) throw InvalidConfig("dt must be positive");
    if (!(cfg.meas_rate > 0.0)) throw InvalidConfig("meas_rate must be positive");
    if (!(cfg.noise_std > 0.0)) throw InvalidConfig("noise_std must be positive");
    if (cfg.dropout_prob < 0.0 || cfg.dropout_prob > 1.0) {
        throw InvalidConfig("dropout_prob must lie in [0, 1]");
    }

    Rng rng(seed);
    Scenario sc;
    sc.dt = cfg.dt;
    sc.noise_std = cfg.noise_std;
    sc.rng_seed = seed;
    sc.config = cfg;
    sc.shape = sample_shape(cls, rng, cfg.ranges);

    ObjectPose pose;
    pose.orientation = std::uniform_real_distribution<double>(0.0, kTwoPi)(rng);
    if (cfg.init_velocity) {
        pose.velocity = *cfg.init_velocity;
    } else {
        std::normal_distribution<double> v(0.0, cfg.init_speed_std);
        pose.velocity = {v(rng), v(rng)};
    }

    std::poisson_distribution<int> count(cfg.meas_rate);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    std::normal_distribution<double> accel(0.0, cfg.accel_noise_std);
    std::normal_distribution<double> walk(0.0, cfg.orient_walk_std);

    sc.poses.reserve(static_cast<std::size_t>(cfg.n_steps));
    sc.scans.reserve(static_cast<std::size_t>(cfg.n_steps));
    for (int k = 0; k < cfg.n_steps; ++k) {
        sc.poses.push_back(pose);
        const bool dropout = cfg.dropout_prob > 0.0 && unit(rng) < cfg.dropout_prob;
        const int n = dropout ? 0 : std::max(1, count(rng));
        sc.scans.push_back(simulate_scan(sc.shape, pose, n, cfg.noise_std, rng, k));

        // Nearly-constant velocity plus orientation random walk.
        const double dt = cfg.dt;
        Point2 a{0.0, 0.0};
        if (cfg.accel_noise_std > 0.0) a = {accel(rng), accel(rng)};
        pose.center = pose.center + pose.velocity * dt + a * (0.5 * dt * dt);
        pose.velocity = pose.velocity + a * dt;
        double dpsi = 0.0;
        if (cfg.orient_walk_std > 0.0) dpsi = walk(rng);
        pose.orientation = wrap_angle(pose.orientation + dpsi);
    }
    return sc;
}

}  // namespace shapetrack::sim
