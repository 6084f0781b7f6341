#pragma once

#include <cmath>
#include <vector>

#include "shapetrack/errors.hpp"

namespace shapetrack::geom {

struct Point2 {
    double x = 0.0;
    double y = 0.0;

    Point2() = default;
    Point2(double x_, double y_) : x(x_), y(y_) {}

    Point2 operator+(const Point2& o) const { return {x + o.x, y + o.y}; }
    Point2 operator-(const Point2& o) const { return {x - o.x, y - o.y}; }
    Point2 operator*(double s) const { return {x * s, y * s}; }
    bool operator==(const Point2& o) const { return x == o.x && y == o.y; }

    double norm() const { return std::hypot(x, y); }
};

inline double dot(const Point2& a, const Point2& b) { return a.x * b.x + a.y * b.y; }
inline double cross(const Point2& a, const Point2& b) { return a.x * b.y - a.y * b.x; }
inline double distance(const Point2& a, const Point2& b) { return (a - b).norm(); }

/// Unit direction vector at polar angle theta.
inline Point2 polar_dir(double theta) { return {std::cos(theta), std::sin(theta)}; }

/// Simple polygon with counter-clockwise vertex order.
///
/// Construction enforces the invariants: at least 3 vertices, no two
/// consecutive vertices equal, strictly positive signed area. Clockwise
/// input is reversed rather than rejected.
class Polygon {
public:
    explicit Polygon(std::vector<Point2> vertices);

    const std::vector<Point2>& vertices() const { return verts_; }
    std::size_t size() const { return verts_.size(); }
    const Point2& operator[](std::size_t i) const { return verts_[i]; }

private:
    std::vector<Point2> verts_;
};

/// Oriented rectangle; `angle` is the direction of the major axis in [0, pi).
struct BoundingRect {
    Point2 center;
    double half_major = 0.0;
    double half_minor = 0.0;
    double angle = 0.0;

    double area() const { return 4.0 * half_major * half_minor; }
    double elongation() const { return half_major / half_minor; }
    bool contains(const Point2& p, double tol = 0.0) const;
};

struct Circle {
    Point2 center;
    double radius = 0.0;

    double area() const { return M_PI * radius * radius; }
    bool contains(const Point2& p, double tol = 0.0) const {
        return distance(center, p) <= radius + tol;
    }
};

/// Shoelace area. Positive by the Polygon CCW invariant.
double polygon_area(const Polygon& poly);

/// Edge-length sum including the closing edge.
double polygon_perimeter(const Polygon& poly);

/// Smallest CCW convex polygon containing all input points (monotone chain).
/// Collinear boundary points are dropped; exact duplicates are removed first.
/// Throws DegenerateInput if fewer than 3 distinct points remain or all are
/// collinear.
Polygon convex_hull(const std::vector<Point2>& points);

/// Minimum-area enclosing rectangle via rotating calipers over the hull edges.
/// One side of the result is collinear with a hull edge; area ties are broken
/// by the smallest angle.
BoundingRect min_area_rect(const std::vector<Point2>& points);

/// Smallest enclosing circle (Welzl, move-to-front), determined by at most
/// three support points.
Circle min_enclosing_circle(const std::vector<Point2>& points);

/// Star-convex contour sampled at `basis_angles` turned into a polygon:
/// vertex j = center + polar_dir(basis_angles[j] + orientation) * radii[j].
/// Throws NonPositiveRadius if any radius <= 0; callers decide any clamping
/// policy before getting here.
Polygon contour_to_polygon(const std::vector<double>& radii,
                           const std::vector<double>& basis_angles,
                           const Point2& center, double orientation);

/// True if p lies inside or on the convex polygon (tolerance in meters).
bool convex_contains(const Polygon& hull, const Point2& p, double tol = 1e-9);

}  // namespace shapetrack::geom
