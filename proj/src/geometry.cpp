#include "shapetrack/geometry.hpp"

#include <algorithm>
#include <limits>
#include <random>

namespace shapetrack::geom {

namespace {

double signed_area(const std::vector<Point2>& v) {
    double a = 0.0;
    const std::size_t n = v.size();
    for (std::size_t i = 0; i < n; ++i) {
        const Point2& p = v[i];
        const Point2& q = v[(i + 1) % n];
        a += p.x * q.y - q.x * p.y;
    }
    return 0.5 * a;
}

}  // namespace

Polygon::Polygon(std::vector<Point2> vertices) : verts_(std::move(vertices)) {
    if (verts_.size() < 3) {
        throw DegenerateInput("polygon needs at least 3 vertices");
    }
    const std::size_t n = verts_.size();
    for (std::size_t i = 0; i < n; ++i) {
        const Point2& p = verts_[i];
        if (!std::isfinite(p.x) || !std::isfinite(p.y)) {
            throw DegenerateInput("polygon vertex is not finite");
        }
        if (p == verts_[(i + 1) % n]) {
            throw DegenerateInput("polygon has equal consecutive vertices");
        }
    }
    const double a = signed_area(verts_);
    if (a == 0.0) {
        throw DegenerateInput("polygon has zero signed area");
    }
    if (a < 0.0) {
        std::reverse(verts_.begin(), verts_.end());
    }
}

bool BoundingRect::contains(const Point2& p, double tol) const {
    const Point2 d = p - center;
    const Point2 u = polar_dir(angle);
    const double along = dot(d, u);
    const double across = cross(u, d);
    return std::abs(along) <= half_major + tol && std::abs(across) <= half_minor + tol;
}

double polygon_area(const Polygon& poly) { return signed_area(poly.vertices()); }

double polygon_perimeter(const Polygon& poly) {
    const auto& v = poly.vertices();
    double p = 0.0;
    for (std::size_t i = 0; i < v.size(); ++i) {
        p += distance(v[i], v[(i + 1) % v.size()]);
    }
    return p;
}

Polygon convex_hull(const std::vector<Point2>& points) {
    std::vector<Point2> pts = points;
    std::sort(pts.begin(), pts.end(), [](const Point2& a, const Point2& b) {
        return a.x < b.x || (a.x == b.x && a.y < b.y);
    });
    pts.erase(std::unique(pts.begin(), pts.end()), pts.end());
    if (pts.size() < 3) {
        throw DegenerateInput("convex hull needs at least 3 distinct points");
    }

    // Monotone chain; the strict inequality drops collinear boundary points.
    const std::size_t n = pts.size();
    std::vector<Point2> hull(2 * n);
    std::size_t k = 0;
    for (std::size_t i = 0; i < n; ++i) {
        while (k >= 2 && cross(hull[k - 1] - hull[k - 2], pts[i] - hull[k - 2]) <= 0.0) --k;
        hull[k++] = pts[i];
    }
    const std::size_t lower = k + 1;
    for (std::size_t i = n - 1; i-- > 0;) {
        while (k >= lower && cross(hull[k - 1] - hull[k - 2], pts[i] - hull[k - 2]) <= 0.0) --k;
        hull[k++] = pts[i];
    }
    hull.resize(k - 1);
    if (hull.size() < 3) {
        throw DegenerateInput("all points are collinear");
    }
    return Polygon(std::move(hull));
}

BoundingRect min_area_rect(const std::vector<Point2>& points) {
    const Polygon hull = convex_hull(points);
    const auto& v = hull.vertices();
    const std::size_t n = v.size();

    double best_area = std::numeric_limits<double>::infinity();
    double best_angle = 0.0;
    BoundingRect best;

    for (std::size_t i = 0; i < n; ++i) {
        const Point2 e = v[(i + 1) % n] - v[i];
        double ang = std::atan2(e.y, e.x);
        // Rectangle orientation is only meaningful mod pi/2.
        ang = std::fmod(ang, M_PI / 2.0);
        if (ang < 0.0) ang += M_PI / 2.0;
        const Point2 u = polar_dir(ang);
        const Point2 w{-u.y, u.x};

        double lo_u = std::numeric_limits<double>::infinity(), hi_u = -lo_u;
        double lo_w = lo_u, hi_w = -lo_u;
        for (const Point2& p : v) {
            lo_u = std::min(lo_u, dot(p, u));
            hi_u = std::max(hi_u, dot(p, u));
            lo_w = std::min(lo_w, dot(p, w));
            hi_w = std::max(hi_w, dot(p, w));
        }
        const double du = hi_u - lo_u, dw = hi_w - lo_w;
        const double area = du * dw;

        double half_major = du / 2.0, half_minor = dw / 2.0;
        double angle = ang;
        if (half_major < half_minor) {
            std::swap(half_major, half_minor);
            angle = ang + M_PI / 2.0;
        }
        if (angle >= M_PI) angle -= M_PI;

        const bool better =
            area < best_area * (1.0 - 1e-14) ||
            (area <= best_area * (1.0 + 1e-14) && angle < best_angle);
        if (better) {
            const double cu = (lo_u + hi_u) / 2.0, cw = (lo_w + hi_w) / 2.0;
            best_area = area;
            best_angle = angle;
            best.center = u * cu + w * cw;
            best.half_major = half_major;
            best.half_minor = half_minor;
            best.angle = angle;
        }
    }
    return best;
}

namespace {

Circle circle_from(const Point2& a, const Point2& b) {
    const Point2 c = (a + b) * 0.5;
    return {c, distance(a, c)};
}

// Circumcircle; falls back to the widest diametral pair when near-collinear.
Circle circle_from(const Point2& a, const Point2& b, const Point2& c) {
    const double d = 2.0 * (a.x * (b.y - c.y) + b.x * (c.y - a.y) + c.x * (a.y - b.y));
    if (std::abs(d) < 1e-300) {
        Circle best = circle_from(a, b);
        for (const Circle& cand : {circle_from(a, c), circle_from(b, c)}) {
            if (cand.radius > best.radius) best = cand;
        }
        return best;
    }
    const double a2 = a.x * a.x + a.y * a.y;
    const double b2 = b.x * b.x + b.y * b.y;
    const double c2 = c.x * c.x + c.y * c.y;
    const Point2 center{(a2 * (b.y - c.y) + b2 * (c.y - a.y) + c2 * (a.y - b.y)) / d,
                        (a2 * (c.x - b.x) + b2 * (a.x - c.x) + c2 * (b.x - a.x)) / d};
    return {center, distance(a, center)};
}

bool in_circle(const Circle& c, const Point2& p) {
    // Relative slack keeps the recursion stable for cocircular inputs.
    return distance(c.center, p) <= c.radius * (1.0 + 1e-12) + 1e-14;
}

}  // namespace

Circle min_enclosing_circle(const std::vector<Point2>& points) {
    if (points.empty()) {
        throw DegenerateInput("minimum enclosing circle of empty set");
    }
    std::vector<Point2> pts = points;
    // Deterministic shuffle gives Welzl its expected linear time.
    std::shuffle(pts.begin(), pts.end(), std::mt19937_64(0x5eed5eedULL));

    Circle c{pts[0], 0.0};
    for (std::size_t i = 1; i < pts.size(); ++i) {
        if (in_circle(c, pts[i])) continue;
        c = {pts[i], 0.0};
        for (std::size_t j = 0; j < i; ++j) {
            if (in_circle(c, pts[j])) continue;
            c = circle_from(pts[i], pts[j]);
            for (std::size_t k = 0; k < j; ++k) {
                if (in_circle(c, pts[k])) continue;
                c = circle_from(pts[i], pts[j], pts[k]);
            }
        }
    }
    return c;
}

Polygon contour_to_polygon(const std::vector<double>& radii,
                           const std::vector<double>& basis_angles,
                           const Point2& center, double orientation) {
    if (radii.size() != basis_angles.size()) {
        throw DimensionMismatch("radii / basis angle count mismatch");
    }
    std::vector<Point2> verts;
    verts.reserve(radii.size());
    for (std::size_t i = 0; i < radii.size(); ++i) {
        if (!(radii[i] > 0.0)) {
            throw NonPositiveRadius("contour radius must be positive");
        }
        verts.push_back(center + polar_dir(basis_angles[i] + orientation) * radii[i]);
    }
    return Polygon(std::move(verts));
}

bool convex_contains(const Polygon& hull, const Point2& p, double tol) {
    const auto& v = hull.vertices();
    const std::size_t n = v.size();
    for (std::size_t i = 0; i < n; ++i) {
        const Point2 e = v[(i + 1) % n] - v[i];
        const double elen = e.norm();
        if (cross(e, p - v[i]) < -tol * elen) return false;
    }
    return true;
}

}  // namespace shapetrack::geom
