#include "shapetrack/svg.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <sstream>

#include "shapetrack/errors.hpp"

namespace shapetrack::svg {

namespace {

std::string num(double v) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.6g", v);
    return buf;
}

struct Frame {
    double x0, y0, x1, y1;  // data bounds
    double px, py, pw, ph;  // pixel viewport
    double sx(double x) const { return px + (x - x0) / (x1 - x0) * pw; }
    double sy(double y) const { return py + (y1 - y) / (y1 - y0) * ph; }  // y grows up
};

void expand(double& lo, double& hi, double v) {
    lo = std::min(lo, v);
    hi = std::max(hi, v);
}

std::string polygon_path(const geom::Polygon& poly, const Frame& f) {
    const auto& v = poly.vertices();
    std::ostringstream d;
    d << "M " << num(f.sx(v.front().x)) << ' ' << num(f.sy(v.front().y));
    for (std::size_t i = 1; i < v.size(); ++i) {
        d << " L " << num(f.sx(v[i].x)) << ' ' << num(f.sy(v[i].y));
    }
    // Repeat the first point so the path closes point-wise as well as via Z.
    d << " L " << num(f.sx(v.front().x)) << ' ' << num(f.sy(v.front().y)) << " Z";
    return d.str();
}

std::string polyline(const std::vector<double>& ys, const Frame& f) {
    std::ostringstream d;
    for (std::size_t i = 0; i < ys.size(); ++i) {
        d << (i == 0 ? "" : " ") << num(f.sx(static_cast<double>(i))) << ','
          << num(f.sy(ys[i]));
    }
    return d.str();
}

}  // namespace

std::string contour_svg(const std::vector<geom::Point2>& measurements,
                        const geom::Polygon& estimate, const geom::Polygon* reference) {
    double x0 = 1e300, y0 = 1e300, x1 = -1e300, y1 = -1e300;
    for (const auto& p : estimate.vertices()) {
        expand(x0, x1, p.x);
        expand(y0, y1, p.y);
    }
    for (const auto& p : measurements) {
        expand(x0, x1, p.x);
        expand(y0, y1, p.y);
    }
    if (reference != nullptr) {
        for (const auto& p : reference->vertices()) {
            expand(x0, x1, p.x);
            expand(y0, y1, p.y);
        }
    }
    const double span = std::max({x1 - x0, y1 - y0, 1e-6});
    const double cx = (x0 + x1) / 2, cy = (y0 + y1) / 2;
    const double half = span / 2 * 1.1;
    const Frame f{cx - half, cy - half, cx + half, cy + half, 20, 20, 600, 600};

    std::ostringstream out;
    out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"640\" height=\"640\" "
           "viewBox=\"0 0 640 640\">\n";
    out << "<rect width=\"640\" height=\"640\" fill=\"white\"/>\n";
    const double r = 3.0;
    for (const auto& p : measurements) {
        const double x = f.sx(p.x), y = f.sy(p.y);
        out << "<path d=\"M " << num(x - r) << ' ' << num(y - r) << " L " << num(x + r)
            << ' ' << num(y + r) << " M " << num(x - r) << ' ' << num(y + r) << " L "
            << num(x + r) << ' ' << num(y - r)
            << "\" stroke=\"#999999\" stroke-width=\"1\" fill=\"none\"/>\n";
    }
    if (reference != nullptr) {
        out << "<path d=\"" << polygon_path(*reference, f)
            << "\" stroke=\"#2a7e2a\" stroke-width=\"1.5\" stroke-dasharray=\"6 4\" "
               "fill=\"none\"/>\n";
    }
    out << "<path d=\"" << polygon_path(estimate, f)
        << "\" stroke=\"#c0392b\" stroke-width=\"2\" fill=\"none\"/>\n";
    out << "</svg>\n";
    return out.str();
}

std::string training_curves_svg(const nn::TrainReport& report) {
    if (report.train_loss.empty()) throw InvalidConfig("empty training report");
    double lo = 1e300, hi = -1e300;
    for (double v : report.train_loss) expand(lo, hi, v);
    for (double v : report.val_loss) expand(lo, hi, v);
    if (hi <= lo) hi = lo + 1e-12;
    const auto n = static_cast<double>(report.train_loss.size());
    const Frame f{0, lo, std::max(n - 1, 1.0), hi, 60, 20, 620, 400};

    std::ostringstream out;
    out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"720\" height=\"480\" "
           "viewBox=\"0 0 720 480\">\n";
    out << "<rect width=\"720\" height=\"480\" fill=\"white\"/>\n";
    out << "<rect x=\"60\" y=\"20\" width=\"620\" height=\"400\" fill=\"none\" "
           "stroke=\"#333333\"/>\n";
    out << "<polyline points=\"" << polyline(report.train_loss, f)
        << "\" stroke=\"#1f77b4\" stroke-width=\"1.5\" fill=\"none\"/>\n";
    out << "<polyline points=\"" << polyline(report.val_loss, f)
        << "\" stroke=\"#d62728\" stroke-width=\"1.5\" fill=\"none\"/>\n";
    if (report.best_epoch >= 0) {
        const double bx = f.sx(report.best_epoch);
        out << "<line x1=\"" << num(bx) << "\" y1=\"20\" x2=\"" << num(bx)
            << "\" y2=\"420\" stroke=\"#2ca02c\" stroke-dasharray=\"4 4\"/>\n";
    }
    out << "<text x=\"370\" y=\"460\" text-anchor=\"middle\" font-size=\"14\">epoch</text>\n";
    out << "<text x=\"20\" y=\"220\" font-size=\"14\" transform=\"rotate(-90 20 220)\" "
           "text-anchor=\"middle\">loss</text>\n";
    out << "<text x=\"80\" y=\"40\" font-size=\"13\" fill=\"#1f77b4\">train loss</text>\n";
    out << "<text x=\"80\" y=\"58\" font-size=\"13\" fill=\"#d62728\">validation loss</text>\n";
    out << "</svg>\n";
    return out.str();
}

}  // namespace shapetrack::svg
