#include "shapetrack/features.hpp"

#include <cmath>
#include <vector>

namespace shapetrack::feat {

namespace {

constexpr double kRadiusFloor = 1e-3;

geom::Polygon sanitized_polygon(const Eigen::VectorXd& radii,
                                const Eigen::VectorXd& basis_angles,
                                const geom::Point2& center, double orientation) {
    if (radii.size() != basis_angles.size()) {
        throw DimensionMismatch("radii/basis size mismatch");
    }
    if ((radii.array() <= 0.0).all()) {
        throw DegenerateContour("all radial estimates non-positive");
    }
    std::vector<double> r(radii.data(), radii.data() + radii.size());
    for (double& v : r) {
        if (!(v > 0.0)) v = kRadiusFloor;
    }
    std::vector<double> angles(basis_angles.data(), basis_angles.data() + basis_angles.size());
    return geom::contour_to_polygon(r, angles, center, orientation);
}

}  // namespace

Eigen::Matrix<double, kFeatureDim, 1> FeatureVector::to_vector() const {
    Eigen::Matrix<double, kFeatureDim, 1> v;
    v << elongation, rectangularity, circularity, solidity, compactness, area;
    return v;
}

FeatureVector FeatureVector::from_vector(const Eigen::Matrix<double, kFeatureDim, 1>& v) {
    FeatureVector f;
    f.elongation = v(0);
    f.rectangularity = v(1);
    f.circularity = v(2);
    f.solidity = v(3);
    f.compactness = v(4);
    f.area = v(5);
    return f;
}

FeatureVector extract_features(const geom::Polygon& polygon) {
    const double a = geom::polygon_area(polygon);
    const double p = geom::polygon_perimeter(polygon);
    const geom::Polygon hull = geom::convex_hull(polygon.vertices());
    const geom::BoundingRect rect = geom::min_area_rect(hull.vertices());
    const geom::Circle circle = geom::min_enclosing_circle(polygon.vertices());

    FeatureVector f;
    f.elongation = rect.elongation();
    f.rectangularity = a / rect.area();
    f.circularity = a / (M_PI * circle.radius * circle.radius);
    f.solidity = a / geom::polygon_area(hull);
    f.compactness = 1.0 - 4.0 * M_PI * a / (p * p);
    f.area = a;
    if (!f.to_vector().allFinite()) {
        throw DegenerateContour("non-finite feature value");
    }
    return f;
}

FeatureVector extract_features(const gp::Contour& contour, const geom::Point2& center,
                               double orientation) {
    return extract_features(
        sanitized_polygon(contour.radii_mean, contour.basis_angles, center, orientation));
}

FeatureDistribution ut_propagate(const gp::Contour& contour, const geom::Point2& center,
                                 double orientation, const UtParams& params) {
    const int n = static_cast<int>(contour.radii_mean.size());
    if (contour.radii_cov.rows() != n || contour.radii_cov.cols() != n) {
        throw DimensionMismatch("radii_cov shape mismatch");
    }

    // Matrix square root; eigenvalue clamping covers covariances that are
    // PSD only up to roundoff.
    Eigen::MatrixXd sqrt_cov;
    {
        Eigen::LLT<Eigen::MatrixXd> llt(contour.radii_cov);
        if (llt.info() == Eigen::Success) {
            sqrt_cov = llt.matrixL();
        } else {
            Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(contour.radii_cov);
            const Eigen::VectorXd lam = es.eigenvalues().cwiseMax(0.0);
            sqrt_cov = es.eigenvectors() * lam.cwiseSqrt().asDiagonal();
        }
    }

    const double lambda =
        params.alpha * params.alpha * (n + params.kappa) - n;
    const double scale = std::sqrt(n + lambda);
    const double w_mean0 = lambda / (n + lambda);
    const double w_cov0 = w_mean0 + (1.0 - params.alpha * params.alpha + params.beta);
    const double w_i = 0.5 / (n + lambda);

    std::vector<Eigen::Matrix<double, kFeatureDim, 1>> points;
    std::vector<double> wm, wc;
    points.reserve(2 * n + 1);
    int failed = 0;

    gp::Contour sigma = contour;
    auto push = [&](const Eigen::VectorXd& radii, double w_m, double w_c) {
        sigma.radii_mean = radii;
        try {
            points.push_back(extract_features(sigma, center, orientation).to_vector());
            wm.push_back(w_m);
            wc.push_back(w_c);
        } catch (const Error&) {
            ++failed;
        }
    };

    push(contour.radii_mean, w_mean0, w_cov0);
    for (int j = 0; j < n; ++j) {
        const Eigen::VectorXd col = scale * sqrt_cov.col(j);
        push(contour.radii_mean + col, w_i, w_i);
        push(contour.radii_mean - col, w_i, w_i);
    }
    if (failed > n) {  // more than half of 2n+1
        throw DegenerateContour("unusable contour estimate: sigma points degenerate");
    }

    double wm_sum = 0.0, wc_sum = 0.0;
    for (double w : wm) wm_sum += w;
    for (double w : wc) wc_sum += w;
    const double wm_full = 1.0;
    const double wc_full = w_cov0 + 2.0 * n * w_i;
    if (failed > 0 && std::abs(wm_sum) > 1e-12) {
        for (double& w : wm) w *= wm_full / wm_sum;
        for (double& w : wc) w *= wc_full / wc_sum;
    }

    Eigen::Matrix<double, kFeatureDim, 1> mean = Eigen::Matrix<double, kFeatureDim, 1>::Zero();
    for (std::size_t i = 0; i < points.size(); ++i) mean += wm[i] * points[i];

    Eigen::Matrix<double, kFeatureDim, kFeatureDim> cov =
        Eigen::Matrix<double, kFeatureDim, kFeatureDim>::Zero();
    for (std::size_t i = 0; i < points.size(); ++i) {
        const Eigen::Matrix<double, kFeatureDim, 1> d = points[i] - mean;
        cov += wc[i] * (d * d.transpose());
    }
    cov = ((cov + cov.transpose()) * 0.5).eval();

    // PSD floor: the scaled UT's large negative center weight can push
    // eigenvalues below zero; clamp them to 1e-12 when that happens. An
    // already-PSD result (including exact zero) passes through untouched.
    Eigen::SelfAdjointEigenSolver<Eigen::Matrix<double, kFeatureDim, kFeatureDim>> es(cov);
    if (es.eigenvalues().minCoeff() < 0.0) {
        const Eigen::Matrix<double, kFeatureDim, 1> lam = es.eigenvalues().cwiseMax(1e-12);
        cov = es.eigenvectors() * lam.asDiagonal() * es.eigenvectors().transpose();
        cov = ((cov + cov.transpose()) * 0.5).eval();
    }

    FeatureDistribution out;
    out.mean = mean;
    out.cov = cov;
    return out;
}

}  // namespace shapetrack::feat
