#pragma once

#include <Eigen/Dense>

#include "shapetrack/errors.hpp"
#include "shapetrack/geometry.hpp"
#include "shapetrack/gp_ett.hpp"

namespace shapetrack::feat {

inline constexpr int kFeatureDim = 6;

/// Six shape descriptors in the fixed serialization order below.
struct FeatureVector {
    double elongation = 1.0;      // major/minor axis of the min-area rectangle, >= 1
    double rectangularity = 1.0;  // area / min-rect area, in (0, 1]
    double circularity = 1.0;     // area / min-enclosing-circle area, in (0, 1]
    double solidity = 1.0;        // area / convex-hull area, in (0, 1]
    double compactness = 0.0;     // 1 - 4 pi a / p^2, in [0, 1)
    double area = 0.0;            // m^2, > 0

    Eigen::Matrix<double, kFeatureDim, 1> to_vector() const;
    static FeatureVector from_vector(const Eigen::Matrix<double, kFeatureDim, 1>& v);
};

/// First two moments of the descriptor vector under contour uncertainty.
struct FeatureDistribution {
    Eigen::Matrix<double, kFeatureDim, 1> mean;
    Eigen::Matrix<double, kFeatureDim, kFeatureDim> cov;  // symmetric PSD
};

struct UtParams {
    double alpha = 1e-3;
    double beta = 2.0;
    double kappa = 0.0;
};

/// Descriptors of the polygon obtained from the radial contour estimate.
/// Radii <= 0 are clamped to 1e-3 m first; if every radius is non-positive
/// the estimate carries no shape and DegenerateContour is thrown.
FeatureVector extract_features(const gp::Contour& contour, const geom::Point2& center,
                               double orientation);

/// Convenience overload for raw polygons (oracle fixtures, dense sampling).
FeatureVector extract_features(const geom::Polygon& polygon);

/// Scaled unscented transform of the radial state through extract_features.
/// 2N+1 sigma points; failing points are dropped with weight renormalization,
/// and more than half failing raises DegenerateContour. The output covariance
/// is floored to PSD by clamping eigenvalues at 1e-12.
FeatureDistribution ut_propagate(const gp::Contour& contour, const geom::Point2& center,
                                 double orientation, const UtParams& params = {});

}  // namespace shapetrack::feat
