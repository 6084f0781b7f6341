#pragma once

#include <string>
#include <vector>

#include "shapetrack/geometry.hpp"
#include "shapetrack/nn.hpp"

namespace shapetrack::svg {

/// Contour estimate (closed path, first point repeated before Z) over
/// measurement crosses; optional dashed reference outline.
std::string contour_svg(const std::vector<geom::Point2>& measurements,
                        const geom::Polygon& estimate,
                        const geom::Polygon* reference = nullptr);

/// Training and validation loss per epoch, with the best epoch marked.
std::string training_curves_svg(const nn::TrainReport& report);

}  // namespace shapetrack::svg
