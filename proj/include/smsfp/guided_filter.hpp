#pragma once

#include "smsfp/raster.hpp"

namespace smsfp {

// Edge-preserving guided filter restricted to a pixel domain. Box statistics
// are gathered over stats_mask pixels only; output is produced for every
// domain pixel. With a constant guide this reduces to masked box smoothing.
RasterF guided_filter(const RasterF& input, const RasterF& guide, const MaskRaster& stats_mask,
                      const MaskRaster& domain, int radius, double eps);

// Masked box mean of one raster (helper shared with the filter; zero where the
// window contains no mask pixels).
RasterF box_mean(const RasterF& input, const MaskRaster& mask, int radius);

}  // namespace smsfp
