#pragma once

#include "smsfp/polarimetry.hpp"
#include "smsfp/raster.hpp"
#include "smsfp/types.hpp"

// Straight-line serial implementations of the data-parallel kernels. They are
// the comparison baseline for the OpenMP builds (tests assert agreement, the
// bench target times both) and are not used by the pipeline itself.
namespace smsfp::reference {

PolarMaps decompose_stack(const PolarizedStack& stack);

RasterF synthesize_intensity(const PolarMaps& polar, double polarizer_angle);

RasterF aop_gradient_magnitude(const RasterF& aop, const MaskRaster& mask);

// Brute-force nearest boundary site search (exact squared distances).
RasterF distance_to_boundary(const MaskRaster& mask);

// Brute-force windowed variances behind the reliability scores.
std::pair<RasterF, RasterF> window_variances(const RasterF& rho, const RasterF& aop,
                                             const MaskRaster& mask, int window);

RasterF angular_error_map(const NormalMap& est, const NormalMap& gt, const MaskRaster& mask);

// Naive windowed-mean guided filter (no integral images).
RasterF guided_filter(const RasterF& input, const RasterF& guide, const MaskRaster& stats_mask,
                      const MaskRaster& domain, int radius, double eps);

}  // namespace smsfp::reference
