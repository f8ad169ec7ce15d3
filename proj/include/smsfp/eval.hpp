#pragma once

#include <array>
#include <cstddef>

#include "smsfp/raster.hpp"
#include "smsfp/types.hpp"

namespace smsfp {

struct EvalReport {
    double mae_deg = 0.0;
    double rmse_deg = 0.0;
    double acc_11_25 = 0.0;
    double acc_22_5 = 0.0;
    double acc_30 = 0.0;
    std::size_t n_pixels = 0;
};

// Per-pixel angle between estimated and ground-truth normals, in degrees.
RasterF angular_error_map(const NormalMap& est, const NormalMap& gt, const MaskRaster& mask);

EvalReport summarize(const RasterF& error_map, const MaskRaster& mask,
                     std::array<double, 3> thresholds_deg = {11.25, 22.5, 30.0});

// 4-connected erosion, used to exclude the silhouette rim from evaluation.
MaskRaster erode_mask(const MaskRaster& mask, int iterations);

}  // namespace smsfp
