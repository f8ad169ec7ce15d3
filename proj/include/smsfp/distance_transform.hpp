#pragma once

#include "smsfp/raster.hpp"

namespace smsfp {

// Exact Euclidean distance from every domain pixel to the nearest site pixel,
// with the index (y*width+x) of that site. Pixels outside the domain get
// dist = +inf and site = -1. Two-pass lower-envelope transform.
struct DistanceTransformResult {
    RasterF dist;
    LabelRaster site;
};

DistanceTransformResult distance_to_sites(const MaskRaster& sites, const MaskRaster& domain);

// Mask pixels 4-adjacent to background or the image edge.
MaskRaster boundary_pixels(const MaskRaster& mask);

}  // namespace smsfp
