#pragma once

#include <vector>

#include "smsfp/raster.hpp"
#include "smsfp/types.hpp"

namespace smsfp {

// Azimuth angles propagated inward from the mask boundary under the convexity
// assumption, via closest-boundary assignment.
struct ImplicitAzimuthMap {
    RasterF phi_im;     // radians in [-pi, pi)
    MaskRaster valid;   // copy of the mask
};

struct ScaleSet {
    std::vector<int> block_sizes{8, 16, 32};  // strictly increasing, each >= 2
    double gamma = 0.5;                       // in (0, 1]

    void validate() const;
};

struct ConvexityWeights {
    RasterF w_con;      // exp(-decay_rate * distance-to-boundary), 1 at the boundary
    double decay_rate = 0.0;
};

ImplicitAzimuthMap implicit_azimuth_from_mask(const MaskRaster& mask);

ConvexityWeights convexity_weights(const MaskRaster& mask, double decay_rate);

// Non-overlapping tiling; the last row/column of blocks may be truncated.
struct Block {
    int x0 = 0, y0 = 0, w = 0, h = 0;
    int mask_px = 0;
    bool pass_through = false;  // fewer than 4 mask pixels: no transformation
};

std::vector<Block> block_decompose(int width, int height, int block, const MaskRaster& mask);

// Normalizes the azimuth values of one block to [0,1] over its mask pixels,
// applies the gamma power, and affinely maps into the implicit block's value
// range. Degenerate blocks pass the implicit values through.
void gamma_range_map_block(const RasterF& azimuth, const RasterF& implicit, const MaskRaster& mask,
                           const Block& block, double gamma, RasterF& out);

// One texture-injected implicit azimuth raster for a single block size.
RasterF gamma_range_mapped_scale(const RasterF& azimuth, const RasterF& implicit,
                                 const MaskRaster& mask, int block, double gamma);

// Variance-based fusion weights: sigma_i is the standard deviation of per-block
// azimuth means at each scale; weights are sigma_i^2 / sum, uniform if all zero.
std::vector<double> scale_fusion_weights(const RasterF& azimuth, const std::vector<int>& blocks,
                                         const MaskRaster& mask);

// Pixelwise blend of per-scale rasters by the given weights (must sum to 1).
RasterF blend_scales(const std::vector<RasterF>& per_scale, const std::vector<double>& weights,
                     const MaskRaster& mask);

// Full fusion: per-scale gamma range mapping of the measured azimuth onto the
// implicit map, then variance-weighted blending. With use_texture=false the
// raw implicit map is returned unchanged (ablation mode).
RasterF fused_implicit_azimuth(const RasterF& azimuth, const ImplicitAzimuthMap& implicit,
                               const ScaleSet& scales, const MaskRaster& mask,
                               bool use_texture = true);

// n = [sin(theta)cos(phi), sin(theta)sin(phi), cos(theta)].
NormalMap implicit_normals(const RasterF& phi_im_out, const RasterF& zenith,
                           const MaskRaster& mask);

}  // namespace smsfp
