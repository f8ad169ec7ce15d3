#pragma once

#include <array>
#include <cmath>
#include <utility>
#include <vector>

#include "smsfp/polarimetry.hpp"
#include "smsfp/raster.hpp"

namespace smsfp {

// Per-pixel polarization feature tensor F = [rho, cos 2phi, sin 2phi, |grad phi|].
// The gradient channel is normalized by the mask-wide 95th percentile so the
// similarity threshold is not image dependent.
struct FeatureField {
    RasterF rho, cos2phi, sin2phi, grad;
    double grad_norm = 1.0;  // denominator applied to the raw gradient

    std::array<double, 4> at(std::size_t k) const {
        return {rho[k], cos2phi[k], sin2phi[k], grad[k]};
    }
};

struct SegConfig {
    double tau = 0.35;            // similarity threshold
    double lambda_rho = 2.0;      // adaptive strength for the DOP channel
    double lambda_phi = 2.0;      // adaptive strength for the AOP channels
    int window = 5;               // local-variance window (odd, >= 3)
    int min_region_px = 0;        // 0 = auto: max(16, mask_px / 100)
    int seed_grid_stride = 32;
    bool eight_connect = false;   // growth connectivity (4 by default)
    bool update_seed_feature = true;  // running-mean seed update vs frozen seed
    double merge_threshold = 0.0; // boundary-pair merge cutoff; 0 = auto (= tau), < 0 = off

    void validate() const;
    int effective_min_region(std::size_t mask_px) const;
    double effective_merge_threshold() const;
};

struct RegionLabels {
    LabelRaster labels;  // 0 = background, 1..region_count
    int region_count = 0;
};

FeatureField build_feature_field(const PolarMaps& polar, const MaskRaster& mask);

// Reliability scores R = exp(-var / max var) from local window variances.
// The AOP variance is the circular variance on the (cos 2phi, sin 2phi)
// embedding. Returns (R_rho, R_phi).
std::pair<RasterF, RasterF> local_reliability(const RasterF& rho, const RasterF& aop,
                                              const MaskRaster& mask, int window);

std::array<double, 4> adaptive_weights(double r_rho, double r_phi, const SegConfig& config);

double feature_distance(const std::array<double, 4>& f_neighbor,
                        const std::array<double, 4>& f_seed, const std::array<double, 4>& weights);

// Adaptive region growing with FIFO frontier. Pixels unreachable from the
// initial seeds are grown from fresh seeds in a second pass so the whole mask
// ends up labeled.
RegionLabels region_grow(const FeatureField& field, const RasterF& r_rho, const RasterF& r_phi,
                         const MaskRaster& mask, const SegConfig& config);

// Hole filling, merging of boundary-similar and undersized regions, Gaussian
// boundary smoothing, connectivity repair and final 1..K renumbering.
RegionLabels post_process(const RegionLabels& labels, const FeatureField& field,
                          const RasterF& r_rho, const RasterF& r_phi, const MaskRaster& mask,
                          const SegConfig& config);

// Full pipeline: features -> reliabilities -> growth -> post-processing.
RegionLabels segment(const PolarMaps& polar, const MaskRaster& mask, const SegConfig& config);

// Pixel counts per label (index 0 = background count).
std::vector<std::size_t> region_sizes(const RegionLabels& labels);

}  // namespace smsfp
