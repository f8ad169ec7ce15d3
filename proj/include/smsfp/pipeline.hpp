#pragma once

#include <optional>
#include <vector>

#include "smsfp/constraints.hpp"
#include "smsfp/mfcp.hpp"
#include "smsfp/parg.hpp"
#include "smsfp/polarimetry.hpp"
#include "smsfp/raster.hpp"
#include "smsfp/types.hpp"

namespace smsfp {

// All pipeline tunables. JSON (de)serialization lives in config.cpp.
struct ReconstructionConfig {
    MaterialParams init_material{1.15, 0.8};
    Vec3 view{0.0, 0.0, 1.0};
    SegConfig seg;
    ScaleSet scales;
    double convexity_decay = 0.15;  // kappa, px^-1
    SolverWeights weights;
    double smoothing_sigma = 0.5;
    int max_outer_iterations = 10;
    double height_tol_rel = 1e-4;
    bool use_intensity_rows = true;
    bool azimuth_printed_form = false;
    bool estimate_light = true;
    bool single_region = false;      // global-convexity ablation mode
    bool mfcp_use_texture = true;
    bool region_local_prior = true;  // priors from each region's own mask
    int guided_radius = 8;
    double guided_eps = 1e-3;

    SolverConfig solver_config() const;
    void validate() const;
};

// One region's reconstruction defined on a 1-px dilated support so adjacent
// patches overlap for gauge alignment.
struct RegionPatch {
    int label = 0;
    MaskRaster support;
    RasterF height;
    bool failed = false;
};

struct ReconstructionResult {
    HeightMap height;
    NormalMap normals;
    RegionLabels labels;

    struct RegionDiag {
        int label = 0;
        std::size_t pixels = 0;
        bool converged = false;
        bool failed = false;
        bool intensity_rows_used = false;
        int iterations = 0;
        double eta = 0.0;
        double albedo = 0.0;
        double final_objective = 0.0;
    };
    std::vector<RegionDiag> regions;
    long dop_clamp_count = 0;
};

// Offset-aligns overlapping patches, concatenates them by label ownership and
// smooths a band around the seams with a guided filter whose statistics come
// from outside the band (so re-stitching is a no-op).
HeightMap stitch_regions(const std::vector<RegionPatch>& patches, const RegionLabels& labels,
                         const MaskRaster& mask, const RasterF& guide, int radius, double eps);

using smsfp::normals_from_height;  // Eq-(5) conversion lives with the gradient ops

// Full workflow: decompose, segment, per-region priors + reconstruction,
// stitch, global normals. oracle_azimuth (full-frame, radians) replaces the
// fused implicit azimuth as the disambiguation prior when provided.
ReconstructionResult run_smsfp(const PolarizedStack& stack, const ReconstructionConfig& config,
                               const RasterF* oracle_azimuth = nullptr);

}  // namespace smsfp
