#pragma once

#include <cstdint>
#include <vector>

#include "smsfp/gradient_ops.hpp"
#include "smsfp/mfcp.hpp"
#include "smsfp/polarimetry.hpp"
#include "smsfp/raster.hpp"
#include "smsfp/types.hpp"

namespace smsfp {

// A linear constraint cx * (Dx z) + cy * (Dy z) = rhs anchored at one pixel.
struct GradientRow {
    std::int32_t pixel = 0;  // linear pixel index
    double cx = 0.0, cy = 0.0, rhs = 0.0;
};

struct SolverWeights {
    double azimuth = 1.0;
    double intensity = 0.5;
    double mfcp = 1.0;
    double laplacian = 0.1;
};

struct ConstraintSystem {
    std::vector<GradientRow> azimuth;
    std::vector<GradientRow> intensity;
    std::vector<GradientRow> mfcp;
    bool use_laplacian = true;
    SolverWeights weights;
};

// Gradient-direction constraint sin(phi) zx - cos(phi) zy = 0 per mask pixel.
// printed_form switches to the paper-typeset variant -cos(phi) zx + sin(phi) zy.
std::vector<GradientRow> azimuth_rows(const RasterF& aop, const GradientOperators& ops,
                                      const MaskRaster& mask, bool printed_form = false);

// Rows equating sqrt(1+|grad z|^2) between the zenith and Lambertian relations.
// Returns an empty set (and sets *dropped) when the light and view directions
// are not separated.
std::vector<GradientRow> intensity_ratio_rows(const RasterF& intensity, const RasterF& zenith,
                                              const Illumination& illum, double albedo,
                                              const GradientOperators& ops, const MaskRaster& mask,
                                              bool* dropped = nullptr,
                                              const MaskRaster* zenith_valid = nullptr);

// Two rows per pixel matching the x/y components of the estimated normal to
// the prior normal, scaled by the convexity weight.
std::vector<GradientRow> mfcp_rows(const NormalMap& prior, const ConvexityWeights& conv,
                                   const RasterF& zenith, const GradientOperators& ops,
                                   const MaskRaster& mask, const MaskRaster* zenith_valid = nullptr);

struct SolveResult {
    RasterF height;       // mean-zero over the mask, 0 outside
    double objective = 0.0;  // ||A D z - b||^2 at the solution
    std::size_t rows = 0;
};

// Sparse least squares via normal equations + LDLT, mean-zero gauge pinning.
// Throws when the system is rank deficient beyond the gauge.
SolveResult solve_height(const ConstraintSystem& system, const GradientOperators& ops);

// Golden-section refit of eta against the diffuse DOP model plus closed-form
// albedo refit from the Lambertian relation. Returns the input unchanged when
// fewer than 10 pixels are usable or the eta objective is flat.
MaterialParams refit_material(const RasterF& rho_est, const RasterF& zenith_from_height,
                              const MaskRaster& mask, const MaterialParams& current,
                              const RasterF& intensity, const NormalMap& normals,
                              const Vec3& light, bool* refit_applied = nullptr);

struct SolverConfig {
    SolverWeights weights;
    double smoothing_sigma = 0.5;
    int max_outer_iterations = 10;
    double height_tol_rel = 1e-4;
    bool use_intensity_rows = true;
    bool azimuth_printed_form = false;
    bool estimate_light = true;
    Vec3 view{0.0, 0.0, 1.0};
    MaterialParams init_material{};
};

struct IterationDiag {
    int iteration = 0;
    double objective = 0.0;
    double eta = 0.0;
    double albedo = 0.0;
    double max_dz = 0.0;
};

struct RegionResult {
    RasterF height;
    NormalMap normals;
    MaterialParams material;
    Illumination illum;
    bool converged = false;
    bool intensity_rows_used = false;
    int iterations = 0;
    long zenith_clamps = 0;
    std::vector<IterationDiag> diag;
};

// Outer loop: zenith from DOP, illumination estimate, row assembly, solve,
// zenith from height, material refit; repeats until the height settles.
RegionResult reconstruct_region(const PolarMaps& polar, const MaskRaster& region_mask,
                                const RasterF& prior_azimuth, const ConvexityWeights& conv,
                                const SolverConfig& config);

}  // namespace smsfp
