#pragma once

#include <vector>

#include "smsfp/raster.hpp"
#include "smsfp/types.hpp"

namespace smsfp {

// Zenith angles are capped below the grazing singularity of the diffuse model.
inline constexpr double kZenithCapRad = 89.0 * kPi / 180.0;

// Diffuse Fresnel DOP as a function of zenith angle. theta in [0, pi/2), eta > 1.
double dop_from_zenith(double theta, double eta);

// Largest DOP reachable under the zenith cap.
double max_diffuse_dop(double eta);

// Inverts dop_from_zenith by bisection on the monotone branch [0, cap].
// rho beyond max_diffuse_dop(eta) clamps to the cap; *clamp_count is
// incremented when that happens (may be null).
double zenith_from_dop(double rho, double eta, long* clamp_count = nullptr);

// Raster version; non-mask pixels get zenith 0.
RasterF zenith_map_from_dop(const RasterF& dop, double eta, const MaskRaster& mask,
                            long* clamp_count = nullptr);

// Comparison of the printed closed-form zenith inverse against the bisection
// inverse. The bisection inverse is authoritative; the closed form is retained
// for diagnosis only.
struct ClosedFormSample {
    double rho = 0.0;
    double theta_bisect = 0.0;
    double theta_closed = 0.0;  // NaN when the radicand is negative
    double abs_err = 0.0;       // NaN when the closed form is undefined
    bool radicand_negative = false;
};

struct ClosedFormReport {
    double eta = 0.0;
    std::vector<ClosedFormSample> samples;
    int negative_radicand_count = 0;
    double max_abs_err = 0.0;  // over samples where the closed form is defined

    void write_csv(const std::string& path) const;
};

// Direct evaluation of the printed closed-form inverse; NaN if undefined.
double zenith_closed_form(double rho, double eta, bool* radicand_negative = nullptr);

ClosedFormReport validate_closed_form_inverse(double eta, int sample_count = 100);

// Least-squares Lambertian fit of the light direction from I = albedo * (n . l)
// over mask pixels. Falls back to l = view (and reports it) when the normal
// covariance is rank deficient.
struct IlluminationEstimate {
    Illumination illum;
    bool fallback = false;        // rank-deficient, direction set to view
    bool intensity_usable = true; // false when l ~ v, Eq-ratio rows must be dropped
};

IlluminationEstimate estimate_illumination(const RasterF& intensity, const NormalMap& prior_normals,
                                           double albedo, const MaskRaster& mask, const Vec3& view);

}  // namespace smsfp
