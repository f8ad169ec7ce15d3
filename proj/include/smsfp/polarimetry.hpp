#pragma once

#include <cmath>

#include "smsfp/raster.hpp"
#include "smsfp/types.hpp"

namespace smsfp {

// Four co-registered intensity rasters at polarizer angles 0/45/90/135 degrees.
struct PolarizedStack {
    RasterF i0, i45, i90, i135;
    MaskRaster mask;

    int width() const { return i0.width(); }
    int height() const { return i0.height(); }

    // Throws std::invalid_argument on dimension mismatch, negative or
    // non-finite intensities, or an empty mask.
    void validate() const;
};

struct StokesMaps {
    RasterF s0, s1, s2;  // s3 is structurally zero for linear analysis
};

// Average intensity I, degree of polarization rho in [0,1], angle of
// polarization phi in [-pi/2, pi/2).
struct PolarMaps {
    RasterF intensity, dop, aop;
    long dop_clamp_count = 0;  // pixels where sqrt(s1^2+s2^2) exceeded s0

    int width() const { return intensity.width(); }
    int height() const { return intensity.height(); }
};

// Folds an angle into the canonical AOP half-period [-pi/2, pi/2).
double fold_aop(double phi);

// Smallest signed difference a-b on the pi-periodic circle, in [-pi/2, pi/2).
double aop_diff(double a, double b);

StokesMaps stokes_from_stack(const PolarizedStack& stack);

PolarMaps decompose_stack(const PolarizedStack& stack);

// Per-pixel I * (1 + rho * cos(2*(angle - phi))).
RasterF synthesize_intensity(const PolarMaps& polar, double polarizer_angle);

PolarizedStack synthesize_stack(const PolarMaps& polar, const MaskRaster& mask);

// |grad phi| with central differences in the interior and one-sided at mask
// borders; differences taken on the pi-periodic circle.
RasterF aop_gradient_magnitude(const RasterF& aop, const MaskRaster& mask);

}  // namespace smsfp
