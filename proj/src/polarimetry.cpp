#include "smsfp/polarimetry.hpp"

#include <cmath>
#include <stdexcept>

namespace smsfp {

void PolarizedStack::validate() const {
    require_same_size(i0, i45, "PolarizedStack");
    require_same_size(i0, i90, "PolarizedStack");
    require_same_size(i0, i135, "PolarizedStack");
    require_same_size(i0, mask, "PolarizedStack");
    const RasterF* imgs[4] = {&i0, &i45, &i90, &i135};
    for (const RasterF* img : imgs) {
        for (std::size_t k = 0; k < img->size(); ++k) {
            const double v = (*img)[k];
            if (!std::isfinite(v) || v < 0.0)
                throw std::invalid_argument("PolarizedStack: intensities must be finite and >= 0");
        }
    }
    if (count_mask(mask) == 0)
        throw std::invalid_argument("PolarizedStack: mask has no foreground pixels");
}

double fold_aop(double phi) {
    double p = phi - kPi * std::floor((phi + kPi / 2.0) / kPi);
    // floor rounding can land exactly on +pi/2
    if (p >= kPi / 2.0) p -= kPi;
    if (p < -kPi / 2.0) p += kPi;
    return p;
}

double aop_diff(double a, double b) {
    double d = a - b;
    d -= kPi * std::round(d / kPi);
    if (d >= kPi / 2.0) d -= kPi;
    if (d < -kPi / 2.0) d += kPi;
    return d;
}

StokesMaps stokes_from_stack(const PolarizedStack& stack) {
    stack.validate();
    const int w = stack.width(), h = stack.height();
    StokesMaps s{RasterF(w, h), RasterF(w, h), RasterF(w, h)};
    const std::size_t n = s.s0.size();
#pragma omp parallel for
    for (std::size_t k = 0; k < n; ++k) {
        s.s0[k] = stack.i0[k] + stack.i90[k];
        s.s1[k] = stack.i0[k] - stack.i90[k];
        s.s2[k] = stack.i45[k] - stack.i135[k];
    }
    return s;
}

PolarMaps decompose_stack(const PolarizedStack& stack) {
    const StokesMaps s = stokes_from_stack(stack);
    const int w = stack.width(), h = stack.height();
    PolarMaps out{RasterF(w, h), RasterF(w, h), RasterF(w, h)};
    const std::size_t n = s.s0.size();
    long clamps = 0;
#pragma omp parallel for reduction(+ : clamps)
    for (std::size_t k = 0; k < n; ++k) {
        const double s0 = s.s0[k];
        if (s0 <= 0.0) {
            out.intensity[k] = 0.0;
            out.dop[k] = 0.0;
            out.aop[k] = 0.0;
            continue;
        }
        const double s1 = s.s1[k], s2 = s.s2[k];
        out.intensity[k] = 0.5 * s0;
        double rho = std::sqrt(s1 * s1 + s2 * s2) / s0;
        if (rho > 1.0) {
            rho = 1.0;
            ++clamps;
        }
        out.dop[k] = rho;
        out.aop[k] = (rho > 0.0) ? fold_aop(0.5 * std::atan2(s2, s1)) : 0.0;
    }
    out.dop_clamp_count = clamps;
    return out;
}

RasterF synthesize_intensity(const PolarMaps& polar, double polarizer_angle) {
    require_same_size(polar.intensity, polar.dop, "synthesize_intensity");
    require_same_size(polar.intensity, polar.aop, "synthesize_intensity");
    RasterF out(polar.width(), polar.height());
    const std::size_t n = out.size();
#pragma omp parallel for
    for (std::size_t k = 0; k < n; ++k) {
        const double v = polar.intensity[k] *
                         (1.0 + polar.dop[k] * std::cos(2.0 * (polarizer_angle - polar.aop[k])));
        out[k] = std::max(v, 0.0);
    }
    return out;
}

PolarizedStack synthesize_stack(const PolarMaps& polar, const MaskRaster& mask) {
    PolarizedStack stack;
    stack.i0 = synthesize_intensity(polar, 0.0);
    stack.i45 = synthesize_intensity(polar, kPi / 4.0);
    stack.i90 = synthesize_intensity(polar, kPi / 2.0);
    stack.i135 = synthesize_intensity(polar, 3.0 * kPi / 4.0);
    stack.mask = mask;
    return stack;
}

RasterF aop_gradient_magnitude(const RasterF& aop, const MaskRaster& mask) {
    require_same_size(aop, mask, "aop_gradient_magnitude");
    const int w = aop.width(), h = aop.height();
    RasterF out(w, h, 0.0);

    auto diff_axis = [&](int x, int y, int dx, int dy) -> double {
        const bool has_fwd = mask.in_bounds(x + dx, y + dy) && mask.at(x + dx, y + dy);
        const bool has_bwd = mask.in_bounds(x - dx, y - dy) && mask.at(x - dx, y - dy);
        if (has_fwd && has_bwd)
            return 0.5 * aop_diff(aop.at(x + dx, y + dy), aop.at(x - dx, y - dy));
        if (has_fwd) return aop_diff(aop.at(x + dx, y + dy), aop.at(x, y));
        if (has_bwd) return aop_diff(aop.at(x, y), aop.at(x - dx, y - dy));
        return 0.0;
    };

#pragma omp parallel for
    for (int y = 0; y < h; ++y) {
        for (int x = 0; x < w; ++x) {
            if (!mask.at(x, y)) continue;
            const double gx = diff_axis(x, y, 1, 0);
            const double gy = diff_axis(x, y, 0, 1);
            out.at(x, y) = std::hypot(gx, gy);
        }
    }
    return out;
}

}  // namespace smsfp
