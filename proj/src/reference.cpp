#include "smsfp/reference.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "smsfp/distance_transform.hpp"

namespace smsfp::reference {

PolarMaps decompose_stack(const PolarizedStack& stack) {
    stack.validate();
    const int w = stack.width(), h = stack.height();
    PolarMaps out{RasterF(w, h), RasterF(w, h), RasterF(w, h)};
    long clamps = 0;
    for (std::size_t k = 0; k < out.intensity.size(); ++k) {
        const double s0 = stack.i0[k] + stack.i90[k];
        if (s0 <= 0.0) {
            out.intensity[k] = 0.0;
            out.dop[k] = 0.0;
            out.aop[k] = 0.0;
            continue;
        }
        const double s1 = stack.i0[k] - stack.i90[k];
        const double s2 = stack.i45[k] - stack.i135[k];
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
    RasterF out(polar.width(), polar.height());
    for (std::size_t k = 0; k < out.size(); ++k) {
        const double v = polar.intensity[k] *
                         (1.0 + polar.dop[k] * std::cos(2.0 * (polarizer_angle - polar.aop[k])));
        out[k] = std::max(v, 0.0);
    }
    return out;
}

RasterF aop_gradient_magnitude(const RasterF& aop, const MaskRaster& mask) {
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
    for (int y = 0; y < h; ++y)
        for (int x = 0; x < w; ++x) {
            if (!mask.at(x, y)) continue;
            out.at(x, y) = std::hypot(diff_axis(x, y, 1, 0), diff_axis(x, y, 0, 1));
        }
    return out;
}

RasterF distance_to_boundary(const MaskRaster& mask) {
    const MaskRaster boundary = boundary_pixels(mask);
    const int w = mask.width(), h = mask.height();
    std::vector<std::pair<int, int>> sites;
    for (int y = 0; y < h; ++y)
        for (int x = 0; x < w; ++x)
            if (boundary.at(x, y)) sites.emplace_back(x, y);

    RasterF out(w, h, std::numeric_limits<double>::infinity());
    for (int y = 0; y < h; ++y)
        for (int x = 0; x < w; ++x) {
            if (!mask.at(x, y)) continue;
            double best = std::numeric_limits<double>::infinity();
            for (const auto& [sx, sy] : sites) {
                const double d2 = static_cast<double>(x - sx) * (x - sx) +
                                  static_cast<double>(y - sy) * (y - sy);
                best = std::min(best, d2);
            }
            out.at(x, y) = std::sqrt(best);
        }
    return out;
}

std::pair<RasterF, RasterF> window_variances(const RasterF& rho, const RasterF& aop,
                                             const MaskRaster& mask, int window) {
    const int w = mask.width(), h = mask.height();
    const int r = window / 2;
    RasterF var_rho(w, h, 0.0), var_phi(w, h, 0.0);
    for (int y = 0; y < h; ++y)
        for (int x = 0; x < w; ++x) {
            if (!mask.at(x, y)) continue;
            double sum = 0.0, sum2 = 0.0, mc = 0.0, ms = 0.0;
            int cnt = 0;
            for (int dy = -r; dy <= r; ++dy)
                for (int dx = -r; dx <= r; ++dx) {
                    const int xx = x + dx, yy = y + dy;
                    if (!mask.in_bounds(xx, yy) || !mask.at(xx, yy)) continue;
                    const double v = rho.at(xx, yy);
                    sum += v;
                    sum2 += v * v;
                    mc += std::cos(2.0 * aop.at(xx, yy));
                    ms += std::sin(2.0 * aop.at(xx, yy));
                    ++cnt;
                }
            const double inv = 1.0 / cnt;
            var_rho.at(x, y) = std::max(0.0, sum2 * inv - (sum * inv) * (sum * inv));
            var_phi.at(x, y) =
                std::max(0.0, 1.0 - (mc * inv) * (mc * inv) - (ms * inv) * (ms * inv));
        }
    return {std::move(var_rho), std::move(var_phi)};
}

RasterF angular_error_map(const NormalMap& est, const NormalMap& gt, const MaskRaster& mask) {
    RasterF out(mask.width(), mask.height(), 0.0);
    for (std::size_t k = 0; k < mask.size(); ++k) {
        if (!mask[k]) continue;
        const double dot = est.nx[k] * gt.nx[k] + est.ny[k] * gt.ny[k] + est.nz[k] * gt.nz[k];
        out[k] = std::acos(std::clamp(dot, -1.0, 1.0)) * 180.0 / kPi;
    }
    return out;
}

RasterF guided_filter(const RasterF& input, const RasterF& guide, const MaskRaster& stats_mask,
                      const MaskRaster& domain, int radius, double eps) {
    const int w = input.width(), h = input.height();

    auto window_stats = [&](int x, int y, double& mg, double& mp, double& vgg, double& cgp,
                            int& cnt) {
        double sg = 0.0, sp = 0.0, sgg = 0.0, sgp = 0.0;
        cnt = 0;
        for (int dy = -radius; dy <= radius; ++dy)
            for (int dx = -radius; dx <= radius; ++dx) {
                const int xx = x + dx, yy = y + dy;
                if (!stats_mask.in_bounds(xx, yy) || !stats_mask.at(xx, yy)) continue;
                const double g = guide.at(xx, yy), p = input.at(xx, yy);
                sg += g;
                sp += p;
                sgg += g * g;
                sgp += g * p;
                ++cnt;
            }
        if (cnt == 0) return;
        mg = sg / cnt;
        mp = sp / cnt;
        vgg = sgg / cnt - mg * mg;
        cgp = sgp / cnt - mg * mp;
    };

    RasterF a(w, h, 0.0), b(w, h, 0.0);
    MaskRaster have_ab(w, h, 0);
    for (int y = 0; y < h; ++y)
        for (int x = 0; x < w; ++x) {
            double mg = 0.0, mp = 0.0, vgg = 0.0, cgp = 0.0;
            int cnt = 0;
            window_stats(x, y, mg, mp, vgg, cgp, cnt);
            if (cnt == 0) continue;
            const double ai = cgp / (std::max(vgg, 0.0) + eps);
            a.at(x, y) = ai;
            b.at(x, y) = mp - ai * mg;
            have_ab.at(x, y) = 1;
        }

    RasterF out = input;
    for (int y = 0; y < h; ++y)
        for (int x = 0; x < w; ++x) {
            if (!domain.at(x, y)) continue;
            double sa = 0.0, sb = 0.0;
            int cnt = 0;
            for (int dy = -radius; dy <= radius; ++dy)
                for (int dx = -radius; dx <= radius; ++dx) {
                    const int xx = x + dx, yy = y + dy;
                    if (!have_ab.in_bounds(xx, yy) || !have_ab.at(xx, yy)) continue;
                    sa += a.at(xx, yy);
                    sb += b.at(xx, yy);
                    ++cnt;
                }
            if (cnt == 0) continue;
            out.at(x, y) = (sa / cnt) * guide.at(x, y) + (sb / cnt);
        }
    return out;
}

}  // namespace smsfp::reference
