#include "smsfp/eval.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace smsfp {

RasterF angular_error_map(const NormalMap& est, const NormalMap& gt, const MaskRaster& mask) {
    require_same_size(est.nx, gt.nx, "angular_error_map");
    require_same_size(est.nx, mask, "angular_error_map");
    RasterF out(mask.width(), mask.height(), 0.0);
    const std::size_t n = mask.size();
#pragma omp parallel for
    for (std::size_t k = 0; k < n; ++k) {
        if (!mask[k]) continue;
        const double dot = est.nx[k] * gt.nx[k] + est.ny[k] * gt.ny[k] + est.nz[k] * gt.nz[k];
        out[k] = std::acos(std::clamp(dot, -1.0, 1.0)) * 180.0 / kPi;
    }
    return out;
}

EvalReport summarize(const RasterF& error_map, const MaskRaster& mask,
                     std::array<double, 3> thresholds_deg) {
    require_same_size(error_map, mask, "summarize");
    EvalReport report;
    double sum = 0.0, sum2 = 0.0;
    std::array<std::size_t, 3> below{0, 0, 0};
    for (std::size_t k = 0; k < mask.size(); ++k) {
        if (!mask[k]) continue;
        const double e = error_map[k];
        if (!std::isfinite(e))
            throw std::invalid_argument("summarize: non-finite error value in mask");
        sum += e;
        sum2 += e * e;
        for (std::size_t t = 0; t < 3; ++t)
            if (e < thresholds_deg[t]) ++below[t];
        ++report.n_pixels;
    }
    if (report.n_pixels == 0) throw std::invalid_argument("summarize: empty mask");
    const double inv = 1.0 / static_cast<double>(report.n_pixels);
    report.mae_deg = sum * inv;
    report.rmse_deg = std::sqrt(sum2 * inv);
    report.acc_11_25 = static_cast<double>(below[0]) * inv;
    report.acc_22_5 = static_cast<double>(below[1]) * inv;
    report.acc_30 = static_cast<double>(below[2]) * inv;
    return report;
}

MaskRaster erode_mask(const MaskRaster& mask, int iterations) {
    MaskRaster cur = mask;
    const int w = mask.width(), h = mask.height();
    for (int it = 0; it < iterations; ++it) {
        MaskRaster next(w, h, 0);
#pragma omp parallel for
        for (int y = 0; y < h; ++y)
            for (int x = 0; x < w; ++x) {
                if (!cur.at(x, y)) continue;
                if (x == 0 || y == 0 || x == w - 1 || y == h - 1) continue;
                if (cur.at(x - 1, y) && cur.at(x + 1, y) && cur.at(x, y - 1) && cur.at(x, y + 1))
                    next.at(x, y) = 1;
            }
        cur = std::move(next);
    }
    return cur;
}

}  // namespace smsfp
