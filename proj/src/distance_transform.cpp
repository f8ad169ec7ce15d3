#include "smsfp/distance_transform.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>
#include <vector>

namespace smsfp {

namespace {
constexpr double kInf = std::numeric_limits<double>::infinity();
}

DistanceTransformResult distance_to_sites(const MaskRaster& sites, const MaskRaster& domain) {
    require_same_size(sites, domain, "distance_to_sites");
    const int w = sites.width(), h = sites.height();

    // Pass 1: per column, distance to the nearest site row (and which row).
    RasterF col_d2(w, h, kInf);
    LabelRaster col_row(w, h, -1);
#pragma omp parallel for
    for (int x = 0; x < w; ++x) {
        int last = -1;
        for (int y = 0; y < h; ++y) {
            if (sites.at(x, y)) last = y;
            if (last >= 0) {
                const double d = y - last;
                col_d2.at(x, y) = d * d;
                col_row.at(x, y) = last;
            }
        }
        last = -1;
        for (int y = h - 1; y >= 0; --y) {
            if (sites.at(x, y)) last = y;
            if (last >= 0) {
                const double d = last - y;
                if (d * d < col_d2.at(x, y)) {
                    col_d2.at(x, y) = d * d;
                    col_row.at(x, y) = last;
                }
            }
        }
    }

    // Pass 2: per row, 1-D lower envelope over f(x) = col_d2(x).
    DistanceTransformResult result{RasterF(w, h, kInf), LabelRaster(w, h, -1)};
#pragma omp parallel for
    for (int y = 0; y < h; ++y) {
        std::vector<int> v(static_cast<std::size_t>(w));      // parabola apex x
        std::vector<double> z(static_cast<std::size_t>(w) + 1);  // envelope breakpoints
        int k = -1;
        for (int q = 0; q < w; ++q) {
            const double fq = col_d2.at(q, y);
            if (fq == kInf) continue;
            double s;
            while (k >= 0) {
                const int p = v[static_cast<std::size_t>(k)];
                s = ((fq + q * q) - (col_d2.at(p, y) + p * p)) / (2.0 * (q - p));
                if (s <= z[static_cast<std::size_t>(k)])
                    --k;
                else
                    break;
            }
            if (k < 0) {
                k = 0;
                v[0] = q;
                z[0] = -kInf;
                z[1] = kInf;
            } else {
                ++k;
                v[static_cast<std::size_t>(k)] = q;
                z[static_cast<std::size_t>(k)] = s;
                z[static_cast<std::size_t>(k) + 1] = kInf;
            }
        }
        if (k < 0) continue;  // no sites reach this row
        int j = 0;
        for (int q = 0; q < w; ++q) {
            if (!domain.at(q, y)) continue;
            while (z[static_cast<std::size_t>(j) + 1] < q) ++j;
            const int p = v[static_cast<std::size_t>(j)];
            const double d2 = (q - p) * static_cast<double>(q - p) + col_d2.at(p, y);
            if (d2 == kInf) continue;
            result.dist.at(q, y) = std::sqrt(d2);
            result.site.at(q, y) =
                static_cast<std::int32_t>(col_row.at(p, y)) * w + static_cast<std::int32_t>(p);
        }
    }
    return result;
}

MaskRaster boundary_pixels(const MaskRaster& mask) {
    const int w = mask.width(), h = mask.height();
    MaskRaster out(w, h, 0);
#pragma omp parallel for
    for (int y = 0; y < h; ++y) {
        for (int x = 0; x < w; ++x) {
            if (!mask.at(x, y)) continue;
            const bool edge = x == 0 || y == 0 || x == w - 1 || y == h - 1;
            const bool open = edge || !mask.at(x - 1, y) || !mask.at(x + 1, y) ||
                              !mask.at(x, y - 1) || !mask.at(x, y + 1);
            if (open) out.at(x, y) = 1;
        }
    }
    return out;
}

}  // namespace smsfp
