#include "smsfp/guided_filter.hpp"

#include <algorithm>
#include <stdexcept>
#include <vector>

namespace smsfp {

namespace {

// Summed-area table with a zero top row / left column.
class Integral {
public:
    Integral(const RasterF& img, const MaskRaster& mask, bool mask_only_count = false)
        : w_(img.width()), h_(img.height()),
          table_(static_cast<std::size_t>(w_ + 1) * (h_ + 1), 0.0) {
        for (int y = 0; y < h_; ++y) {
            double row = 0.0;
            for (int x = 0; x < w_; ++x) {
                row += mask.at(x, y) ? (mask_only_count ? 1.0 : img.at(x, y)) : 0.0;
                table_[idx(x + 1, y + 1)] = table_[idx(x + 1, y)] + row;
            }
        }
    }

    // Inclusive box sum [x0..x1] x [y0..y1], clamped to the image.
    double box(int x0, int y0, int x1, int y1) const {
        x0 = std::max(x0, 0);
        y0 = std::max(y0, 0);
        x1 = std::min(x1, w_ - 1);
        y1 = std::min(y1, h_ - 1);
        if (x0 > x1 || y0 > y1) return 0.0;
        return table_[idx(x1 + 1, y1 + 1)] - table_[idx(x0, y1 + 1)] - table_[idx(x1 + 1, y0)] +
               table_[idx(x0, y0)];
    }

private:
    std::size_t idx(int x, int y) const {
        return static_cast<std::size_t>(y) * (w_ + 1) + static_cast<std::size_t>(x);
    }
    int w_, h_;
    std::vector<double> table_;
};

RasterF multiply(const RasterF& a, const RasterF& b) {
    RasterF out(a.width(), a.height());
    for (std::size_t k = 0; k < a.size(); ++k) out[k] = a[k] * b[k];
    return out;
}

}  // namespace

RasterF box_mean(const RasterF& input, const MaskRaster& mask, int radius) {
    require_same_size(input, mask, "box_mean");
    if (radius < 0) throw std::invalid_argument("box_mean: radius must be >= 0");
    const Integral sum(input, mask);
    const Integral cnt(input, mask, true);
    const int w = input.width(), h = input.height();
    RasterF out(w, h, 0.0);
#pragma omp parallel for
    for (int y = 0; y < h; ++y)
        for (int x = 0; x < w; ++x) {
            const double c = cnt.box(x - radius, y - radius, x + radius, y + radius);
            if (c > 0.0)
                out.at(x, y) = sum.box(x - radius, y - radius, x + radius, y + radius) / c;
        }
    return out;
}

RasterF guided_filter(const RasterF& input, const RasterF& guide, const MaskRaster& stats_mask,
                      const MaskRaster& domain, int radius, double eps) {
    require_same_size(input, guide, "guided_filter");
    require_same_size(input, stats_mask, "guided_filter");
    require_same_size(input, domain, "guided_filter");
    if (radius < 1) throw std::invalid_argument("guided_filter: radius must be >= 1");
    if (!(eps > 0.0)) throw std::invalid_argument("guided_filter: eps must be > 0");

    const int w = input.width(), h = input.height();
    const Integral cnt(input, stats_mask, true);
    const Integral sum_p(input, stats_mask);
    const Integral sum_g(guide, stats_mask);
    const Integral sum_gg(multiply(guide, guide), stats_mask);
    const Integral sum_gp(multiply(guide, input), stats_mask);

    RasterF a(w, h, 0.0), b(w, h, 0.0);
    MaskRaster have_ab(w, h, 0);
#pragma omp parallel for
    for (int y = 0; y < h; ++y)
        for (int x = 0; x < w; ++x) {
            const double c = cnt.box(x - radius, y - radius, x + radius, y + radius);
            if (c <= 0.0) continue;
            const double mg = sum_g.box(x - radius, y - radius, x + radius, y + radius) / c;
            const double mp = sum_p.box(x - radius, y - radius, x + radius, y + radius) / c;
            const double vgg =
                sum_gg.box(x - radius, y - radius, x + radius, y + radius) / c - mg * mg;
            const double cgp =
                sum_gp.box(x - radius, y - radius, x + radius, y + radius) / c - mg * mp;
            const double ai = cgp / (std::max(vgg, 0.0) + eps);
            a.at(x, y) = ai;
            b.at(x, y) = mp - ai * mg;
            have_ab.at(x, y) = 1;
        }

    const Integral sum_a(a, have_ab);
    const Integral sum_b(b, have_ab);
    const Integral cnt_ab(a, have_ab, true);

    RasterF out = input;
#pragma omp parallel for
    for (int y = 0; y < h; ++y)
        for (int x = 0; x < w; ++x) {
            if (!domain.at(x, y)) continue;
            const double c = cnt_ab.box(x - radius, y - radius, x + radius, y + radius);
            if (c <= 0.0) continue;  // no usable statistics: keep the input
            const double ma = sum_a.box(x - radius, y - radius, x + radius, y + radius) / c;
            const double mb = sum_b.box(x - radius, y - radius, x + radius, y + radius) / c;
            out.at(x, y) = ma * guide.at(x, y) + mb;
        }
    return out;
}

}  // namespace smsfp
