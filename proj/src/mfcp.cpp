#include "smsfp/mfcp.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "smsfp/distance_transform.hpp"

namespace smsfp {

void ScaleSet::validate() const {
    if (block_sizes.empty()) throw std::invalid_argument("ScaleSet: no block sizes");
    int prev = 1;
    for (int b : block_sizes) {
        if (b < 2 || b <= prev)
            throw std::invalid_argument("ScaleSet: block sizes must be >= 2 and strictly increasing");
        prev = b;
    }
    if (!(gamma > 0.0 && gamma <= 1.0))
        throw std::invalid_argument("ScaleSet: gamma must be in (0, 1]");
}

namespace {

// Gaussian-smoothed mask indicator, sigma = 2 px.
RasterF smooth_indicator(const MaskRaster& mask) {
    const double sigma = 2.0;
    const int radius = 6;
    std::vector<double> kernel(2 * radius + 1);
    double sum = 0.0;
    for (int k = -radius; k <= radius; ++k) {
        kernel[static_cast<std::size_t>(k + radius)] = std::exp(-0.5 * k * k / (sigma * sigma));
        sum += kernel[static_cast<std::size_t>(k + radius)];
    }
    for (double& v : kernel) v /= sum;

    const int w = mask.width(), h = mask.height();
    RasterF tmp(w, h, 0.0), out(w, h, 0.0);
#pragma omp parallel for
    for (int y = 0; y < h; ++y)
        for (int x = 0; x < w; ++x) {
            double acc = 0.0;
            for (int k = -radius; k <= radius; ++k) {
                const int xx = std::clamp(x + k, 0, w - 1);
                acc += kernel[static_cast<std::size_t>(k + radius)] * (mask.at(xx, y) ? 1.0 : 0.0);
            }
            tmp.at(x, y) = acc;
        }
#pragma omp parallel for
    for (int y = 0; y < h; ++y)
        for (int x = 0; x < w; ++x) {
            double acc = 0.0;
            for (int k = -radius; k <= radius; ++k) {
                const int yy = std::clamp(y + k, 0, h - 1);
                acc += kernel[static_cast<std::size_t>(k + radius)] * tmp.at(x, yy);
            }
            out.at(x, y) = acc;
        }
    return out;
}

}  // namespace

ImplicitAzimuthMap implicit_azimuth_from_mask(const MaskRaster& mask) {
    if (count_mask(mask) == 0)
        throw std::invalid_argument("implicit_azimuth_from_mask: empty mask");
    const MaskRaster boundary = boundary_pixels(mask);
    const DistanceTransformResult dt = distance_to_sites(boundary, mask);

    // Outward boundary direction from the smoothed-indicator gradient; the
    // indicator increases inward, so outward is the negated gradient.
    const RasterF ind = smooth_indicator(mask);
    const int w = mask.width(), h = mask.height();
    RasterF boundary_dir(w, h, 0.0);
#pragma omp parallel for
    for (int y = 0; y < h; ++y)
        for (int x = 0; x < w; ++x) {
            if (!boundary.at(x, y)) continue;
            const double gx = 0.5 * (ind.at(std::min(x + 1, w - 1), y) -
                                      ind.at(std::max(x - 1, 0), y));
            const double gy = 0.5 * (ind.at(x, std::min(y + 1, h - 1)) -
                                      ind.at(x, std::max(y - 1, 0)));
            boundary_dir.at(x, y) = std::atan2(-gy, -gx);
        }

    ImplicitAzimuthMap out;
    out.phi_im = RasterF(w, h, 0.0);
    out.valid = mask;
#pragma omp parallel for
    for (int y = 0; y < h; ++y)
        for (int x = 0; x < w; ++x) {
            if (!mask.at(x, y)) continue;
            const std::int32_t site = dt.site.at(x, y);
            if (site >= 0) out.phi_im.at(x, y) = boundary_dir[static_cast<std::size_t>(site)];
        }
    return out;
}

ConvexityWeights convexity_weights(const MaskRaster& mask, double decay_rate) {
    if (count_mask(mask) == 0) throw std::invalid_argument("convexity_weights: empty mask");
    if (!(decay_rate > 0.0)) throw std::invalid_argument("convexity_weights: decay rate must be > 0");
    const DistanceTransformResult dt = distance_to_sites(boundary_pixels(mask), mask);
    ConvexityWeights out;
    out.decay_rate = decay_rate;
    out.w_con = RasterF(mask.width(), mask.height(), 0.0);
    const std::size_t n = out.w_con.size();
#pragma omp parallel for
    for (std::size_t k = 0; k < n; ++k)
        if (mask[k]) out.w_con[k] = std::exp(-decay_rate * dt.dist[k]);
    return out;
}

std::vector<Block> block_decompose(int width, int height, int block, const MaskRaster& mask) {
    if (block < 2 || block > std::min(width, height))
        throw std::invalid_argument("block_decompose: block size out of range");
    std::vector<Block> blocks;
    for (int y0 = 0; y0 < height; y0 += block)
        for (int x0 = 0; x0 < width; x0 += block) {
            Block b;
            b.x0 = x0;
            b.y0 = y0;
            b.w = std::min(block, width - x0);
            b.h = std::min(block, height - y0);
            for (int y = y0; y < y0 + b.h; ++y)
                for (int x = x0; x < x0 + b.w; ++x)
                    if (mask.at(x, y)) ++b.mask_px;
            b.pass_through = b.mask_px < 4;
            blocks.push_back(b);
        }
    return blocks;
}

void gamma_range_map_block(const RasterF& azimuth, const RasterF& implicit, const MaskRaster& mask,
                           const Block& block, double gamma, RasterF& out) {
    // pass_through: keep the implicit values
    if (block.pass_through) {
        for (int y = block.y0; y < block.y0 + block.h; ++y)
            for (int x = block.x0; x < block.x0 + block.w; ++x)
                if (mask.at(x, y)) out.at(x, y) = implicit.at(x, y);
        return;
    }

    double a_min = std::numeric_limits<double>::infinity(), a_max = -a_min;
    double i_min = a_min, i_max = -a_min;
    for (int y = block.y0; y < block.y0 + block.h; ++y)
        for (int x = block.x0; x < block.x0 + block.w; ++x) {
            if (!mask.at(x, y)) continue;
            a_min = std::min(a_min, azimuth.at(x, y));
            a_max = std::max(a_max, azimuth.at(x, y));
            i_min = std::min(i_min, implicit.at(x, y));
            i_max = std::max(i_max, implicit.at(x, y));
        }

    const double a_span = a_max - a_min;
    const double i_mid = 0.5 * (i_min + i_max);
    for (int y = block.y0; y < block.y0 + block.h; ++y)
        for (int x = block.x0; x < block.x0 + block.w; ++x) {
            if (!mask.at(x, y)) continue;
            if (a_span <= 0.0) {
                out.at(x, y) = i_mid;  // constant azimuth block
                continue;
            }
            const double u = (azimuth.at(x, y) - a_min) / a_span;
            out.at(x, y) = i_min + std::pow(u, gamma) * (i_max - i_min);
        }
}

RasterF gamma_range_mapped_scale(const RasterF& azimuth, const RasterF& implicit,
                                 const MaskRaster& mask, int block, double gamma) {
    require_same_size(azimuth, implicit, "gamma_range_mapped_scale");
    require_same_size(azimuth, mask, "gamma_range_mapped_scale");
    RasterF out(azimuth.width(), azimuth.height(), 0.0);
    const std::vector<Block> blocks = block_decompose(azimuth.width(), azimuth.height(), block, mask);
#pragma omp parallel for
    for (std::size_t i = 0; i < blocks.size(); ++i)
        gamma_range_map_block(azimuth, implicit, mask, blocks[i], gamma, out);
    return out;
}

std::vector<double> scale_fusion_weights(const RasterF& azimuth, const std::vector<int>& blocks,
                                         const MaskRaster& mask) {
    std::vector<double> variances;
    variances.reserve(blocks.size());
    for (int bs : blocks) {
        const std::vector<Block> grid = block_decompose(azimuth.width(), azimuth.height(), bs, mask);
        // per-block azimuth means over mask pixels, then their variance
        std::vector<double> means;
        for (const Block& b : grid) {
            if (b.mask_px == 0) continue;
            double sum = 0.0;
            for (int y = b.y0; y < b.y0 + b.h; ++y)
                for (int x = b.x0; x < b.x0 + b.w; ++x)
                    if (mask.at(x, y)) sum += azimuth.at(x, y);
            means.push_back(sum / b.mask_px);
        }
        if (means.size() < 2) {
            variances.push_back(0.0);
            continue;
        }
        double m = 0.0;
        for (double v : means) m += v;
        m /= static_cast<double>(means.size());
        double var = 0.0;
        for (double v : means) var += (v - m) * (v - m);
        variances.push_back(var / static_cast<double>(means.size()));
    }

    // variances at float-noise level count as zero
    for (double& v : variances)
        if (v < 1e-18) v = 0.0;
    double total = 0.0;
    for (double v : variances) total += v;
    std::vector<double> weights(variances.size());
    if (total <= 0.0) {
        std::fill(weights.begin(), weights.end(), 1.0 / static_cast<double>(weights.size()));
    } else {
        for (std::size_t i = 0; i < weights.size(); ++i) weights[i] = variances[i] / total;
    }
    return weights;
}

RasterF blend_scales(const std::vector<RasterF>& per_scale, const std::vector<double>& weights,
                     const MaskRaster& mask) {
    if (per_scale.empty() || per_scale.size() != weights.size())
        throw std::invalid_argument("blend_scales: scale/weight count mismatch");
    for (const RasterF& r : per_scale) require_same_size(r, mask, "blend_scales");
    RasterF out(mask.width(), mask.height(), 0.0);
    const std::size_t n = out.size();
#pragma omp parallel for
    for (std::size_t k = 0; k < n; ++k) {
        if (!mask[k]) continue;
        double acc = 0.0;
        for (std::size_t s = 0; s < per_scale.size(); ++s) acc += weights[s] * per_scale[s][k];
        out[k] = acc;
    }
    return out;
}

RasterF fused_implicit_azimuth(const RasterF& azimuth, const ImplicitAzimuthMap& implicit,
                               const ScaleSet& scales, const MaskRaster& mask, bool use_texture) {
    scales.validate();
    if (!use_texture) return implicit.phi_im;

    // Block sizes larger than the raster are skipped.
    std::vector<int> usable;
    for (int b : scales.block_sizes)
        if (b <= std::min(mask.width(), mask.height())) usable.push_back(b);
    if (usable.empty()) return implicit.phi_im;

    std::vector<RasterF> mapped;
    mapped.reserve(usable.size());
    for (int b : usable)
        mapped.push_back(gamma_range_mapped_scale(azimuth, implicit.phi_im, mask, b, scales.gamma));
    const std::vector<double> weights = scale_fusion_weights(azimuth, usable, mask);
    return blend_scales(mapped, weights, mask);
}

NormalMap implicit_normals(const RasterF& phi_im_out, const RasterF& zenith,
                           const MaskRaster& mask) {
    require_same_size(phi_im_out, zenith, "implicit_normals");
    require_same_size(phi_im_out, mask, "implicit_normals");
    NormalMap out(phi_im_out.width(), phi_im_out.height());
    const std::size_t n = mask.size();
#pragma omp parallel for
    for (std::size_t k = 0; k < n; ++k) {
        if (!mask[k]) continue;
        const double st = std::sin(zenith[k]), ct = std::cos(zenith[k]);
        out.nx[k] = st * std::cos(phi_im_out[k]);
        out.ny[k] = st * std::sin(phi_im_out[k]);
        out.nz[k] = ct;
    }
    return out;
}

}  // namespace smsfp
