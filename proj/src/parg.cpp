#include "smsfp/parg.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <numeric>
#include <stdexcept>

namespace smsfp {

void SegConfig::validate() const {
    if (!(tau > 0.0)) throw std::invalid_argument("SegConfig: tau must be > 0");
    if (window < 3 || window % 2 == 0)
        throw std::invalid_argument("SegConfig: window must be odd and >= 3");
    if (lambda_rho < 0.0 || lambda_phi < 0.0)
        throw std::invalid_argument("SegConfig: adaptive strengths must be >= 0");
    if (seed_grid_stride < 1) throw std::invalid_argument("SegConfig: seed stride must be >= 1");
}

int SegConfig::effective_min_region(std::size_t mask_px) const {
    if (min_region_px > 0) return min_region_px;
    return std::max<int>(16, static_cast<int>(mask_px / 50));
}

double SegConfig::effective_merge_threshold() const {
    if (merge_threshold < 0.0) return 0.0;  // distances are >= 0: merging off
    return merge_threshold > 0.0 ? merge_threshold : tau;
}

FeatureField build_feature_field(const PolarMaps& polar, const MaskRaster& mask) {
    require_same_size(polar.intensity, mask, "build_feature_field");
    const int w = mask.width(), h = mask.height();
    FeatureField f;
    f.rho = RasterF(w, h, 0.0);
    f.cos2phi = RasterF(w, h, 0.0);
    f.sin2phi = RasterF(w, h, 0.0);
    const RasterF raw_grad = aop_gradient_magnitude(polar.aop, mask);

    const std::size_t n = mask.size();
#pragma omp parallel for
    for (std::size_t k = 0; k < n; ++k) {
        if (!mask[k]) continue;
        f.rho[k] = std::clamp(polar.dop[k], 0.0, 1.0);
        f.cos2phi[k] = std::cos(2.0 * polar.aop[k]);
        f.sin2phi[k] = std::sin(2.0 * polar.aop[k]);
    }

    // Normalize |grad phi| by its mask-wide 95th percentile (fall back to the
    // max when the percentile vanishes) so tau is not image dependent.
    std::vector<double> vals;
    vals.reserve(n);
    double vmax = 0.0;
    for (std::size_t k = 0; k < n; ++k) {
        if (!mask[k]) continue;
        vals.push_back(raw_grad[k]);
        vmax = std::max(vmax, raw_grad[k]);
    }
    double denom = 1.0;
    if (!vals.empty()) {
        const std::size_t idx = static_cast<std::size_t>(0.95 * static_cast<double>(vals.size() - 1));
        std::nth_element(vals.begin(), vals.begin() + static_cast<std::ptrdiff_t>(idx), vals.end());
        const double p95 = vals[idx];
        denom = p95 > 1e-12 ? p95 : (vmax > 1e-12 ? vmax : 1.0);
    }
    f.grad_norm = denom;
    f.grad = RasterF(w, h, 0.0);
#pragma omp parallel for
    for (std::size_t k = 0; k < n; ++k)
        if (mask[k]) f.grad[k] = raw_grad[k] / denom;
    return f;
}

std::pair<RasterF, RasterF> local_reliability(const RasterF& rho, const RasterF& aop,
                                              const MaskRaster& mask, int window) {
    require_same_size(rho, mask, "local_reliability");
    require_same_size(aop, mask, "local_reliability");
    if (window < 3 || window % 2 == 0)
        throw std::invalid_argument("local_reliability: window must be odd and >= 3");
    if (count_mask(mask) == 0) throw std::invalid_argument("local_reliability: empty mask");

    const int w = mask.width(), h = mask.height();
    const int r = window / 2;
    RasterF var_rho(w, h, 0.0), var_phi(w, h, 0.0);

#pragma omp parallel for
    for (int y = 0; y < h; ++y) {
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
            // circular variance on the doubled-angle embedding
            var_phi.at(x, y) = std::max(0.0, 1.0 - (mc * inv) * (mc * inv) - (ms * inv) * (ms * inv));
        }
    }

    double max_rho = 0.0, max_phi = 0.0;
    for (std::size_t k = 0; k < mask.size(); ++k) {
        if (!mask[k]) continue;
        max_rho = std::max(max_rho, var_rho[k]);
        max_phi = std::max(max_phi, var_phi[k]);
    }

    // variances below float noise count as zero
    constexpr double kVarFloor = 1e-14;
    RasterF r_rho(w, h, 0.0), r_phi(w, h, 0.0);
    const std::size_t n = mask.size();
#pragma omp parallel for
    for (std::size_t k = 0; k < n; ++k) {
        if (!mask[k]) continue;
        r_rho[k] = max_rho > kVarFloor ? std::exp(-var_rho[k] / max_rho) : 1.0;
        r_phi[k] = max_phi > kVarFloor ? std::exp(-var_phi[k] / max_phi) : 1.0;
    }
    return {std::move(r_rho), std::move(r_phi)};
}

std::array<double, 4> adaptive_weights(double r_rho, double r_phi, const SegConfig& config) {
    return {1.0 + config.lambda_rho * r_rho, 1.0 + config.lambda_phi * r_phi,
            1.0 + config.lambda_phi * r_phi, 1.0};
}

double feature_distance(const std::array<double, 4>& f_neighbor,
                        const std::array<double, 4>& f_seed,
                        const std::array<double, 4>& weights) {
    double acc = 0.0;
    for (std::size_t i = 0; i < 4; ++i) {
        const double d = weights[i] * (f_neighbor[i] - f_seed[i]);
        acc += d * d;
    }
    return std::sqrt(acc);
}

namespace {

struct GrowState {
    LabelRaster labels;
    std::vector<std::array<double, 4>> seed_feature;  // 1-based by label
    std::vector<std::size_t> member_count;
};

const int kOffsets4[4][2] = {{1, 0}, {-1, 0}, {0, 1}, {0, -1}};
const int kOffsets8[8][2] = {{1, 0}, {-1, 0}, {0, 1}, {0, -1}, {1, 1}, {1, -1}, {-1, 1}, {-1, -1}};

}  // namespace

RegionLabels region_grow(const FeatureField& field, const RasterF& r_rho, const RasterF& r_phi,
                         const MaskRaster& mask, const SegConfig& config) {
    config.validate();
    require_same_size(field.rho, mask, "region_grow");
    if (count_mask(mask) == 0) throw std::invalid_argument("region_grow: empty mask");

    const int w = mask.width(), h = mask.height();
    GrowState st;
    st.labels = LabelRaster(w, h, 0);
    st.seed_feature.push_back({});  // label 0 placeholder
    st.member_count.push_back(0);

    const auto* offsets = config.eight_connect ? &kOffsets8[0] : &kOffsets4[0];
    const int n_offsets = config.eight_connect ? 8 : 4;

    std::vector<std::int32_t> queue;
    queue.reserve(mask.size());
    std::size_t head = 0;

    auto make_seed = [&](int x, int y) {
        st.seed_feature.push_back(field.at(mask.idx(x, y)));
        st.member_count.push_back(1);
        const int label = static_cast<int>(st.seed_feature.size()) - 1;
        st.labels.at(x, y) = label;
        queue.push_back(static_cast<std::int32_t>(mask.idx(x, y)));
    };

    auto drain = [&]() {
        while (head < queue.size()) {
            const std::int32_t p = queue[head++];
            const int px = static_cast<int>(p % w), py = static_cast<int>(p / w);
            const int label = st.labels[static_cast<std::size_t>(p)];
            for (int i = 0; i < n_offsets; ++i) {
                const int qx = px + offsets[i][0], qy = py + offsets[i][1];
                if (!mask.in_bounds(qx, qy) || !mask.at(qx, qy)) continue;
                if (st.labels.at(qx, qy) != 0) continue;
                const std::size_t qk = mask.idx(qx, qy);
                const auto wgt = adaptive_weights(r_rho[qk], r_phi[qk], config);
                const auto fq = field.at(qk);
                if (feature_distance(fq, st.seed_feature[static_cast<std::size_t>(label)], wgt) >=
                    config.tau)
                    continue;
                st.labels.at(qx, qy) = label;
                queue.push_back(static_cast<std::int32_t>(qk));
                if (config.update_seed_feature) {
                    auto& sf = st.seed_feature[static_cast<std::size_t>(label)];
                    const double inv = 1.0 / static_cast<double>(++st.member_count[static_cast<std::size_t>(label)]);
                    for (std::size_t c = 0; c < 4; ++c) sf[c] += (fq[c] - sf[c]) * inv;
                } else {
                    ++st.member_count[static_cast<std::size_t>(label)];
                }
            }
        }
    };

    // Grid seeds, plus strict local minima of the gradient channel.
    const int stride = config.seed_grid_stride;
    MaskRaster is_seed(w, h, 0);
    for (int y = stride / 2; y < h; y += stride)
        for (int x = stride / 2; x < w; x += stride)
            if (mask.at(x, y)) is_seed.at(x, y) = 1;
    for (int y = 0; y < h; ++y)
        for (int x = 0; x < w; ++x) {
            if (!mask.at(x, y) || is_seed.at(x, y)) continue;
            const double g = field.grad.at(x, y);
            bool strict_min = false;
            for (int i = 0; i < 8; ++i) {
                const int xx = x + kOffsets8[i][0], yy = y + kOffsets8[i][1];
                if (!mask.in_bounds(xx, yy) || !mask.at(xx, yy)) continue;
                if (field.grad.at(xx, yy) > g)
                    strict_min = true;
                else {
                    strict_min = false;
                    break;
                }
            }
            if (strict_min) is_seed.at(x, y) = 1;
        }
    for (int y = 0; y < h; ++y)
        for (int x = 0; x < w; ++x)
            if (is_seed.at(x, y)) make_seed(x, y);
    drain();

    // Second pass: every unreached mask pixel becomes a fresh seed and grows.
    for (int y = 0; y < h; ++y)
        for (int x = 0; x < w; ++x) {
            if (!mask.at(x, y) || st.labels.at(x, y) != 0) continue;
            make_seed(x, y);
            drain();
        }

    RegionLabels out;
    out.labels = std::move(st.labels);
    out.region_count = static_cast<int>(st.seed_feature.size()) - 1;
    return out;
}

namespace {

struct RegionStats {
    std::size_t count = 0;
    std::array<double, 4> mean{};
    int min_x = std::numeric_limits<int>::max(), min_y = std::numeric_limits<int>::max();
    int max_x = -1, max_y = -1;
};

std::map<int, RegionStats> collect_stats(const LabelRaster& labels, const FeatureField& field,
                                         const MaskRaster& mask) {
    std::map<int, RegionStats> stats;
    const int w = labels.width(), h = labels.height();
    for (int y = 0; y < h; ++y)
        for (int x = 0; x < w; ++x) {
            if (!mask.at(x, y)) continue;
            const int l = labels.at(x, y);
            if (l <= 0) continue;
            RegionStats& s = stats[l];
            ++s.count;
            const auto f = field.at(mask.idx(x, y));
            for (std::size_t c = 0; c < 4; ++c) s.mean[c] += f[c];
            s.min_x = std::min(s.min_x, x);
            s.min_y = std::min(s.min_y, y);
            s.max_x = std::max(s.max_x, x);
            s.max_y = std::max(s.max_y, y);
        }
    for (auto& [l, s] : stats)
        for (std::size_t c = 0; c < 4; ++c) s.mean[c] /= static_cast<double>(s.count);
    return stats;
}

double mean_feature_distance(const RegionStats& a, const RegionStats& b) {
    double acc = 0.0;
    for (std::size_t c = 0; c < 4; ++c) {
        const double d = a.mean[c] - b.mean[c];
        acc += d * d;
    }
    return std::sqrt(acc);
}

// Fills enclosed pockets of each region: complement components inside the
// region's bounding box that touch neither the expanded-box border nor any
// other region. Only mask pixels are relabeled.
void fill_holes(LabelRaster& labels, const MaskRaster& mask) {
    const int w = labels.width(), h = labels.height();
    std::map<int, RegionStats> boxes;
    for (int y = 0; y < h; ++y)
        for (int x = 0; x < w; ++x) {
            const int l = labels.at(x, y);
            if (l <= 0) continue;
            RegionStats& s = boxes[l];
            s.min_x = std::min(s.min_x, x);
            s.min_y = std::min(s.min_y, y);
            s.max_x = std::max(s.max_x, x);
            s.max_y = std::max(s.max_y, y);
        }

    std::vector<std::int32_t> stack;
    for (const auto& [label, box] : boxes) {
        const int x0 = std::max(0, box.min_x - 1), y0 = std::max(0, box.min_y - 1);
        const int x1 = std::min(w - 1, box.max_x + 1), y1 = std::min(h - 1, box.max_y + 1);
        const int bw = x1 - x0 + 1, bh = y1 - y0 + 1;
        // visited: 0 unseen, 1 outside-reachable, 2 hole candidate
        std::vector<std::uint8_t> state(static_cast<std::size_t>(bw) * bh, 0);
        auto sidx = [&](int x, int y) {
            return static_cast<std::size_t>(y - y0) * bw + static_cast<std::size_t>(x - x0);
        };

        stack.clear();
        auto push_outside = [&](int x, int y) {
            if (labels.at(x, y) == label || state[sidx(x, y)] != 0) return;
            state[sidx(x, y)] = 1;
            stack.push_back(static_cast<std::int32_t>(y) * w + x);
        };
        for (int x = x0; x <= x1; ++x) {
            push_outside(x, y0);
            push_outside(x, y1);
        }
        for (int y = y0; y <= y1; ++y) {
            push_outside(x0, y);
            push_outside(x1, y);
        }
        while (!stack.empty()) {
            const std::int32_t p = stack.back();
            stack.pop_back();
            const int px = p % w, py = p / w;
            for (const auto& o : kOffsets4) {
                const int qx = px + o[0], qy = py + o[1];
                if (qx < x0 || qx > x1 || qy < y0 || qy > y1) continue;
                push_outside(qx, qy);
            }
        }

        // Remaining non-label, non-visited pixels are enclosed; group them.
        for (int y = y0; y <= y1; ++y)
            for (int x = x0; x <= x1; ++x) {
                if (labels.at(x, y) == label || state[sidx(x, y)] != 0) continue;
                std::vector<std::int32_t> comp;
                bool other_region = false;
                state[sidx(x, y)] = 2;
                stack.clear();
                stack.push_back(static_cast<std::int32_t>(y) * w + x);
                while (!stack.empty()) {
                    const std::int32_t p = stack.back();
                    stack.pop_back();
                    comp.push_back(p);
                    const int px = p % w, py = p / w;
                    if (labels[static_cast<std::size_t>(p)] > 0 &&
                        labels[static_cast<std::size_t>(p)] != label)
                        other_region = true;
                    for (const auto& o : kOffsets4) {
                        const int qx = px + o[0], qy = py + o[1];
                        if (qx < x0 || qx > x1 || qy < y0 || qy > y1) continue;
                        if (labels.at(qx, qy) == label || state[sidx(qx, qy)] != 0) continue;
                        state[sidx(qx, qy)] = 2;
                        stack.push_back(static_cast<std::int32_t>(qy) * w + qx);
                    }
                }
                if (other_region) continue;
                for (std::int32_t p : comp)
                    if (mask[static_cast<std::size_t>(p)]) labels[static_cast<std::size_t>(p)] = label;
            }
    }
}

// Merges 4-adjacent regions whose median boundary-pair feature distance falls
// below the threshold, smallest first. The median keeps a handful of outlier
// pairs (e.g. near an azimuth singularity) from blocking a merge, while a
// genuine feature edge raises every pair and still separates regions.
void merge_similar(LabelRaster& labels, const FeatureField& field, const RasterF& r_rho,
                   const RasterF& r_phi, const MaskRaster& mask, const SegConfig& config) {
    const int w = labels.width(), h = labels.height();
    const double threshold = config.effective_merge_threshold();

    while (true) {
        std::map<std::pair<int, int>, std::vector<double>> pair_dists;
        for (int y = 0; y < h; ++y)
            for (int x = 0; x < w; ++x) {
                const int la = labels.at(x, y);
                if (la <= 0) continue;
                const std::size_t ka = mask.idx(x, y);
                for (int pass = 0; pass < 2; ++pass) {
                    const int qx = pass == 0 ? x + 1 : x;
                    const int qy = pass == 0 ? y : y + 1;
                    if (!labels.in_bounds(qx, qy)) continue;
                    const int lb = labels.at(qx, qy);
                    if (lb <= 0 || lb == la) continue;
                    const std::size_t kb = mask.idx(qx, qy);
                    const auto wa = adaptive_weights(r_rho[ka], r_phi[ka], config);
                    const auto wb = adaptive_weights(r_rho[kb], r_phi[kb], config);
                    std::array<double, 4> wm;
                    for (std::size_t c = 0; c < 4; ++c) wm[c] = 0.5 * (wa[c] + wb[c]);
                    const auto key = std::minmax(la, lb);
                    pair_dists[{key.first, key.second}].push_back(
                        feature_distance(field.at(ka), field.at(kb), wm));
                }
            }

        double best = threshold;
        std::pair<int, int> best_pair{0, 0};
        for (auto& [key, dists] : pair_dists) {
            std::nth_element(dists.begin(), dists.begin() + dists.size() / 2, dists.end());
            const double median = dists[dists.size() / 2];
            if (median < best) {
                best = median;
                best_pair = key;
            }
        }
        if (best_pair.first == 0) break;
        for (std::size_t k = 0; k < labels.size(); ++k)
            if (labels[k] == best_pair.second) labels[k] = best_pair.first;
    }
}

// Merges undersized regions into the 4-adjacent neighbor with the closest mean
// feature vector, smallest region first.
void merge_small(LabelRaster& labels, const FeatureField& field, const MaskRaster& mask,
                 const SegConfig& config) {
    const int w = labels.width(), h = labels.height();
    const int min_px = config.effective_min_region(count_mask(mask));

    while (true) {
        std::map<int, RegionStats> stats = collect_stats(labels, field, mask);
        if (stats.size() <= 1) break;
        std::map<int, std::vector<int>> neighbors;
        for (int y = 0; y < h; ++y)
            for (int x = 0; x < w; ++x) {
                const int la = labels.at(x, y);
                if (la <= 0) continue;
                for (int pass = 0; pass < 2; ++pass) {
                    const int qx = pass == 0 ? x + 1 : x;
                    const int qy = pass == 0 ? y : y + 1;
                    if (!labels.in_bounds(qx, qy)) continue;
                    const int lb = labels.at(qx, qy);
                    if (lb <= 0 || lb == la) continue;
                    auto& na = neighbors[la];
                    if (std::find(na.begin(), na.end(), lb) == na.end()) na.push_back(lb);
                    auto& nb = neighbors[lb];
                    if (std::find(nb.begin(), nb.end(), la) == nb.end()) nb.push_back(la);
                }
            }

        int victim = 0;
        std::size_t victim_count = static_cast<std::size_t>(min_px);
        for (const auto& [l, s] : stats) {
            if (s.count < victim_count && !neighbors[l].empty()) {
                victim = l;
                victim_count = s.count;
            }
        }
        if (victim == 0) break;

        int target = 0;
        double best = std::numeric_limits<double>::infinity();
        std::vector<int> ns = neighbors[victim];
        std::sort(ns.begin(), ns.end());
        for (int nb : ns) {
            const double d = mean_feature_distance(stats[victim], stats[nb]);
            if (d < best) {
                best = d;
                target = nb;
            }
        }
        for (std::size_t k = 0; k < labels.size(); ++k)
            if (labels[k] == victim) labels[k] = target;
    }
}

// Gaussian smoothing (sigma = 1) of per-region indicators followed by argmax
// relabeling of mask pixels. Ties resolve to the smaller label.
void smooth_boundaries(LabelRaster& labels, const MaskRaster& mask) {
    const int w = labels.width(), h = labels.height();
    constexpr int radius = 3;
    std::array<double, 2 * radius + 1> kernel;
    double ksum = 0.0;
    for (int k = -radius; k <= radius; ++k) {
        kernel[static_cast<std::size_t>(k + radius)] = std::exp(-0.5 * k * k);
        ksum += kernel[static_cast<std::size_t>(k + radius)];
    }
    for (double& v : kernel) v /= ksum;

    {
        std::map<int, RegionStats> boxes;
        for (int y = 0; y < h; ++y)
            for (int x = 0; x < w; ++x) {
                const int l = labels.at(x, y);
                if (l <= 0) continue;
                RegionStats& s = boxes[l];
                s.min_x = std::min(s.min_x, x);
                s.min_y = std::min(s.min_y, y);
                s.max_x = std::max(s.max_x, x);
                s.max_y = std::max(s.max_y, y);
            }
        if (boxes.size() <= 1) return;

        RasterF best_score(w, h, -1.0);
        LabelRaster best_label(w, h, 0);
        for (const auto& [label, box] : boxes) {
            const int x0 = std::max(0, box.min_x - radius), y0 = std::max(0, box.min_y - radius);
            const int x1 = std::min(w - 1, box.max_x + radius), y1 = std::min(h - 1, box.max_y + radius);
            const int bw = x1 - x0 + 1, bh = y1 - y0 + 1;
            std::vector<double> tmp(static_cast<std::size_t>(bw) * bh, 0.0);
            std::vector<double> sm(static_cast<std::size_t>(bw) * bh, 0.0);
            for (int y = y0; y <= y1; ++y)
                for (int x = x0; x <= x1; ++x) {
                    double acc = 0.0;
                    for (int k = -radius; k <= radius; ++k) {
                        const int xx = x + k;
                        if (xx < 0 || xx >= w) continue;
                        acc += kernel[static_cast<std::size_t>(k + radius)] *
                               (labels.at(xx, y) == label ? 1.0 : 0.0);
                    }
                    tmp[static_cast<std::size_t>(y - y0) * bw + (x - x0)] = acc;
                }
            for (int y = y0; y <= y1; ++y)
                for (int x = x0; x <= x1; ++x) {
                    double acc = 0.0;
                    for (int k = -radius; k <= radius; ++k) {
                        const int yy = y + k;
                        if (yy < y0 || yy > y1) {
                            // outside the expanded box the indicator is zero
                            continue;
                        }
                        acc += kernel[static_cast<std::size_t>(k + radius)] *
                               tmp[static_cast<std::size_t>(yy - y0) * bw + (x - x0)];
                    }
                    sm[static_cast<std::size_t>(y - y0) * bw + (x - x0)] = acc;
                }
            for (int y = y0; y <= y1; ++y)
                for (int x = x0; x <= x1; ++x) {
                    if (!mask.at(x, y)) continue;
                    const double s = sm[static_cast<std::size_t>(y - y0) * bw + (x - x0)];
                    if (s > best_score.at(x, y)) {
                        best_score.at(x, y) = s;
                        best_label.at(x, y) = label;
                    }
                }
        }
        for (std::size_t k = 0; k < labels.size(); ++k)
            if (mask[k] && best_label[k] > 0) labels[k] = best_label[k];
    }
}

// Splits labels into 4-connected components and renumbers them 1..K in
// raster-scan discovery order.
RegionLabels relabel_components(const LabelRaster& labels, const MaskRaster& mask) {
    const int w = labels.width(), h = labels.height();
    RegionLabels out;
    out.labels = LabelRaster(w, h, 0);
    std::vector<std::int32_t> stack;
    int next = 0;
    for (int y = 0; y < h; ++y)
        for (int x = 0; x < w; ++x) {
            if (!mask.at(x, y) || labels.at(x, y) <= 0 || out.labels.at(x, y) != 0) continue;
            const int old_label = labels.at(x, y);
            ++next;
            out.labels.at(x, y) = next;
            stack.clear();
            stack.push_back(static_cast<std::int32_t>(y) * w + x);
            while (!stack.empty()) {
                const std::int32_t p = stack.back();
                stack.pop_back();
                const int px = p % w, py = p / w;
                for (const auto& o : kOffsets4) {
                    const int qx = px + o[0], qy = py + o[1];
                    if (!mask.in_bounds(qx, qy) || !mask.at(qx, qy)) continue;
                    if (labels.at(qx, qy) != old_label || out.labels.at(qx, qy) != 0) continue;
                    out.labels.at(qx, qy) = next;
                    stack.push_back(static_cast<std::int32_t>(qy) * w + qx);
                }
            }
        }
    out.region_count = next;
    return out;
}

}  // namespace

RegionLabels post_process(const RegionLabels& labels, const FeatureField& field,
                          const RasterF& r_rho, const RasterF& r_phi, const MaskRaster& mask,
                          const SegConfig& config) {
    config.validate();
    require_same_size(labels.labels, mask, "post_process");

    LabelRaster work = labels.labels;
    fill_holes(work, mask);
    merge_similar(work, field, r_rho, r_phi, mask, config);
    merge_small(work, field, mask, config);
    smooth_boundaries(work, mask);

    RegionLabels components = relabel_components(work, mask);
    merge_small(components.labels, field, mask, config);
    return relabel_components(components.labels, mask);
}

RegionLabels segment(const PolarMaps& polar, const MaskRaster& mask, const SegConfig& config) {
    if (count_mask(mask) == 0) throw std::invalid_argument("segment: empty mask");
    const FeatureField field = build_feature_field(polar, mask);
    const auto [r_rho, r_phi] = local_reliability(polar.dop, polar.aop, mask, config.window);
    const RegionLabels grown = region_grow(field, r_rho, r_phi, mask, config);
    return post_process(grown, field, r_rho, r_phi, mask, config);
}

std::vector<std::size_t> region_sizes(const RegionLabels& labels) {
    std::vector<std::size_t> sizes(static_cast<std::size_t>(labels.region_count) + 1, 0);
    for (std::size_t k = 0; k < labels.labels.size(); ++k) {
        const int l = labels.labels[k];
        if (l >= 0 && l <= labels.region_count) ++sizes[static_cast<std::size_t>(l)];
    }
    return sizes;
}

}  // namespace smsfp
