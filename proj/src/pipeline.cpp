#include "smsfp/pipeline.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <map>
#include <stdexcept>

#include "smsfp/distance_transform.hpp"
#include "smsfp/guided_filter.hpp"

namespace smsfp {

SolverConfig ReconstructionConfig::solver_config() const {
    SolverConfig s;
    s.weights = weights;
    s.smoothing_sigma = smoothing_sigma;
    s.max_outer_iterations = max_outer_iterations;
    s.height_tol_rel = height_tol_rel;
    s.use_intensity_rows = use_intensity_rows;
    s.azimuth_printed_form = azimuth_printed_form;
    s.estimate_light = estimate_light;
    s.view = view;
    s.init_material = init_material;
    return s;
}

void ReconstructionConfig::validate() const {
    init_material.validate();
    seg.validate();
    scales.validate();
    if (!(convexity_decay > 0.0))
        throw std::invalid_argument("ReconstructionConfig: convexity decay must be > 0");
    if (guided_radius < 1) throw std::invalid_argument("ReconstructionConfig: guided radius >= 1");
    if (!(guided_eps > 0.0)) throw std::invalid_argument("ReconstructionConfig: guided eps > 0");
    if (max_outer_iterations < 1)
        throw std::invalid_argument("ReconstructionConfig: iteration cap >= 1");
}

namespace {

MaskRaster dilate8(const MaskRaster& mask, const MaskRaster& limit) {
    const int w = mask.width(), h = mask.height();
    MaskRaster out(w, h, 0);
#pragma omp parallel for
    for (int y = 0; y < h; ++y)
        for (int x = 0; x < w; ++x) {
            if (!limit.at(x, y)) continue;
            bool hit = false;
            for (int dy = -1; dy <= 1 && !hit; ++dy)
                for (int dx = -1; dx <= 1 && !hit; ++dx) {
                    const int xx = x + dx, yy = y + dy;
                    if (mask.in_bounds(xx, yy) && mask.at(xx, yy)) hit = true;
                }
            if (hit) out.at(x, y) = 1;
        }
    return out;
}

MaskRaster label_mask(const LabelRaster& labels, int label) {
    MaskRaster out(labels.width(), labels.height(), 0);
    for (std::size_t k = 0; k < labels.size(); ++k)
        if (labels[k] == label) out[k] = 1;
    return out;
}

// Least-squares per-patch constant offsets from overlap pixels; each connected
// component of the overlap graph is pinned at its lowest-label patch.
std::vector<double> align_offsets(const std::vector<RegionPatch>& patches) {
    const std::size_t n = patches.size();
    std::vector<double> offsets(n, 0.0);
    if (n <= 1) return offsets;

    struct PairAcc {
        double sum = 0.0;  // sum of (h_a - h_b) over shared pixels
        std::size_t count = 0;
    };
    std::map<std::pair<std::size_t, std::size_t>, PairAcc> pairs;
    for (std::size_t a = 0; a < n; ++a) {
        if (patches[a].failed) continue;
        for (std::size_t b = a + 1; b < n; ++b) {
            if (patches[b].failed) continue;
            PairAcc acc;
            const MaskRaster& sa = patches[a].support;
            const MaskRaster& sb = patches[b].support;
            for (std::size_t k = 0; k < sa.size(); ++k) {
                if (!sa[k] || !sb[k]) continue;
                acc.sum += patches[a].height[k] - patches[b].height[k];
                ++acc.count;
            }
            if (acc.count > 0) pairs[{a, b}] = acc;
        }
    }
    if (pairs.empty()) return offsets;

    // Connected components over the overlap graph.
    std::vector<std::size_t> comp(n);
    for (std::size_t i = 0; i < n; ++i) comp[i] = i;
    bool changed = true;
    while (changed) {
        changed = false;
        for (const auto& [key, acc] : pairs) {
            const std::size_t ra = comp[key.first], rb = comp[key.second];
            if (ra != rb) {
                const std::size_t lo = std::min(ra, rb);
                for (std::size_t i = 0; i < n; ++i)
                    if (comp[i] == ra || comp[i] == rb) comp[i] = lo;
                changed = true;
            }
        }
    }

    // Normal equations of sum over pairs: (o_a - o_b + mean_ab)^2, with the
    // component root pinned to zero.
    Eigen::MatrixXd h = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(n),
                                              static_cast<Eigen::Index>(n));
    Eigen::VectorXd rhs = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(n));
    for (const auto& [key, acc] : pairs) {
        const auto a = static_cast<Eigen::Index>(key.first);
        const auto b = static_cast<Eigen::Index>(key.second);
        const double wgt = static_cast<double>(acc.count);
        const double mean = acc.sum / static_cast<double>(acc.count);
        h(a, a) += wgt;
        h(b, b) += wgt;
        h(a, b) -= wgt;
        h(b, a) -= wgt;
        rhs(a) -= wgt * mean;
        rhs(b) += wgt * mean;
    }
    for (std::size_t i = 0; i < n; ++i) {
        if (comp[i] == i) {  // component root: pin
            const auto ii = static_cast<Eigen::Index>(i);
            h(ii, ii) += 1.0;
        }
    }
    const Eigen::VectorXd o = h.ldlt().solve(rhs);
    for (std::size_t i = 0; i < n; ++i) offsets[i] = o(static_cast<Eigen::Index>(i));
    return offsets;
}

}  // namespace

HeightMap stitch_regions(const std::vector<RegionPatch>& patches, const RegionLabels& labels,
                         const MaskRaster& mask, const RasterF& guide, int radius, double eps) {
    require_same_size(labels.labels, mask, "stitch_regions");
    require_same_size(guide, mask, "stitch_regions");
    if (patches.empty()) throw std::invalid_argument("stitch_regions: no patches");

    std::map<int, std::size_t> patch_by_label;
    for (std::size_t i = 0; i < patches.size(); ++i) {
        require_same_size(patches[i].support, mask, "stitch_regions");
        patch_by_label[patches[i].label] = i;
    }
    for (std::size_t k = 0; k < mask.size(); ++k) {
        const int l = labels.labels[k];
        if (!mask[k] || l <= 0) continue;
        auto it = patch_by_label.find(l);
        if (it == patch_by_label.end() || !patches[it->second].support[k])
            throw std::invalid_argument("stitch_regions: mask pixel not covered by its region patch");
    }

    const std::vector<double> offsets = align_offsets(patches);

    // Concatenate by label ownership.
    HeightMap height(mask.width(), mask.height(), 0.0);
    for (std::size_t k = 0; k < mask.size(); ++k) {
        const int l = labels.labels[k];
        if (!mask[k] || l <= 0) continue;
        const std::size_t i = patch_by_label[l];
        if (patches[i].failed) continue;
        height[k] = patches[i].height[k] + offsets[i];
    }

    // Seam band: mask pixels within `radius` of a cross-region boundary.
    const int w = mask.width(), h = mask.height();
    MaskRaster seam(w, h, 0);
    bool any_seam = false;
    for (int y = 0; y < h; ++y)
        for (int x = 0; x < w; ++x) {
            if (!mask.at(x, y) || labels.labels.at(x, y) <= 0) continue;
            const int l = labels.labels.at(x, y);
            const int offs[4][2] = {{1, 0}, {-1, 0}, {0, 1}, {0, -1}};
            for (const auto& o : offs) {
                const int xx = x + o[0], yy = y + o[1];
                if (!mask.in_bounds(xx, yy) || !mask.at(xx, yy)) continue;
                const int l2 = labels.labels.at(xx, yy);
                if (l2 > 0 && l2 != l) {
                    seam.at(x, y) = 1;
                    any_seam = true;
                    break;
                }
            }
        }
    if (!any_seam) return height;

    const DistanceTransformResult dt = distance_to_sites(seam, mask);
    MaskRaster band(w, h, 0), outside_band(w, h, 0);
    for (std::size_t k = 0; k < mask.size(); ++k) {
        if (!mask[k]) continue;
        if (dt.dist[k] <= radius)
            band[k] = 1;
        else
            outside_band[k] = 1;
    }

    // Band values are regressed from outside-band statistics only, which makes
    // the smoothing a projection: re-running the stitch changes nothing.
    return guided_filter(height, guide, outside_band, band, radius, eps);
}

ReconstructionResult run_smsfp(const PolarizedStack& stack, const ReconstructionConfig& config,
                               const RasterF* oracle_azimuth) {
    config.validate();
    stack.validate();
    const MaskRaster& mask = stack.mask;

    ReconstructionResult result;
    const PolarMaps polar = decompose_stack(stack);
    result.dop_clamp_count = polar.dop_clamp_count;

    if (config.single_region) {
        result.labels.labels = LabelRaster(mask.width(), mask.height(), 0);
        for (std::size_t k = 0; k < mask.size(); ++k)
            if (mask[k]) result.labels.labels[k] = 1;
        result.labels.region_count = 1;
    } else {
        result.labels = segment(polar, mask, config.seg);
    }

    // Global prior (shared when region_local_prior is off).
    RasterF global_prior;
    if (!config.region_local_prior && !oracle_azimuth) {
        const ImplicitAzimuthMap im = implicit_azimuth_from_mask(mask);
        global_prior =
            fused_implicit_azimuth(polar.aop, im, config.scales, mask, config.mfcp_use_texture);
    }

    const SolverConfig solver_cfg = config.solver_config();
    const int n_regions = result.labels.region_count;
    std::vector<RegionPatch> patches(static_cast<std::size_t>(n_regions));
    std::vector<RegionResult> region_results(static_cast<std::size_t>(n_regions));
    std::vector<std::uint8_t> failed(static_cast<std::size_t>(n_regions), 0);

#pragma omp parallel for schedule(dynamic)
    for (int r = 1; r <= n_regions; ++r) {
        RegionPatch& patch = patches[static_cast<std::size_t>(r - 1)];
        patch.label = r;
        const MaskRaster region = label_mask(result.labels.labels, r);
        patch.support = dilate8(region, mask);
        try {
            RasterF prior;
            if (oracle_azimuth) {
                prior = *oracle_azimuth;
            } else if (config.region_local_prior) {
                const ImplicitAzimuthMap im = implicit_azimuth_from_mask(patch.support);
                prior = fused_implicit_azimuth(polar.aop, im, config.scales, patch.support,
                                               config.mfcp_use_texture);
            } else {
                prior = global_prior;
            }
            const ConvexityWeights conv = convexity_weights(patch.support, config.convexity_decay);
            region_results[static_cast<std::size_t>(r - 1)] =
                reconstruct_region(polar, patch.support, prior, conv, solver_cfg);
            patch.height = region_results[static_cast<std::size_t>(r - 1)].height;
        } catch (const std::exception&) {
            failed[static_cast<std::size_t>(r - 1)] = 1;
            patch.failed = true;
            patch.height = RasterF(mask.width(), mask.height(), 0.0);
        }
    }

    for (int r = 1; r <= n_regions; ++r) {
        const RegionResult& rr = region_results[static_cast<std::size_t>(r - 1)];
        ReconstructionResult::RegionDiag diag;
        diag.label = r;
        diag.pixels = count_mask(label_mask(result.labels.labels, r));
        diag.failed = failed[static_cast<std::size_t>(r - 1)] != 0;
        diag.converged = rr.converged;
        diag.iterations = rr.iterations;
        diag.intensity_rows_used = rr.intensity_rows_used;
        diag.eta = rr.material.eta;
        diag.albedo = rr.material.albedo;
        diag.final_objective = rr.diag.empty() ? 0.0 : rr.diag.back().objective;
        result.regions.push_back(diag);
    }

    HeightMap height = stitch_regions(patches, result.labels, mask, polar.intensity,
                                      config.guided_radius, config.guided_eps);

    // Failed regions: distance-weighted average of neighboring boundary heights.
    for (int r = 1; r <= n_regions; ++r) {
        if (!failed[static_cast<std::size_t>(r - 1)]) continue;
        std::vector<std::size_t> frontier;  // healthy pixels adjacent to region r
        const int w = mask.width(), h = mask.height();
        for (int y = 0; y < h; ++y)
            for (int x = 0; x < w; ++x) {
                if (result.labels.labels.at(x, y) != r) continue;
                const int offs[4][2] = {{1, 0}, {-1, 0}, {0, 1}, {0, -1}};
                for (const auto& o : offs) {
                    const int xx = x + o[0], yy = y + o[1];
                    if (!mask.in_bounds(xx, yy) || !mask.at(xx, yy)) continue;
                    const int l2 = result.labels.labels.at(xx, yy);
                    if (l2 > 0 && l2 != r && !failed[static_cast<std::size_t>(l2 - 1)])
                        frontier.push_back(mask.idx(xx, yy));
                }
            }
        if (frontier.empty()) continue;
        std::sort(frontier.begin(), frontier.end());
        frontier.erase(std::unique(frontier.begin(), frontier.end()), frontier.end());
        for (int y = 0; y < h; ++y)
            for (int x = 0; x < w; ++x) {
                if (result.labels.labels.at(x, y) != r) continue;
                double num = 0.0, den = 0.0;
                for (std::size_t b : frontier) {
                    const int bx = static_cast<int>(b % static_cast<std::size_t>(w));
                    const int by = static_cast<int>(b / static_cast<std::size_t>(w));
                    const double d = std::hypot(x - bx, y - by);
                    const double wgt = 1.0 / (1.0 + d);
                    num += wgt * height[b];
                    den += wgt;
                }
                height.at(x, y) = num / den;
            }
    }

    // Final gauge: mean-zero over the mask.
    double mean = 0.0;
    std::size_t count = 0;
    for (std::size_t k = 0; k < mask.size(); ++k)
        if (mask[k]) {
            mean += height[k];
            ++count;
        }
    mean /= static_cast<double>(count);
    for (std::size_t k = 0; k < mask.size(); ++k)
        if (mask[k]) height[k] -= mean;

    const GradientOperators ops = build_gradient_operators(mask, config.smoothing_sigma);
    result.height = std::move(height);
    result.normals = normals_from_height(result.height, ops);
    return result;
}

}  // namespace smsfp
