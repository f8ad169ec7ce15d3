#include "smsfp/renderer.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <stdexcept>

#include "smsfp/diffuse.hpp"

namespace smsfp {

SceneKind scene_kind_from_string(const std::string& s) {
    if (s == "hemisphere") return SceneKind::hemisphere;
    if (s == "paraboloid") return SceneKind::paraboloid;
    if (s == "two-bump" || s == "two_bump") return SceneKind::two_bump;
    if (s == "plane-ramp" || s == "plane_ramp") return SceneKind::plane_ramp;
    throw std::invalid_argument("unknown scene kind: " + s);
}

std::string to_string(SceneKind kind) {
    switch (kind) {
        case SceneKind::hemisphere: return "hemisphere";
        case SceneKind::paraboloid: return "paraboloid";
        case SceneKind::two_bump: return "two-bump";
        case SceneKind::plane_ramp: return "plane-ramp";
    }
    return "unknown";
}

namespace {

void finish_pixel(AnalyticScene& scene, int x, int y, double zx, double zy, double z) {
    const double norm = std::sqrt(1.0 + zx * zx + zy * zy);
    scene.height.at(x, y) = z;
    scene.normals.nx.at(x, y) = -zx / norm;
    scene.normals.ny.at(x, y) = -zy / norm;
    scene.normals.nz.at(x, y) = 1.0 / norm;
    scene.zenith.at(x, y) = std::acos(std::clamp(1.0 / norm, -1.0, 1.0));
    scene.azimuth.at(x, y) = std::atan2(-zy, -zx);
    scene.mask.at(x, y) = 1;
}

}  // namespace

AnalyticScene make_scene(const SceneParams& params) {
    if (params.grid < 16) throw std::invalid_argument("make_scene: grid too small");
    if (!(params.theta_max_deg > 0.0 && params.theta_max_deg < 90.0))
        throw std::invalid_argument("make_scene: theta_max must be in (0, 90) degrees");
    const int n = params.grid;
    const double c = (n - 1) / 2.0;
    const double theta_max = params.theta_max_deg * kPi / 180.0;

    AnalyticScene scene;
    scene.params = params;
    scene.height = HeightMap(n, n, 0.0);
    scene.zenith = RasterF(n, n, 0.0);
    scene.azimuth = RasterF(n, n, 0.0);
    scene.normals = NormalMap(n, n);
    scene.mask = MaskRaster(n, n, 0);

    switch (params.kind) {
        case SceneKind::hemisphere: {
            const double radius = params.radius > 0.0 ? params.radius : 0.4 * n;
            if (radius > c) throw std::invalid_argument("make_scene: radius exceeds half grid");
            const double r_cap = radius * std::sin(theta_max);
            for (int y = 0; y < n; ++y)
                for (int x = 0; x < n; ++x) {
                    const double dx = x - c, dy = y - c;
                    const double r = std::hypot(dx, dy);
                    if (r > r_cap) continue;
                    const double z = std::sqrt(radius * radius - r * r);
                    finish_pixel(scene, x, y, -dx / z, -dy / z, z);
                }
            break;
        }
        case SceneKind::paraboloid: {
            const double radius = params.radius > 0.0 ? params.radius : 0.4 * n;
            if (radius > c) throw std::invalid_argument("make_scene: radius exceeds half grid");
            if (!(params.curvature_a > 0.0 && params.curvature_b > 0.0))
                throw std::invalid_argument("make_scene: curvatures must be positive");
            const double tan_cap = std::tan(theta_max);
            for (int y = 0; y < n; ++y)
                for (int x = 0; x < n; ++x) {
                    const double dx = x - c, dy = y - c;
                    if (std::hypot(dx, dy) > radius) continue;
                    const double zx = -2.0 * params.curvature_a * dx;
                    const double zy = -2.0 * params.curvature_b * dy;
                    if (std::hypot(zx, zy) > tan_cap) continue;
                    const double z = -(params.curvature_a * dx * dx + params.curvature_b * dy * dy);
                    finish_pixel(scene, x, y, zx, zy, z);
                }
            break;
        }
        case SceneKind::two_bump: {
            const double r1 = params.bump_radius1 > 0.0 ? params.bump_radius1 : 0.30 * n;
            const double r2 = params.bump_radius2 > 0.0 ? params.bump_radius2 : 0.22 * n;
            const double sep = params.bump_separation > 0.0 ? params.bump_separation : 0.36 * n;
            const double cx1 = c - sep / 2.0, cx2 = c + sep / 2.0;
            if (cx1 - r1 < 0.0 || cx2 + r2 > n - 1.0)
                throw std::invalid_argument("make_scene: bumps exceed the grid");
            const double cap1 = r1 * std::sin(theta_max), cap2 = r2 * std::sin(theta_max);
            for (int y = 0; y < n; ++y)
                for (int x = 0; x < n; ++x) {
                    const double d1 = std::hypot(x - cx1, y - c);
                    const double d2 = std::hypot(x - cx2, y - c);
                    const bool in1 = d1 <= cap1, in2 = d2 <= cap2;
                    if (!in1 && !in2) continue;
                    const double z1 = in1 ? std::sqrt(r1 * r1 - d1 * d1) : -1.0;
                    const double z2 = in2 ? std::sqrt(r2 * r2 - d2 * d2) : -1.0;
                    if (z1 >= z2) {
                        finish_pixel(scene, x, y, -(x - cx1) / z1, -(y - c) / z1, z1);
                    } else {
                        finish_pixel(scene, x, y, -(x - cx2) / z2, -(y - c) / z2, z2);
                    }
                }
            break;
        }
        case SceneKind::plane_ramp: {
            const int margin = std::max(2, n / 16);
            const double tan_cap = std::tan(theta_max);
            if (std::hypot(params.slope_x, params.slope_y) > tan_cap)
                throw std::invalid_argument("make_scene: ramp slope exceeds theta_max");
            for (int y = margin; y < n - margin; ++y)
                for (int x = margin; x < n - margin; ++x) {
                    const double dx = x - c, dy = y - c;
                    const double z = params.slope_x * dx + params.slope_y * dy;
                    finish_pixel(scene, x, y, params.slope_x, params.slope_y, z);
                }
            break;
        }
    }
    if (count_mask(scene.mask) == 0) throw std::invalid_argument("make_scene: empty silhouette");
    return scene;
}

PolarizedStack render_polarized(const AnalyticScene& scene, const MaterialParams& material,
                                const Illumination& illum, AmbiguityMode mode, double noise_sigma,
                                std::uint64_t seed) {
    material.validate();
    if (!(noise_sigma >= 0.0)) throw std::invalid_argument("render_polarized: noise must be >= 0");
    const Vec3 l = illum.direction.normalized();
    const int w = scene.mask.width(), h = scene.mask.height();

    PolarizedStack stack;
    stack.i0 = RasterF(w, h, 0.0);
    stack.i45 = RasterF(w, h, 0.0);
    stack.i90 = RasterF(w, h, 0.0);
    stack.i135 = RasterF(w, h, 0.0);
    stack.mask = MaskRaster(w, h, 0);

    const double angles[4] = {0.0, kPi / 4.0, kPi / 2.0, 3.0 * kPi / 4.0};
    RasterF* channels[4] = {&stack.i0, &stack.i45, &stack.i90, &stack.i135};

#pragma omp parallel for
    for (int y = 0; y < h; ++y)
        for (int x = 0; x < w; ++x) {
            if (!scene.mask.at(x, y)) continue;
            const double shade = scene.normals.nx.at(x, y) * l.x +
                                 scene.normals.ny.at(x, y) * l.y +
                                 scene.normals.nz.at(x, y) * l.z;
            if (shade <= 0.0) continue;  // shadowed: excluded from the silhouette
            stack.mask.at(x, y) = 1;
            const double intensity = material.albedo * shade;
            const double rho = dop_from_zenith(scene.zenith.at(x, y), material.eta);
            double aop = scene.azimuth.at(x, y);
            if (mode == AmbiguityMode::perpendicular) aop += kPi / 2.0;
            aop = fold_aop(aop);
            for (int j = 0; j < 4; ++j)
                channels[j]->at(x, y) =
                    intensity * (1.0 + rho * std::cos(2.0 * (angles[j] - aop)));
        }

    if (noise_sigma > 0.0) {
        double imax = 0.0;
        for (std::size_t k = 0; k < stack.mask.size(); ++k)
            if (stack.mask[k])
                imax = std::max(imax, 0.5 * (stack.i0[k] + stack.i90[k]));
        std::mt19937_64 rng(seed);
        std::normal_distribution<double> noise(0.0, noise_sigma * imax);
        for (std::size_t k = 0; k < stack.mask.size(); ++k) {
            if (!stack.mask[k]) continue;
            for (RasterF* ch : channels) (*ch)[k] = std::max(0.0, (*ch)[k] + noise(rng));
        }
    }
    return stack;
}

}  // namespace smsfp
