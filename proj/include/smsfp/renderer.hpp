#pragma once

#include <cstdint>
#include <string>

#include "smsfp/polarimetry.hpp"
#include "smsfp/raster.hpp"
#include "smsfp/types.hpp"

namespace smsfp {

enum class SceneKind { hemisphere, paraboloid, two_bump, plane_ramp };

SceneKind scene_kind_from_string(const std::string& s);
std::string to_string(SceneKind kind);

struct SceneParams {
    SceneKind kind = SceneKind::hemisphere;
    int grid = 256;
    double radius = 0.0;          // 0 = 0.4 * grid
    double theta_max_deg = 85.0;  // silhouette cap for curved scenes
    // paraboloid z = -(a dx^2 + b dy^2)
    double curvature_a = 0.004, curvature_b = 0.006;
    // plane ramp z = sx dx + sy dy on an inset rectangle
    double slope_x = 0.3, slope_y = 0.2;
    // two-bump: spherical caps of different radii on a common base plane
    double bump_radius1 = 0.0;    // 0 = 0.30 * grid
    double bump_radius2 = 0.0;    // 0 = 0.22 * grid
    double bump_separation = 0.0; // 0 = 0.36 * grid
};

struct AnalyticScene {
    SceneParams params;
    HeightMap height;
    RasterF zenith, azimuth;  // azimuth in [-pi, pi)
    NormalMap normals;
    MaskRaster mask;
};

AnalyticScene make_scene(const SceneParams& params);

enum class AmbiguityMode { parallel, perpendicular };

// Lambert shading + diffuse Fresnel DOP + Eq-(1) synthesis at the four
// polarizer angles. Shadowed pixels leave the returned mask. noise_sigma
// scales additive Gaussian noise by the brightest average intensity.
PolarizedStack render_polarized(const AnalyticScene& scene, const MaterialParams& material,
                                const Illumination& illum,
                                AmbiguityMode mode = AmbiguityMode::parallel,
                                double noise_sigma = 0.0, std::uint64_t seed = 0);

}  // namespace smsfp
