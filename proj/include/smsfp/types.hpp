#pragma once

#include <array>
#include <cmath>
#include <stdexcept>

#include "smsfp/raster.hpp"

namespace smsfp {

inline constexpr double kPi = 3.14159265358979323846;

using HeightMap = RasterF;

// Unit surface normals stored as three rasters; z points toward the camera.
struct NormalMap {
    RasterF nx, ny, nz;

    NormalMap() = default;
    NormalMap(int width, int height)
        : nx(width, height, 0.0), ny(width, height, 0.0), nz(width, height, 1.0) {}

    int width() const { return nx.width(); }
    int height() const { return nx.height(); }
};

struct Vec3 {
    double x = 0.0, y = 0.0, z = 0.0;

    double norm() const { return std::sqrt(x * x + y * y + z * z); }
    Vec3 normalized() const {
        const double n = norm();
        if (n <= 0.0) throw std::invalid_argument("Vec3: cannot normalize zero vector");
        return {x / n, y / n, z / n};
    }
    double dot(const Vec3& o) const { return x * o.x + y * o.y + z * o.z; }
};

inline double angle_between(const Vec3& a, const Vec3& b) {
    double c = a.dot(b) / (a.norm() * b.norm());
    c = std::max(-1.0, std::min(1.0, c));
    return std::acos(c);
}

// Albedo and refractive index of the diffuse Fresnel model.
struct MaterialParams {
    double eta = 1.15;
    double albedo = 0.8;

    static constexpr double kEtaMin = 1.05;
    static constexpr double kEtaMax = 3.0;

    void validate() const {
        if (!(eta > 1.0)) throw std::invalid_argument("MaterialParams: eta must exceed 1");
        if (!(albedo > 0.0 && albedo <= 1.0))
            throw std::invalid_argument("MaterialParams: albedo must be in (0, 1]");
    }
};

struct Illumination {
    Vec3 direction{0.0, 0.0, 1.0};  // l
    Vec3 view{0.0, 0.0, 1.0};       // v

    // Below this separation the intensity-ratio constraint degenerates.
    static constexpr double kMinSeparationRad = 1e-6;

    bool separated() const { return angle_between(direction, view) >= kMinSeparationRad; }
};

}  // namespace smsfp
