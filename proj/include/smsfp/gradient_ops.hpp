#pragma once

#include <Eigen/Sparse>
#include <cstdint>
#include <vector>

#include "smsfp/raster.hpp"
#include "smsfp/types.hpp"

namespace smsfp {

// Sparse partial-derivative operators over the masked unknowns. Interior
// pixels use central differences smoothed by a 1-D Gaussian along the
// transverse axis; pixels whose stencil exits the mask revert to plain central
// and then one-sided differences.
struct GradientOperators {
    Eigen::SparseMatrix<double, Eigen::RowMajor> dx, dy;  // n x n
    LabelRaster index;                    // pixel -> unknown, -1 outside mask
    std::vector<std::int32_t> pixels;     // unknown -> linear pixel index
    std::vector<std::uint8_t> has_dx, has_dy;  // derivative definable per unknown
    int width = 0, height = 0;

    int n() const { return static_cast<int>(pixels.size()); }
};

GradientOperators build_gradient_operators(const MaskRaster& mask, double smoothing_sigma = 0.5);

// 5-point Laplacian on the masked grid; boundary pixels use the available
// neighbor subset.
Eigen::SparseMatrix<double, Eigen::RowMajor> masked_laplacian(const GradientOperators& ops);

// Gathers the masked height values into an unknown vector and back.
Eigen::VectorXd pack_height(const RasterF& height, const GradientOperators& ops);
RasterF unpack_height(const Eigen::VectorXd& z, const GradientOperators& ops);

// n = [-zx, -zy, 1] / sqrt(1 + |grad z|^2).
NormalMap normals_from_height(const RasterF& height, const GradientOperators& ops);

// cos(theta) = (-grad z . [v1 v2] + v3) / sqrt(1 + |grad z|^2), clamped to [0, pi/2).
RasterF zenith_from_height(const RasterF& height, const GradientOperators& ops, const Vec3& view);

}  // namespace smsfp
