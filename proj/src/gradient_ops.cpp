#include "smsfp/gradient_ops.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace smsfp {

GradientOperators build_gradient_operators(const MaskRaster& mask, double smoothing_sigma) {
    const std::size_t n_px = count_mask(mask);
    if (n_px < 2)
        throw std::invalid_argument("build_gradient_operators: mask must have at least 2 pixels");
    if (!(smoothing_sigma >= 0.0))
        throw std::invalid_argument("build_gradient_operators: sigma must be >= 0");

    const int w = mask.width(), h = mask.height();
    GradientOperators ops;
    ops.width = w;
    ops.height = h;
    ops.index = LabelRaster(w, h, -1);
    ops.pixels.reserve(n_px);
    for (int y = 0; y < h; ++y)
        for (int x = 0; x < w; ++x)
            if (mask.at(x, y)) {
                ops.index.at(x, y) = static_cast<std::int32_t>(ops.pixels.size());
                ops.pixels.push_back(static_cast<std::int32_t>(y) * w + x);
            }
    const int n = ops.n();
    ops.has_dx.assign(static_cast<std::size_t>(n), 0);
    ops.has_dy.assign(static_cast<std::size_t>(n), 0);

    // Transverse smoothing weights; sigma = 0 disables smoothing.
    double g1 = smoothing_sigma > 0.0 ? std::exp(-0.5 / (smoothing_sigma * smoothing_sigma)) : 0.0;
    const double gsum = 1.0 + 2.0 * g1;
    const double w0 = 1.0 / gsum, w1 = g1 / gsum;

    std::vector<Eigen::Triplet<double>> tx, ty;
    auto in = [&](int x, int y) { return mask.in_bounds(x, y) && mask.at(x, y); };

    for (int i = 0; i < n; ++i) {
        const int px = ops.pixels[static_cast<std::size_t>(i)] % w;
        const int py = ops.pixels[static_cast<std::size_t>(i)] / w;

        // d/dx: smoothed central needs (px +- 1, py + k) for k in {-1,0,1}
        bool smoothed = w1 > 0.0;
        for (int k = -1; k <= 1 && smoothed; ++k)
            smoothed = in(px + 1, py + k) && in(px - 1, py + k);
        if (smoothed) {
            for (int k = -1; k <= 1; ++k) {
                const double wk = k == 0 ? w0 : w1;
                tx.emplace_back(i, ops.index.at(px + 1, py + k), 0.5 * wk);
                tx.emplace_back(i, ops.index.at(px - 1, py + k), -0.5 * wk);
            }
            ops.has_dx[static_cast<std::size_t>(i)] = 1;
        } else if (in(px + 1, py) && in(px - 1, py)) {
            tx.emplace_back(i, ops.index.at(px + 1, py), 0.5);
            tx.emplace_back(i, ops.index.at(px - 1, py), -0.5);
            ops.has_dx[static_cast<std::size_t>(i)] = 1;
        } else if (in(px + 1, py)) {
            tx.emplace_back(i, ops.index.at(px + 1, py), 1.0);
            tx.emplace_back(i, i, -1.0);
            ops.has_dx[static_cast<std::size_t>(i)] = 1;
        } else if (in(px - 1, py)) {
            tx.emplace_back(i, i, 1.0);
            tx.emplace_back(i, ops.index.at(px - 1, py), -1.0);
            ops.has_dx[static_cast<std::size_t>(i)] = 1;
        }

        // d/dy
        smoothed = w1 > 0.0;
        for (int k = -1; k <= 1 && smoothed; ++k)
            smoothed = in(px + k, py + 1) && in(px + k, py - 1);
        if (smoothed) {
            for (int k = -1; k <= 1; ++k) {
                const double wk = k == 0 ? w0 : w1;
                ty.emplace_back(i, ops.index.at(px + k, py + 1), 0.5 * wk);
                ty.emplace_back(i, ops.index.at(px + k, py - 1), -0.5 * wk);
            }
            ops.has_dy[static_cast<std::size_t>(i)] = 1;
        } else if (in(px, py + 1) && in(px, py - 1)) {
            ty.emplace_back(i, ops.index.at(px, py + 1), 0.5);
            ty.emplace_back(i, ops.index.at(px, py - 1), -0.5);
            ops.has_dy[static_cast<std::size_t>(i)] = 1;
        } else if (in(px, py + 1)) {
            ty.emplace_back(i, ops.index.at(px, py + 1), 1.0);
            ty.emplace_back(i, i, -1.0);
            ops.has_dy[static_cast<std::size_t>(i)] = 1;
        } else if (in(px, py - 1)) {
            ty.emplace_back(i, i, 1.0);
            ty.emplace_back(i, ops.index.at(px, py - 1), -1.0);
            ops.has_dy[static_cast<std::size_t>(i)] = 1;
        }
    }

    ops.dx.resize(n, n);
    ops.dy.resize(n, n);
    ops.dx.setFromTriplets(tx.begin(), tx.end());
    ops.dy.setFromTriplets(ty.begin(), ty.end());
    return ops;
}

Eigen::SparseMatrix<double, Eigen::RowMajor> masked_laplacian(const GradientOperators& ops) {
    const int n = ops.n();
    const int w = ops.width;
    std::vector<Eigen::Triplet<double>> t;
    // Graph Laplacian over the available 4-neighbors. Interior rows are the
    // standard 5-point stencil (affine functions vanish there); boundary rows
    // keep the constants-only null space that makes a gauge pin sufficient.
    const int offs[4][2] = {{1, 0}, {-1, 0}, {0, 1}, {0, -1}};
    for (int i = 0; i < n; ++i) {
        const int px = ops.pixels[static_cast<std::size_t>(i)] % w;
        const int py = ops.pixels[static_cast<std::size_t>(i)] / w;
        int deg = 0;
        for (const auto& o : offs) {
            const int qx = px + o[0], qy = py + o[1];
            if (!ops.index.in_bounds(qx, qy) || ops.index.at(qx, qy) < 0) continue;
            t.emplace_back(i, ops.index.at(qx, qy), 1.0);
            ++deg;
        }
        t.emplace_back(i, i, -static_cast<double>(deg));
    }
    Eigen::SparseMatrix<double, Eigen::RowMajor> lap(n, n);
    lap.setFromTriplets(t.begin(), t.end());
    return lap;
}

Eigen::VectorXd pack_height(const RasterF& height, const GradientOperators& ops) {
    Eigen::VectorXd z(ops.n());
    for (int i = 0; i < ops.n(); ++i)
        z[i] = height[static_cast<std::size_t>(ops.pixels[static_cast<std::size_t>(i)])];
    return z;
}

RasterF unpack_height(const Eigen::VectorXd& z, const GradientOperators& ops) {
    RasterF out(ops.width, ops.height, 0.0);
    for (int i = 0; i < ops.n(); ++i)
        out[static_cast<std::size_t>(ops.pixels[static_cast<std::size_t>(i)])] = z[i];
    return out;
}

NormalMap normals_from_height(const RasterF& height, const GradientOperators& ops) {
    const Eigen::VectorXd z = pack_height(height, ops);
    const Eigen::VectorXd gx = ops.dx * z;
    const Eigen::VectorXd gy = ops.dy * z;
    NormalMap out(ops.width, ops.height);
    for (int i = 0; i < ops.n(); ++i) {
        const double norm = std::sqrt(1.0 + gx[i] * gx[i] + gy[i] * gy[i]);
        const std::size_t k = static_cast<std::size_t>(ops.pixels[static_cast<std::size_t>(i)]);
        out.nx[k] = -gx[i] / norm;
        out.ny[k] = -gy[i] / norm;
        out.nz[k] = 1.0 / norm;
    }
    return out;
}

RasterF zenith_from_height(const RasterF& height, const GradientOperators& ops, const Vec3& view) {
    const Eigen::VectorXd z = pack_height(height, ops);
    const Eigen::VectorXd gx = ops.dx * z;
    const Eigen::VectorXd gy = ops.dy * z;
    RasterF out(ops.width, ops.height, 0.0);
    for (int i = 0; i < ops.n(); ++i) {
        const double norm = std::sqrt(1.0 + gx[i] * gx[i] + gy[i] * gy[i]);
        const double c = std::clamp((-gx[i] * view.x - gy[i] * view.y + view.z) / norm, -1.0, 1.0);
        const std::size_t k = static_cast<std::size_t>(ops.pixels[static_cast<std::size_t>(i)]);
        out[k] = std::min(std::acos(c), kPi / 2.0 - 1e-9);
    }
    return out;
}

}  // namespace smsfp
