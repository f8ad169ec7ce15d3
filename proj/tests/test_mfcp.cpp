#include <doctest.h>

#include <cmath>
#include <random>

#include "smsfp/distance_transform.hpp"
#include "smsfp/mfcp.hpp"
#include "smsfp/polarimetry.hpp"
#include "smsfp/reference.hpp"

using namespace smsfp;

namespace {
const double kDeg = kPi / 180.0;

MaskRaster disk_mask(int n, double radius) {
    MaskRaster mask(n, n, 0);
    const double c = (n - 1) / 2.0;
    for (int y = 0; y < n; ++y)
        for (int x = 0; x < n; ++x)
            if (std::hypot(x - c, y - c) <= radius) mask.at(x, y) = 1;
    return mask;
}
}  // namespace

TEST_CASE("implicit azimuth: disk is radial away from the center") {
    const int n = 96;
    const double c = (n - 1) / 2.0;
    const MaskRaster mask = disk_mask(n, 38.0);
    const ImplicitAzimuthMap im = implicit_azimuth_from_mask(mask);
    double sum_dev = 0.0;
    std::size_t count = 0;
    for (int y = 0; y < n; ++y)
        for (int x = 0; x < n; ++x) {
            if (!mask.at(x, y)) continue;
            const double r = std::hypot(x - c, y - c);
            if (r < 3.0) continue;  // center singularity
            const double radial = std::atan2(y - c, x - c);
            double d = std::abs(std::remainder(im.phi_im.at(x, y) - radial, 2.0 * kPi));
            sum_dev += d;
            ++count;
        }
    CHECK(sum_dev / count < 5.0 * kDeg);
}

TEST_CASE("implicit azimuth: half-plane mask points out of the half-plane") {
    const int n = 32;
    MaskRaster mask(n, n, 0);
    for (int y = 0; y < n; ++y)
        for (int x = 0; x < n / 2; ++x) mask.at(x, y) = 1;
    const ImplicitAzimuthMap im = implicit_azimuth_from_mask(mask);
    // the only interior boundary faces +x (image edges also count as boundary,
    // so check pixels nearest to the internal edge)
    for (int y = 10; y < n - 10; ++y)
        CHECK(std::abs(std::remainder(im.phi_im.at(n / 2 - 1, y) - 0.0, 2.0 * kPi)) < 15.0 * kDeg);
}

TEST_CASE("implicit azimuth: two disjoint disks each point from their own center") {
    const int n = 96;
    MaskRaster mask(n, n, 0);
    const double c1x = 24, c2x = 72, cy = 48, radius = 14;
    for (int y = 0; y < n; ++y)
        for (int x = 0; x < n; ++x)
            if (std::hypot(x - c1x, y - cy) <= radius || std::hypot(x - c2x, y - cy) <= radius)
                mask.at(x, y) = 1;
    const ImplicitAzimuthMap im = implicit_azimuth_from_mask(mask);
    for (int y = 0; y < n; ++y)
        for (int x = 0; x < n; ++x) {
            if (!mask.at(x, y)) continue;
            const double cx = std::hypot(x - c1x, y - cy) <= radius ? c1x : c2x;
            const double r = std::hypot(x - cx, y - cy);
            if (r < 4.0) continue;
            const double radial = std::atan2(y - cy, x - cx);
            CHECK(std::abs(std::remainder(im.phi_im.at(x, y) - radial, 2.0 * kPi)) < 25.0 * kDeg);
        }
}

TEST_CASE("implicit azimuth: empty mask is an error") {
    CHECK_THROWS_AS(implicit_azimuth_from_mask(MaskRaster(8, 8, 0)), std::invalid_argument);
}

TEST_CASE("convexity weights: boundary 1, exponential decay, disk center") {
    const int n = 64;
    const double radius = 25.0, kappa = 0.15;
    const MaskRaster mask = disk_mask(n, radius);
    const ConvexityWeights cw = convexity_weights(mask, kappa);
    const MaskRaster boundary = boundary_pixels(mask);
    const RasterF dist = reference::distance_to_boundary(mask);
    for (std::size_t k = 0; k < mask.size(); ++k) {
        if (!mask[k]) {
            CHECK(cw.w_con[k] == 0.0);
            continue;
        }
        if (boundary[k]) CHECK(cw.w_con[k] == 1.0);
        CHECK(cw.w_con[k] == doctest::Approx(std::exp(-kappa * dist[k])).epsilon(1e-12));
    }
    // e^-1 at distance 1/kappa
    CHECK(std::exp(-kappa * (1.0 / kappa)) == doctest::Approx(std::exp(-1.0)));
}

TEST_CASE("block_decompose: counts and pass-through flags") {
    MaskRaster mask16(16, 16, 1);
    CHECK(block_decompose(16, 16, 8, mask16).size() == 4);
    MaskRaster mask17(17, 17, 1);
    const auto blocks = block_decompose(17, 17, 8, mask17);
    CHECK(blocks.size() == 9);
    CHECK(blocks.back().w == 1);

    MaskRaster empty(16, 16, 0);
    for (const Block& b : block_decompose(16, 16, 8, empty)) CHECK(b.pass_through);
}

TEST_CASE("gamma_range_map: power law, affine target range, constant block") {
    MaskRaster mask(3, 1, 1);
    RasterF azimuth(3, 1);
    azimuth.at(0, 0) = 0.0;
    azimuth.at(1, 0) = 0.25;
    azimuth.at(2, 0) = 1.0;
    Block block{0, 0, 3, 1, 3, false};
    block.mask_px = 3;

    RasterF implicit(3, 1);
    implicit.at(0, 0) = 0.0;
    implicit.at(1, 0) = 1.0;
    implicit.at(2, 0) = 0.5;
    RasterF out(3, 1, 0.0);
    gamma_range_map_block(azimuth, implicit, mask, block, 0.5, out);
    CHECK(out.at(0, 0) == doctest::Approx(0.0));
    CHECK(out.at(1, 0) == doctest::Approx(0.5));
    CHECK(out.at(2, 0) == doctest::Approx(1.0));

    // affine map to [-pi/4, pi/4]
    implicit.at(0, 0) = -kPi / 4.0;
    implicit.at(1, 0) = kPi / 4.0;
    implicit.at(2, 0) = 0.0;
    gamma_range_map_block(azimuth, implicit, mask, block, 0.5, out);
    CHECK(out.at(0, 0) == doctest::Approx(-kPi / 4.0));
    CHECK(out.at(1, 0) == doctest::Approx(0.0).epsilon(1e-12));
    CHECK(out.at(2, 0) == doctest::Approx(kPi / 4.0));

    // constant azimuth block maps to the implicit midpoint
    azimuth.fill(0.7);
    gamma_range_map_block(azimuth, implicit, mask, block, 0.5, out);
    for (int x = 0; x < 3; ++x) CHECK(out.at(x, 0) == doctest::Approx(0.0).epsilon(1e-12));
}

TEST_CASE("gamma_range_map: monotone and range-contained on random blocks") {
    std::mt19937_64 rng(31);
    std::uniform_real_distribution<double> u(-1.5, 1.5);
    for (int trial = 0; trial < 50; ++trial) {
        const int bs = 8;
        MaskRaster mask(bs, bs, 1);
        RasterF azimuth(bs, bs), implicit(bs, bs);
        for (std::size_t k = 0; k < azimuth.size(); ++k) {
            azimuth[k] = u(rng);
            implicit[k] = u(rng);
        }
        Block block{0, 0, bs, bs, bs * bs, false};
        RasterF out(bs, bs, 0.0);
        gamma_range_map_block(azimuth, implicit, mask, block, 0.5, out);

        double i_min = 1e300, i_max = -1e300;
        for (std::size_t k = 0; k < implicit.size(); ++k) {
            i_min = std::min(i_min, implicit[k]);
            i_max = std::max(i_max, implicit[k]);
        }
        for (std::size_t a = 0; a < out.size(); ++a) {
            CHECK(out[a] >= i_min - 1e-12);
            CHECK(out[a] <= i_max + 1e-12);
            for (std::size_t b = 0; b < out.size(); ++b)
                if (azimuth[a] < azimuth[b]) CHECK(out[a] <= out[b] + 1e-12);
        }
    }
}

TEST_CASE("scale fusion weights: sum to one; uniform on constant fields") {
    const int n = 64;
    const MaskRaster mask = disk_mask(n, 28.0);
    RasterF azimuth(n, n);
    std::mt19937_64 rng(4);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    for (std::size_t k = 0; k < azimuth.size(); ++k) azimuth[k] = u(rng);
    const auto weights = scale_fusion_weights(azimuth, {8, 16, 32}, mask);
    double total = 0.0;
    for (double w : weights) {
        CHECK(w >= 0.0);
        total += w;
    }
    CHECK(total == doctest::Approx(1.0).epsilon(1e-12));

    const auto uniform = scale_fusion_weights(RasterF(n, n, 0.4), {8, 16, 32}, mask);
    for (double w : uniform) CHECK(w == doctest::Approx(1.0 / 3.0).epsilon(1e-12));
}

TEST_CASE("blend_scales: identical rasters pass through; degenerate weights select") {
    const int n = 16;
    const MaskRaster mask(n, n, 1);
    RasterF a(n, n, 0.3), b(n, n, 0.3), c(n, n, 0.3);
    const RasterF same = blend_scales({a, b, c}, {0.2, 0.5, 0.3}, mask);
    for (std::size_t k = 0; k < same.size(); ++k) CHECK(same[k] == doctest::Approx(0.3));

    RasterF d(n, n, 1.0), e(n, n, 2.0);
    const RasterF pick = blend_scales({d, e}, {1.0, 0.0}, mask);
    for (std::size_t k = 0; k < pick.size(); ++k) CHECK(pick[k] == doctest::Approx(1.0));
    const RasterF half = blend_scales({d, e}, {0.5, 0.5}, mask);
    for (std::size_t k = 0; k < half.size(); ++k) CHECK(half[k] == doctest::Approx(1.5));
}

TEST_CASE("implicit_normals: unit vectors from zenith and azimuth") {
    const int n = 4;
    const MaskRaster mask(n, n, 1);
    {
        const NormalMap nm = implicit_normals(RasterF(n, n, 0.7), RasterF(n, n, 0.0), mask);
        CHECK(nm.nx[0] == doctest::Approx(0.0));
        CHECK(nm.nz[0] == doctest::Approx(1.0));
    }
    {
        const NormalMap nm =
            implicit_normals(RasterF(n, n, kPi / 2.0), RasterF(n, n, kPi / 4.0), mask);
        CHECK(nm.nx[0] == doctest::Approx(0.0).epsilon(1e-12));
        CHECK(nm.ny[0] == doctest::Approx(std::sqrt(0.5)));
        CHECK(nm.nz[0] == doctest::Approx(std::sqrt(0.5)));
    }
    {
        const double eps = 1e-4;
        const NormalMap nm =
            implicit_normals(RasterF(n, n, 0.0), RasterF(n, n, kPi / 2.0 - eps), mask);
        CHECK(nm.nx[0] == doctest::Approx(1.0).epsilon(1e-6));
        CHECK(nm.nz[0] == doctest::Approx(eps).epsilon(1e-4));
    }
    const NormalMap nm = implicit_normals(RasterF(n, n, 1.1), RasterF(n, n, 0.9), mask);
    for (std::size_t k = 0; k < mask.size(); ++k) {
        const double norm = std::sqrt(nm.nx[k] * nm.nx[k] + nm.ny[k] * nm.ny[k] + nm.nz[k] * nm.nz[k]);
        CHECK(norm == doctest::Approx(1.0).epsilon(1e-12));
        CHECK(nm.nz[k] > 0.0);
    }
}
