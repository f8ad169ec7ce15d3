#include <doctest.h>

#include <cmath>
#include <random>

#include "smsfp/distance_transform.hpp"
#include "smsfp/reference.hpp"

using namespace smsfp;

TEST_CASE("distance transform: exact against brute force on random masks") {
    std::mt19937_64 rng(99);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    for (int trial = 0; trial < 6; ++trial) {
        const int n = 40;
        MaskRaster mask(n, n, 0);
        for (int y = 4; y < n - 4; ++y)
            for (int x = 4; x < n - 4; ++x)
                if (u(rng) < 0.8) mask.at(x, y) = 1;
        if (count_mask(mask) == 0) continue;
        const MaskRaster boundary = boundary_pixels(mask);
        const DistanceTransformResult dt = distance_to_sites(boundary, mask);
        const RasterF brute = reference::distance_to_boundary(mask);
        for (std::size_t k = 0; k < mask.size(); ++k) {
            if (!mask[k]) continue;
            // squared distances are integers, so agreement is exact
            CHECK(dt.dist[k] == brute[k]);
            // the chosen site must realize the distance
            const int site = dt.site[k];
            REQUIRE(site >= 0);
            const int sx = site % n, sy = site / n;
            const int x = static_cast<int>(k % n), y = static_cast<int>(k / n);
            const double d = std::hypot(x - sx, y - sy);
            CHECK(d == dt.dist[k]);
            CHECK(boundary[static_cast<std::size_t>(site)] == 1);
        }
    }
}

TEST_CASE("boundary_pixels: interior of a filled rectangle is not boundary") {
    MaskRaster mask(10, 10, 0);
    for (int y = 2; y <= 7; ++y)
        for (int x = 2; x <= 7; ++x) mask.at(x, y) = 1;
    const MaskRaster b = boundary_pixels(mask);
    CHECK(b.at(2, 2) == 1);
    CHECK(b.at(4, 2) == 1);
    CHECK(b.at(4, 4) == 0);
    CHECK(b.at(0, 0) == 0);
}

TEST_CASE("boundary_pixels: image edge counts as boundary") {
    MaskRaster mask(6, 6, 1);
    const MaskRaster b = boundary_pixels(mask);
    CHECK(b.at(0, 3) == 1);
    CHECK(b.at(3, 0) == 1);
    CHECK(b.at(3, 3) == 0);
}

TEST_CASE("distance transform: disk center distance equals the radius") {
    const int n = 41;
    const double c = (n - 1) / 2.0, radius = 15.0;
    MaskRaster mask(n, n, 0);
    for (int y = 0; y < n; ++y)
        for (int x = 0; x < n; ++x)
            if (std::hypot(x - c, y - c) <= radius) mask.at(x, y) = 1;
    const DistanceTransformResult dt = distance_to_sites(boundary_pixels(mask), mask);
    const int ci = static_cast<int>(c);
    CHECK(dt.dist.at(ci, ci) == doctest::Approx(radius - 1.0).epsilon(0.1));
}
