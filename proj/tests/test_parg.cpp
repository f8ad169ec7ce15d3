#include <doctest.h>

#include <cmath>
#include <set>

#include "smsfp/parg.hpp"
#include "smsfp/reference.hpp"

using namespace smsfp;

namespace {
const double kDeg = kPi / 180.0;

// piecewise-constant two-half fixture: left (rho, phi) = (0.2, 10 deg),
// right (0.8, 80 deg)
PolarMaps two_half(int n) {
    PolarMaps p{RasterF(n, n, 0.5), RasterF(n, n), RasterF(n, n)};
    for (int y = 0; y < n; ++y)
        for (int x = 0; x < n; ++x) {
            const bool left = x < n / 2;
            p.dop.at(x, y) = left ? 0.2 : 0.8;
            p.aop.at(x, y) = (left ? 10.0 : 80.0) * kDeg;
        }
    return p;
}
}  // namespace

TEST_CASE("build_feature_field: constant field") {
    const int n = 16;
    const MaskRaster mask(n, n, 1);
    PolarMaps p{RasterF(n, n, 1.0), RasterF(n, n, 0.5), RasterF(n, n, 0.0)};
    const FeatureField f = build_feature_field(p, mask);
    CHECK(f.rho[17] == doctest::Approx(0.5));
    CHECK(f.cos2phi[17] == doctest::Approx(1.0));
    CHECK(f.sin2phi[17] == doctest::Approx(0.0));
    CHECK(f.grad[17] == 0.0);
}

TEST_CASE("build_feature_field: pi-periodicity eliminated") {
    const int n = 8;
    const MaskRaster mask(n, n, 1);
    PolarMaps p{RasterF(n, n, 1.0), RasterF(n, n, 0.5), RasterF(n, n)};
    for (int y = 0; y < n; ++y)
        for (int x = 0; x < n; ++x) p.aop.at(x, y) = (x % 2 == 0) ? kPi / 2.0 : -kPi / 2.0;
    const FeatureField f = build_feature_field(p, mask);
    for (std::size_t k = 0; k < mask.size(); ++k) {
        CHECK(f.cos2phi[k] == doctest::Approx(-1.0));
        CHECK(std::abs(f.sin2phi[k]) < 1e-12);
        CHECK(f.grad[k] < 1e-9);  // phi and phi+pi are the same angle
    }
}

TEST_CASE("build_feature_field: rho step shows in channel 0 only") {
    const int n = 32;
    const MaskRaster mask(n, n, 1);
    PolarMaps p{RasterF(n, n, 1.0), RasterF(n, n), RasterF(n, n, 0.2)};
    for (int y = 0; y < n; ++y)
        for (int x = 0; x < n; ++x) p.dop.at(x, y) = x < n / 2 ? 0.2 : 0.8;
    const FeatureField f = build_feature_field(p, mask);
    CHECK(f.rho.at(4, 4) == doctest::Approx(0.2));
    CHECK(f.rho.at(n - 4, 4) == doctest::Approx(0.8));
    for (std::size_t k = 0; k < mask.size(); ++k) CHECK(f.grad[k] == 0.0);
}

TEST_CASE("local_reliability: constant field gives R = 1; max-variance pixel e^-1") {
    const int n = 24;
    const MaskRaster mask(n, n, 1);
    {
        const auto [r_rho, r_phi] = local_reliability(RasterF(n, n, 0.4), RasterF(n, n, 0.1), mask, 5);
        for (std::size_t k = 0; k < mask.size(); ++k) {
            CHECK(r_rho[k] == 1.0);
            CHECK(r_phi[k] == 1.0);
        }
    }
    // single noisy pixel: the maximizer of the variance gets exactly e^-1
    RasterF rho(n, n, 0.4);
    rho.at(12, 12) = 1.0;
    const auto [r_rho, r_phi] = local_reliability(rho, RasterF(n, n, 0.1), mask, 5);
    double vmax = -1.0;
    std::size_t argmax = 0;
    const auto [var_rho, var_phi] = reference::window_variances(rho, RasterF(n, n, 0.1), mask, 5);
    for (std::size_t k = 0; k < mask.size(); ++k)
        if (var_rho[k] > vmax) {
            vmax = var_rho[k];
            argmax = k;
        }
    CHECK(r_rho[argmax] == doctest::Approx(std::exp(-1.0)).epsilon(1e-12));
}

TEST_CASE("local_reliability: noisy patch scores below smooth surround") {
    const int n = 32;
    const MaskRaster mask(n, n, 1);
    RasterF rho(n, n, 0.5);
    for (int y = 10; y < 20; ++y)
        for (int x = 10; x < 20; ++x) rho.at(x, y) = ((x + y) % 2) ? 0.1 : 0.9;  // checkerboard
    const auto [r_rho, r_phi] = local_reliability(rho, RasterF(n, n, 0.0), mask, 5);
    CHECK(r_rho.at(15, 15) < r_rho.at(4, 4));
    // brute-force variance oracle agrees
    const auto [var_rho, var_phi] = reference::window_variances(rho, RasterF(n, n, 0.0), mask, 5);
    double vmax = 0.0;
    for (std::size_t k = 0; k < mask.size(); ++k) vmax = std::max(vmax, var_rho[k]);
    for (std::size_t k = 0; k < mask.size(); ++k)
        CHECK(r_rho[k] == doctest::Approx(std::exp(-var_rho[k] / vmax)).epsilon(1e-12));
}

TEST_CASE("adaptive_weights and feature_distance arithmetic") {
    SegConfig config;  // lambda = 2
    const auto w_full = adaptive_weights(1.0, 1.0, config);
    CHECK(w_full[0] == doctest::Approx(3.0));
    CHECK(w_full[1] == doctest::Approx(3.0));
    CHECK(w_full[2] == doctest::Approx(3.0));
    CHECK(w_full[3] == doctest::Approx(1.0));

    const auto w_zero = adaptive_weights(0.0, 0.0, config);
    for (double w : w_zero) CHECK(w == doctest::Approx(1.0));

    const auto w_half = adaptive_weights(0.5, 0.25, config);
    CHECK(w_half[0] == doctest::Approx(2.0));
    CHECK(w_half[1] == doctest::Approx(1.5));

    CHECK(feature_distance({1, 2, 3, 4}, {1, 2, 3, 4}, {3, 3, 3, 1}) == 0.0);
    CHECK(feature_distance({0.1, 0, 0, 0}, {0, 0, 0, 0}, {3, 3, 3, 1}) == doctest::Approx(0.3));
    CHECK(feature_distance({0.1, 0.2, 0.2, 0.05}, {0, 0, 0, 0}, {3, 3, 3, 1}) ==
          doctest::Approx(std::sqrt(0.09 + 0.36 + 0.36 + 0.0025)));

    // swapping the two trig channels together with their equal weights
    CHECK(feature_distance({0.1, 0.5, -0.2, 0.3}, {0.2, 0.1, 0.4, 0.0}, {2, 3, 3, 1}) ==
          doctest::Approx(feature_distance({0.1, -0.2, 0.5, 0.3}, {0.2, 0.4, 0.1, 0.0},
                                           {2, 3, 3, 1})));
}

TEST_CASE("region_grow + post_process: uniform field collapses to one region") {
    const int n = 48;
    const MaskRaster mask(n, n, 1);
    PolarMaps p{RasterF(n, n, 1.0), RasterF(n, n, 0.5), RasterF(n, n, 0.2)};
    SegConfig config;
    config.seed_grid_stride = 16;  // multiple seeds
    const RegionLabels labels = segment(p, mask, config);
    CHECK(labels.region_count == 1);
    for (std::size_t k = 0; k < mask.size(); ++k) CHECK(labels.labels[k] == 1);
}

TEST_CASE("segment: two-half fixture is recovered exactly") {
    const int n = 64;
    const MaskRaster mask(n, n, 1);
    const PolarMaps p = two_half(n);
    SegConfig config;
    config.tau = 0.3;
    const RegionLabels labels = segment(p, mask, config);
    REQUIRE(labels.region_count == 2);
    // pixel-for-pixel agreement with the halves
    const int left_label = labels.labels.at(0, 0);
    const int right_label = labels.labels.at(n - 1, 0);
    CHECK(left_label != right_label);
    for (int y = 0; y < n; ++y)
        for (int x = 0; x < n; ++x)
            CHECK(labels.labels.at(x, y) == (x < n / 2 ? left_label : right_label));
}

TEST_CASE("region_grow: infinite tau gives one region per connected component") {
    const int n = 32;
    MaskRaster mask(n, n, 0);
    for (int y = 2; y < 14; ++y)
        for (int x = 2; x < 14; ++x) mask.at(x, y) = 1;
    for (int y = 20; y < 30; ++y)
        for (int x = 20; x < 30; ++x) mask.at(x, y) = 1;
    PolarMaps p{RasterF(n, n, 1.0), RasterF(n, n, 0.5), RasterF(n, n, 0.1)};
    SegConfig config;
    config.tau = 1e9;
    config.seed_grid_stride = 100;  // one seed lands in one component only
    const FeatureField field = build_feature_field(p, mask);
    const auto [r_rho, r_phi] = local_reliability(p.dop, p.aop, mask, 5);
    const RegionLabels grown = region_grow(field, r_rho, r_phi, mask, config);
    // the second component is rescued as its own seed and grows fully
    CHECK(grown.region_count == 2);
    std::set<int> labels_seen;
    for (std::size_t k = 0; k < mask.size(); ++k)
        if (mask[k]) {
            CHECK(grown.labels[k] > 0);
            labels_seen.insert(grown.labels[k]);
        }
    CHECK(labels_seen.size() == 2);
}

TEST_CASE("region_grow: monotone region count in tau (before post-processing)") {
    const int n = 48;
    const MaskRaster mask(n, n, 1);
    PolarMaps p{RasterF(n, n, 1.0), RasterF(n, n), RasterF(n, n)};
    for (int y = 0; y < n; ++y)
        for (int x = 0; x < n; ++x) {
            p.dop.at(x, y) = 0.2 + 0.6 * x / (n - 1.0);
            p.aop.at(x, y) = fold_aop(0.01 * y);
        }
    const FeatureField field = build_feature_field(p, mask);
    const auto [r_rho, r_phi] = local_reliability(p.dop, p.aop, mask, 5);
    SegConfig config;
    int prev = 1 << 30;
    for (double tau : {0.05, 0.1, 0.2, 0.4, 0.8}) {
        config.tau = tau;
        const RegionLabels grown = region_grow(field, r_rho, r_phi, mask, config);
        CHECK(grown.region_count <= prev);
        prev = grown.region_count;
    }
}

TEST_CASE("segment: pi-shifted AOP yields identical labels") {
    const int n = 48;
    const MaskRaster mask(n, n, 1);
    PolarMaps p{RasterF(n, n, 1.0), RasterF(n, n), RasterF(n, n)};
    for (int y = 0; y < n; ++y)
        for (int x = 0; x < n; ++x) {
            p.dop.at(x, y) = x < n / 2 ? 0.25 : 0.7;
            p.aop.at(x, y) = fold_aop(0.03 * x - 0.7);
        }
    SegConfig config;
    const RegionLabels a = segment(p, mask, config);
    PolarMaps q = p;
    for (std::size_t k = 0; k < q.aop.size(); ++k) q.aop[k] = fold_aop(q.aop[k] + kPi);
    const RegionLabels b = segment(q, mask, config);
    REQUIRE(a.region_count == b.region_count);
    CHECK(a.labels == b.labels);
}

TEST_CASE("post_process: 1-px hole is filled with the enclosing label") {
    const int n = 16;
    const MaskRaster mask(n, n, 1);
    PolarMaps p{RasterF(n, n, 1.0), RasterF(n, n, 0.5), RasterF(n, n, 0.1)};
    const FeatureField field = build_feature_field(p, mask);
    const auto [r_rho, r_phi] = local_reliability(p.dop, p.aop, mask, 5);
    RegionLabels labels;
    labels.labels = LabelRaster(n, n, 1);
    labels.labels.at(8, 8) = 0;  // unlabeled interior pixel
    labels.region_count = 1;
    SegConfig config;
    const RegionLabels out = post_process(labels, field, r_rho, r_phi, mask, config);
    CHECK(out.region_count == 1);
    CHECK(out.labels.at(8, 8) == 1);
}

TEST_CASE("post_process: small speckle is merged away") {
    const int n = 32;
    const MaskRaster mask(n, n, 1);
    PolarMaps p{RasterF(n, n, 1.0), RasterF(n, n, 0.5), RasterF(n, n, 0.1)};
    const FeatureField field = build_feature_field(p, mask);
    const auto [r_rho, r_phi] = local_reliability(p.dop, p.aop, mask, 5);
    RegionLabels labels;
    labels.labels = LabelRaster(n, n, 1);
    labels.labels.at(10, 10) = 2;
    labels.labels.at(11, 10) = 2;
    labels.region_count = 2;
    SegConfig config;
    config.min_region_px = 8;
    config.merge_threshold = -1.0;  // disable similarity merging for this test
    const RegionLabels out = post_process(labels, field, r_rho, r_phi, mask, config);
    CHECK(out.region_count == 1);
}

TEST_CASE("post_process: partition invariants hold after smoothing") {
    const int n = 40;
    MaskRaster mask(n, n, 0);
    for (int y = 2; y < n - 2; ++y)
        for (int x = 2; x < n - 2; ++x) mask.at(x, y) = 1;
    const PolarMaps p = two_half(n);
    SegConfig config;
    config.tau = 0.3;
    const RegionLabels out = segment(p, mask, config);
    const auto sizes = region_sizes(out);
    std::size_t total = 0;
    for (int r = 1; r <= out.region_count; ++r) {
        CHECK(sizes[static_cast<std::size_t>(r)] > 0);
        total += sizes[static_cast<std::size_t>(r)];
    }
    CHECK(total == count_mask(mask));
    for (std::size_t k = 0; k < mask.size(); ++k) {
        if (mask[k])
            CHECK(out.labels[k] > 0);
        else
            CHECK(out.labels[k] == 0);
    }
}

TEST_CASE("post_process: staircase boundary gets shorter after smoothing") {
    const int n = 40;
    const MaskRaster mask(n, n, 1);
    PolarMaps p{RasterF(n, n, 1.0), RasterF(n, n, 0.5), RasterF(n, n, 0.1)};
    const FeatureField field = build_feature_field(p, mask);
    const auto [r_rho, r_phi] = local_reliability(p.dop, p.aop, mask, 5);

    RegionLabels jagged;
    jagged.labels = LabelRaster(n, n, 1);
    for (int y = 0; y < n; ++y)
        for (int x = 0; x < n; ++x)
            if (x > n / 2 + ((y % 4 < 2) ? 2 : -2)) jagged.labels.at(x, y) = 2;
    jagged.region_count = 2;

    auto perimeter = [&](const LabelRaster& labels) {
        int count = 0;
        for (int y = 0; y < n; ++y)
            for (int x = 0; x + 1 < n; ++x)
                if (labels.at(x, y) != labels.at(x + 1, y)) ++count;
        for (int y = 0; y + 1 < n; ++y)
            for (int x = 0; x < n; ++x)
                if (labels.at(x, y) != labels.at(x, y + 1)) ++count;
        return count;
    };

    SegConfig config;
    config.merge_threshold = -1.0;  // keep both regions (identical features)
    config.min_region_px = 4;
    const RegionLabels out = post_process(jagged, field, r_rho, r_phi, mask, config);
    CHECK(out.region_count == 2);
    CHECK(perimeter(out.labels) < perimeter(jagged.labels));
}

TEST_CASE("region_grow: empty mask is an error") {
    const MaskRaster mask(8, 8, 0);
    PolarMaps p{RasterF(8, 8, 1.0), RasterF(8, 8, 0.5), RasterF(8, 8, 0.1)};
    CHECK_THROWS_AS(segment(p, mask, SegConfig{}), std::invalid_argument);
}
