#include "smsfp/constraints.hpp"

#include <Eigen/SparseCholesky>
#include <Eigen/SparseQR>

#include <algorithm>
#include <cmath>
#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <limits>
#include <stdexcept>

#include "smsfp/diffuse.hpp"

namespace smsfp {

namespace {
constexpr double kDegenerate = 1e-9;
constexpr double kTinyDenom = 1e-6;
}  // namespace

namespace {
struct StageTimer {
    const char* name;
    std::chrono::steady_clock::time_point start = std::chrono::steady_clock::now();
    explicit StageTimer(const char* n) : name(n) {}
    ~StageTimer() {
        if (!std::getenv("SMSFP_PROFILE")) return;
        const auto ms = std::chrono::duration_cast<std::chrono::milliseconds>(
                            std::chrono::steady_clock::now() - start)
                            .count();
        std::fprintf(stderr, "[profile] %s: %lld ms\n", name, static_cast<long long>(ms));
    }
};
}  // namespace


std::vector<GradientRow> azimuth_rows(const RasterF& aop, const GradientOperators& ops,
                                      const MaskRaster& mask, bool printed_form) {
    require_same_size(aop, mask, "azimuth_rows");
    std::vector<GradientRow> rows;
    rows.reserve(static_cast<std::size_t>(ops.n()));
    for (int i = 0; i < ops.n(); ++i) {
        if (!ops.has_dx[static_cast<std::size_t>(i)] && !ops.has_dy[static_cast<std::size_t>(i)])
            continue;
        const std::int32_t px = ops.pixels[static_cast<std::size_t>(i)];
        const double phi = aop[static_cast<std::size_t>(px)];
        GradientRow row;
        row.pixel = px;
        if (printed_form) {
            row.cx = -std::cos(phi);
            row.cy = std::sin(phi);
        } else {
            row.cx = std::sin(phi);
            row.cy = -std::cos(phi);
        }
        row.rhs = 0.0;
        rows.push_back(row);
    }
    return rows;
}

std::vector<GradientRow> intensity_ratio_rows(const RasterF& intensity, const RasterF& zenith,
                                              const Illumination& illum, double albedo,
                                              const GradientOperators& ops, const MaskRaster& mask,
                                              bool* dropped, const MaskRaster* zenith_valid) {
    require_same_size(intensity, mask, "intensity_ratio_rows");
    require_same_size(zenith, mask, "intensity_ratio_rows");
    if (dropped) *dropped = false;
    std::vector<GradientRow> rows;
    if (!illum.separated()) {
        if (dropped) *dropped = true;
        return rows;
    }
    const Vec3 l = illum.direction, v = illum.view;
    rows.reserve(static_cast<std::size_t>(ops.n()));
    for (int i = 0; i < ops.n(); ++i) {
        if (!ops.has_dx[static_cast<std::size_t>(i)] || !ops.has_dy[static_cast<std::size_t>(i)])
            continue;
        const std::int32_t px = ops.pixels[static_cast<std::size_t>(i)];
        if (zenith_valid && !(*zenith_valid)[static_cast<std::size_t>(px)]) continue;
        const double ct = std::cos(zenith[static_cast<std::size_t>(px)]);
        const double inten = intensity[static_cast<std::size_t>(px)];
        if (ct <= kTinyDenom || inten <= kTinyDenom) continue;
        GradientRow row;
        row.pixel = px;
        row.cx = -v.x / ct + albedo * l.x / inten;
        row.cy = -v.y / ct + albedo * l.y / inten;
        row.rhs = albedo * l.z / inten - v.z / ct;
        rows.push_back(row);
    }
    return rows;
}

std::vector<GradientRow> mfcp_rows(const NormalMap& prior, const ConvexityWeights& conv,
                                   const RasterF& zenith, const GradientOperators& ops,
                                   const MaskRaster& mask, const MaskRaster* zenith_valid) {
    require_same_size(prior.nx, mask, "mfcp_rows");
    require_same_size(conv.w_con, mask, "mfcp_rows");
    require_same_size(zenith, mask, "mfcp_rows");
    std::vector<GradientRow> rows;
    rows.reserve(2 * static_cast<std::size_t>(ops.n()));
    for (int i = 0; i < ops.n(); ++i) {
        const std::int32_t px = ops.pixels[static_cast<std::size_t>(i)];
        if (zenith_valid && !(*zenith_valid)[static_cast<std::size_t>(px)]) continue;
        const double wc = conv.w_con[static_cast<std::size_t>(px)];
        const double ct = std::cos(zenith[static_cast<std::size_t>(px)]);
        if (wc * ct < kDegenerate) continue;
        if (ops.has_dx[static_cast<std::size_t>(i)]) {
            GradientRow row;
            row.pixel = px;
            row.cx = -wc * ct;
            row.cy = 0.0;
            row.rhs = wc * prior.nx[static_cast<std::size_t>(px)];
            rows.push_back(row);
        }
        if (ops.has_dy[static_cast<std::size_t>(i)]) {
            GradientRow row;
            row.pixel = px;
            row.cx = 0.0;
            row.cy = -wc * ct;
            row.rhs = wc * prior.ny[static_cast<std::size_t>(px)];
            rows.push_back(row);
        }
    }
    return rows;
}

namespace {

void append_gradient_rows(const std::vector<GradientRow>& rows, double weight,
                          const GradientOperators& ops,
                          std::vector<Eigen::Triplet<double>>& triplets, Eigen::VectorXd& b,
                          long& next_row) {
    for (const GradientRow& row : rows) {
        const std::int32_t unknown = ops.index[static_cast<std::size_t>(row.pixel)];
        if (unknown < 0) continue;
        if (row.cx != 0.0) {
            for (Eigen::SparseMatrix<double, Eigen::RowMajor>::InnerIterator it(ops.dx, unknown);
                 it; ++it)
                triplets.emplace_back(next_row, it.col(), weight * row.cx * it.value());
        }
        if (row.cy != 0.0) {
            for (Eigen::SparseMatrix<double, Eigen::RowMajor>::InnerIterator it(ops.dy, unknown);
                 it; ++it)
                triplets.emplace_back(next_row, it.col(), weight * row.cy * it.value());
        }
        b[next_row] = weight * row.rhs;
        ++next_row;
    }
}

}  // namespace

SolveResult solve_height(const ConstraintSystem& system, const GradientOperators& ops) {
    const int n = ops.n();
    if (n < 2) throw std::invalid_argument("solve_height: too few unknowns");

    Eigen::SparseMatrix<double, Eigen::RowMajor> lap;
    long n_rows = static_cast<long>(system.azimuth.size() + system.intensity.size() +
                                    system.mfcp.size());
    if (system.use_laplacian) {
        lap = masked_laplacian(ops);
        n_rows += n;
    }
    n_rows += 1;  // gauge row

    Eigen::VectorXd b = Eigen::VectorXd::Zero(n_rows);
    std::vector<Eigen::Triplet<double>> triplets;
    triplets.reserve(static_cast<std::size_t>(n_rows) * 14);

    long next_row = 0;
    append_gradient_rows(system.azimuth, system.weights.azimuth, ops, triplets, b, next_row);
    append_gradient_rows(system.intensity, system.weights.intensity, ops, triplets, b, next_row);
    append_gradient_rows(system.mfcp, system.weights.mfcp, ops, triplets, b, next_row);
    if (system.use_laplacian) {
        for (int i = 0; i < n; ++i) {
            for (Eigen::SparseMatrix<double, Eigen::RowMajor>::InnerIterator it(lap, i); it; ++it)
                triplets.emplace_back(next_row, it.col(), system.weights.laplacian * it.value());
            b[next_row] = 0.0;
            ++next_row;
        }
    }
    // Gauge: every other row is invariant under a constant shift, so pinning a
    // single unknown is exactly satisfiable and keeps the normal matrix sparse.
    // The mean is subtracted after the solve.
    triplets.emplace_back(next_row, 0, 1.0);
    b[next_row] = 0.0;
    ++next_row;

    StageTimer t_all("  solve: total");
    Eigen::SparseMatrix<double> m(next_row, n);
    {
        StageTimer t("  solve: setFromTriplets");
        m.setFromTriplets(triplets.begin(), triplets.end());
    }

    // Normal equations with an LDLT pivot-ratio guard; QR is the fallback for
    // borderline conditioning.
    const Eigen::SparseMatrix<double> h = [&] {
        StageTimer t("  solve: normal product");
        return Eigen::SparseMatrix<double>((m.transpose() * m).pruned());
    }();
    const Eigen::SimplicialLDLT<Eigen::SparseMatrix<double>>& ldlt = [&]() -> const auto& {
        static thread_local Eigen::SimplicialLDLT<Eigen::SparseMatrix<double>> f;
        StageTimer t("  solve: factorize");
        f.compute(h);
        return f;
    }();
    Eigen::VectorXd z;
    bool ok = ldlt.info() == Eigen::Success;
    if (ok) {
        const Eigen::VectorXd d = ldlt.vectorD();
        const double dmax = d.maxCoeff();
        const double dmin = d.minCoeff();
        ok = dmax > 0.0 && dmin > dmax * 1e-14;
        if (ok) z = ldlt.solve(m.transpose() * b);
    }
    if (!ok) {
        Eigen::SparseMatrix<double> mc = m;
        Eigen::SparseQR<Eigen::SparseMatrix<double>, Eigen::COLAMDOrdering<int>> qr(mc);
        if (qr.info() != Eigen::Success || qr.rank() < n)
            throw std::runtime_error(
                "solve_height: rank-deficient system beyond the gauge (azimuth=" +
                std::to_string(system.azimuth.size()) + " intensity=" +
                std::to_string(system.intensity.size()) + " mfcp=" +
                std::to_string(system.mfcp.size()) +
                " laplacian=" + (system.use_laplacian ? std::string("on") : std::string("off")) + ")");
        z = qr.solve(b);
    }

    SolveResult result;
    // constraint residual at the solution; the gauge pin row is satisfied here
    result.objective = (m * z - b).squaredNorm();
    z.array() -= z.mean();
    result.height = unpack_height(z, ops);
    result.rows = static_cast<std::size_t>(next_row);
    return result;
}

MaterialParams refit_material(const RasterF& rho_est, const RasterF& zenith_from_height,
                              const MaskRaster& mask, const MaterialParams& current,
                              const RasterF& intensity, const NormalMap& normals,
                              const Vec3& light, bool* refit_applied) {
    require_same_size(rho_est, mask, "refit_material");
    require_same_size(zenith_from_height, mask, "refit_material");
    if (refit_applied) *refit_applied = false;

    // Usable samples for the eta fit.
    std::vector<double> sin2, cost, rho;
    for (std::size_t k = 0; k < mask.size(); ++k) {
        if (!mask[k]) continue;
        const double theta = zenith_from_height[k];
        if (!(theta >= 0.0 && theta < kZenithCapRad)) continue;
        const double s = std::sin(theta);
        sin2.push_back(s * s);
        cost.push_back(std::cos(theta));
        rho.push_back(std::clamp(rho_est[k], 0.0, 1.0));
    }
    if (sin2.size() < 10) return current;

    auto objective = [&](double eta) {
        const double a = eta - 1.0 / eta;
        const double bb = eta + 1.0 / eta;
        double acc = 0.0;
        for (std::size_t i = 0; i < sin2.size(); ++i) {
            const double den = 2.0 + 2.0 * eta * eta - bb * bb * sin2[i] +
                               4.0 * cost[i] * std::sqrt(eta * eta - sin2[i]);
            const double d = rho[i] - a * a * sin2[i] / den;
            acc += d * d;
        }
        return acc;
    };

    MaterialParams updated = current;

    // Flat-objective detection on a coarse probe grid.
    double omin = std::numeric_limits<double>::infinity(), omax = 0.0;
    for (int i = 0; i < 8; ++i) {
        const double eta = MaterialParams::kEtaMin +
                           (MaterialParams::kEtaMax - MaterialParams::kEtaMin) * i / 7.0;
        const double o = objective(eta);
        omin = std::min(omin, o);
        omax = std::max(omax, o);
    }
    if (omax - omin > 1e-14 * std::max(1.0, omax)) {
        // Golden-section minimization on [etaMin, etaMax].
        const double gr = (std::sqrt(5.0) - 1.0) / 2.0;
        double a = MaterialParams::kEtaMin, b = MaterialParams::kEtaMax;
        double c = b - gr * (b - a), d = a + gr * (b - a);
        double fc = objective(c), fd = objective(d);
        for (int it = 0; it < 80 && b - a > 1e-10; ++it) {
            if (fc < fd) {
                b = d;
                d = c;
                fd = fc;
                c = b - gr * (b - a);
                fc = objective(c);
            } else {
                a = c;
                c = d;
                fc = fd;
                d = a + gr * (b - a);
                fd = objective(d);
            }
        }
        updated.eta = std::clamp(0.5 * (a + b), MaterialParams::kEtaMin, MaterialParams::kEtaMax);
        if (refit_applied) *refit_applied = true;
    }

    // Closed-form albedo from I = albedo * (n . l).
    double num = 0.0, den = 0.0;
    for (std::size_t k = 0; k < mask.size(); ++k) {
        if (!mask[k]) continue;
        const double shade = normals.nx[k] * light.x + normals.ny[k] * light.y +
                             normals.nz[k] * light.z;
        if (shade <= kTinyDenom) continue;
        num += intensity[k] * shade;
        den += shade * shade;
    }
    if (den > 0.0) {
        const double albedo = num / den;
        if (albedo > 0.0) updated.albedo = std::min(albedo, 1.0);
    }
    return updated;
}

RegionResult reconstruct_region(const PolarMaps& polar, const MaskRaster& region_mask,
                                const RasterF& prior_azimuth, const ConvexityWeights& conv,
                                const SolverConfig& config) {
    require_same_size(polar.intensity, region_mask, "reconstruct_region");
    const std::size_t n_px = count_mask(region_mask);
    if (n_px == 0) throw std::invalid_argument("reconstruct_region: empty region");

    RegionResult result;
    result.material = config.init_material;
    result.illum.view = config.view.normalized();
    result.illum.direction = result.illum.view;

    if (n_px < 5) {
        // Too small for derivative constraints: flat patch.
        result.height = RasterF(region_mask.width(), region_mask.height(), 0.0);
        result.normals = NormalMap(region_mask.width(), region_mask.height());
        result.converged = true;
        return result;
    }

    const GradientOperators ops = build_gradient_operators(region_mask, config.smoothing_sigma);
    RasterF z(region_mask.width(), region_mask.height(), 0.0);

    for (int it = 0; it < config.max_outer_iterations; ++it) {
        StageTimer t_iter("outer iteration");
        long clamps = 0;
        const RasterF zen = [&] {
            StageTimer t("zenith_map");
            return zenith_map_from_dop(polar.dop, result.material.eta, region_mask, &clamps);
        }();
        result.zenith_clamps += clamps;
        const NormalMap prior = implicit_normals(prior_azimuth, zen, region_mask);

        // DOP beyond the reachable diffuse range for the current eta means the
        // zenith estimate saturated at the cap; those rows would prescribe
        // near-vertical gradients, so they are dropped for this iteration.
        const double rho_cap = max_diffuse_dop(result.material.eta) * (1.0 - 1e-9);
        MaskRaster zenith_valid(region_mask.width(), region_mask.height(), 0);
        for (std::size_t k = 0; k < region_mask.size(); ++k)
            if (region_mask[k] && polar.dop[k] < rho_cap) zenith_valid[k] = 1;

        if (config.estimate_light) {
            const IlluminationEstimate est = estimate_illumination(
                polar.intensity, prior, result.material.albedo, region_mask, config.view);
            result.illum = est.illum;
        }

        ConstraintSystem system;
        system.weights = config.weights;
        system.azimuth = azimuth_rows(polar.aop, ops, region_mask, config.azimuth_printed_form);
        system.mfcp = mfcp_rows(prior, conv, zen, ops, region_mask, &zenith_valid);
        if (config.use_intensity_rows) {
            bool dropped = false;
            system.intensity = intensity_ratio_rows(polar.intensity, zen, result.illum,
                                                    result.material.albedo, ops, region_mask,
                                                    &dropped, &zenith_valid);
            result.intensity_rows_used = !dropped && !system.intensity.empty();
        }

        const SolveResult solved = [&] {
            StageTimer t("solve_height");
            return solve_height(system, ops);
        }();

        double max_dz = 0.0, zmin = 0.0, zmax = 0.0;
        bool first = true;
        for (int i = 0; i < ops.n(); ++i) {
            const std::size_t k = static_cast<std::size_t>(ops.pixels[static_cast<std::size_t>(i)]);
            max_dz = std::max(max_dz, std::abs(solved.height[k] - z[k]));
            if (first) {
                zmin = zmax = solved.height[k];
                first = false;
            } else {
                zmin = std::min(zmin, solved.height[k]);
                zmax = std::max(zmax, solved.height[k]);
            }
        }
        z = solved.height;

        const RasterF zen_geom = zenith_from_height(z, ops, config.view);
        {
            StageTimer t("refit_material");
            result.material = refit_material(polar.dop, zen_geom, region_mask, result.material,
                                             polar.intensity, normals_from_height(z, ops),
                                             result.illum.direction);
        }

        result.iterations = it + 1;
        result.diag.push_back({it + 1, solved.objective, result.material.eta,
                               result.material.albedo, max_dz});
        if (std::getenv("SMSFP_TRACE"))
            std::fprintf(stderr, "[trace] it=%d obj=%.6g eta=%.5f albedo=%.4f max_dz=%.6g rows(a=%zu i=%zu m=%zu)\n",
                         it + 1, solved.objective, result.material.eta, result.material.albedo,
                         max_dz, system.azimuth.size(), system.intensity.size(),
                         system.mfcp.size());

        const double range = std::max(zmax - zmin, 1e-12);
        if (max_dz < config.height_tol_rel * range) {
            result.converged = true;
            break;
        }
    }

    result.height = z;
    result.normals = normals_from_height(z, ops);
    return result;
}

}  // namespace smsfp
