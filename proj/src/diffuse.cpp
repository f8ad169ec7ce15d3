#include "smsfp/diffuse.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <stdexcept>

#include <Eigen/Dense>

namespace smsfp {

double dop_from_zenith(double theta, double eta) {
    if (!(theta >= 0.0 && theta < kPi / 2.0))
        throw std::invalid_argument("dop_from_zenith: theta must be in [0, pi/2)");
    if (!(eta > 1.0)) throw std::invalid_argument("dop_from_zenith: eta must exceed 1");
    const double s2 = std::sin(theta) * std::sin(theta);
    const double a = eta - 1.0 / eta;
    const double b = eta + 1.0 / eta;
    const double num = a * a * s2;
    const double den = 2.0 + 2.0 * eta * eta - b * b * s2 +
                       4.0 * std::cos(theta) * std::sqrt(eta * eta - s2);
    return num / den;
}

double max_diffuse_dop(double eta) { return dop_from_zenith(kZenithCapRad, eta); }

double zenith_from_dop(double rho, double eta, long* clamp_count) {
    if (!(rho >= 0.0 && rho <= 1.0))
        throw std::invalid_argument("zenith_from_dop: rho must be in [0, 1]");
    if (!(eta > 1.0)) throw std::invalid_argument("zenith_from_dop: eta must exceed 1");
    if (rho == 0.0) return 0.0;
    const double rho_max = max_diffuse_dop(eta);
    if (rho >= rho_max) {
        if (clamp_count && rho > rho_max) ++*clamp_count;
        return kZenithCapRad;
    }
    double lo = 0.0, hi = kZenithCapRad;
    for (int it = 0; it < 200 && hi - lo > 1e-15; ++it) {
        const double mid = 0.5 * (lo + hi);
        if (dop_from_zenith(mid, eta) < rho)
            lo = mid;
        else
            hi = mid;
    }
    return 0.5 * (lo + hi);
}

RasterF zenith_map_from_dop(const RasterF& dop, double eta, const MaskRaster& mask,
                            long* clamp_count) {
    require_same_size(dop, mask, "zenith_map_from_dop");
    RasterF out(dop.width(), dop.height(), 0.0);
    const std::size_t n = out.size();
    long clamps = 0;
#pragma omp parallel for reduction(+ : clamps)
    for (std::size_t k = 0; k < n; ++k) {
        if (!mask[k]) continue;
        long c = 0;
        out[k] = zenith_from_dop(std::clamp(dop[k], 0.0, 1.0), eta, &c);
        clamps += c;
    }
    if (clamp_count) *clamp_count += clamps;
    return out;
}

double zenith_closed_form(double rho, double eta, bool* radicand_negative) {
    const double e2 = eta * eta;
    const double p1 = e2 * e2 * (1.0 - rho * rho) + 2.0 * e2 * (2.0 * rho * rho + rho - 1.0) +
                      (rho + 1.0) * (rho + 1.0);
    const double p2 = 4.0 * eta * e2 * rho * std::sqrt(1.0 - rho * rho);
    const double q1 = (rho + 1.0) * (rho + 1.0) * (eta + 1.0) +
                      2.0 * e2 * (3.0 * rho * rho + 2.0 * rho - 1.0);
    const double radicand = (q1 != 0.0) ? (p1 - p2) / q1 : -1.0;
    const bool neg = !(radicand >= 0.0);
    if (radicand_negative) *radicand_negative = neg;
    if (neg) return std::numeric_limits<double>::quiet_NaN();
    // radicand beyond 1 would put cos(theta) above 1; clamp to theta = 0
    return std::acos(std::min(std::sqrt(radicand), 1.0));
}

ClosedFormReport validate_closed_form_inverse(double eta, int sample_count) {
    if (!(eta >= MaterialParams::kEtaMin && eta <= MaterialParams::kEtaMax))
        throw std::invalid_argument("validate_closed_form_inverse: eta out of range");
    ClosedFormReport report;
    report.eta = eta;
    const double rho_max = max_diffuse_dop(eta);
    report.samples.resize(static_cast<std::size_t>(sample_count));
    for (int i = 0; i < sample_count; ++i) {
        ClosedFormSample& s = report.samples[static_cast<std::size_t>(i)];
        s.rho = rho_max * static_cast<double>(i) / static_cast<double>(sample_count - 1);
        s.theta_bisect = zenith_from_dop(s.rho, eta);
        s.theta_closed = zenith_closed_form(s.rho, eta, &s.radicand_negative);
        if (s.radicand_negative || std::isnan(s.theta_closed)) {
            ++report.negative_radicand_count;
            s.abs_err = std::numeric_limits<double>::quiet_NaN();
        } else {
            s.abs_err = std::abs(s.theta_closed - s.theta_bisect);
            report.max_abs_err = std::max(report.max_abs_err, s.abs_err);
        }
    }
    return report;
}

void ClosedFormReport::write_csv(const std::string& path) const {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot open " + path);
    out << "rho,theta_bisect,theta_closed,abs_err,radicand_negative\n";
    char line[256];
    for (const ClosedFormSample& s : samples) {
        std::snprintf(line, sizeof(line), "%.12g,%.12g,%.12g,%.12g,%d\n", s.rho, s.theta_bisect,
                      s.theta_closed, s.abs_err, s.radicand_negative ? 1 : 0);
        out << line;
    }
}

IlluminationEstimate estimate_illumination(const RasterF& intensity, const NormalMap& prior_normals,
                                           double albedo, const MaskRaster& mask,
                                           const Vec3& view) {
    require_same_size(intensity, mask, "estimate_illumination");
    require_same_size(intensity, prior_normals.nx, "estimate_illumination");
    if (!(albedo > 0.0)) throw std::invalid_argument("estimate_illumination: albedo must be > 0");

    // Normal equations of I/albedo = N l.
    Eigen::Matrix3d ata = Eigen::Matrix3d::Zero();
    Eigen::Vector3d atb = Eigen::Vector3d::Zero();
    std::size_t n_px = 0;
    for (std::size_t k = 0; k < mask.size(); ++k) {
        if (!mask[k]) continue;
        const Eigen::Vector3d n(prior_normals.nx[k], prior_normals.ny[k], prior_normals.nz[k]);
        ata += n * n.transpose();
        atb += n * (intensity[k] / albedo);
        ++n_px;
    }

    IlluminationEstimate est;
    est.illum.view = view.normalized();
    if (n_px < 3) {
        est.fallback = true;
        est.illum.direction = est.illum.view;
        est.intensity_usable = false;
        return est;
    }

    Eigen::SelfAdjointEigenSolver<Eigen::Matrix3d> eig(ata);
    const double lam_max = eig.eigenvalues().maxCoeff();
    const double lam_min = eig.eigenvalues().minCoeff();
    if (!(lam_max > 0.0) || lam_min < 1e-10 * lam_max) {
        est.fallback = true;
        est.illum.direction = est.illum.view;
        est.intensity_usable = false;
        return est;
    }

    const Eigen::Vector3d l = ata.ldlt().solve(atb);
    const double norm = l.norm();
    if (!(norm > 0.0)) {
        est.fallback = true;
        est.illum.direction = est.illum.view;
        est.intensity_usable = false;
        return est;
    }
    est.illum.direction = Vec3{l.x() / norm, l.y() / norm, l.z() / norm};
    est.intensity_usable = est.illum.separated();
    return est;
}

}  // namespace smsfp
