#include <CLI11.hpp>
#include <json.hpp>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>

#include "smsfp/config.hpp"
#include "smsfp/diffuse.hpp"
#include "smsfp/eval.hpp"
#include "smsfp/image_io.hpp"
#include "smsfp/parg.hpp"
#include "smsfp/pipeline.hpp"
#include "smsfp/renderer.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace smsfp;

namespace {

struct GlobalOpts {
    std::string out_dir = ".";
    std::string config_path;
    std::uint64_t seed = 0;
    bool verbose = false;

    ReconstructionConfig config() const {
        return config_path.empty() ? ReconstructionConfig{} : load_config_file(config_path);
    }
    fs::path out(const std::string& name) const { return fs::path(out_dir) / name; }
};

void ensure_out_dir(const GlobalOpts& g) { fs::create_directories(g.out_dir); }

PolarizedStack read_stack(const std::string& dir) {
    const fs::path base(dir);
    PolarizedStack stack;
    const char* names[4] = {"I000", "I045", "I090", "I135"};
    RasterF* channels[4] = {&stack.i0, &stack.i45, &stack.i90, &stack.i135};
    for (int i = 0; i < 4; ++i) {
        const fs::path pfm = base / (std::string(names[i]) + ".pfm");
        const fs::path png = base / (std::string(names[i]) + ".png");
        if (fs::exists(pfm))
            *channels[i] = read_pfm(pfm.string());
        else if (fs::exists(png))
            *channels[i] = read_png_gray(png.string());
        else
            throw std::invalid_argument("missing stack image " + pfm.string() + " (or .png)");
    }
    const fs::path mask = base / "mask.png";
    if (fs::exists(mask)) {
        stack.mask = read_png_mask(mask.string());
    } else {
        stack.mask = MaskRaster(stack.i0.width(), stack.i0.height(), 1);
    }
    stack.validate();
    return stack;
}

void write_json(const fs::path& path, const json& j) {
    write_text_atomic(path.string(), j.dump(2) + "\n");
}

json report_to_json(const EvalReport& r) {
    return json{{"mae_deg", r.mae_deg},   {"rmse_deg", r.rmse_deg}, {"acc_11_25", r.acc_11_25},
                {"acc_22_5", r.acc_22_5}, {"acc_30", r.acc_30},     {"n_pixels", r.n_pixels}};
}

Raster<std::uint16_t> labels_to_u16(const LabelRaster& labels) {
    Raster<std::uint16_t> out(labels.width(), labels.height(), 0);
    for (std::size_t k = 0; k < labels.size(); ++k) {
        if (labels[k] < 0 || labels[k] > 65535)
            throw std::runtime_error("label value out of 16-bit range");
        out[k] = static_cast<std::uint16_t>(labels[k]);
    }
    return out;
}

void write_labels(const GlobalOpts& g, const RegionLabels& labels, const json& config_echo) {
    write_png_gray16(g.out("labels.png").string(), labels_to_u16(labels.labels));
    json sidecar;
    sidecar["region_count"] = labels.region_count;
    const auto sizes = region_sizes(labels);
    json per_region = json::array();
    for (int r = 1; r <= labels.region_count; ++r)
        per_region.push_back(json{{"label", r}, {"pixels", sizes[static_cast<std::size_t>(r)]}});
    sidecar["regions"] = per_region;
    sidecar["config_echo"] = config_echo;
    write_json(g.out("labels.json"), sidecar);
}

int cmd_render(const GlobalOpts& g, const SceneParams& params, const std::string& light_spec,
               double eta, double albedo, double noise, const std::string& ambiguity,
               const std::string& format) {
    ensure_out_dir(g);
    const AnalyticScene scene = make_scene(params);

    Vec3 light{0.0, 0.0, 1.0};
    if (!light_spec.empty()) {
        std::istringstream in(light_spec);
        char comma;
        if (!(in >> light.x >> comma >> light.y >> comma >> light.z))
            throw std::invalid_argument("light must be x,y,z");
    }
    Illumination illum;
    illum.direction = light.normalized();
    illum.view = Vec3{0.0, 0.0, 1.0};

    MaterialParams material{eta, albedo};
    const AmbiguityMode mode =
        ambiguity == "perpendicular" ? AmbiguityMode::perpendicular : AmbiguityMode::parallel;
    const PolarizedStack stack = render_polarized(scene, material, illum, mode, noise, g.seed);

    const char* names[4] = {"I000", "I045", "I090", "I135"};
    const RasterF* channels[4] = {&stack.i0, &stack.i45, &stack.i90, &stack.i135};
    double imax = 0.0;
    for (std::size_t k = 0; k < stack.mask.size(); ++k)
        for (const RasterF* ch : channels) imax = std::max(imax, (*ch)[k]);
    for (int i = 0; i < 4; ++i) {
        if (format == "png16") {
            Raster<std::uint16_t> img(stack.i0.width(), stack.i0.height(), 0);
            for (std::size_t k = 0; k < img.size(); ++k)
                img[k] = static_cast<std::uint16_t>(
                    std::lround(std::clamp((*channels[i])[k] / (imax > 0 ? imax : 1.0), 0.0, 1.0) *
                                65535.0));
            write_png_gray16(g.out(std::string(names[i]) + ".png").string(), img);
        } else {
            write_pfm(g.out(std::string(names[i]) + ".pfm").string(), *channels[i]);
        }
    }
    write_png_mask(g.out("mask.png").string(), stack.mask);
    write_pfm(g.out("gt_height.pfm").string(), scene.height);
    write_normal_pfm(g.out("gt_normals.pfm").string(), scene.normals);
    write_pfm(g.out("gt_zenith.pfm").string(), scene.zenith);
    write_pfm(g.out("gt_azimuth.pfm").string(), scene.azimuth);

    json manifest;
    manifest["scene"] = {{"kind", to_string(params.kind)},
                         {"grid", params.grid},
                         {"radius", params.radius},
                         {"theta_max_deg", params.theta_max_deg},
                         {"curvature_a", params.curvature_a},
                         {"curvature_b", params.curvature_b},
                         {"slope_x", params.slope_x},
                         {"slope_y", params.slope_y},
                         {"bump_radius1", params.bump_radius1},
                         {"bump_radius2", params.bump_radius2},
                         {"bump_separation", params.bump_separation}};
    manifest["material"] = {{"eta", material.eta}, {"albedo", material.albedo}};
    manifest["light"] = {illum.direction.x, illum.direction.y, illum.direction.z};
    manifest["noise_sigma"] = noise;
    manifest["seed"] = g.seed;
    manifest["format"] = format;
    if (format == "png16") manifest["png_scale"] = imax;
    write_json(g.out("manifest.json"), manifest);
    if (g.verbose)
        std::cerr << "rendered " << to_string(params.kind) << " with "
                  << count_mask(stack.mask) << " mask pixels\n";
    return 0;
}

int cmd_decompose(const GlobalOpts& g, const std::string& stack_dir) {
    ensure_out_dir(g);
    const PolarizedStack stack = read_stack(stack_dir);
    const PolarMaps polar = decompose_stack(stack);
    write_pfm(g.out("intensity.pfm").string(), polar.intensity);
    write_pfm(g.out("dop.pfm").string(), polar.dop);
    write_pfm(g.out("aop.pfm").string(), polar.aop);
    json diag;
    diag["dop_clamp_count"] = polar.dop_clamp_count;
    diag["mask_pixels"] = count_mask(stack.mask);
    write_json(g.out("decompose.json"), diag);
    return 0;
}

int cmd_segment(const GlobalOpts& g, const std::string& stack_dir) {
    ensure_out_dir(g);
    const ReconstructionConfig config = g.config();
    const PolarizedStack stack = read_stack(stack_dir);
    const PolarMaps polar = decompose_stack(stack);
    const RegionLabels labels = segment(polar, stack.mask, config.seg);
    write_labels(g, labels, config_to_json(config)["seg"]);
    return 0;
}

int cmd_reconstruct(const GlobalOpts& g, const std::string& stack_dir,
                    const std::string& oracle_path, bool single_region) {
    ensure_out_dir(g);
    ReconstructionConfig config = g.config();
    if (single_region) config.single_region = true;
    const PolarizedStack stack = read_stack(stack_dir);

    RasterF oracle;
    const RasterF* oracle_ptr = nullptr;
    if (!oracle_path.empty()) {
        oracle = read_pfm(oracle_path);
        oracle_ptr = &oracle;
    }

    const ReconstructionResult result = run_smsfp(stack, config, oracle_ptr);

    write_pfm(g.out("height.pfm").string(), result.height);
    write_normal_pfm(g.out("normals.pfm").string(), result.normals);
    write_normal_png(g.out("normals.png").string(), result.normals, stack.mask);
    write_png_gray16(g.out("labels.png").string(), labels_to_u16(result.labels.labels));

    json diag;
    diag["region_count"] = result.labels.region_count;
    diag["dop_clamp_count"] = result.dop_clamp_count;
    json regions = json::array();
    for (const auto& r : result.regions)
        regions.push_back(json{{"label", r.label},
                               {"pixels", r.pixels},
                               {"converged", r.converged},
                               {"failed", r.failed},
                               {"iterations", r.iterations},
                               {"intensity_rows_used", r.intensity_rows_used},
                               {"eta", r.eta},
                               {"albedo", r.albedo},
                               {"final_objective", r.final_objective}});
    diag["regions"] = regions;
    diag["config_echo"] = config_to_json(config);
    write_json(g.out("reconstruct.json"), diag);

    if (g.verbose) {
        std::ostringstream log;
        for (const auto& r : result.regions)
            log << json{{"label", r.label},
                        {"iterations", r.iterations},
                        {"eta", r.eta},
                        {"albedo", r.albedo},
                        {"final_objective", r.final_objective}}
                       .dump()
                << "\n";
        write_text_atomic(g.out("solve_log.jsonl").string(), log.str());
    }
    return 0;
}

int cmd_evaluate(const GlobalOpts& g, const std::string& est_path, const std::string& gt_path,
                 const std::string& mask_path, int rim, bool include_rim) {
    ensure_out_dir(g);
    const NormalMap est = read_normal_pfm(est_path);
    const NormalMap gt = read_normal_pfm(gt_path);
    MaskRaster mask = read_png_mask(mask_path);
    require_same_size(est.nx, gt.nx, "evaluate");
    require_same_size(est.nx, mask, "evaluate");
    if (!include_rim && rim > 0) mask = erode_mask(mask, rim);

    const RasterF errors = angular_error_map(est, gt, mask);
    const EvalReport report = summarize(errors, mask);
    json j = report_to_json(report);
    j["config_echo"] = {{"rim_excluded_px", include_rim ? 0 : rim}};
    write_json(g.out("report.json"), j);
    write_error_map_png(g.out("error_map.png").string(), errors, mask);
    if (g.verbose) std::cerr << "MAE " << report.mae_deg << " deg over " << report.n_pixels << " px\n";
    return 0;
}

int cmd_sweep(const GlobalOpts& g, const std::string& stack_dir, const std::string& gt_path,
              std::vector<double> taus, std::vector<double> kappas, std::vector<double> w_mfcp,
              int rim) {
    ensure_out_dir(g);
    const ReconstructionConfig base = g.config();
    const PolarizedStack stack = read_stack(stack_dir);
    const NormalMap gt = read_normal_pfm(gt_path);
    if (taus.empty()) taus.push_back(base.seg.tau);
    if (kappas.empty()) kappas.push_back(base.convexity_decay);
    if (w_mfcp.empty()) w_mfcp.push_back(base.weights.mfcp);

    std::ostringstream csv;
    csv << "tau,convexity_decay,w_mfcp,mae_deg,rmse_deg,acc_11_25,acc_22_5,acc_30,n_pixels\n";
    char line[512];
    for (double tau : taus)
        for (double kappa : kappas)
            for (double wm : w_mfcp) {
                ReconstructionConfig config = base;
                config.seg.tau = tau;
                config.convexity_decay = kappa;
                config.weights.mfcp = wm;
                const ReconstructionResult result = run_smsfp(stack, config);
                MaskRaster mask = stack.mask;
                if (rim > 0) mask = erode_mask(mask, rim);
                const EvalReport rep = summarize(angular_error_map(result.normals, gt, mask), mask);
                std::snprintf(line, sizeof(line), "%.12g,%.12g,%.12g,%.12g,%.12g,%.12g,%.12g,%.12g,%zu\n",
                              tau, kappa, wm, rep.mae_deg, rep.rmse_deg, rep.acc_11_25,
                              rep.acc_22_5, rep.acc_30, rep.n_pixels);
                csv << line;
                if (g.verbose)
                    std::cerr << "tau=" << tau << " kappa=" << kappa << " w_mfcp=" << wm
                              << " -> MAE " << rep.mae_deg << "\n";
            }
    write_text_atomic(g.out("sweep.csv").string(), csv.str());
    return 0;
}

int cmd_validate_model(const GlobalOpts& g, double eta, int samples) {
    ensure_out_dir(g);
    const ClosedFormReport report = validate_closed_form_inverse(eta, samples);
    report.write_csv(g.out("closed_form_report.csv").string());
    json j;
    j["eta"] = report.eta;
    j["negative_radicand_count"] = report.negative_radicand_count;
    j["max_abs_err"] = report.max_abs_err;
    j["samples"] = report.samples.size();
    write_json(g.out("closed_form_report.json"), j);
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Monocular shape-from-polarization toolkit"};
    app.require_subcommand(1);
    app.fallthrough();

    GlobalOpts g;
    app.add_option("--out", g.out_dir, "Output directory")->capture_default_str();
    app.add_option("--config", g.config_path, "JSON config file");
    app.add_option("--seed", g.seed, "RNG seed")->capture_default_str();
    app.add_flag("--verbose", g.verbose, "Verbose logging to stderr");

    // render
    auto* render = app.add_subcommand("render", "Render a synthetic polarized stack");
    std::string kind = "hemisphere", light, ambiguity = "parallel", format = "pfm";
    SceneParams params;
    double eta = 1.5, albedo = 0.8, noise = 0.0;
    render->add_option("--kind", kind, "hemisphere|paraboloid|two-bump|plane-ramp")
        ->capture_default_str();
    render->add_option("--grid", params.grid, "Grid size")->capture_default_str();
    render->add_option("--radius", params.radius, "Primary radius (0 = auto)");
    render->add_option("--theta-max", params.theta_max_deg, "Silhouette zenith cap (deg)")
        ->capture_default_str();
    render->add_option("--curv-a", params.curvature_a, "Paraboloid x curvature");
    render->add_option("--curv-b", params.curvature_b, "Paraboloid y curvature");
    render->add_option("--slope-x", params.slope_x, "Ramp slope x");
    render->add_option("--slope-y", params.slope_y, "Ramp slope y");
    render->add_option("--bump-r1", params.bump_radius1, "Two-bump radius 1 (0 = auto)");
    render->add_option("--bump-r2", params.bump_radius2, "Two-bump radius 2 (0 = auto)");
    render->add_option("--bump-sep", params.bump_separation, "Two-bump separation (0 = auto)");
    render->add_option("--eta", eta, "Refractive index")->capture_default_str();
    render->add_option("--albedo", albedo, "Albedo")->capture_default_str();
    render->add_option("--light", light, "Light direction x,y,z (default 0,0,1)");
    render->add_option("--noise", noise, "Gaussian noise sigma (fraction of max intensity)");
    render->add_option("--ambiguity", ambiguity, "parallel|perpendicular")->capture_default_str();
    render->add_option("--format", format, "pfm|png16")->capture_default_str();

    // decompose
    auto* decompose = app.add_subcommand("decompose", "Stack -> (I, DOP, AOP) maps");
    std::string stack_dir;
    decompose->add_option("--stack", stack_dir, "Stack directory")->required();

    // segment
    auto* seg = app.add_subcommand("segment", "Stack -> PARG region labels");
    std::string seg_stack;
    seg->add_option("--stack", seg_stack, "Stack directory")->required();

    // reconstruct
    auto* rec = app.add_subcommand("reconstruct", "Stack -> height + normals");
    std::string rec_stack, oracle_path;
    bool single_region = false;
    rec->add_option("--stack", rec_stack, "Stack directory")->required();
    rec->add_option("--oracle-azimuth", oracle_path, "GT azimuth PFM replacing the implicit prior");
    rec->add_flag("--single-region", single_region, "Global-convexity mode (no segmentation)");

    // evaluate
    auto* eval = app.add_subcommand("evaluate", "Angular-error report vs ground truth");
    std::string est_path, gt_path, mask_path;
    int rim = 1;
    bool include_rim = false;
    eval->add_option("--est", est_path, "Estimated normals PFM")->required();
    eval->add_option("--gt", gt_path, "Ground-truth normals PFM")->required();
    eval->add_option("--mask", mask_path, "Mask PNG")->required();
    eval->add_option("--rim", rim, "Rim pixels to exclude")->capture_default_str();
    eval->add_flag("--include-rim", include_rim, "Evaluate the full mask");

    // sweep
    auto* sweep = app.add_subcommand("sweep", "Parameter grid -> CSV of metrics");
    std::string sweep_stack, sweep_gt;
    std::vector<double> taus, kappas, wms;
    int sweep_rim = 1;
    sweep->add_option("--stack", sweep_stack, "Stack directory")->required();
    sweep->add_option("--gt-normals", sweep_gt, "Ground-truth normals PFM")->required();
    sweep->add_option("--tau-list", taus, "Segmentation tau values");
    sweep->add_option("--kappa-list", kappas, "Convexity decay values");
    sweep->add_option("--w-mfcp-list", wms, "MFCP weight values");
    sweep->add_option("--rim", sweep_rim, "Rim pixels to exclude")->capture_default_str();

    // validate-model
    auto* validate = app.add_subcommand("validate-model", "Closed-form zenith inverse report");
    double val_eta = 1.5;
    int val_samples = 100;
    validate->add_option("--eta", val_eta, "Refractive index")->capture_default_str();
    validate->add_option("--samples", val_samples, "Sample count")->capture_default_str();

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 2;
    }

    try {
        if (*render) {
            params.kind = scene_kind_from_string(kind);
            return cmd_render(g, params, light, eta, albedo, noise, ambiguity, format);
        }
        if (*decompose) return cmd_decompose(g, stack_dir);
        if (*seg) return cmd_segment(g, seg_stack);
        if (*rec) return cmd_reconstruct(g, rec_stack, oracle_path, single_region);
        if (*eval) return cmd_evaluate(g, est_path, gt_path, mask_path, rim, include_rim);
        if (*sweep) return cmd_sweep(g, sweep_stack, sweep_gt, taus, kappas, wms, sweep_rim);
        if (*validate) return cmd_validate_model(g, val_eta, val_samples);
    } catch (const std::invalid_argument& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "internal error: " << e.what() << "\n";
        return 1;
    }
    return 2;
}
