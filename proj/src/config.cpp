#include "smsfp/config.hpp"

#include <fstream>
#include <stdexcept>

namespace smsfp {

using nlohmann::json;

json config_to_json(const ReconstructionConfig& c) {
    json j;
    j["albedo0"] = c.init_material.albedo;
    j["eta0"] = c.init_material.eta;
    j["view"] = {c.view.x, c.view.y, c.view.z};
    j["seg"] = {{"tau", c.seg.tau},
                {"lambda_rho", c.seg.lambda_rho},
                {"lambda_phi", c.seg.lambda_phi},
                {"window", c.seg.window},
                {"min_region_px", c.seg.min_region_px},
                {"seed_grid_stride", c.seg.seed_grid_stride},
                {"eight_connect", c.seg.eight_connect},
                {"update_seed_feature", c.seg.update_seed_feature},
                {"merge_threshold", c.seg.merge_threshold}};
    j["scales"] = {{"block_sizes", c.scales.block_sizes}, {"gamma", c.scales.gamma}};
    j["convexity_decay"] = c.convexity_decay;
    j["weights"] = {{"azimuth", c.weights.azimuth},
                    {"intensity", c.weights.intensity},
                    {"mfcp", c.weights.mfcp},
                    {"laplacian", c.weights.laplacian}};
    j["smoothing_sigma"] = c.smoothing_sigma;
    j["max_outer_iterations"] = c.max_outer_iterations;
    j["height_tol_rel"] = c.height_tol_rel;
    j["use_intensity_rows"] = c.use_intensity_rows;
    j["azimuth_printed_form"] = c.azimuth_printed_form;
    j["estimate_light"] = c.estimate_light;
    j["single_region"] = c.single_region;
    j["mfcp_use_texture"] = c.mfcp_use_texture;
    j["region_local_prior"] = c.region_local_prior;
    j["guided_radius"] = c.guided_radius;
    j["guided_eps"] = c.guided_eps;
    return j;
}

ReconstructionConfig config_from_json(const json& j) {
    ReconstructionConfig c;
    if (j.contains("albedo0")) c.init_material.albedo = j.at("albedo0").get<double>();
    if (j.contains("eta0")) c.init_material.eta = j.at("eta0").get<double>();
    if (j.contains("view")) {
        const auto v = j.at("view");
        if (!v.is_array() || v.size() != 3)
            throw std::invalid_argument("config: view must be a 3-vector");
        c.view = Vec3{v[0].get<double>(), v[1].get<double>(), v[2].get<double>()};
    }
    if (j.contains("seg")) {
        const auto& s = j.at("seg");
        if (s.contains("tau")) c.seg.tau = s.at("tau").get<double>();
        if (s.contains("lambda_rho")) c.seg.lambda_rho = s.at("lambda_rho").get<double>();
        if (s.contains("lambda_phi")) c.seg.lambda_phi = s.at("lambda_phi").get<double>();
        if (s.contains("window")) c.seg.window = s.at("window").get<int>();
        if (s.contains("min_region_px")) c.seg.min_region_px = s.at("min_region_px").get<int>();
        if (s.contains("seed_grid_stride"))
            c.seg.seed_grid_stride = s.at("seed_grid_stride").get<int>();
        if (s.contains("eight_connect")) c.seg.eight_connect = s.at("eight_connect").get<bool>();
        if (s.contains("update_seed_feature"))
            c.seg.update_seed_feature = s.at("update_seed_feature").get<bool>();
        if (s.contains("merge_threshold"))
            c.seg.merge_threshold = s.at("merge_threshold").get<double>();
    }
    if (j.contains("scales")) {
        const auto& s = j.at("scales");
        if (s.contains("block_sizes"))
            c.scales.block_sizes = s.at("block_sizes").get<std::vector<int>>();
        if (s.contains("gamma")) c.scales.gamma = s.at("gamma").get<double>();
    }
    if (j.contains("convexity_decay")) c.convexity_decay = j.at("convexity_decay").get<double>();
    if (j.contains("weights")) {
        const auto& s = j.at("weights");
        if (s.contains("azimuth")) c.weights.azimuth = s.at("azimuth").get<double>();
        if (s.contains("intensity")) c.weights.intensity = s.at("intensity").get<double>();
        if (s.contains("mfcp")) c.weights.mfcp = s.at("mfcp").get<double>();
        if (s.contains("laplacian")) c.weights.laplacian = s.at("laplacian").get<double>();
    }
    if (j.contains("smoothing_sigma")) c.smoothing_sigma = j.at("smoothing_sigma").get<double>();
    if (j.contains("max_outer_iterations"))
        c.max_outer_iterations = j.at("max_outer_iterations").get<int>();
    if (j.contains("height_tol_rel")) c.height_tol_rel = j.at("height_tol_rel").get<double>();
    if (j.contains("use_intensity_rows"))
        c.use_intensity_rows = j.at("use_intensity_rows").get<bool>();
    if (j.contains("azimuth_printed_form"))
        c.azimuth_printed_form = j.at("azimuth_printed_form").get<bool>();
    if (j.contains("estimate_light")) c.estimate_light = j.at("estimate_light").get<bool>();
    if (j.contains("single_region")) c.single_region = j.at("single_region").get<bool>();
    if (j.contains("mfcp_use_texture")) c.mfcp_use_texture = j.at("mfcp_use_texture").get<bool>();
    if (j.contains("region_local_prior"))
        c.region_local_prior = j.at("region_local_prior").get<bool>();
    if (j.contains("guided_radius")) c.guided_radius = j.at("guided_radius").get<int>();
    if (j.contains("guided_eps")) c.guided_eps = j.at("guided_eps").get<double>();
    c.validate();
    return c;
}

ReconstructionConfig load_config_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::invalid_argument("cannot open config file " + path);
    json j;
    in >> j;
    return config_from_json(j);
}

}  // namespace smsfp
