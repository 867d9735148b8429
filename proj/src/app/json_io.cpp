#include <subedge/app.hpp>

#include <fstream>
#include <sstream>

namespace subedge::app {

namespace {

/// Runs f, turning JSON type/key errors into InvalidArgument with context.
template <typename F>
auto guarded(const char* what, F&& f) -> decltype(f()) {
    try {
        return f();
    } catch (const json::exception& e) {
        throw Error(ErrorCode::InvalidArgument, std::string("malformed ") + what + ": " + e.what());
    }
}

std::optional<double> optional_number(const json& doc, const char* key) {
    if (doc.contains(key) && !doc.at(key).is_null()) {
        return doc.at(key).get<double>();
    }
    return std::nullopt;
}

json optional_to_json(const std::optional<double>& v) {
    return v ? json(*v) : json(nullptr);
}

json fit_config_to_json(const FitConfig& cfg) {
    return json{{"num_ctrl", cfg.num_ctrl}, {"ctrl_ratio", cfg.ctrl_ratio},
                {"degree", cfg.degree},     {"max_iters", cfg.max_iters},
                {"Sigma", optional_to_json(cfg.Sigma)}, {"ridge", optional_to_json(cfg.ridge)},
                {"orientation", cfg.orientation}};
}

FitConfig fit_config_from_json(const json& doc) {
    FitConfig cfg;
    cfg.num_ctrl = doc.value("num_ctrl", cfg.num_ctrl);
    cfg.ctrl_ratio = doc.value("ctrl_ratio", cfg.ctrl_ratio);
    cfg.degree = doc.value("degree", cfg.degree);
    cfg.max_iters = doc.value("max_iters", cfg.max_iters);
    cfg.Sigma = optional_number(doc, "Sigma");
    cfg.ridge = optional_number(doc, "ridge");
    cfg.orientation = doc.value("orientation", cfg.orientation);
    return cfg;
}

json pipeline_to_json(const PipelineConfig& cfg) {
    return json{{"kernel_sigma", cfg.kernel_sigma},         {"edge_threshold", cfg.edge_threshold},
                {"select_scale", cfg.select_scale},         {"max_kernel_sigma", cfg.max_kernel_sigma},
                {"scale_step", cfg.scale_step},             {"closed", cfg.closed},
                {"allow_multiple", cfg.allow_multiple}};
}

PipelineConfig pipeline_from_json(const json& doc) {
    PipelineConfig cfg;
    cfg.kernel_sigma = doc.value("kernel_sigma", cfg.kernel_sigma);
    cfg.edge_threshold = doc.value("edge_threshold", cfg.edge_threshold);
    cfg.select_scale = doc.value("select_scale", cfg.select_scale);
    cfg.max_kernel_sigma = doc.value("max_kernel_sigma", cfg.max_kernel_sigma);
    cfg.scale_step = doc.value("scale_step", cfg.scale_step);
    cfg.closed = doc.value("closed", cfg.closed);
    cfg.allow_multiple = doc.value("allow_multiple", cfg.allow_multiple);
    return cfg;
}

}  // namespace

json read_json(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) {
        throw Error(ErrorCode::Io, "cannot open '" + path.string() + "' for reading");
    }
    try {
        return json::parse(in);
    } catch (const json::exception& e) {
        throw Error(ErrorCode::Io, "cannot parse JSON in '" + path.string() + "': " + e.what());
    }
}

void write_json(const std::filesystem::path& path, const json& doc) {
    std::ofstream out(path, std::ios::binary);
    if (!out) {
        throw Error(ErrorCode::Io, "cannot open '" + path.string() + "' for writing");
    }
    out << doc.dump(2) << '\n';
    if (!out) {
        throw Error(ErrorCode::Io, "failed writing '" + path.string() + "'");
    }
}

json model_to_json(const ContourModel& model) {
    json ctrl = json::array();
    for (int j = 0; j < model.num_ctrl(); ++j) {
        ctrl.push_back({model.theta_x()[static_cast<size_t>(j)], model.theta_y()[static_cast<size_t>(j)]});
    }
    return json{{"degree", model.knots().degree()},
                {"closed", model.closed()},
                {"knots", model.knots().knots()},
                {"ctrl", std::move(ctrl)}};
}

ContourModel model_from_json(const json& doc) {
    return guarded("model", [&] {
        KnotVector kv(doc.at("knots").get<std::vector<double>>(), doc.at("degree").get<int>(),
                      doc.at("closed").get<bool>());
        std::vector<double> tx;
        std::vector<double> ty;
        for (const json& p : doc.at("ctrl")) {
            if (p.size() != 2) {
                throw Error(ErrorCode::InvalidArgument, "malformed model: control points must be [x, y] pairs");
            }
            tx.push_back(p.at(0).get<double>());
            ty.push_back(p.at(1).get<double>());
        }
        return ContourModel(std::move(kv), std::move(tx), std::move(ty));
    });
}

json truth_to_json(const GroundTruth& truth) {
    json corners = json::array();
    for (const Point2& c : truth.corners) {
        corners.push_back({c.x, c.y});
    }
    return json{{"type", truth.description}, {"corners", std::move(corners)}};
}

GroundTruth truth_from_json(const json& doc) {
    return guarded("ground truth", [&] {
        if (doc.at("type").get<std::string>() != "rect") {
            throw Error(ErrorCode::InvalidArgument, "ground truth type must be \"rect\"");
        }
        const json& corners = doc.at("corners");
        GroundTruth g;
        if (corners.size() != g.corners.size()) {
            throw Error(ErrorCode::InvalidArgument, "ground truth needs exactly 4 corners");
        }
        for (size_t i = 0; i < g.corners.size(); ++i) {
            g.corners[i] = Point2{corners.at(i).at(0).get<double>(), corners.at(i).at(1).get<double>()};
        }
        return g;
    });
}

json metrics_to_json(const ErrorMetrics& m) {
    return json{{"mean_dist", m.mean_dist},
                {"rms_dist", m.rms_dist},
                {"max_dist", m.max_dist},
                {"samples_used", m.samples_used}};
}

json noise_to_json(const NoiseSpec& spec) {
    json doc{{"kind", to_string(spec.kind)}};
    if (spec.kind == NoiseKind::Gaussian) {
        doc["sigma"] = spec.sigma;
    } else if (spec.kind == NoiseKind::SaltPepper) {
        doc["p0"] = spec.p0;
        doc["gamma"] = spec.gamma;
    }
    return doc;
}

NoiseSpec noise_from_json(const json& doc) {
    return guarded("noise spec", [&] {
        NoiseSpec spec;
        spec.kind = noise_kind_from_string(doc.at("kind").get<std::string>());
        spec.sigma = doc.value("sigma", 0.0);
        spec.p0 = doc.value("p0", 0.0);
        spec.gamma = doc.value("gamma", 0.0);
        spec.validate();
        return spec;
    });
}

json fit_report_to_json(const PipelineResult& result) {
    const FitReport& r = result.fit.report;
    return json{{"method", to_string(result.method)},
                {"energy_trace", r.energy_trace},
                {"residual_rms", r.residual_rms},
                {"iterations_used", r.iterations_used},
                {"condition_warning", r.condition_warning},
                {"num_obs", r.num_obs},
                {"num_ctrl", r.num_ctrl},
                {"edge_pixels", result.edge_pixels},
                {"kernel_sigma", result.kernel_sigma},
                {"sigma_b", result.sigma_b},
                {"sigma_b_estimated", result.sigma_b_estimated},
                {"sigma_H", r.sigma_H},
                {"Sigma", r.Sigma},
                {"ridge", r.ridge},
                {"warnings", r.warnings}};
}

void ExperimentSpec::validate() const {
    if (trials < 1) {
        throw Error(ErrorCode::InvalidArgument, "trials must be at least 1");
    }
    if (noise_grid.empty()) {
        throw Error(ErrorCode::InvalidArgument, "noise grid must not be empty");
    }
    for (const NoiseSpec& n : noise_grid) {
        n.validate();
    }
    if (samples < 100) {
        throw Error(ErrorCode::InvalidArgument, "samples must be at least 100");
    }
    if (!image.generated && (image.path.empty() || image.truth_path.empty())) {
        throw Error(ErrorCode::InvalidArgument, "file image sources need both path and truth");
    }
}

ExperimentSpec spec_from_json(const json& doc) {
    return guarded("experiment spec", [&] {
        ExperimentSpec spec;
        if (doc.contains("image")) {
            const json& img = doc.at("image");
            const std::string type = img.value("type", "generated");
            if (type == "generated") {
                spec.image.size = img.value("size", spec.image.size);
                if (img.contains("rect")) {
                    const auto r = img.at("rect").get<std::vector<double>>();
                    if (r.size() != 4) {
                        throw Error(ErrorCode::InvalidArgument, "rect must be [x0, y0, x1, y1]");
                    }
                    spec.image.rect = Rect{r[0], r[1], r[2], r[3]};
                }
                spec.image.lo = img.value("lo", spec.image.lo);
                spec.image.hi = img.value("hi", spec.image.hi);
                spec.image.blur = img.value("blur", spec.image.blur);
            } else if (type == "file") {
                spec.image.generated = false;
                spec.image.path = img.at("path").get<std::string>();
                spec.image.truth_path = img.at("truth").get<std::string>();
            } else {
                throw Error(ErrorCode::InvalidArgument, "image type must be \"generated\" or \"file\"");
            }
        }
        for (const json& n : doc.at("noise")) {
            spec.noise_grid.push_back(noise_from_json(n));
        }
        spec.trials = doc.value("trials", spec.trials);
        spec.seed = doc.value("seed", spec.seed);
        spec.estimate_sigma_b = doc.value("estimate_sigma_b", spec.estimate_sigma_b);
        if (doc.contains("pipeline")) {
            spec.pipeline = pipeline_from_json(doc.at("pipeline"));
        }
        if (doc.contains("stochastic")) {
            spec.stochastic = fit_config_from_json(doc.at("stochastic"));
        }
        if (doc.contains("classical")) {
            spec.classical = fit_config_from_json(doc.at("classical"));
        }
        spec.samples = doc.value("samples", spec.samples);
        spec.corner_mask = doc.value("corner_mask", spec.corner_mask);
        spec.out_dir = doc.value("out_dir", spec.out_dir);
        spec.validate();
        return spec;
    });
}

json spec_to_json(const ExperimentSpec& spec) {
    json image;
    if (spec.image.generated) {
        const Rect& r = spec.image.rect;
        image = json{{"type", "generated"},  {"size", spec.image.size}, {"rect", {r.x0, r.y0, r.x1, r.y1}},
                     {"lo", spec.image.lo},  {"hi", spec.image.hi},     {"blur", spec.image.blur}};
    } else {
        image = json{{"type", "file"}, {"path", spec.image.path}, {"truth", spec.image.truth_path}};
    }
    json noise = json::array();
    for (const NoiseSpec& n : spec.noise_grid) {
        noise.push_back(noise_to_json(n));
    }
    return json{{"image", std::move(image)},
                {"noise", std::move(noise)},
                {"trials", spec.trials},
                {"seed", spec.seed},
                {"estimate_sigma_b", spec.estimate_sigma_b},
                {"pipeline", pipeline_to_json(spec.pipeline)},
                {"stochastic", fit_config_to_json(spec.stochastic)},
                {"classical", fit_config_to_json(spec.classical)},
                {"samples", spec.samples},
                {"corner_mask", spec.corner_mask},
                {"out_dir", spec.out_dir}};
}

}  // namespace subedge::app
