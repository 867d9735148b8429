#include <subedge/error.hpp>
#include <subedge/pipeline.hpp>

#include <algorithm>
#include <cmath>

namespace subedge {

const char* to_string(Method m) noexcept {
    return m == Method::Stochastic ? "stochastic" : "classical";
}

Method method_from_string(const std::string& name) {
    if (name == "stochastic") {
        return Method::Stochastic;
    }
    if (name == "classical") {
        return Method::Classical;
    }
    throw Error(ErrorCode::InvalidArgument, "unknown method '" + name + "' (expected stochastic|classical)");
}

double select_kernel_sigma(const GrayImage& img, double sigma_b, const PipelineConfig& cfg) {
    if (!(cfg.scale_step > 0.0) || cfg.max_kernel_sigma < cfg.kernel_sigma) {
        throw Error(ErrorCode::InvalidArgument, "scale selection needs scale_step > 0 and max_kernel_sigma >= kernel_sigma");
    }
    double sigma = cfg.kernel_sigma;
    for (int step = 1;; ++step) {
        const GradientField field = compute_gradient(img, gaussian_derivative_kernels(sigma), sigma_b);
        double max_mag = 0.0;
        for (size_t i = 0; i < field.h_x.size(); ++i) {
            max_mag = std::max(max_mag, std::hypot(field.h_x[i], field.h_y[i]));
        }
        const double next = cfg.kernel_sigma + step * cfg.scale_step;
        if (cfg.edge_threshold * max_mag >= kMinThresholdSnr * field.sigma_H || next > cfg.max_kernel_sigma + 1e-12) {
            return sigma;
        }
        sigma = next;
    }
}

Detection detect(const GrayImage& img, const PipelineConfig& cfg) {
    Detection det;
    double sigma_b = 0.0;
    if (cfg.sigma_b) {
        sigma_b = *cfg.sigma_b;
    } else {
        sigma_b = estimate_noise_sigma(img);
        det.sigma_b_estimated = true;
    }
    const double kernel_sigma = cfg.select_scale ? select_kernel_sigma(img, sigma_b, cfg) : cfg.kernel_sigma;
    det.kernels = gaussian_derivative_kernels(kernel_sigma);
    det.field = compute_gradient(img, det.kernels, sigma_b);
    det.edge_pixels = detect_edge_pixels(det.field, cfg.edge_threshold);
    det.ordered = trace_contour(det.edge_pixels, cfg.closed, cfg.allow_multiple);
    det.observations =
        build_observations(det.field, det.ordered, cfg.closed, static_cast<int>(det.kernels.k_x.size()));
    det.observations.validate(cfg.fit.degree);
    return det;
}

PipelineResult fit_detection(const Detection& det, Method method, const PipelineConfig& cfg) {
    FitConfig fit_cfg = cfg.fit;
    fit_cfg.closed = cfg.closed;
    const ObservationSet& obs = det.observations;

    FitResult fit = [&]() -> FitResult {
        if (method == Method::Stochastic) {
            return fit_stochastic(obs, fit_cfg);
        }
        const int n = resolve_num_ctrl(obs.size(), fit_cfg);
        const KnotVector kv = make_knot_vector(n, fit_cfg.degree, fit_cfg.closed);
        ContourModel model = fit_classical(obs, kv, fit_cfg.ridge.value_or(0.0));
        FitReport report;
        report.num_obs = obs.size();
        report.num_ctrl = n;
        report.sigma_H = obs.sigma_H;
        report.ridge = fit_cfg.ridge.value_or(0.0);
        report.iterations_used = 1;
        report.residual_rms = residual_rms(obs, model, true);
        const double rms = report.residual_rms;
        report.energy_trace.push_back(obs.size() * rms * rms);
        return {std::move(model), std::move(report)};
    }();

    PipelineResult out{method, std::move(fit), static_cast<int>(det.edge_pixels.size()), det.kernels.sigma,
                       det.sigma_b_estimated,
                       obs.sigma_b};
    return out;
}

PipelineResult run_pipeline(const GrayImage& img, Method method, const PipelineConfig& cfg) {
    return fit_detection(detect(img, cfg), method, cfg);
}

}  // namespace subedge
