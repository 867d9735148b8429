/**
 * @file pipeline.hpp
 * @brief End-to-end contour estimation: gradient, edge pixels, ordering, observations, fit.
 */

#pragma once

#include <subedge/edge_observe.hpp>
#include <subedge/ml_fit.hpp>

#include <optional>
#include <string>

namespace subedge {

enum class Method { Stochastic, Classical };

const char* to_string(Method m) noexcept;
Method method_from_string(const std::string& name);

/// Smallest ratio of the edge threshold to the gradient noise std accepted by scale selection.
inline constexpr double kMinThresholdSnr = 2.0;

struct PipelineConfig {
    double kernel_sigma = 1.0;       ///< derivative kernel scale; the starting scale when select_scale is set
    bool select_scale = true;        ///< widen the kernel until the edge threshold clears the noise
    double max_kernel_sigma = 4.0;
    double scale_step = 0.5;
    double edge_threshold = kDefaultEdgeThreshold;
    bool closed = true;
    bool allow_multiple = true;      ///< keep the largest edge component instead of failing
    std::optional<double> sigma_b;   ///< image noise std; estimated from the image when unset
    FitConfig fit;
};

/// Smallest sigma in kernel_sigma, kernel_sigma + scale_step, ... <= max_kernel_sigma for which
/// edge_threshold * max|H| >= kMinThresholdSnr * sigma_H; the largest candidate if none qualifies.
double select_kernel_sigma(const GrayImage& img, double sigma_b, const PipelineConfig& cfg);

/// Everything both fitting methods share.
struct Detection {
    DerivativeKernels kernels;
    GradientField field;
    std::vector<Pixel> edge_pixels;
    std::vector<Pixel> ordered;
    ObservationSet observations;
    bool sigma_b_estimated = false;
};

struct PipelineResult {
    Method method = Method::Stochastic;
    FitResult fit;
    int edge_pixels = 0;
    double kernel_sigma = 1.0;
    bool sigma_b_estimated = false;
    double sigma_b = 0.0;
};

Detection detect(const GrayImage& img, const PipelineConfig& cfg);

PipelineResult fit_detection(const Detection& det, Method method, const PipelineConfig& cfg);

PipelineResult run_pipeline(const GrayImage& img, Method method, const PipelineConfig& cfg);

}  // namespace subedge
