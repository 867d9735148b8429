/**
 * @file edge_observe.hpp
 * @brief Gradient fields, edge pixel extraction and sub-pixel edge observations.
 *
 * The gradient is the image convolved with derivative-of-Gaussian masks.
 * Under additive white noise of std sigma_b each gradient component has
 * std sigma_H = sigma_b * sqrt(sum K^2), and the two components at one pixel
 * are uncorrelated. Those statistics weight the observations in the fit.
 */

#pragma once

#include <subedge/image.hpp>

#include <compare>
#include <span>
#include <vector>

namespace subedge {

/// Position-variance floor in pixels; keeps very strong edges from dominating.
inline constexpr double kSigmaFloor = 0.05;

/// Default relative threshold for non-maximum suppression.
inline constexpr double kDefaultEdgeThreshold = 0.2;

struct DerivativeKernels {
    double sigma = 1.0;
    int radius = 3;
    std::vector<double> k_x;  ///< (2r+1)^2, row-major, index (dy+r)*(2r+1) + (dx+r)
    std::vector<double> k_y;  ///< transpose of k_x

    [[nodiscard]] int size() const noexcept { return 2 * radius + 1; }
};

/// k_x(x, y) = -(x / sigma^2) G(x, y; sigma) on a (2*ceil(3 sigma)+1)^2 grid, mean-subtracted.
DerivativeKernels gaussian_derivative_kernels(double sigma);

/// sum K(i,j)^2 over one mask.
double kernel_energy(std::span<const double> mask);

/// sigma_H = sigma_b * sqrt(sum K_x^2).
double sigma_H_from_kernel(double sigma_b, const DerivativeKernels& k);

struct GradientField {
    int width = 0;
    int height = 0;
    std::vector<double> h_x;
    std::vector<double> h_y;
    double sigma_b = 0.0;
    double sigma_H = 0.0;

    [[nodiscard]] size_t index(int x, int y) const noexcept {
        return static_cast<size_t>(y) * static_cast<size_t>(width) + static_cast<size_t>(x);
    }
    [[nodiscard]] double magnitude(int x, int y) const;
};

/// Convolution with mirror (reflect-101) borders.
GradientField compute_gradient(const GrayImage& img, const DerivativeKernels& k, double sigma_b);

struct Pixel {
    int x = 0;
    int y = 0;

    friend bool operator==(const Pixel&, const Pixel&) = default;
    /// Raster order: row first.
    friend auto operator<=>(const Pixel& a, const Pixel& b) {
        if (auto c = a.y <=> b.y; c != 0) {
            return c;
        }
        return a.x <=> b.x;
    }
};

/// 8-direction non-maximum suppression with a threshold relative to the
/// strongest gradient. Throws NoEdges when nothing survives.
std::vector<Pixel> detect_edge_pixels(const GradientField& field, double mag_threshold = kDefaultEdgeThreshold);

/// Orders an 8-connected pixel set. Closed sets are followed by Moore-neighbor
/// boundary tracing (loops and spurs re-entered by the trace are erased);
/// open sets run between the two ends of the longest geodesic.
/// More than one component throws AmbiguousTopology unless allow_multiple,
/// in which case the largest component is used.
std::vector<Pixel> trace_contour(std::span<const Pixel> pixels, bool closed, bool allow_multiple = false);

/// Vertex of the parabola through (-1, g_minus), (0, g_0), (1, g_plus), clamped to [-0.5, 0.5].
double subpixel_offset(double g_minus, double g_0, double g_plus);

struct EdgeObservation {
    double x_o = 0.0;  ///< sub-pixel edge position (continuous coordinates)
    double y_o = 0.0;
    double g_x = 0.0;  ///< gradient at the source pixel
    double g_y = 0.0;
    double sigma_x2 = 0.0;  ///< position variance along the gradient, px^2
    double t = 0.0;         ///< curve parameter i/M
    int px = 0;             ///< source pixel index
    int py = 0;
};

struct ObservationSet {
    std::vector<EdgeObservation> observations;
    bool closed = true;
    int skipped = 0;        ///< pixels dropped for a zero gradient
    double sigma_b = 0.0;   ///< image noise std the statistics were computed for
    double sigma_H = 0.0;   ///< gradient-component noise std
    int kernel_taps = 0;    ///< number of derivative-mask coefficients

    [[nodiscard]] int size() const noexcept { return static_cast<int>(observations.size()); }
    /// Checks t(i) = i/M and M >= 4 (degree + 1).
    void validate(int degree) const;
};

ObservationSet build_observations(const GradientField& field, std::span<const Pixel> ordered, bool closed,
                                  int kernel_taps = 0);

/// sigma_X^2 = sigma_H^2 / |H|^2 + kSigmaFloor^2.
double estimate_sigma_X(double grad_mag, double sigma_b, const DerivativeKernels& k);
double position_variance(double grad_mag, double sigma_H);

/// Noise std estimate from the Laplacian-difference mask (Immerkaer 1996).
double estimate_noise_sigma(const GrayImage& img);

}  // namespace subedge
