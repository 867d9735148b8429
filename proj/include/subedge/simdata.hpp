/**
 * @file simdata.hpp
 * @brief Synthetic square test scene, noise models and contour error metrics.
 */

#pragma once

#include <subedge/bspline.hpp>
#include <subedge/image.hpp>

#include <array>
#include <cstdint>
#include <random>
#include <string>

namespace subedge {

/// Name recorded in reports so runs can be reproduced elsewhere.
inline constexpr const char* kRngAlgorithm = "mt19937_64 + Box-Muller (53-bit uniforms)";

/// Seeded generator with a fully specified output sequence
/// (std::normal_distribution is implementation-defined, so it is not used).
class NoiseRng {
public:
    explicit NoiseRng(std::uint64_t seed) : engine_(seed) {}

    /// Uniform on [0, 1).
    double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }
    double normal();

private:
    std::mt19937_64 engine_;
    double spare_ = 0.0;
    bool has_spare_ = false;
};

struct Rect {
    double x0 = 32.0;
    double y0 = 32.0;
    double x1 = 96.0;
    double y1 = 96.0;
};

struct GroundTruth {
    /// Clockwise on screen from the top-left corner.
    std::array<Point2, 4> corners;
    std::string description = "rect";

    static GroundTruth from_rect(const Rect& r);
};

struct SquareScene {
    GrayImage image;
    GroundTruth truth;
};

/// Rectangle of intensity hi on background lo. Each pixel holds the exact
/// pixel-area average of the rectangle indicator convolved with a Gaussian of
/// blur_sigma (blur_sigma = 0 gives the area coverage).
SquareScene make_square_image(int size, const Rect& rect, double lo = 0.2, double hi = 0.8, double blur_sigma = 1.0);

enum class NoiseKind { None, Gaussian, SaltPepper };

struct NoiseSpec {
    NoiseKind kind = NoiseKind::None;
    double sigma = 0.0;  ///< Gaussian std as a fraction of the unit amplitude
    double p0 = 0.0;     ///< probability of each impulse sign
    double gamma = 0.0;  ///< impulse amplitude
    std::uint64_t seed = 0;

    void validate() const;
    /// Standard deviation of the added noise: sigma, or gamma sqrt(2 p0).
    [[nodiscard]] double noise_std() const;
    [[nodiscard]] std::string label() const;
};

const char* to_string(NoiseKind kind) noexcept;
NoiseKind noise_kind_from_string(const std::string& name);

/// Adds i.i.d. N(0, sigma_fraction^2). Output is left unclipped unless clip is set.
GrayImage add_gaussian_noise(const GrayImage& img, double sigma_fraction, std::uint64_t seed, bool clip = false);

/// Adds +gamma with probability p0, -gamma with probability p0, 0 otherwise.
GrayImage add_salt_pepper(const GrayImage& img, double p0, double gamma, std::uint64_t seed);

GrayImage apply_noise(const GrayImage& img, const NoiseSpec& spec);

struct ErrorMetrics {
    double mean_dist = 0.0;
    double rms_dist = 0.0;
    double max_dist = 0.0;
    int samples_used = 0;
};

/// Distance from p to the nearest point of the ground-truth boundary.
double distance_to_boundary(const GroundTruth& truth, Point2 p);

/// Samples the curve at `samples` uniform parameters. Samples closer than
/// corner_mask pixels to a ground-truth corner are left out.
ErrorMetrics contour_error(const ContourModel& model, const GroundTruth& truth, int samples = 1000,
                           double corner_mask = 0.0);

}  // namespace subedge
