#include <subedge/error.hpp>
#include <subedge/simdata.hpp>

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <sstream>

namespace subedge {

namespace {

double std_normal_cdf(double z) {
    return 0.5 * std::erfc(-z / std::numbers::sqrt2);
}

double std_normal_pdf(double z) {
    return std::exp(-0.5 * z * z) / std::sqrt(2.0 * std::numbers::pi);
}

/// Antiderivative of Phi: integral of Phi(z) dz = z Phi(z) + phi(z).
double phi_integral(double z) {
    return z * std_normal_cdf(z) + std_normal_pdf(z);
}

/// Mean over the pixel [c, c+1) of the blurred indicator of [a, b].
double pixel_profile(double c, double a, double b, double blur) {
    if (blur <= 0.0) {
        return std::max(0.0, std::min(c + 1.0, b) - std::max(c, a));
    }
    const auto rising = [&](double edge) {
        return blur * (phi_integral((c + 1.0 - edge) / blur) - phi_integral((c - edge) / blur));
    };
    return rising(a) - rising(b);
}

double point_segment_distance(Point2 p, Point2 a, Point2 b) {
    const double vx = b.x - a.x;
    const double vy = b.y - a.y;
    const double len2 = vx * vx + vy * vy;
    double u = len2 > 0.0 ? ((p.x - a.x) * vx + (p.y - a.y) * vy) / len2 : 0.0;
    u = std::clamp(u, 0.0, 1.0);
    return std::hypot(p.x - (a.x + u * vx), p.y - (a.y + u * vy));
}

}  // namespace

double NoiseRng::normal() {
    if (has_spare_) {
        has_spare_ = false;
        return spare_;
    }
    double u1 = uniform();
    while (u1 <= 0.0) {
        u1 = uniform();
    }
    const double u2 = uniform();
    const double r = std::sqrt(-2.0 * std::log(u1));
    const double a = 2.0 * std::numbers::pi * u2;
    spare_ = r * std::sin(a);
    has_spare_ = true;
    return r * std::cos(a);
}

GroundTruth GroundTruth::from_rect(const Rect& r) {
    GroundTruth g;
    g.corners = {Point2{r.x0, r.y0}, Point2{r.x1, r.y0}, Point2{r.x1, r.y1}, Point2{r.x0, r.y1}};
    return g;
}

SquareScene make_square_image(int size, const Rect& rect, double lo, double hi, double blur_sigma) {
    constexpr double kMargin = 8.0;
    if (size <= 0) {
        throw Error(ErrorCode::InvalidArgument, "image size must be positive");
    }
    if (!(rect.x0 < rect.x1 && rect.y0 < rect.y1)) {
        throw Error(ErrorCode::InvalidArgument, "rectangle corners must satisfy x0 < x1 and y0 < y1");
    }
    if (rect.x0 < kMargin || rect.y0 < kMargin || rect.x1 > size - kMargin || rect.y1 > size - kMargin) {
        std::ostringstream msg;
        msg << "rectangle must stay at least " << kMargin << " px inside the " << size << " px image";
        throw Error(ErrorCode::InvalidArgument, msg.str());
    }
    if (!(lo >= 0.0 && lo < hi && hi <= 1.0)) {
        throw Error(ErrorCode::InvalidArgument, "intensities must satisfy 0 <= lo < hi <= 1");
    }
    if (blur_sigma < 0.0) {
        throw Error(ErrorCode::InvalidArgument, "blur_sigma must be nonnegative");
    }
    std::vector<double> px(static_cast<size_t>(size));
    std::vector<double> py(static_cast<size_t>(size));
    for (int i = 0; i < size; ++i) {
        px[static_cast<size_t>(i)] = pixel_profile(i, rect.x0, rect.x1, blur_sigma);
        py[static_cast<size_t>(i)] = pixel_profile(i, rect.y0, rect.y1, blur_sigma);
    }
    // The Gaussian and the indicator both factor over x and y.
    GrayImage img(size, size);
    for (int y = 0; y < size; ++y) {
        for (int x = 0; x < size; ++x) {
            img.at(x, y) = lo + (hi - lo) * px[static_cast<size_t>(x)] * py[static_cast<size_t>(y)];
        }
    }
    SquareScene scene{std::move(img), GroundTruth::from_rect(rect)};
    return scene;
}

void NoiseSpec::validate() const {
    switch (kind) {
        case NoiseKind::None:
            return;
        case NoiseKind::Gaussian:
            if (!(sigma >= 0.0)) {
                throw Error(ErrorCode::InvalidArgument, "gaussian sigma must be nonnegative");
            }
            return;
        case NoiseKind::SaltPepper:
            if (!(p0 >= 0.0 && 2.0 * p0 <= 1.0)) {
                throw Error(ErrorCode::InvalidArgument, "salt-pepper requires 0 <= 2 p0 <= 1");
            }
            if (!(gamma > 0.0)) {
                throw Error(ErrorCode::InvalidArgument, "salt-pepper gamma must be positive");
            }
            return;
    }
}

double NoiseSpec::noise_std() const {
    switch (kind) {
        case NoiseKind::Gaussian:
            return sigma;
        case NoiseKind::SaltPepper:
            return gamma * std::sqrt(2.0 * p0);
        case NoiseKind::None:
            break;
    }
    return 0.0;
}

std::string NoiseSpec::label() const {
    std::ostringstream out;
    switch (kind) {
        case NoiseKind::None:
            out << "none";
            break;
        case NoiseKind::Gaussian:
            out << "gaussian sigma=" << sigma;
            break;
        case NoiseKind::SaltPepper:
            out << "salt-pepper p0=" << p0 << " gamma=" << gamma;
            break;
    }
    return out.str();
}

const char* to_string(NoiseKind kind) noexcept {
    switch (kind) {
        case NoiseKind::None:
            return "none";
        case NoiseKind::Gaussian:
            return "gaussian";
        case NoiseKind::SaltPepper:
            return "salt-pepper";
    }
    return "none";
}

NoiseKind noise_kind_from_string(const std::string& name) {
    if (name == "none") {
        return NoiseKind::None;
    }
    if (name == "gaussian") {
        return NoiseKind::Gaussian;
    }
    if (name == "salt-pepper" || name == "salt_pepper" || name == "sp") {
        return NoiseKind::SaltPepper;
    }
    throw Error(ErrorCode::InvalidArgument, "unknown noise kind '" + name + "'");
}

GrayImage add_gaussian_noise(const GrayImage& img, double sigma_fraction, std::uint64_t seed, bool clip) {
    if (sigma_fraction < 0.0) {
        throw Error(ErrorCode::InvalidArgument, "sigma_fraction must be nonnegative");
    }
    GrayImage out = img;
    if (sigma_fraction == 0.0 && !clip) {
        return out;
    }
    NoiseRng rng(seed);
    for (double& v : out.data()) {
        v += sigma_fraction * rng.normal();
        if (clip) {
            v = std::clamp(v, 0.0, 1.0);
        }
    }
    return out;
}

GrayImage add_salt_pepper(const GrayImage& img, double p0, double gamma, std::uint64_t seed) {
    NoiseSpec{NoiseKind::SaltPepper, 0.0, p0, gamma, seed}.validate();
    GrayImage out = img;
    if (p0 == 0.0) {
        return out;
    }
    NoiseRng rng(seed);
    for (double& v : out.data()) {
        const double u = rng.uniform();
        if (u < p0) {
            v += gamma;
        } else if (u < 2.0 * p0) {
            v -= gamma;
        }
    }
    return out;
}

GrayImage apply_noise(const GrayImage& img, const NoiseSpec& spec) {
    spec.validate();
    switch (spec.kind) {
        case NoiseKind::Gaussian:
            return add_gaussian_noise(img, spec.sigma, spec.seed);
        case NoiseKind::SaltPepper:
            return add_salt_pepper(img, spec.p0, spec.gamma, spec.seed);
        case NoiseKind::None:
            break;
    }
    return img;
}

double distance_to_boundary(const GroundTruth& truth, Point2 p) {
    double best = std::numeric_limits<double>::infinity();
    for (size_t i = 0; i < truth.corners.size(); ++i) {
        best = std::min(best, point_segment_distance(p, truth.corners[i], truth.corners[(i + 1) % truth.corners.size()]));
    }
    return best;
}

ErrorMetrics contour_error(const ContourModel& model, const GroundTruth& truth, int samples, double corner_mask) {
    if (samples < 100) {
        throw Error(ErrorCode::InvalidArgument, "contour_error needs at least 100 samples");
    }
    const auto& kv = model.knots();
    const double t0 = kv.domain_begin();
    const double span = kv.domain_end() - t0;
    const int steps = model.closed() ? samples : samples - 1;

    ErrorMetrics m;
    double sum = 0.0;
    double sum2 = 0.0;
    for (int s = 0; s < samples; ++s) {
        const Point2 p = eval_curve(model, t0 + span * s / steps);
        if (corner_mask > 0.0) {
            const bool near_corner = std::any_of(truth.corners.begin(), truth.corners.end(), [&](const Point2& c) {
                return std::hypot(p.x - c.x, p.y - c.y) < corner_mask;
            });
            if (near_corner) {
                continue;
            }
        }
        const double d = distance_to_boundary(truth, p);
        sum += d;
        sum2 += d * d;
        m.max_dist = std::max(m.max_dist, d);
        ++m.samples_used;
    }
    if (m.samples_used > 0) {
        m.mean_dist = sum / m.samples_used;
        m.rms_dist = std::sqrt(sum2 / m.samples_used);
    }
    return m;
}

}  // namespace subedge
