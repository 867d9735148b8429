/**
 * @file edge_observe.cpp
 * @brief Derivative-of-Gaussian gradients, NMS, parabolic sub-pixel refinement.
 */

#include <subedge/edge_observe.hpp>
#include <subedge/error.hpp>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>

namespace subedge {

namespace {

/// Reflect-101: -1 -> 1, n -> n-2.
int reflect(int i, int n) {
    if (n == 1) {
        return 0;
    }
    while (i < 0 || i >= n) {
        i = i < 0 ? -i : 2 * (n - 1) - i;
    }
    return i;
}

std::vector<double> magnitude_map(const GradientField& f) {
    std::vector<double> mag(f.h_x.size());
    for (size_t i = 0; i < mag.size(); ++i) {
        mag[i] = std::hypot(f.h_x[i], f.h_y[i]);
    }
    return mag;
}

double bilinear(const std::vector<double>& map, int width, int height, double x, double y) {
    x = std::clamp(x, 0.0, static_cast<double>(width - 1));
    y = std::clamp(y, 0.0, static_cast<double>(height - 1));
    const int x0 = std::min(static_cast<int>(x), width - 2 < 0 ? 0 : width - 2);
    const int y0 = std::min(static_cast<int>(y), height - 2 < 0 ? 0 : height - 2);
    const int x1 = std::min(x0 + 1, width - 1);
    const int y1 = std::min(y0 + 1, height - 1);
    const double fx = x - x0;
    const double fy = y - y0;
    const auto at = [&](int xx, int yy) {
        return map[static_cast<size_t>(yy) * static_cast<size_t>(width) + static_cast<size_t>(xx)];
    };
    return (1 - fy) * ((1 - fx) * at(x0, y0) + fx * at(x1, y0)) + fy * ((1 - fx) * at(x0, y1) + fx * at(x1, y1));
}

}  // namespace

DerivativeKernels gaussian_derivative_kernels(double sigma) {
    if (!(sigma > 0.0) || !std::isfinite(sigma)) {
        throw Error(ErrorCode::InvalidArgument, "kernel sigma must be positive");
    }
    DerivativeKernels k;
    k.sigma = sigma;
    k.radius = static_cast<int>(std::ceil(3.0 * sigma));
    const int size = k.size();
    const double s2 = sigma * sigma;
    const double norm = 1.0 / (2.0 * std::numbers::pi * s2);
    k.k_x.resize(static_cast<size_t>(size) * static_cast<size_t>(size));
    for (int dy = -k.radius; dy <= k.radius; ++dy) {
        for (int dx = -k.radius; dx <= k.radius; ++dx) {
            const double g = norm * std::exp(-(dx * dx + dy * dy) / (2.0 * s2));
            k.k_x[static_cast<size_t>((dy + k.radius) * size + (dx + k.radius))] = -(dx / s2) * g;
        }
    }
    double mean = 0.0;
    for (double v : k.k_x) {
        mean += v;
    }
    mean /= static_cast<double>(k.k_x.size());
    for (double& v : k.k_x) {
        v -= mean;
    }
    k.k_y.resize(k.k_x.size());
    for (int r = 0; r < size; ++r) {
        for (int c = 0; c < size; ++c) {
            k.k_y[static_cast<size_t>(r * size + c)] = k.k_x[static_cast<size_t>(c * size + r)];
        }
    }
    return k;
}

double kernel_energy(std::span<const double> mask) {
    double sum = 0.0;
    for (double v : mask) {
        sum += v * v;
    }
    return sum;
}

double sigma_H_from_kernel(double sigma_b, const DerivativeKernels& k) {
    if (sigma_b < 0.0) {
        throw Error(ErrorCode::InvalidArgument, "sigma_b must be nonnegative");
    }
    return sigma_b * std::sqrt(kernel_energy(k.k_x));
}

double GradientField::magnitude(int x, int y) const {
    const size_t i = index(x, y);
    return std::hypot(h_x[i], h_y[i]);
}

GradientField compute_gradient(const GrayImage& img, const DerivativeKernels& k, double sigma_b) {
    const int w = img.width();
    const int h = img.height();
    const int size = k.size();
    if (w < size || h < size) {
        std::ostringstream msg;
        msg << "image " << w << "x" << h << " smaller than " << size << "x" << size << " kernel";
        throw Error(ErrorCode::InvalidArgument, msg.str());
    }
    GradientField f;
    f.width = w;
    f.height = h;
    f.sigma_b = sigma_b;
    f.sigma_H = sigma_H_from_kernel(sigma_b, k);
    f.h_x.assign(img.data().size(), 0.0);
    f.h_y.assign(img.data().size(), 0.0);

    const int r = k.radius;
    // (img * K)(p) = sum_q img(p - q) K(q); fixed summation order per pixel.
    for (int y = 0; y < h; ++y) {
        for (int x = 0; x < w; ++x) {
            double sx = 0.0;
            double sy = 0.0;
            for (int qy = -r; qy <= r; ++qy) {
                const int iy = reflect(y - qy, h);
                for (int qx = -r; qx <= r; ++qx) {
                    const double v = img.at(reflect(x - qx, w), iy);
                    const auto ki = static_cast<size_t>((qy + r) * size + (qx + r));
                    sx += v * k.k_x[ki];
                    sy += v * k.k_y[ki];
                }
            }
            f.h_x[f.index(x, y)] = sx;
            f.h_y[f.index(x, y)] = sy;
        }
    }
    return f;
}

std::vector<Pixel> detect_edge_pixels(const GradientField& field, double mag_threshold) {
    if (!(mag_threshold > 0.0 && mag_threshold < 1.0)) {
        throw Error(ErrorCode::InvalidArgument, "mag_threshold must lie in (0, 1)");
    }
    const int w = field.width;
    const int h = field.height;
    const std::vector<double> mag = magnitude_map(field);
    const double max_mag = mag.empty() ? 0.0 : *std::max_element(mag.begin(), mag.end());
    std::vector<Pixel> out;
    if (!(max_mag > 0.0)) {
        throw Error(ErrorCode::NoEdges, "gradient is zero everywhere");
    }
    const double threshold = mag_threshold * max_mag;
    const auto m = [&](int x, int y) { return mag[static_cast<size_t>(y) * static_cast<size_t>(w) + static_cast<size_t>(x)]; };

    for (int y = 1; y + 1 < h; ++y) {
        for (int x = 1; x + 1 < w; ++x) {
            const double m0 = m(x, y);
            if (m0 <= threshold) {
                continue;
            }
            const size_t i = field.index(x, y);
            // Quantize the gradient direction to one of four axes (mod 180 deg).
            double angle = std::atan2(field.h_y[i], field.h_x[i]) * 180.0 / std::numbers::pi;
            if (angle < 0.0) {
                angle += 180.0;
            }
            int dx = 1;
            int dy = 0;
            if (angle >= 22.5 && angle < 67.5) {
                dx = 1;
                dy = 1;
            } else if (angle >= 67.5 && angle < 112.5) {
                dx = 0;
                dy = 1;
            } else if (angle >= 112.5 && angle < 157.5) {
                dx = -1;
                dy = 1;
            }
            // Asymmetric tie-break keeps exactly one pixel of a two-pixel plateau.
            if (m0 > m(x - dx, y - dy) && m0 >= m(x + dx, y + dy)) {
                out.push_back({x, y});
            }
        }
    }
    if (out.empty()) {
        throw Error(ErrorCode::NoEdges, "no pixel survived non-maximum suppression");
    }
    return out;
}

double subpixel_offset(double g_minus, double g_0, double g_plus) {
    if (g_0 < std::max(g_minus, g_plus)) {
        std::ostringstream msg;
        msg << "center sample " << g_0 << " is not a maximum of (" << g_minus << ", " << g_0 << ", " << g_plus << ")";
        throw Error(ErrorCode::NotAMaximum, msg.str());
    }
    const double denom = 2.0 * (g_minus - 2.0 * g_0 + g_plus);
    if (denom == 0.0) {
        return 0.0;
    }
    return std::clamp((g_minus - g_plus) / denom, -0.5, 0.5);
}

double position_variance(double grad_mag, double sigma_H) {
    if (!(grad_mag > 0.0)) {
        throw Error(ErrorCode::InvalidArgument, "gradient magnitude must be positive");
    }
    return (sigma_H * sigma_H) / (grad_mag * grad_mag) + kSigmaFloor * kSigmaFloor;
}

double estimate_sigma_X(double grad_mag, double sigma_b, const DerivativeKernels& k) {
    return position_variance(grad_mag, sigma_H_from_kernel(sigma_b, k));
}

void ObservationSet::validate(int degree) const {
    const int m = size();
    if (m < 4 * (degree + 1)) {
        std::ostringstream msg;
        msg << "only " << m << " observations; need at least " << 4 * (degree + 1);
        throw Error(ErrorCode::Underdetermined, msg.str());
    }
    for (int i = 0; i < m; ++i) {
        const auto& o = observations[static_cast<size_t>(i)];
        if (o.t != static_cast<double>(i) / m) {
            throw Error(ErrorCode::InvalidArgument, "observation parameters must be t(i) = i/M");
        }
        if (!(o.sigma_x2 > 0.0) || (o.g_x == 0.0 && o.g_y == 0.0)) {
            throw Error(ErrorCode::InvalidArgument, "observation has zero gradient or nonpositive variance");
        }
    }
}

ObservationSet build_observations(const GradientField& field, std::span<const Pixel> ordered, bool closed,
                                  int kernel_taps) {
    if (ordered.empty()) {
        throw Error(ErrorCode::InvalidArgument, "no ordered pixels to observe");
    }
    const std::vector<double> mag = magnitude_map(field);
    ObservationSet set;
    set.closed = closed;
    set.sigma_b = field.sigma_b;
    set.sigma_H = field.sigma_H;
    set.kernel_taps = kernel_taps;
    set.observations.reserve(ordered.size());

    for (const Pixel& p : ordered) {
        if (p.x < 0 || p.y < 0 || p.x >= field.width || p.y >= field.height) {
            throw Error(ErrorCode::InvalidArgument, "edge pixel outside the gradient field");
        }
        const size_t i = field.index(p.x, p.y);
        const double gx = field.h_x[i];
        const double gy = field.h_y[i];
        const double g0 = std::hypot(gx, gy);
        if (!(g0 > 0.0)) {
            ++set.skipped;
            continue;
        }
        const double ux = gx / g0;
        const double uy = gy / g0;
        const double gm = bilinear(mag, field.width, field.height, p.x - ux, p.y - uy);
        const double gp = bilinear(mag, field.width, field.height, p.x + ux, p.y + uy);
        // NMS used a quantized direction, so the exact-direction samples can
        // exceed the center; the vertex then sits at the clamp toward the larger side.
        double offset = 0.0;
        if (g0 >= gm && g0 >= gp) {
            offset = subpixel_offset(gm, g0, gp);
        } else {
            offset = gp > gm ? 0.5 : -0.5;
        }
        EdgeObservation o;
        o.px = p.x;
        o.py = p.y;
        o.x_o = p.x + kPixelCenter + offset * ux;
        o.y_o = p.y + kPixelCenter + offset * uy;
        o.g_x = gx;
        o.g_y = gy;
        o.sigma_x2 = position_variance(g0, field.sigma_H);
        set.observations.push_back(o);
    }
    const int m = set.size();
    for (int j = 0; j < m; ++j) {
        set.observations[static_cast<size_t>(j)].t = static_cast<double>(j) / m;
    }
    return set;
}

double estimate_noise_sigma(const GrayImage& img) {
    const int w = img.width();
    const int h = img.height();
    if (w < 3 || h < 3) {
        throw Error(ErrorCode::InvalidArgument, "image too small for noise estimation");
    }
    double sum = 0.0;
    for (int y = 1; y + 1 < h; ++y) {
        for (int x = 1; x + 1 < w; ++x) {
            const double v = img.at(x - 1, y - 1) - 2 * img.at(x, y - 1) + img.at(x + 1, y - 1) -
                             2 * img.at(x - 1, y) + 4 * img.at(x, y) - 2 * img.at(x + 1, y) +
                             img.at(x - 1, y + 1) - 2 * img.at(x, y + 1) + img.at(x + 1, y + 1);
            sum += std::abs(v);
        }
    }
    return std::sqrt(std::numbers::pi / 2.0) * sum / (6.0 * (w - 2) * (h - 2));
}

}  // namespace subedge
