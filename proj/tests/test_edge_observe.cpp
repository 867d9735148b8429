#include <subedge/edge_observe.hpp>
#include <subedge/error.hpp>
#include <subedge/simdata.hpp>

#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <set>

namespace {

using namespace subedge;

/// Ideal (blur 0) vertical step: pixels with x < edge are lo, x >= edge are hi.
GrayImage vertical_step(int w, int h, int edge, double lo, double hi) {
    GrayImage img(w, h, lo);
    for (int y = 0; y < h; ++y) {
        for (int x = edge; x < w; ++x) {
            img.at(x, y) = hi;
        }
    }
    return img;
}

bool adjacent8(Pixel a, Pixel b) {
    return std::max(std::abs(a.x - b.x), std::abs(a.y - b.y)) == 1;
}

double kx_at(const DerivativeKernels& k, int dx, int dy) {
    return k.k_x[static_cast<size_t>((dy + k.radius) * k.size() + dx + k.radius)];
}

TEST(Kernels, SigmaOneIsSevenBySevenAntisymmetric) {
    const DerivativeKernels k = gaussian_derivative_kernels(1.0);
    EXPECT_EQ(k.size(), 7);
    ASSERT_EQ(k.k_x.size(), 49U);
    double sum = 0.0;
    for (int dy = -3; dy <= 3; ++dy) {
        for (int dx = -3; dx <= 3; ++dx) {
            EXPECT_NEAR(kx_at(k, dx, dy), -kx_at(k, -dx, dy), 1e-17);
            EXPECT_EQ(k.k_y[static_cast<size_t>((dx + 3) * 7 + dy + 3)], kx_at(k, dx, dy));
            sum += kx_at(k, dx, dy);
        }
    }
    EXPECT_NEAR(sum, 0.0, 1e-16);
    EXPECT_EQ(gaussian_derivative_kernels(2.0).size(), 13);
    EXPECT_EQ(gaussian_derivative_kernels(0.5).size(), 5);
}

TEST(Kernels, NonPositiveSigmaThrows) {
    EXPECT_THROW(gaussian_derivative_kernels(0.0), Error);
    EXPECT_THROW(gaussian_derivative_kernels(-1.0), Error);
}

TEST(Gradient, ConstantImageGivesZeroField) {
    const DerivativeKernels k = gaussian_derivative_kernels(1.0);
    const GradientField f = compute_gradient(GrayImage(20, 16, 0.37), k, 0.0);
    for (size_t i = 0; i < f.h_x.size(); ++i) {
        EXPECT_NEAR(f.h_x[i], 0.0, 1e-15);
        EXPECT_NEAR(f.h_y[i], 0.0, 1e-15);
    }
}

TEST(Gradient, RampGivesConstantPositiveResponse) {
    const int w = 40;
    GrayImage img(w, 30);
    for (int y = 0; y < 30; ++y) {
        for (int x = 0; x < w; ++x) {
            img.at(x, y) = static_cast<double>(x) / w;
        }
    }
    const DerivativeKernels k = gaussian_derivative_kernels(1.0);
    const GradientField f = compute_gradient(img, k, 0.0);
    // Oracle: correlating a unit ramp with k_x gives sum_(dx,dy) dx * k_x(dx, dy).
    double expected = 0.0;
    for (int dy = -3; dy <= 3; ++dy) {
        for (int dx = -3; dx <= 3; ++dx) {
            expected += dx * kx_at(k, dx, dy);
        }
    }
    expected = std::abs(expected) / w;
    for (int y = 3; y < 27; ++y) {
        for (int x = 3; x < w - 3; ++x) {
            EXPECT_NEAR(f.h_x[f.index(x, y)], expected, 1e-14);
            EXPECT_GT(f.h_x[f.index(x, y)], 0.0);
            EXPECT_NEAR(f.h_y[f.index(x, y)], 0.0, 1e-14);
        }
    }
    // Unit-normalized derivative kernel: a unit slope responds with about 1.
    EXPECT_NEAR(expected * w, 1.0, 0.02);
}

TEST(Gradient, ImageSmallerThanKernelThrows) {
    EXPECT_THROW(compute_gradient(GrayImage(5, 5), gaussian_derivative_kernels(1.0), 0.0), Error);
}

TEST(Gradient, Linearity) {
    const SquareScene a = make_square_image(48, Rect{10, 12, 30, 36});
    const GrayImage b = add_gaussian_noise(GrayImage(48, 48, 0.5), 0.2, 99);
    GrayImage mix(48, 48);
    for (int y = 0; y < 48; ++y) {
        for (int x = 0; x < 48; ++x) {
            mix.at(x, y) = 2.5 * a.image.at(x, y) - 0.75 * b.at(x, y);
        }
    }
    const DerivativeKernels k = gaussian_derivative_kernels(1.0);
    const GradientField fa = compute_gradient(a.image, k, 0.0);
    const GradientField fb = compute_gradient(b, k, 0.0);
    const GradientField fm = compute_gradient(mix, k, 0.0);
    for (size_t i = 0; i < fm.h_x.size(); ++i) {
        EXPECT_NEAR(fm.h_x[i], 2.5 * fa.h_x[i] - 0.75 * fb.h_x[i], 1e-12);
        EXPECT_NEAR(fm.h_y[i], 2.5 * fa.h_y[i] - 0.75 * fb.h_y[i], 1e-12);
    }
}

TEST(Gradient, VerticalStepPeaksOnStepColumns) {
    const GrayImage img = vertical_step(32, 32, 16, 0.0, 1.0);
    const GradientField f = compute_gradient(img, gaussian_derivative_kernels(1.0), 0.0);
    for (int y = 0; y < 32; ++y) {
        // The edge lies between columns 15 and 16; both carry the same peak.
        const double peak = f.h_x[f.index(15, y)];
        EXPECT_NEAR(f.h_x[f.index(16, y)], peak, 1e-15);
        for (int x = 0; x < 32; ++x) {
            EXPECT_LE(std::abs(f.h_x[f.index(x, y)]), peak + 1e-15);
            EXPECT_NEAR(f.h_y[f.index(x, y)], 0.0, 1e-15);
        }
        EXPECT_GT(peak, 0.0);
    }
}

TEST(SigmaH, ZeroNoiseAndTransposeAgree) {
    const DerivativeKernels k = gaussian_derivative_kernels(1.0);
    EXPECT_EQ(sigma_H_from_kernel(0.0, k), 0.0);
    EXPECT_NEAR(0.1 * std::sqrt(kernel_energy(k.k_x)), 0.1 * std::sqrt(kernel_energy(k.k_y)), 1e-16);
    EXPECT_DOUBLE_EQ(sigma_H_from_kernel(0.1, k), 0.1 * std::sqrt(kernel_energy(k.k_x)));
    const GradientField f = compute_gradient(GrayImage(16, 16), k, 0.3);
    EXPECT_DOUBLE_EQ(f.sigma_H, sigma_H_from_kernel(0.3, k));
    EXPECT_GT(f.sigma_H, 0.0);
}

TEST(SigmaH, MonteCarloVarianceMatchesKernelEnergy) {
    const DerivativeKernels k = gaussian_derivative_kernels(1.0);
    const double sigma_b = 0.1;
    const double expected = sigma_b * sigma_b * kernel_energy(k.k_x);
    double sx = 0.0, sxx = 0.0, sy = 0.0, syy = 0.0;
    long n = 0;
    for (int trial = 0; trial < 1000; ++trial) {
        const GrayImage noise = add_gaussian_noise(GrayImage(64, 64), sigma_b, 5000 + trial);
        const GradientField f = compute_gradient(noise, k, sigma_b);
        for (int y = 3; y < 61; ++y) {
            for (int x = 3; x < 61; ++x) {
                const double hx = f.h_x[f.index(x, y)];
                const double hy = f.h_y[f.index(x, y)];
                sx += hx;
                sxx += hx * hx;
                sy += hy;
                syy += hy * hy;
                ++n;
            }
        }
    }
    const double vx = sxx / n - (sx / n) * (sx / n);
    const double vy = syy / n - (sy / n) * (sy / n);
    EXPECT_NEAR(vx / expected, 1.0, 0.05);
    EXPECT_NEAR(vy / expected, 1.0, 0.05);
}

TEST(EdgePixels, NoiselessVerticalStepIsOneColumn) {
    const GrayImage img = vertical_step(32, 32, 16, 0.2, 0.8);
    const GradientField f = compute_gradient(img, gaussian_derivative_kernels(1.0), 0.0);
    const std::vector<Pixel> px = detect_edge_pixels(f, 0.2);
    // The one-pixel image frame has no full neighborhood and is never an edge.
    ASSERT_EQ(px.size(), 30U);
    std::set<int> cols;
    for (const Pixel& p : px) {
        cols.insert(p.x);
    }
    ASSERT_EQ(cols.size(), 1U);
    EXPECT_TRUE(*cols.begin() == 15 || *cols.begin() == 16);
}

TEST(EdgePixels, ConstantImageHasNoEdges) {
    const GradientField f = compute_gradient(GrayImage(24, 24, 0.5), gaussian_derivative_kernels(1.0), 0.0);
    try {
        detect_edge_pixels(f, 0.2);
        FAIL() << "expected an error";
    } catch (const Error& e) {
        EXPECT_EQ(e.code(), ErrorCode::NoEdges);
    }
}

TEST(EdgePixels, ThresholdMustBeAFraction) {
    const GradientField f = compute_gradient(vertical_step(16, 16, 8, 0, 1), gaussian_derivative_kernels(1.0), 0.0);
    EXPECT_THROW(detect_edge_pixels(f, 0.0), Error);
    EXPECT_THROW(detect_edge_pixels(f, 1.0), Error);
}

TEST(EdgePixels, SyntheticSquareIsThinClosedRing) {
    const SquareScene scene = make_square_image(128, Rect{});
    const GradientField f = compute_gradient(scene.image, gaussian_derivative_kernels(1.0), 0.0);
    const std::vector<Pixel> px = detect_edge_pixels(f, 0.2);
    const std::set<Pixel> set(px.begin(), px.end());
    // One pixel wide: no 2x2 block is fully inside the set.
    for (const Pixel& p : px) {
        const bool block = set.contains({p.x + 1, p.y}) && set.contains({p.x, p.y + 1}) &&
                           set.contains({p.x + 1, p.y + 1});
        EXPECT_FALSE(block) << p.x << "," << p.y;
    }
    // Closed and connected: the trace visits every pixel and wraps around.
    const std::vector<Pixel> ring = trace_contour(px, true);
    EXPECT_EQ(ring.size(), px.size());
    EXPECT_TRUE(adjacent8(ring.front(), ring.back()));
    // Every pixel lies next to the true boundary.
    for (const Pixel& p : px) {
        EXPECT_LE(distance_to_boundary(scene.truth, {p.x + 0.5, p.y + 0.5}), 1.0);
    }
}

TEST(Trace, TinySquareRingIsCyclic) {
    const std::vector<Pixel> ring{{5, 5}, {6, 5}, {5, 6}, {6, 6}};
    const std::vector<Pixel> order = trace_contour(ring, true);
    ASSERT_EQ(order.size(), 4U);
    for (size_t i = 0; i < order.size(); ++i) {
        EXPECT_TRUE(adjacent8(order[i], order[(i + 1) % order.size()]));
    }
    EXPECT_EQ(std::set<Pixel>(order.begin(), order.end()).size(), 4U);
}

TEST(Trace, StraightSegmentEndpointsFirstAndLast) {
    std::vector<Pixel> seg;
    for (int i = 0; i < 12; ++i) {
        seg.push_back({3 + i, 10 - i});
    }
    std::reverse(seg.begin(), seg.end());
    std::swap(seg[2], seg[7]);
    const std::vector<Pixel> order = trace_contour(seg, false);
    ASSERT_EQ(order.size(), 12U);
    const std::set<Pixel> ends{order.front(), order.back()};
    EXPECT_TRUE(ends.contains({3, 10}));
    EXPECT_TRUE(ends.contains({14, -1}));
    for (size_t i = 0; i + 1 < order.size(); ++i) {
        EXPECT_TRUE(adjacent8(order[i], order[i + 1]));
    }
}

TEST(Trace, SquareRingConsecutivePairsAdjacent) {
    const SquareScene scene = make_square_image(128, Rect{});
    const GradientField f = compute_gradient(scene.image, gaussian_derivative_kernels(1.0), 0.0);
    const std::vector<Pixel> order = trace_contour(detect_edge_pixels(f, 0.2), true);
    ASSERT_GT(order.size(), 200U);
    for (size_t i = 0; i < order.size(); ++i) {
        EXPECT_TRUE(adjacent8(order[i], order[(i + 1) % order.size()]));
    }
}

TEST(Trace, SpurIsErasedFromClosedRing) {
    std::vector<Pixel> px;
    for (int i = 0; i < 10; ++i) {
        px.push_back({i, 0});
        px.push_back({i, 9});
    }
    for (int j = 1; j < 9; ++j) {
        px.push_back({0, j});
        px.push_back({9, j});
    }
    px.push_back({10, 4});
    px.push_back({11, 4});  // outward spur
    const std::vector<Pixel> order = trace_contour(px, true);
    EXPECT_EQ(order.size(), 36U);
    const std::set<Pixel> s(order.begin(), order.end());
    EXPECT_FALSE(s.contains({11, 4}));
}

TEST(Trace, BrokenRingFallsBackToChain) {
    std::vector<Pixel> px;
    for (int i = 0; i < 10; ++i) {
        px.push_back({i, 0});
        px.push_back({i, 9});
    }
    for (int j = 1; j < 9; ++j) {
        px.push_back({0, j});
        if (j != 4) {
            px.push_back({9, j});
        }
    }
    const std::vector<Pixel> order = trace_contour(px, true);
    // The geodesic path runs from one side of the gap to the other and cuts
    // the four corners diagonally.
    EXPECT_EQ(order.size(), px.size() - 4);
    const std::set<Pixel> ends{order.front(), order.back()};
    EXPECT_EQ(ends, (std::set<Pixel>{{9, 3}, {9, 5}}));
    for (size_t i = 0; i + 1 < order.size(); ++i) {
        EXPECT_TRUE(adjacent8(order[i], order[i + 1]));
    }
}

TEST(Trace, MultipleComponents) {
    const std::vector<Pixel> px{{0, 0}, {1, 0}, {2, 0}, {10, 10}, {11, 10}};
    try {
        trace_contour(px, false);
        FAIL() << "expected an error";
    } catch (const Error& e) {
        EXPECT_EQ(e.code(), ErrorCode::AmbiguousTopology);
    }
    const std::vector<Pixel> order = trace_contour(px, false, true);
    EXPECT_EQ(order.size(), 3U);
    EXPECT_THROW(trace_contour(std::vector<Pixel>{}, true), Error);
}

TEST(SubpixelOffset, Examples) {
    EXPECT_EQ(subpixel_offset(1, 2, 1), 0.0);
    EXPECT_NEAR(subpixel_offset(1, 2, 1.5), 1.0 / 6.0, 1e-15);
    EXPECT_EQ(subpixel_offset(2, 2, 2), 0.0);
    EXPECT_NEAR(subpixel_offset(1.5, 2, 1), -1.0 / 6.0, 1e-15);
    EXPECT_EQ(subpixel_offset(0, 1, 1), 0.5);
}

TEST(SubpixelOffset, ParabolaVertexOracle) {
    // Samples of a parabola with a known vertex recover it.
    for (double v : {-0.45, -0.2, 0.0, 0.1, 0.33}) {
        const auto g = [v](double x) { return 3.0 - 1.7 * (x - v) * (x - v); };
        EXPECT_NEAR(subpixel_offset(g(-1), g(0), g(1)), v, 1e-12);
    }
}

TEST(SubpixelOffset, NotAMaximumThrows) {
    try {
        subpixel_offset(1, 2, 3);
        FAIL() << "expected an error";
    } catch (const Error& e) {
        EXPECT_EQ(e.code(), ErrorCode::NotAMaximum);
    }
}

TEST(Observations, IdealStepAtPixelBoundary) {
    for (int c : {12, 16, 19}) {
        const GrayImage img = vertical_step(32, 32, c, 0.2, 0.8);
        const GradientField f = compute_gradient(img, gaussian_derivative_kernels(1.0), 0.0);
        const std::vector<Pixel> px = detect_edge_pixels(f, 0.2);
        const ObservationSet obs = build_observations(f, trace_contour(px, false), false);
        ASSERT_EQ(obs.size(), 30);
        for (const EdgeObservation& o : obs.observations) {
            EXPECT_NEAR(o.x_o, c, 0.05);
        }
    }
}

TEST(Observations, UniformParameterAndBoundedOffsets) {
    const SquareScene scene = make_square_image(128, Rect{32, 32, 64, 64});
    const GrayImage noisy = add_gaussian_noise(scene.image, 0.05, 4);
    const GradientField f = compute_gradient(noisy, gaussian_derivative_kernels(1.0), 0.05);
    std::vector<Pixel> ordered = trace_contour(detect_edge_pixels(f, 0.2), true, true);
    ASSERT_GE(ordered.size(), 100U);
    ordered.resize(100);
    const ObservationSet obs = build_observations(f, ordered, true);
    ASSERT_EQ(obs.size(), 100);
    for (int i = 0; i < 100; ++i) {
        const EdgeObservation& o = obs.observations[static_cast<size_t>(i)];
        EXPECT_EQ(o.t, i / 100.0);
        EXPECT_LE(std::hypot(o.x_o - (o.px + 0.5), o.y_o - (o.py + 0.5)), 0.5 * std::numbers::sqrt2 + 1e-12);
        EXPECT_GT(o.sigma_x2, 0.0);
        EXPECT_TRUE(o.g_x != 0.0 || o.g_y != 0.0);
    }
    EXPECT_NEAR(obs.observations[1].t, 0.01, 1e-15);
    EXPECT_NEAR(obs.observations[99].t, 0.99, 1e-15);
    EXPECT_NO_THROW(obs.validate(3));
}

TEST(Observations, ZeroGradientPixelsAreSkipped) {
    // A zero background makes the gradient exactly zero away from the step.
    const GrayImage img = vertical_step(32, 32, 16, 0.0, 0.8);
    const GradientField f = compute_gradient(img, gaussian_derivative_kernels(1.0), 0.0);
    const std::vector<Pixel> ordered{{15, 4}, {2, 4}, {15, 5}};
    const ObservationSet obs = build_observations(f, ordered, false);
    EXPECT_EQ(obs.size(), 2);
    EXPECT_EQ(obs.skipped, 1);
    EXPECT_EQ(obs.observations[1].t, 0.5);
}

TEST(Observations, ValidateRejectsTooFew) {
    const GrayImage img = vertical_step(32, 32, 16, 0.2, 0.8);
    const GradientField f = compute_gradient(img, gaussian_derivative_kernels(1.0), 0.0);
    std::vector<Pixel> ordered;
    for (int y = 0; y < 15; ++y) {
        ordered.push_back({15, y});
    }
    const ObservationSet obs = build_observations(f, ordered, false);
    try {
        obs.validate(3);
        FAIL() << "expected an error";
    } catch (const Error& e) {
        EXPECT_EQ(e.code(), ErrorCode::Underdetermined);
    }
}

TEST(Observations, GradientOrthogonalToSquareEdges) {
    const SquareScene scene = make_square_image(128, Rect{});
    const GradientField f = compute_gradient(scene.image, gaussian_derivative_kernels(1.0), 0.0);
    const ObservationSet obs = build_observations(f, trace_contour(detect_edge_pixels(f, 0.2), true), true);
    const double c = 64.0;
    int checked = 0;
    for (const EdgeObservation& o : obs.observations) {
        // Outward normal of the nearest side; corners are ambiguous and left out.
        const double dx = o.x_o - c;
        const double dy = o.y_o - c;
        if (std::abs(std::abs(dx) - std::abs(dy)) < 6.0) {
            continue;
        }
        const double nx = std::abs(dx) > std::abs(dy) ? (dx > 0 ? 1.0 : -1.0) : 0.0;
        const double ny = std::abs(dy) > std::abs(dx) ? (dy > 0 ? 1.0 : -1.0) : 0.0;
        const double cosang = std::abs(o.g_x * nx + o.g_y * ny) / std::hypot(o.g_x, o.g_y);
        EXPECT_GE(cosang, std::cos(5.0 * std::numbers::pi / 180.0));
        ++checked;
    }
    EXPECT_GT(checked, 150);
}

TEST(Observations, LeftEdgeGradientAlongX) {
    const SquareScene scene = make_square_image(128, Rect{});
    const GradientField f = compute_gradient(scene.image, gaussian_derivative_kernels(1.0), 0.0);
    for (int y = 40; y < 88; ++y) {
        const double gx = f.h_x[f.index(31, y)] + f.h_x[f.index(32, y)];
        EXPECT_GT(std::abs(gx), 0.0);
        EXPECT_NEAR(f.h_y[f.index(32, y)], 0.0, 1e-6 * std::abs(gx));
    }
}

TEST(Observations, BlurredStepSubpixelAccuracy) {
    for (double frac : {0.0, 0.25, 0.5}) {
        const double x0 = 20.0 + frac;
        const SquareScene scene = make_square_image(64, Rect{x0, 10, 44 + frac, 54}, 0.2, 0.8, 1.0);
        const GradientField f = compute_gradient(scene.image, gaussian_derivative_kernels(1.0), 0.0);
        const ObservationSet obs = build_observations(f, detect_edge_pixels(f, 0.2), false);
        double err = 0.0;
        int n = 0;
        for (const EdgeObservation& o : obs.observations) {
            if (o.px < 32 && o.py >= 20 && o.py < 44) {
                err += std::abs(o.x_o - x0);
                ++n;
            }
        }
        ASSERT_EQ(n, 24);
        EXPECT_LE(err / n, 0.15) << "fraction " << frac;
    }
}

TEST(SigmaX, FloorAndScaling) {
    const DerivativeKernels k = gaussian_derivative_kernels(1.0);
    EXPECT_DOUBLE_EQ(estimate_sigma_X(0.3, 0.0, k), kSigmaFloor * kSigmaFloor);
    const double floor2 = kSigmaFloor * kSigmaFloor;
    const double a = estimate_sigma_X(0.1, 0.05, k) - floor2;
    const double b = estimate_sigma_X(0.2, 0.05, k) - floor2;
    EXPECT_NEAR(b, a / 4.0, 1e-15);
    EXPECT_THROW(estimate_sigma_X(0.0, 0.05, k), Error);
}

TEST(SigmaX, MonteCarloPositionVariance) {
    // Ideal step at x = 16 between columns 15 and 16, sigma_b = 0.1.
    const double sigma_b = 0.1;
    const DerivativeKernels k = gaussian_derivative_kernels(1.0);
    const GrayImage clean = vertical_step(32, 32, 16, 0.2, 0.8);
    double s = 0.0, ss = 0.0, predicted = 0.0;
    int n = 0;
    for (int trial = 0; trial < 500; ++trial) {
        const GrayImage img = add_gaussian_noise(clean, sigma_b, 900 + trial);
        const GradientField f = compute_gradient(img, k, sigma_b);
        // Follow the noisy maximum on row 16 the way NMS would.
        const Pixel p = f.magnitude(15, 16) >= f.magnitude(16, 16) ? Pixel{15, 16} : Pixel{16, 16};
        const std::vector<Pixel> one{p};
        const ObservationSet obs = build_observations(f, one, false);
        const EdgeObservation& o = obs.observations.front();
        s += o.x_o;
        ss += o.x_o * o.x_o;
        predicted += o.sigma_x2;
        ++n;
    }
    const double var = ss / n - (s / n) * (s / n);
    predicted /= n;
    EXPECT_GT(var, predicted / 2.0);
    EXPECT_LT(var, predicted * 2.0);
}

TEST(NoiseEstimate, RecoversGaussianStd) {
    for (double sigma : {0.02, 0.1, 0.3}) {
        const GrayImage img = add_gaussian_noise(GrayImage(128, 128, 0.5), sigma, 77);
        EXPECT_NEAR(estimate_noise_sigma(img), sigma, 0.05 * sigma);
    }
    EXPECT_NEAR(estimate_noise_sigma(make_square_image(128, Rect{}, 0.2, 0.8, 0.0).image), 0.0, 0.01);
}

}  // namespace
