#include <subedge/app.hpp>

#include <algorithm>
#include <cmath>

namespace subedge::app {

namespace {

constexpr int kSuper = 4;
constexpr double kHalfWidth = 0.5 * kSuper;  // 1 output pixel wide
constexpr int kMinCoverage = kSuper * kSuper / 4;
constexpr int kCurveSamples = 4096;

class Canvas {
public:
    Canvas(int width, int height) : w_(width * kSuper), h_(height * kSuper), cells_(static_cast<size_t>(w_ * h_), 0) {}

    /// Marks subsamples whose centers lie within kHalfWidth of the segment a-b (output coordinates).
    void segment(Point2 a, Point2 b) {
        const double ax = a.x * kSuper, ay = a.y * kSuper;
        const double bx = b.x * kSuper, by = b.y * kSuper;
        const int steps = std::max(1, static_cast<int>(std::ceil(2.0 * std::hypot(bx - ax, by - ay))));
        for (int s = 0; s <= steps; ++s) {
            const double u = static_cast<double>(s) / steps;
            stamp(ax + u * (bx - ax), ay + u * (by - ay));
        }
    }

    [[nodiscard]] int coverage(int x, int y) const {
        int n = 0;
        for (int sy = 0; sy < kSuper; ++sy) {
            for (int sx = 0; sx < kSuper; ++sx) {
                n += cells_[static_cast<size_t>((y * kSuper + sy) * w_ + x * kSuper + sx)];
            }
        }
        return n;
    }

private:
    void stamp(double cx, double cy) {
        const int x0 = std::max(0, static_cast<int>(std::floor(cx - kHalfWidth)));
        const int x1 = std::min(w_ - 1, static_cast<int>(std::ceil(cx + kHalfWidth)));
        const int y0 = std::max(0, static_cast<int>(std::floor(cy - kHalfWidth)));
        const int y1 = std::min(h_ - 1, static_cast<int>(std::ceil(cy + kHalfWidth)));
        for (int y = y0; y <= y1; ++y) {
            for (int x = x0; x <= x1; ++x) {
                if (std::hypot(x + 0.5 - cx, y + 0.5 - cy) <= kHalfWidth) {
                    cells_[static_cast<size_t>(y * w_ + x)] = 1;
                }
            }
        }
    }

    int w_;
    int h_;
    std::vector<std::uint8_t> cells_;
};

void draw_model(Canvas& canvas, const ContourModel& model) {
    const double t0 = model.knots().domain_begin();
    const double span = model.knots().domain_end() - t0;
    Point2 prev = eval_curve(model, t0);
    for (int s = 1; s <= kCurveSamples; ++s) {
        const Point2 p = eval_curve(model, t0 + span * s / kCurveSamples);
        canvas.segment(prev, p);
        prev = p;
    }
}

}  // namespace

RgbImage render_overlay(const GrayImage& background, const GroundTruth* truth, const ContourModel* stochastic,
                        const ContourModel* classical) {
    const int w = background.width();
    const int h = background.height();
    struct Layer {
        const Rgb color;
        Canvas canvas;
        bool used;
    };
    // Bottom to top.
    std::array<Layer, 3> layers{Layer{kTruthColor, Canvas(w, h), truth != nullptr},
                                Layer{kClassicalColor, Canvas(w, h), classical != nullptr},
                                Layer{kStochasticColor, Canvas(w, h), stochastic != nullptr}};
    if (truth) {
        for (size_t i = 0; i < truth->corners.size(); ++i) {
            layers[0].canvas.segment(truth->corners[i], truth->corners[(i + 1) % truth->corners.size()]);
        }
    }
    if (classical) {
        draw_model(layers[1].canvas, *classical);
    }
    if (stochastic) {
        draw_model(layers[2].canvas, *stochastic);
    }

    RgbImage out(w, h);
    for (int y = 0; y < h; ++y) {
        for (int x = 0; x < w; ++x) {
            const auto g = static_cast<std::uint8_t>(std::lround(std::clamp(background.at(x, y), 0.0, 1.0) * 255.0));
            Rgb c{g, g, g};
            for (const Layer& layer : layers) {
                if (layer.used && layer.canvas.coverage(x, y) >= kMinCoverage) {
                    c = layer.color;
                }
            }
            out.at(x, y) = c;
        }
    }
    return out;
}

}  // namespace subedge::app
