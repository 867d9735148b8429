/**
 * @file contour_trace.cpp
 * @brief Orders edge pixels along the contour (Moore-neighbor tracing).
 */

#include <subedge/edge_observe.hpp>
#include <subedge/error.hpp>

#include <algorithm>
#include <array>
#include <deque>
#include <sstream>
#include <unordered_map>

namespace subedge {

namespace {

// Clockwise on screen (y grows downward), starting east.
constexpr std::array<Pixel, 8> kDirs{{{1, 0}, {1, 1}, {0, 1}, {-1, 1}, {-1, 0}, {-1, -1}, {0, -1}, {1, -1}}};

int direction_of(Pixel from, Pixel to) {
    for (int d = 0; d < 8; ++d) {
        if (from.x + kDirs[d].x == to.x && from.y + kDirs[d].y == to.y) {
            return d;
        }
    }
    return -1;
}

/// Binary mask over the bounding box of the pixel set, with a one-pixel empty frame.
class Mask {
public:
    explicit Mask(std::span<const Pixel> pixels) {
        int x0 = pixels[0].x, x1 = pixels[0].x, y0 = pixels[0].y, y1 = pixels[0].y;
        for (const Pixel& p : pixels) {
            x0 = std::min(x0, p.x);
            x1 = std::max(x1, p.x);
            y0 = std::min(y0, p.y);
            y1 = std::max(y1, p.y);
        }
        ox_ = x0 - 1;
        oy_ = y0 - 1;
        w_ = x1 - x0 + 3;
        h_ = y1 - y0 + 3;
        cells_.assign(static_cast<size_t>(w_) * static_cast<size_t>(h_), -1);
    }

    /// -1 = empty, otherwise a label.
    [[nodiscard]] int get(Pixel p) const {
        const int x = p.x - ox_;
        const int y = p.y - oy_;
        if (x < 0 || y < 0 || x >= w_ || y >= h_) {
            return -1;
        }
        return cells_[static_cast<size_t>(y) * static_cast<size_t>(w_) + static_cast<size_t>(x)];
    }
    void set(Pixel p, int v) {
        cells_[static_cast<size_t>(p.y - oy_) * static_cast<size_t>(w_) + static_cast<size_t>(p.x - ox_)] = v;
    }

private:
    int ox_ = 0, oy_ = 0, w_ = 0, h_ = 0;
    std::vector<int> cells_;
};

std::vector<std::vector<Pixel>> components(std::span<const Pixel> sorted, Mask& mask) {
    for (const Pixel& p : sorted) {
        mask.set(p, 0);
    }
    std::vector<std::vector<Pixel>> comps;
    for (const Pixel& seed : sorted) {
        if (mask.get(seed) != 0) {
            continue;
        }
        const int label = static_cast<int>(comps.size()) + 1;
        std::vector<Pixel> comp;
        std::deque<Pixel> queue{seed};
        mask.set(seed, label);
        while (!queue.empty()) {
            const Pixel p = queue.front();
            queue.pop_front();
            comp.push_back(p);
            for (const Pixel& d : kDirs) {
                const Pixel q{p.x + d.x, p.y + d.y};
                if (mask.get(q) == 0) {
                    mask.set(q, label);
                    queue.push_back(q);
                }
            }
        }
        std::sort(comp.begin(), comp.end());
        comps.push_back(std::move(comp));
    }
    return comps;
}

struct PixelHash {
    size_t operator()(const Pixel& p) const noexcept {
        return std::hash<long long>{}((static_cast<long long>(p.y) << 32) ^ static_cast<unsigned>(p.x));
    }
};

/// Removes every excursion that returns to an already visited pixel.
std::vector<Pixel> erase_loops(const std::vector<Pixel>& walk) {
    std::vector<Pixel> path;
    std::unordered_map<Pixel, size_t, PixelHash> where;
    for (const Pixel& p : walk) {
        if (auto it = where.find(p); it != where.end()) {
            for (size_t j = it->second + 1; j < path.size(); ++j) {
                where.erase(path[j]);
            }
            path.resize(it->second + 1);
        } else {
            where.emplace(p, path.size());
            path.push_back(p);
        }
    }
    return path;
}

/// Moore-neighbor trace of the outer boundary with Jacob's stopping criterion.
std::vector<Pixel> moore_trace(const std::vector<Pixel>& comp, const Mask& mask, int label) {
    const Pixel start = comp.front();  // raster-first, so its west neighbour is background
    const auto inside = [&](Pixel p) { return mask.get(p) == label; };

    std::vector<Pixel> walk{start};
    Pixel cur = start;
    int back = 4;  // direction from cur to the background pixel we entered from
    int first_move = -1;
    const size_t limit = 4 * comp.size() + 16;

    while (walk.size() <= limit) {
        int move = -1;
        for (int k = 1; k <= 8; ++k) {
            const int d = (back + k) % 8;
            if (inside({cur.x + kDirs[d].x, cur.y + kDirs[d].y})) {
                move = d;
                break;
            }
        }
        if (move < 0) {
            break;  // isolated pixel
        }
        if (cur == start) {
            if (first_move < 0) {
                first_move = move;
            } else if (move == first_move) {
                break;
            }
        }
        const Pixel next{cur.x + kDirs[move].x, cur.y + kDirs[move].y};
        const Pixel probe{cur.x + kDirs[(move + 7) % 8].x, cur.y + kDirs[(move + 7) % 8].y};
        back = direction_of(next, probe);
        if (back < 0) {
            back = (move + 4) % 8;
        }
        cur = next;
        walk.push_back(cur);
    }
    // The trace ends by re-entering start; drop that closing visit.
    while (walk.size() > 1 && walk.back() == start) {
        walk.pop_back();
    }
    return erase_loops(walk);
}

std::vector<Pixel> bfs_from(const Mask& mask, int label, Pixel src,
                            std::unordered_map<Pixel, Pixel, PixelHash>& parent) {
    parent.clear();
    parent.emplace(src, src);
    std::vector<Pixel> order{src};
    for (size_t head = 0; head < order.size(); ++head) {
        const Pixel p = order[head];
        // Axis neighbours first so the geodesic prefers unit steps.
        for (int d : {0, 2, 4, 6, 1, 3, 5, 7}) {
            const Pixel q{p.x + kDirs[d].x, p.y + kDirs[d].y};
            if (mask.get(q) == label && !parent.contains(q)) {
                parent.emplace(q, p);
                order.push_back(q);
            }
        }
    }
    return order;
}

std::vector<Pixel> open_chain(const std::vector<Pixel>& comp, const Mask& mask, int label) {
    Pixel start = comp.front();
    for (const Pixel& p : comp) {
        int deg = 0;
        for (const Pixel& d : kDirs) {
            deg += mask.get({p.x + d.x, p.y + d.y}) == label ? 1 : 0;
        }
        if (deg == 1) {
            start = p;
            break;
        }
    }
    std::unordered_map<Pixel, Pixel, PixelHash> parent;
    const Pixel far = bfs_from(mask, label, start, parent).back();
    const Pixel end = bfs_from(mask, label, far, parent).back();
    std::vector<Pixel> path{end};
    while (!(path.back() == far)) {
        path.push_back(parent.at(path.back()));
    }
    if (path.back() < path.front()) {
        std::reverse(path.begin(), path.end());
    }
    return path;
}

}  // namespace

std::vector<Pixel> trace_contour(std::span<const Pixel> pixels, bool closed, bool allow_multiple) {
    if (pixels.empty()) {
        throw Error(ErrorCode::NoEdges, "no pixels to trace");
    }
    std::vector<Pixel> sorted(pixels.begin(), pixels.end());
    std::sort(sorted.begin(), sorted.end());
    sorted.erase(std::unique(sorted.begin(), sorted.end()), sorted.end());

    Mask mask(sorted);
    auto comps = components(sorted, mask);
    size_t best = 0;
    if (comps.size() > 1) {
        if (!allow_multiple) {
            std::ostringstream msg;
            msg << "edge pixels form " << comps.size() << " separate components";
            throw Error(ErrorCode::AmbiguousTopology, msg.str());
        }
        for (size_t i = 1; i < comps.size(); ++i) {
            if (comps[i].size() > comps[best].size()) {
                best = i;
            }
        }
    }
    const int label = static_cast<int>(best) + 1;
    std::vector<Pixel> chain = open_chain(comps[best], mask, label);
    if (!closed) {
        return chain;
    }
    // A ring broken by a gap traces out and back, which loop erasure collapses;
    // the geodesic chain is then the better ordering of the same pixels.
    std::vector<Pixel> ring = moore_trace(comps[best], mask, label);
    return ring.size() >= chain.size() ? ring : chain;
}

}  // namespace subedge
