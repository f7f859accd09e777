#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <deque>
#include <optional>
#include <vector>

#include "signflow/error.hpp"

namespace signflow {

struct Pixel {
    int x = 0;
    int y = 0;
    bool operator==(const Pixel&) const = default;
};

/// Binary image, row-major, foreground = 1.
class BinaryMask {
public:
    BinaryMask() = default;
    BinaryMask(int width, int height) : width_(width), height_(height), data_(std::size_t(width) * height, 0) {
        detail::require(width >= 0 && height >= 0, ErrorCode::InvalidArgument, "negative mask size");
    }

    int width() const noexcept { return width_; }
    int height() const noexcept { return height_; }

    bool inside(int x, int y) const noexcept { return x >= 0 && y >= 0 && x < width_ && y < height_; }

    bool at(int x, int y) const noexcept { return inside(x, y) && data_[std::size_t(y) * width_ + x] != 0; }
    void set(int x, int y, bool v = true) { data_[std::size_t(y) * width_ + x] = v ? 1 : 0; }

    std::size_t count() const noexcept {
        return static_cast<std::size_t>(std::count(data_.begin(), data_.end(), std::uint8_t{1}));
    }
    bool any() const noexcept { return count() > 0; }

    const std::vector<std::uint8_t>& data() const noexcept { return data_; }

    bool operator==(const BinaryMask&) const = default;

private:
    int width_ = 0;
    int height_ = 0;
    std::vector<std::uint8_t> data_;
};

/// 8-neighbourhood offsets in clockwise order (image y axis points down),
/// starting west.
inline constexpr std::array<Pixel, 8> kNeighbours8 = {{
    {-1, 0}, {-1, -1}, {0, -1}, {1, -1}, {1, 0}, {1, 1}, {0, 1}, {-1, 1},
}};

/// Labels 8-connected foreground components; returns per-pixel labels
/// (-1 = background) and component sizes, numbered in raster order of their
/// first pixel.
inline std::vector<int> label_components(const BinaryMask& mask, std::vector<std::size_t>& sizes) {
    const int w = mask.width();
    const int h = mask.height();
    std::vector<int> labels(std::size_t(w) * h, -1);
    sizes.clear();
    std::deque<Pixel> queue;
    for (int y = 0; y < h; ++y)
        for (int x = 0; x < w; ++x) {
            if (!mask.at(x, y) || labels[std::size_t(y) * w + x] >= 0)
                continue;
            const int id = static_cast<int>(sizes.size());
            std::size_t size = 0;
            labels[std::size_t(y) * w + x] = id;
            queue.push_back({x, y});
            while (!queue.empty()) {
                const Pixel p = queue.front();
                queue.pop_front();
                ++size;
                for (const auto& d : kNeighbours8) {
                    const int nx = p.x + d.x, ny = p.y + d.y;
                    if (mask.at(nx, ny) && labels[std::size_t(ny) * w + nx] < 0) {
                        labels[std::size_t(ny) * w + nx] = id;
                        queue.push_back({nx, ny});
                    }
                }
            }
            sizes.push_back(size);
        }
    return labels;
}

/// Keeps only the largest 8-connected component (earliest in raster order on ties).
inline BinaryMask largest_component(const BinaryMask& mask) {
    std::vector<std::size_t> sizes;
    const auto labels = label_components(mask, sizes);
    BinaryMask out(mask.width(), mask.height());
    if (sizes.empty())
        return out;
    const int keep = static_cast<int>(std::max_element(sizes.begin(), sizes.end()) - sizes.begin());
    for (int y = 0; y < mask.height(); ++y)
        for (int x = 0; x < mask.width(); ++x)
            if (labels[std::size_t(y) * mask.width() + x] == keep)
                out.set(x, y);
    return out;
}

struct BoundingBox {
    int x0 = 0, y0 = 0, x1 = -1, y1 = -1; // inclusive

    int width() const noexcept { return x1 - x0 + 1; }
    int height() const noexcept { return y1 - y0 + 1; }
    bool empty() const noexcept { return x1 < x0 || y1 < y0; }
};

inline BoundingBox bounding_box(const BinaryMask& mask) {
    BoundingBox box{mask.width(), mask.height(), -1, -1};
    for (int y = 0; y < mask.height(); ++y)
        for (int x = 0; x < mask.width(); ++x)
            if (mask.at(x, y)) {
                box.x0 = std::min(box.x0, x);
                box.y0 = std::min(box.y0, y);
                box.x1 = std::max(box.x1, x);
                box.y1 = std::max(box.y1, y);
            }
    return box;
}

/// Resamples the box contents to size x size. An output pixel is foreground
/// when at least half of its footprint in the source box is foreground.
inline BinaryMask resample_box(const BinaryMask& mask, const BoundingBox& box, int size) {
    BinaryMask out(size, size);
    if (box.empty())
        return out;
    const double sx = static_cast<double>(box.width()) / size;
    const double sy = static_cast<double>(box.height()) / size;
    for (int oy = 0; oy < size; ++oy) {
        const double fy0 = oy * sy, fy1 = (oy + 1) * sy;
        for (int ox = 0; ox < size; ++ox) {
            const double fx0 = ox * sx, fx1 = (ox + 1) * sx;
            double covered = 0.0;
            for (int y = static_cast<int>(std::floor(fy0)); y < static_cast<int>(std::ceil(fy1)); ++y) {
                const double wy = std::min<double>(y + 1, fy1) - std::max<double>(y, fy0);
                if (wy <= 0.0)
                    continue;
                for (int x = static_cast<int>(std::floor(fx0)); x < static_cast<int>(std::ceil(fx1)); ++x) {
                    const double wx = std::min<double>(x + 1, fx1) - std::max<double>(x, fx0);
                    if (wx > 0.0 && mask.at(box.x0 + x, box.y0 + y))
                        covered += wx * wy;
                }
            }
            if (covered >= 0.5 * sx * sy - 1e-12)
                out.set(ox, oy);
        }
    }
    return out;
}

/// Moore-neighbour border following of the component containing the topmost,
/// then leftmost, foreground pixel. The walk is clockwise on screen and
/// returns the closed loop without repeating the start at the end.
inline std::vector<Pixel> trace_boundary(const BinaryMask& mask) {
    Pixel start{-1, -1};
    for (int y = 0; y < mask.height() && start.x < 0; ++y)
        for (int x = 0; x < mask.width(); ++x)
            if (mask.at(x, y)) {
                start = {x, y};
                break;
            }
    if (start.x < 0)
        return {};

    auto direction_of = [](int dx, int dy) {
        for (int d = 0; d < 8; ++d)
            if (kNeighbours8[d].x == dx && kNeighbours8[d].y == dy)
                return d;
        return 0;
    };

    std::vector<Pixel> contour{start};
    Pixel p = start;
    int back = 0; // west of the start pixel is background by construction
    std::optional<Pixel> first_step;
    const std::size_t limit = 4 * std::size_t(mask.width()) * mask.height() + 8;
    for (std::size_t step = 0; step < limit; ++step) {
        int found = -1;
        for (int k = 1; k <= 8; ++k) {
            const int d = (back + k) % 8;
            if (mask.at(p.x + kNeighbours8[d].x, p.y + kNeighbours8[d].y)) {
                found = d;
                break;
            }
        }
        if (found < 0)
            break; // isolated pixel
        const Pixel q{p.x + kNeighbours8[found].x, p.y + kNeighbours8[found].y};
        if (p == start) {
            if (!first_step) {
                first_step = q;
            } else if (q == *first_step) {
                contour.pop_back(); // the closing visit of the start pixel
                break;
            }
        }
        const auto& prev = kNeighbours8[(found + 7) % 8];
        back = direction_of(p.x + prev.x - q.x, p.y + prev.y - q.y);
        p = q;
        contour.push_back(p);
    }
    return contour;
}

} // namespace signflow
