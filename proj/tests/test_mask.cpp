#include <gtest/gtest.h>

#include <set>

#include "signflow/mask.hpp"
#include "signflow/random.hpp"

using namespace signflow;

namespace {

BinaryMask random_mask(Rng& rng, int w, int h, double p) {
    BinaryMask m(w, h);
    for (int y = 0; y < h; ++y)
        for (int x = 0; x < w; ++x)
            if (rng.uniform() < p)
                m.set(x, y);
    return m;
}

// Recursive-free DFS flood fill returning the component size of every foreground pixel.
std::vector<std::size_t> component_sizes_oracle(const BinaryMask& m) {
    std::vector<int> seen(std::size_t(m.width()) * m.height(), 0);
    std::vector<std::size_t> sizes;
    for (int y = 0; y < m.height(); ++y)
        for (int x = 0; x < m.width(); ++x) {
            if (!m.at(x, y) || seen[std::size_t(y) * m.width() + x])
                continue;
            std::vector<Pixel> stack{{x, y}};
            seen[std::size_t(y) * m.width() + x] = 1;
            std::size_t n = 0;
            while (!stack.empty()) {
                const Pixel p = stack.back();
                stack.pop_back();
                ++n;
                for (int dy = -1; dy <= 1; ++dy)
                    for (int dx = -1; dx <= 1; ++dx) {
                        const int nx = p.x + dx, ny = p.y + dy;
                        if (m.at(nx, ny) && !seen[std::size_t(ny) * m.width() + nx]) {
                            seen[std::size_t(ny) * m.width() + nx] = 1;
                            stack.push_back({nx, ny});
                        }
                    }
            }
            sizes.push_back(n);
        }
    return sizes;
}

bool is_border_pixel(const BinaryMask& m, Pixel p) {
    if (!m.at(p.x, p.y))
        return false;
    for (const auto& d : kNeighbours8)
        if (!m.at(p.x + d.x, p.y + d.y))
            return true;
    return false;
}

} // namespace

TEST(Components, MatchFloodFill) {
    Rng rng(41);
    for (int trial = 0; trial < 50; ++trial) {
        const auto m = random_mask(rng, 5 + int(rng.index(30)), 5 + int(rng.index(30)), 0.2 + 0.4 * rng.uniform());
        std::vector<std::size_t> sizes;
        label_components(m, sizes);
        EXPECT_EQ(sizes, component_sizes_oracle(m));
        const auto big = largest_component(m);
        const auto oracle = component_sizes_oracle(m);
        const std::size_t expected = oracle.empty() ? 0 : *std::max_element(oracle.begin(), oracle.end());
        EXPECT_EQ(big.count(), expected);
        EXPECT_LE(component_sizes_oracle(big).size(), 1u);
    }
}

TEST(Components, DiagonalPixelsConnect) {
    BinaryMask m(3, 3);
    m.set(0, 0);
    m.set(1, 1);
    m.set(2, 2);
    std::vector<std::size_t> sizes;
    label_components(m, sizes);
    EXPECT_EQ(sizes, (std::vector<std::size_t>{3}));
}

TEST(Trace, SquareIsClockwiseFromTopLeft) {
    BinaryMask m(10, 10);
    for (int y = 2; y <= 4; ++y)
        for (int x = 3; x <= 5; ++x)
            m.set(x, y);
    const auto c = trace_boundary(m);
    const std::vector<Pixel> expected = {{3, 2}, {4, 2}, {5, 2}, {5, 3}, {5, 4}, {4, 4}, {3, 4}, {3, 3}};
    EXPECT_EQ(c, expected);
}

TEST(Trace, SinglePixelAndEmpty) {
    BinaryMask m(4, 4);
    EXPECT_TRUE(trace_boundary(m).empty());
    m.set(2, 1);
    EXPECT_EQ(trace_boundary(m), (std::vector<Pixel>{{2, 1}}));
}

TEST(Trace, RandomBlobsGiveClosedBorderLoops) {
    Rng rng(42);
    for (int trial = 0; trial < 40; ++trial) {
        const auto m = largest_component(random_mask(rng, 20, 20, 0.6));
        const auto c = trace_boundary(m);
        ASSERT_FALSE(c.empty());
        for (std::size_t i = 0; i < c.size(); ++i) {
            EXPECT_TRUE(is_border_pixel(m, c[i]));
            if (c.size() > 1) {
                const Pixel& a = c[i];
                const Pixel& b = c[(i + 1) % c.size()];
                EXPECT_LE(std::abs(a.x - b.x), 1);
                EXPECT_LE(std::abs(a.y - b.y), 1);
            }
        }
    }
}

TEST(Resample, IdentityAndScaling) {
    Rng rng(43);
    const auto m = random_mask(rng, 8, 8, 0.5);
    EXPECT_EQ(resample_box(m, BoundingBox{0, 0, 7, 7}, 8), m);

    BinaryMask full(4, 4);
    for (int y = 0; y < 4; ++y)
        for (int x = 0; x < 4; ++x)
            full.set(x, y);
    EXPECT_EQ(resample_box(full, bounding_box(full), 65).count(), 65u * 65u);

    // Left half filled, upsampled x2: exactly the left half survives.
    BinaryMask half(4, 4);
    for (int y = 0; y < 4; ++y)
        for (int x = 0; x < 2; ++x)
            half.set(x, y);
    const auto up = resample_box(half, BoundingBox{0, 0, 3, 3}, 8);
    for (int y = 0; y < 8; ++y)
        for (int x = 0; x < 8; ++x)
            EXPECT_EQ(up.at(x, y), x < 4);
}

TEST(Resample, HalfCoverageRuleOnDownsample) {
    BinaryMask m(2, 2);
    m.set(0, 0);
    m.set(1, 1);
    EXPECT_TRUE(resample_box(m, BoundingBox{0, 0, 1, 1}, 1).at(0, 0));
    BinaryMask one(2, 2);
    one.set(0, 0);
    EXPECT_FALSE(resample_box(one, BoundingBox{0, 0, 1, 1}, 1).at(0, 0));
}
