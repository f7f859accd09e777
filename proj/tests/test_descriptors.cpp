#include <gtest/gtest.h>

#include <cmath>

#include "signflow/descriptors.hpp"
#include "test_support.hpp"

using namespace signflow;

namespace {

// Element-wise oracle: joint (from `others`) minus hand (from `hands`), hands
// in right-then-left order, joints in declaration order.
Vector subtraction_oracle(const SkeletonFrame& hands, const SkeletonFrame& others) {
    Vector out;
    for (JointId hand : {JointId::RHand, JointId::LHand}) {
        const auto h = *hands.get(hand);
        for (int j = 0; j < 11; ++j) {
            const auto o = *others.get(static_cast<JointId>(j));
            out.push_back(o.x - h.x);
            out.push_back(o.y - h.y);
            out.push_back(o.z - h.z);
        }
    }
    return out;
}

void expect_close(const Vector& a, const Vector& b, double tol) {
    ASSERT_EQ(a.size(), b.size());
    for (std::size_t i = 0; i < a.size(); ++i)
        EXPECT_NEAR(a[i], b[i], tol) << "component " << i;
}

SkeletonFrame origin_frame() {
    SkeletonFrame f;
    for (JointId id : kUpperBody)
        f.set(id, {0, 0, 0, 1});
    return f;
}

} // namespace

TEST(Rbpd, AllJointsAtOriginGiveZeros) {
    const auto d = compute_rbpd(origin_frame());
    ASSERT_EQ(d.values.size(), 66u);
    for (double v : d.values)
        EXPECT_EQ(v, 0.0);
}

TEST(Rbpd, RightHandHeadEntryIsDirectSubtraction) {
    Rng rng(11);
    auto f = test::random_frame(rng);
    f.set(JointId::RHand, {1, 0, 0, 1});
    f.set(JointId::Head, {0, 2, 0, 1});
    const auto d = compute_rbpd(f);
    // right half first, Head is joint 0
    EXPECT_DOUBLE_EQ(d.values[0], -1.0);
    EXPECT_DOUBLE_EQ(d.values[1], 2.0);
    EXPECT_DOUBLE_EQ(d.values[2], 0.0);
}

TEST(Rbpd, MatchesOracleAndIsTranslationInvariant) {
    Rng rng(12);
    for (int trial = 0; trial < 50; ++trial) {
        const auto f = test::random_frame(rng);
        const auto g = test::translated(f, 5, -3, 2);
        const auto df = compute_rbpd(f).values;
        expect_close(df, subtraction_oracle(f, f), 0.0);
        expect_close(compute_rbpd(g).values, subtraction_oracle(g, g), 0.0);
        expect_close(df, compute_rbpd(g).values, 1e-12);
    }
}

TEST(Rbpd, SelfHandTripleIsExactlyZero) {
    Rng rng(13);
    for (int trial = 0; trial < 50; ++trial) {
        const auto d = compute_rbpd(test::random_frame(rng, 0, 10.0)).values;
        const std::size_t r = 3 * index_of(JointId::RHand);
        const std::size_t l = 33 + 3 * index_of(JointId::LHand);
        for (std::size_t c = 0; c < 3; ++c) {
            EXPECT_EQ(d[r + c], 0.0);
            EXPECT_EQ(d[l + c], 0.0);
        }
    }
}

TEST(Rbpd, MissingJointIsAnError) {
    auto f = origin_frame();
    f.erase(JointId::LElbow);
    EXPECT_THROW(compute_rbpd(f), Error);
}

TEST(RbpdT, StaticBodyCollapsesToSpatialCase) {
    Rng rng(14);
    const auto f = test::random_frame(rng);
    EXPECT_EQ(compute_rbpd_t(f, f).values, compute_rbpd(f).values);
}

TEST(RbpdT, MovingRightHandShiftsRightHalf) {
    Rng rng(15);
    const auto f0 = test::random_frame(rng);
    auto f1 = f0;
    auto h = f0.at(JointId::RHand);
    h.x += 0.1;
    f1.set(JointId::RHand, h);
    const auto base = compute_rbpd(f0).values;
    const auto d = compute_rbpd_t(f0, f1).values;
    const std::size_t self = 3 * index_of(JointId::RHand);
    EXPECT_NEAR(d[self], 0.1, 1e-12); // RHand(t+1) - RHand(t)
    for (std::size_t j = 0; j < 11; ++j) {
        if (j == index_of(JointId::RHand))
            continue;
        for (std::size_t c = 0; c < 3; ++c)
            EXPECT_NEAR(d[3 * j + c], base[3 * j + c], 1e-12);
    }
}

TEST(RbpdT, MatchesPairOracle) {
    Rng rng(16);
    for (int trial = 0; trial < 50; ++trial) {
        const auto a = test::random_frame(rng);
        const auto b = test::random_frame(rng);
        expect_close(compute_rbpd_t(a, b).values, subtraction_oracle(a, b), 0.0);
    }
}

TEST(Hd, HandsAtTorsoGiveZeros) {
    const auto d = compute_hd(origin_frame());
    EXPECT_EQ(d.values, Vector(6, 0.0));
}

TEST(Hd, DirectSubtraction) {
    auto f = origin_frame();
    f.set(JointId::RHand, {0, 1, 0, 1});
    f.set(JointId::LHand, {0, -1, 0, 1});
    EXPECT_EQ(compute_hd(f).values, (Vector{0, 1, 0, 0, -1, 0}));
}

TEST(HdT, TorsoMotionAddsToEveryDelta) {
    Rng rng(17);
    const auto f0 = test::random_frame(rng);
    auto f1 = f0;
    auto torso = f0.at(JointId::Torso);
    torso.z += 0.2;
    f1.set(JointId::Torso, torso);
    EXPECT_EQ(compute_hd_t(f0, f0).values, compute_hd(f0).values);
    const auto base = compute_hd(f0).values;
    const auto d = compute_hd_t(f0, f1).values;
    // hand(t) - torso(t+1): the z component moves opposite to the torso
    for (std::size_t i = 0; i < 6; ++i)
        EXPECT_NEAR(d[i] - base[i], (i % 3 == 2) ? -0.2 : 0.0, 1e-12);
}

TEST(AllVariants, TranslationInvarianceAndDimensions) {
    Rng rng(18);
    for (auto v : {DescriptorVariant::HD, DescriptorVariant::HD_T, DescriptorVariant::RBPD, DescriptorVariant::RBPD_T}) {
        for (int trial = 0; trial < 20; ++trial) {
            const std::size_t n = 2 + rng.index(10);
            auto seq = test::random_sequence(rng, n);
            SkeletonSequence moved;
            const double dx = rng.uniform(-10, 10), dy = rng.uniform(-10, 10), dz = rng.uniform(-10, 10);
            for (const auto& f : seq.frames)
                moved.frames.push_back(test::translated(f, dx, dy, dz));
            const auto a = describe_sequence(seq, v);
            const auto b = describe_sequence(moved, v);
            ASSERT_EQ(a.size(), is_time_extended(v) ? n - 1 : n);
            for (std::size_t i = 0; i < a.size(); ++i) {
                ASSERT_EQ(a[i].values.size(), descriptor_dim(v));
                EXPECT_EQ(a[i].frame_index, i);
                for (std::size_t c = 0; c < a[i].values.size(); ++c)
                    EXPECT_NEAR(a[i].values[c], b[i].values[c], 1e-12);
            }
        }
    }
}

TEST(DescribeSequence, Counts) {
    Rng rng(19);
    const auto ten = test::random_sequence(rng, 10);
    EXPECT_EQ(describe_sequence(ten, DescriptorVariant::RBPD).size(), 10u);
    EXPECT_EQ(describe_sequence(ten, DescriptorVariant::RBPD_T).size(), 9u);
    EXPECT_EQ(describe_sequence(test::random_sequence(rng, 2), DescriptorVariant::HD_T).size(), 1u);
}

TEST(ZNorm, TwoPointStats) {
    const std::vector<Vector> rows = {{0.0}, {2.0}};
    const auto stats = fit_znorm(rows);
    EXPECT_DOUBLE_EQ(stats.mean[0], 1.0);
    EXPECT_DOUBLE_EQ(stats.stddev[0], 1.0);
    EXPECT_DOUBLE_EQ(apply_znorm(stats, Vector{2.0})[0], 1.0);
}

TEST(ZNorm, ConstantCorpusIsFloored) {
    const std::vector<Vector> rows(5, Vector{3.0, -1.0});
    const auto stats = fit_znorm(rows);
    EXPECT_EQ(stats.stddev, (Vector{kZNormFloor, kZNormFloor}));
    EXPECT_EQ(apply_znorm(stats, Vector{3.0, -1.0}), (Vector{0.0, 0.0}));
}

TEST(ZNorm, NormalizedMomentsMatchIndependentAccumulation) {
    Rng rng(20);
    std::vector<Vector> rows;
    for (int i = 0; i < 500; ++i)
        rows.push_back({rng.normal(3, 2), rng.uniform(-100, 50), rng.normal(-1, 0.01)});
    const auto stats = fit_znorm(rows);
    for (std::size_t c = 0; c < 3; ++c) {
        // Kahan-free two-pass moments over the normalized column
        long double sum = 0, sum2 = 0;
        for (const auto& r : rows)
            sum += apply_znorm(stats, r)[c];
        const long double mean = sum / rows.size();
        for (const auto& r : rows) {
            const long double d = apply_znorm(stats, r)[c] - mean;
            sum2 += d * d;
        }
        EXPECT_NEAR(static_cast<double>(mean), 0.0, 1e-9);
        EXPECT_NEAR(static_cast<double>(sum2 / rows.size()), 1.0, 1e-6);
    }
}

TEST(ZNorm, DimensionMismatchIsAnError) {
    const std::vector<Vector> rows = {{0.0, 1.0}, {2.0}};
    EXPECT_THROW(fit_znorm(rows), Error);
    const auto stats = fit_znorm(std::vector<Vector>{{0.0}, {1.0}});
    EXPECT_THROW(apply_znorm(stats, Vector{1.0, 2.0}), Error);
}
