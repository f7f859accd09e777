#include <gtest/gtest.h>

#include <cmath>
#include <limits>

#include "signflow/skeleton.hpp"
#include "test_support.hpp"

using namespace signflow;

TEST(SelectUpperBody, DropsKneesAndFeet) {
    Rng rng(1);
    const auto frame = test::random_frame(rng);
    ASSERT_EQ(frame.joint_count(), 15u);
    const auto upper = select_upper_body(frame);
    EXPECT_EQ(upper.joint_count(), 11u);
    for (JointId id : {JointId::LKnee, JointId::RKnee, JointId::LFoot, JointId::RFoot})
        EXPECT_FALSE(upper.has(id));
    for (JointId id : kUpperBody)
        EXPECT_EQ(upper.at(id), frame.at(id));
}

TEST(SelectUpperBody, IsIdempotent) {
    Rng rng(2);
    for (int trial = 0; trial < 20; ++trial) {
        const auto once = select_upper_body(test::random_frame(rng, trial));
        EXPECT_EQ(select_upper_body(once), once);
    }
}

TEST(SelectUpperBody, MissingHandNamesTheJoint) {
    Rng rng(3);
    auto frame = test::random_frame(rng);
    frame.erase(JointId::RHand);
    try {
        select_upper_body(frame);
        FAIL() << "expected MissingJoint";
    } catch (const Error& e) {
        EXPECT_EQ(e.code(), ErrorCode::MissingJoint);
        EXPECT_NE(std::string(e.what()).find("MissingJoint(RHand)"), std::string::npos);
    }
}

TEST(UpperBodySet, HasElevenOfFifteen) {
    EXPECT_EQ(kAllJoints.size(), 15u);
    EXPECT_EQ(kUpperBody.size(), 11u);
    std::size_t upper = 0;
    for (JointId id : kAllJoints)
        upper += is_upper_body(id);
    EXPECT_EQ(upper, 11u);
}

TEST(ValidateSequence, WellFormedHasNoDefects) {
    Rng rng(4);
    EXPECT_TRUE(validate_sequence(test::random_sequence(rng, 10)).empty());
}

TEST(ValidateSequence, SingleFrameIsTooShort) {
    Rng rng(5);
    const auto defects = validate_sequence(test::random_sequence(rng, 1));
    ASSERT_EQ(defects.size(), 1u);
    EXPECT_EQ(defects[0].kind, DefectKind::TooShort);
}

TEST(ValidateSequence, EqualTimestampsAreNonMonotonic) {
    Rng rng(6);
    auto seq = test::random_sequence(rng, 4);
    seq.frames[2].set_timestamp(seq.frames[1].timestamp());
    const auto defects = validate_sequence(seq);
    ASSERT_EQ(defects.size(), 1u);
    EXPECT_EQ(defects[0].kind, DefectKind::NonMonotonicTime);
    EXPECT_EQ(defects[0].frame_index, 2u);
}

TEST(ValidateSequence, TotalOnGarbage) {
    Rng rng(7);
    const double bad[] = {std::numeric_limits<double>::quiet_NaN(), std::numeric_limits<double>::infinity(), -1.0,
                          1e308};
    for (int trial = 0; trial < 200; ++trial) {
        SkeletonSequence seq;
        const std::size_t n = rng.index(6);
        for (std::size_t i = 0; i < n; ++i) {
            SkeletonFrame f(rng.uniform() < 0.3 ? bad[rng.index(4)] : rng.uniform(-1, 5));
            for (JointId id : kAllJoints) {
                if (rng.uniform() < 0.2)
                    continue;
                Joint3D j{rng.uniform(), rng.uniform(), rng.uniform(), rng.uniform(-0.5, 1.5)};
                if (rng.uniform() < 0.1)
                    j.x = bad[rng.index(4)];
                f.set(id, j);
            }
            seq.frames.push_back(f);
        }
        EXPECT_NO_THROW(validate_sequence(seq));
    }
}

TEST(ForwardFill, HoldsLastValidValue) {
    Rng rng(8);
    auto seq = test::random_sequence(rng, 4);
    const Joint3D held = seq.frames[0].at(JointId::RHand);
    seq.frames[1].erase(JointId::RHand);
    auto low = seq.frames[2].at(JointId::RHand);
    low.confidence = 0.0;
    seq.frames[2].set(JointId::RHand, low);
    const auto filled = forward_fill(seq.frames, kUpperBody);
    EXPECT_EQ(filled[1].at(JointId::RHand), held);
    EXPECT_EQ(filled[2].at(JointId::RHand), held);
    EXPECT_EQ(filled[3].at(JointId::RHand), seq.frames[3].at(JointId::RHand));
}

TEST(ForwardFill, RejectsIncompleteFirstFrame) {
    Rng rng(9);
    auto seq = test::random_sequence(rng, 3);
    seq.frames[0].erase(JointId::Head);
    EXPECT_THROW(forward_fill(seq.frames, kUpperBody), Error);
}
