#pragma once

#include <string>

#include "signflow/synthetic.hpp"

namespace signflow::test {

inline SyntheticClass make_class(std::string name, std::string trajectory, Vec3 center, std::string posture = "fist",
                                 std::optional<JointId> anchor = std::nullopt, Vec3 anchor_offset = {0, 0, 0}) {
    SyntheticClass c;
    c.name = std::move(name);
    c.trajectory = std::move(trajectory);
    c.center = center;
    c.posture = std::move(posture);
    c.anchor = anchor;
    c.anchor_offset = anchor_offset;
    return c;
}

/// Six classes; 0/1 and 2/3 share their world-space hand path and differ only
/// in where the anchor joint sits relative to it.
inline SyntheticConfig anchor_pairs_config(std::uint64_t seed = 7) {
    SyntheticConfig cfg;
    const Vec3 high{0.15, 0.35, -0.25};
    const Vec3 mid{0.05, 0.10, -0.30};
    cfg.classes = {
        make_class("circle-head-top", "circle", high, "fist", JointId::Head, {0.15, -0.10, -0.25}),
        make_class("circle-chin", "circle", high, "fist", JointId::Head, {0.15, 0.15, -0.25}),
        make_class("swipe-neck-low", "swipe", mid, "fist", JointId::Neck, {0.05, -0.20, -0.30}),
        make_class("swipe-neck-high", "swipe", mid, "fist", JointId::Neck, {0.05, 0.05, -0.30}),
        make_class("raise", "raise", {0.25, 0.0, -0.25}),
        make_class("zigzag", "zigzag", {0.10, -0.15, -0.30}),
    };
    cfg.noise = 0.01;
    cfg.train_per_class = 40;
    cfg.validation_per_class = 10;
    cfg.test_per_class = 20;
    cfg.seed = seed;
    return cfg;
}

/// Classes 0/1 differ only in hand shape, 2/3 only in anchor placement.
inline SyntheticConfig complementary_config(std::uint64_t seed = 11) {
    SyntheticConfig cfg;
    const Vec3 a{0.15, 0.30, -0.25};
    const Vec3 b{0.05, 0.10, -0.30};
    cfg.classes = {
        make_class("circle-fist", "circle", a, "fist"),
        make_class("circle-open", "circle", a, "open"),
        make_class("swipe-low", "swipe", b, "point", JointId::Neck, {0.05, -0.20, -0.30}),
        make_class("swipe-high", "swipe", b, "point", JointId::Neck, {0.05, 0.05, -0.30}),
        make_class("raise-vee", "raise", {0.25, 0.0, -0.25}, "vee"),
        make_class("tap-star", "tap", {0.10, -0.10, -0.30}, "star"),
    };
    cfg.noise = 0.01;
    cfg.train_per_class = 40;
    cfg.validation_per_class = 10;
    cfg.test_per_class = 20;
    cfg.seed = seed;
    return cfg;
}

/// Small, well separated corpus for end-to-end smoke runs.
inline SyntheticConfig easy_config(std::uint64_t seed = 3) {
    SyntheticConfig cfg;
    cfg.classes = {
        make_class("circle", "circle", {0.15, 0.20, -0.25}, "fist"),
        make_class("swipe", "swipe", {0.05, 0.10, -0.30}, "open"),
        make_class("raise", "raise", {0.25, 0.0, -0.25}, "point"),
    };
    cfg.train_per_class = 12;
    cfg.validation_per_class = 6;
    cfg.test_per_class = 6;
    cfg.min_frames = 20;
    cfg.max_frames = 26;
    cfg.seed = seed;
    return cfg;
}

} // namespace signflow::test
