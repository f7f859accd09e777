#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <functional>
#include <numbers>
#include <optional>
#include <string>
#include <vector>

#include "signflow/error.hpp"
#include "signflow/mask.hpp"
#include "signflow/posture.hpp"
#include "signflow/random.hpp"
#include "signflow/skeleton.hpp"

namespace signflow {

enum class Split { Train, Validation, Test };

inline std::string_view to_string(Split s) {
    switch (s) {
    case Split::Train: return "train";
    case Split::Validation: return "validation";
    case Split::Test: return "test";
    }
    return "?";
}

inline Split parse_split(std::string_view s) {
    if (s == "train")
        return Split::Train;
    if (s == "validation" || s == "val")
        return Split::Validation;
    if (s == "test")
        return Split::Test;
    throw Error(ErrorCode::InvalidArgument, "unknown split '" + std::string(s) + "'");
}

/// One recorded sign: skeleton stream plus optional per-frame hand masks.
struct Sample {
    std::string id;
    SkeletonSequence skeleton;
    std::vector<HandPair> hands; ///< empty when no posture data exists
    std::size_t label = 0;
    std::string subject;
    Split split = Split::Train;
};

using Vec3 = std::array<double, 3>;

/// A synthetic sign class. The active (right) hand follows `trajectory`
/// around `center` (torso-relative metres). When `anchor` names a non-hand
/// joint, that joint is placed at center - anchor_offset, so two classes can
/// share the same world-space hand path while the hand sits at different
/// places relative to the body.
struct SyntheticClass {
    std::string name;
    std::string trajectory = "circle";
    std::optional<JointId> anchor;
    Vec3 anchor_offset{0.0, 0.0, 0.0};
    Vec3 center{0.15, 0.15, -0.25};
    std::string posture = "fist";
    std::optional<std::string> left_posture;
};

struct SyntheticConfig {
    std::vector<SyntheticClass> classes;
    std::size_t train_per_class = 40;
    std::size_t validation_per_class = 10;
    std::size_t test_per_class = 20;
    std::size_t train_subjects = 4;
    std::size_t validation_subjects = 2;
    std::size_t test_subjects = 2;
    double noise = 0.01;             ///< joint noise stddev, metres
    std::size_t min_frames = 30;
    std::size_t max_frames = 45;
    double fps = 30.0;
    double subject_spread = 0.0;     ///< half-width of per-subject body translation, metres
    double speed_jitter = 0.0;       ///< exponent spread of the time warp
    double posture_jitter = 0.05;    ///< relative scale / rotation jitter of masks
    std::uint64_t seed = 0;

    void validate() const {
        detail::require(classes.size() >= 2, ErrorCode::InvalidArgument, "synthetic corpus needs at least 2 classes");
        detail::require(noise >= 0.0 && subject_spread >= 0.0 && speed_jitter >= 0.0 && posture_jitter >= 0.0,
                        ErrorCode::InvalidArgument, "noise parameters must be non-negative");
        detail::require(min_frames >= 2 && min_frames <= max_frames, ErrorCode::InvalidArgument,
                        "frame range must satisfy 2 <= min <= max");
        detail::require(train_subjects >= 1 && validation_subjects >= 1 && test_subjects >= 1,
                        ErrorCode::InvalidArgument, "each split needs at least one subject");
        detail::require(fps > 0.0, ErrorCode::InvalidArgument, "fps must be positive");
    }
};

/// Torso-relative rest pose of the generated signer (metres, y up, z toward
/// the camera is negative).
inline std::array<Vec3, kJointCount> rest_pose() {
    return {{
        {0.0, 0.45, 0.0},    // Head
        {0.0, 0.30, 0.0},    // Neck
        {0.0, 0.0, 0.0},     // Torso
        {-0.18, 0.28, 0.0},  // LShoulder
        {0.18, 0.28, 0.0},   // RShoulder
        {-0.22, 0.0, 0.0},   // LElbow
        {0.22, 0.0, 0.0},    // RElbow
        {-0.22, -0.25, -0.05}, // LHand
        {0.22, -0.25, -0.05},  // RHand
        {-0.10, -0.30, 0.0}, // LHip
        {0.10, -0.30, 0.0},  // RHip
        {-0.10, -0.75, 0.0}, // LKnee
        {0.10, -0.75, 0.0},  // RKnee
        {-0.10, -1.20, 0.0}, // LFoot
        {0.10, -1.20, 0.0},  // RFoot
    }};
}

inline const std::vector<std::string>& trajectory_names() {
    static const std::vector<std::string> names = {"circle", "swipe", "raise", "zigzag", "wave", "tap", "arc"};
    return names;
}

/// Offset of the active hand from the class centre at phase s in [0, 1].
inline Vec3 trajectory_offset(const std::string& name, double s) {
    constexpr double pi = std::numbers::pi;
    if (name == "circle")
        return {0.08 * std::cos(2 * pi * s), 0.08 * std::sin(2 * pi * s), 0.0};
    if (name == "swipe")
        return {-0.15 + 0.30 * s, 0.0, 0.0};
    if (name == "raise")
        return {0.0, -0.15 + 0.30 * s, 0.0};
    if (name == "zigzag")
        return {-0.12 + 0.24 * s, 0.06 * (1.0 - 2.0 * std::abs(2.0 * std::fmod(2.0 * s, 1.0) - 1.0)), 0.0};
    if (name == "wave")
        return {0.10 * std::sin(4 * pi * s), 0.0, 0.0};
    if (name == "tap")
        return {0.0, 0.0, -0.08 * std::sin(4 * pi * s)};
    if (name == "arc")
        return {0.12 * std::cos(pi * s), 0.12 * std::sin(pi * s), 0.0};
    throw Error(ErrorCode::InvalidArgument, "unknown trajectory template '" + name + "'");
}

inline const std::vector<std::string>& posture_names() {
    static const std::vector<std::string> names = {"fist", "open", "point", "vee", "flat", "star"};
    return names;
}

/// Rasterizes a procedural hand shape on the 65x65 patch. `scale` and
/// `rotation` perturb the canonical shape about the patch centre.
inline BinaryMask render_posture(const std::string& name, double scale = 1.0, double rotation = 0.0) {
    constexpr double pi = std::numbers::pi;
    auto finger = [](double px, double py, double angle, double length, double half_width, double root) {
        // capsule-free rectangle from the palm outward along `angle`
        const double ux = std::sin(angle), uy = -std::cos(angle);
        const double along = px * ux + py * uy;
        const double across = -px * uy + py * ux;
        return along >= root && along <= root + length && std::abs(across) <= half_width;
    };
    std::function<bool(double, double)> inside;
    if (name == "fist") {
        inside = [](double x, double y) { return x * x + y * y <= 20.0 * 20.0; };
    } else if (name == "open") {
        inside = [&](double x, double y) {
            if (x * x + y * y <= 13.0 * 13.0)
                return true;
            for (double a : {-1.2, -0.55, 0.0, 0.55, 1.2})
                if (finger(x, y, a, 17.0, 2.6, 8.0))
                    return true;
            return false;
        };
    } else if (name == "point") {
        inside = [&](double x, double y) { return x * x + y * y <= 15.0 * 15.0 || finger(x, y, 0.0, 18.0, 3.0, 10.0); };
    } else if (name == "vee") {
        inside = [&](double x, double y) {
            return x * x + y * y <= 14.0 * 14.0 || finger(x, y, -0.4, 18.0, 3.0, 9.0) ||
                   finger(x, y, 0.4, 18.0, 3.0, 9.0);
        };
    } else if (name == "flat") {
        inside = [](double x, double y) { return std::abs(x) <= 9.0 && std::abs(y) <= 26.0; };
    } else if (name == "star") {
        inside = [pi](double x, double y) {
            const double r = std::hypot(x, y);
            const double a = std::atan2(y, x);
            const double spike = 0.5 + 0.5 * std::cos(5.0 * a);
            return r <= 10.0 + 18.0 * spike * spike;
        };
    } else {
        throw Error(ErrorCode::InvalidArgument, "unknown posture '" + name + "'");
    }

    BinaryMask mask(kPatchSize, kPatchSize);
    const double c = (kPatchSize - 1) / 2.0;
    const double cr = std::cos(rotation), sr = std::sin(rotation);
    for (int y = 0; y < kPatchSize; ++y)
        for (int x = 0; x < kPatchSize; ++x) {
            const double dx = (x - c) / scale, dy = (y - c) / scale;
            const double rx = cr * dx + sr * dy, ry = -sr * dx + cr * dy;
            if (inside(rx, ry))
                mask.set(x, y);
        }
    return largest_component(mask);
}

struct SyntheticCorpus {
    std::vector<Sample> samples;
    std::vector<std::string> class_names;
};

/// Deterministic corpus for the configured classes. Subjects are disjoint
/// across splits and assigned round-robin within a split.
inline SyntheticCorpus generate_synthetic_corpus(const SyntheticConfig& cfg) {
    cfg.validate();
    for (const auto& cls : cfg.classes) {
        trajectory_offset(cls.trajectory, 0.0);
        render_posture(cls.posture);
        if (cls.left_posture)
            render_posture(*cls.left_posture);
    }

    Rng rng(cfg.seed);
    const auto rest = rest_pose();
    SyntheticCorpus corpus;
    for (const auto& cls : cfg.classes)
        corpus.class_names.push_back(cls.name);

    struct SplitPlan {
        Split split;
        std::size_t per_class;
        std::size_t subjects;
        std::size_t subject_base;
    };
    const std::array<SplitPlan, 3> plans = {{
        {Split::Train, cfg.train_per_class, cfg.train_subjects, 0},
        {Split::Validation, cfg.validation_per_class, cfg.validation_subjects, cfg.train_subjects},
        {Split::Test, cfg.test_per_class, cfg.test_subjects, cfg.train_subjects + cfg.validation_subjects},
    }};

    const std::size_t total_subjects = cfg.train_subjects + cfg.validation_subjects + cfg.test_subjects;
    std::vector<Vec3> subject_offset(total_subjects);
    for (auto& o : subject_offset)
        o = {rng.uniform(-1.0, 1.0) * cfg.subject_spread, rng.uniform(-1.0, 1.0) * cfg.subject_spread * 0.5,
             2.5 + rng.uniform(-1.0, 1.0) * cfg.subject_spread};

    std::size_t serial = 0;
    for (const auto& plan : plans) {
        std::size_t round_robin = 0;
        for (std::size_t c = 0; c < cfg.classes.size(); ++c) {
            const auto& cls = cfg.classes[c];
            for (std::size_t r = 0; r < plan.per_class; ++r) {
                const std::size_t subject = plan.subject_base + (round_robin++ % plan.subjects);
                const Vec3& base = subject_offset[subject];
                const std::size_t n_frames =
                    cfg.min_frames + (cfg.max_frames > cfg.min_frames
                                          ? rng.index(cfg.max_frames - cfg.min_frames + 1)
                                          : 0);
                const double gamma = std::exp(rng.uniform(-1.0, 1.0) * cfg.speed_jitter);
                const double t0 = rng.uniform(0.0, 10.0);

                Sample sample;
                char id[32];
                std::snprintf(id, sizeof id, "seq_%05zu", serial++);
                sample.id = id;
                sample.label = c;
                sample.split = plan.split;
                sample.subject = "s" + std::to_string(subject);
                sample.skeleton.label = static_cast<int>(c);
                sample.skeleton.subject = sample.subject;

                for (std::size_t f = 0; f < n_frames; ++f) {
                    const double s = std::pow(static_cast<double>(f) / static_cast<double>(n_frames - 1), gamma);
                    auto pose = rest;
                    const Vec3 off = trajectory_offset(cls.trajectory, s);
                    Vec3 hand{cls.center[0] + off[0], cls.center[1] + off[1], cls.center[2] + off[2]};
                    pose[index_of(JointId::RHand)] = hand;
                    const Vec3& sh = pose[index_of(JointId::RShoulder)];
                    pose[index_of(JointId::RElbow)] = {0.5 * (sh[0] + hand[0]) + 0.05, 0.5 * (sh[1] + hand[1]) - 0.10,
                                                       0.5 * (sh[2] + hand[2])};
                    if (cls.anchor && *cls.anchor != JointId::RHand && *cls.anchor != JointId::LHand)
                        pose[index_of(*cls.anchor)] = {cls.center[0] - cls.anchor_offset[0],
                                                       cls.center[1] - cls.anchor_offset[1],
                                                       cls.center[2] - cls.anchor_offset[2]};

                    SkeletonFrame frame(t0 + static_cast<double>(f) / cfg.fps);
                    for (std::size_t j = 0; j < kJointCount; ++j) {
                        Joint3D joint{base[0] + pose[j][0], base[1] + pose[j][1], base[2] + pose[j][2], 1.0};
                        if (cfg.noise > 0.0) {
                            joint.x += rng.normal(0.0, cfg.noise);
                            joint.y += rng.normal(0.0, cfg.noise);
                            joint.z += rng.normal(0.0, cfg.noise);
                        }
                        frame.set(kAllJoints[j], joint);
                    }
                    sample.skeleton.frames.push_back(frame);

                    HandPair hands;
                    auto jittered = [&](const std::string& posture, HandSide side) {
                        const double scale = 1.0 + rng.uniform(-1.0, 1.0) * cfg.posture_jitter;
                        const double rot = rng.uniform(-1.0, 1.0) * cfg.posture_jitter * 2.0;
                        return HandRegion::from_mask(render_posture(posture, scale, rot), side);
                    };
                    hands.right = jittered(cls.posture, HandSide::Right);
                    if (cls.left_posture)
                        hands.left = jittered(*cls.left_posture, HandSide::Left);
                    sample.hands.push_back(std::move(hands));
                }
                corpus.samples.push_back(std::move(sample));
            }
        }
    }
    return corpus;
}

} // namespace signflow
