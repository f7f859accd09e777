#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "signflow/error.hpp"

namespace signflow {

struct Joint3D {
    double x = 0.0;
    double y = 0.0;
    double z = 0.0;
    double confidence = 1.0;

    bool is_valid() const {
        return std::isfinite(x) && std::isfinite(y) && std::isfinite(z) && std::isfinite(confidence) &&
               confidence >= 0.0 && confidence <= 1.0;
    }

    bool operator==(const Joint3D&) const = default;
};

/// The 15-joint full-body skeleton produced by the depth-sensor tracker.
enum class JointId : std::uint8_t {
    Head,
    Neck,
    Torso,
    LShoulder,
    RShoulder,
    LElbow,
    RElbow,
    LHand,
    RHand,
    LHip,
    RHip,
    LKnee,
    RKnee,
    LFoot,
    RFoot,
};

inline constexpr std::size_t kJointCount = 15;
inline constexpr std::size_t kUpperBodyCount = 11;

inline constexpr std::array<JointId, kJointCount> kAllJoints = {
    JointId::Head,   JointId::Neck,   JointId::Torso, JointId::LShoulder, JointId::RShoulder,
    JointId::LElbow, JointId::RElbow, JointId::LHand, JointId::RHand,     JointId::LHip,
    JointId::RHip,   JointId::LKnee,  JointId::RKnee, JointId::LFoot,     JointId::RFoot,
};

/// Upper-body joints in declaration order: everything except knees and feet.
inline constexpr std::array<JointId, kUpperBodyCount> kUpperBody = {
    JointId::Head,   JointId::Neck,   JointId::Torso, JointId::LShoulder, JointId::RShoulder, JointId::LElbow,
    JointId::RElbow, JointId::LHand,  JointId::RHand, JointId::LHip,      JointId::RHip,
};

inline constexpr std::size_t index_of(JointId id) { return static_cast<std::size_t>(id); }

inline constexpr bool is_upper_body(JointId id) { return index_of(id) < kUpperBodyCount; }

inline constexpr std::array<std::string_view, kJointCount> kJointNames = {
    "Head",   "Neck",   "Torso", "LShoulder", "RShoulder", "LElbow", "RElbow", "LHand",
    "RHand",  "LHip",   "RHip",  "LKnee",     "RKnee",     "LFoot",  "RFoot",
};

inline std::string_view joint_name(JointId id) { return kJointNames[index_of(id)]; }

inline std::optional<JointId> parse_joint_name(std::string_view name) {
    for (std::size_t i = 0; i < kJointCount; ++i)
        if (kJointNames[i] == name)
            return static_cast<JointId>(i);
    return std::nullopt;
}

inline Error missing_joint(JointId id) {
    return Error(ErrorCode::MissingJoint, "MissingJoint(" + std::string(joint_name(id)) + ")");
}

/// One time step of tracked joints. Joints outside the frame's schema are
/// simply absent.
class SkeletonFrame {
public:
    SkeletonFrame() = default;
    explicit SkeletonFrame(double timestamp) : timestamp_(timestamp) {}

    double timestamp() const noexcept { return timestamp_; }
    void set_timestamp(double t) noexcept { timestamp_ = t; }

    bool has(JointId id) const noexcept { return joints_[index_of(id)].has_value(); }

    const Joint3D& at(JointId id) const {
        const auto& j = joints_[index_of(id)];
        if (!j)
            throw missing_joint(id);
        return *j;
    }

    const std::optional<Joint3D>& get(JointId id) const noexcept { return joints_[index_of(id)]; }

    SkeletonFrame& set(JointId id, const Joint3D& joint) {
        joints_[index_of(id)] = joint;
        return *this;
    }

    void erase(JointId id) noexcept { joints_[index_of(id)].reset(); }

    std::size_t joint_count() const noexcept {
        return static_cast<std::size_t>(std::count_if(joints_.begin(), joints_.end(),
                                                       [](const auto& j) { return j.has_value(); }));
    }

    /// Throws MissingJoint for the first absent member of `ids`.
    template <typename Range>
    void require(const Range& ids) const {
        for (JointId id : ids)
            if (!has(id))
                throw missing_joint(id);
    }

    bool operator==(const SkeletonFrame&) const = default;

private:
    double timestamp_ = 0.0;
    std::array<std::optional<Joint3D>, kJointCount> joints_{};
};

struct SkeletonSequence {
    std::vector<SkeletonFrame> frames;
    std::optional<int> label;
    std::optional<std::string> subject;

    std::size_t size() const noexcept { return frames.size(); }
};

/// Drops knees and feet. Requires all 11 upper-body joints; already-reduced
/// frames pass through unchanged.
inline SkeletonFrame select_upper_body(const SkeletonFrame& frame) {
    frame.require(kUpperBody);
    SkeletonFrame out(frame.timestamp());
    for (JointId id : kUpperBody)
        out.set(id, frame.at(id));
    return out;
}

enum class DefectKind {
    TooShort,
    NonMonotonicTime,
    NegativeTime,
    NonFiniteTime,
    InvalidJoint,
    InconsistentSchema,
};

inline std::string_view to_string(DefectKind kind) {
    switch (kind) {
    case DefectKind::TooShort: return "TooShort";
    case DefectKind::NonMonotonicTime: return "NonMonotonicTime";
    case DefectKind::NegativeTime: return "NegativeTime";
    case DefectKind::NonFiniteTime: return "NonFiniteTime";
    case DefectKind::InvalidJoint: return "InvalidJoint";
    case DefectKind::InconsistentSchema: return "InconsistentSchema";
    }
    return "Unknown";
}

struct Defect {
    DefectKind kind;
    std::size_t frame_index = 0;
    std::string detail;

    bool operator==(const Defect&) const = default;
};

/// Reports every violated sequence invariant. Never throws on data content.
inline std::vector<Defect> validate_sequence(const SkeletonSequence& seq) {
    std::vector<Defect> defects;
    if (seq.frames.size() < 2)
        defects.push_back({DefectKind::TooShort, 0, std::to_string(seq.frames.size()) + " frame(s)"});

    for (std::size_t f = 0; f < seq.frames.size(); ++f) {
        const auto& frame = seq.frames[f];
        const double t = frame.timestamp();
        if (!std::isfinite(t))
            defects.push_back({DefectKind::NonFiniteTime, f, {}});
        else if (t < 0.0)
            defects.push_back({DefectKind::NegativeTime, f, {}});
        if (f > 0 && !(t > seq.frames[f - 1].timestamp()))
            defects.push_back({DefectKind::NonMonotonicTime, f, {}});

        for (JointId id : kAllJoints) {
            const auto& j = frame.get(id);
            if (j && !j->is_valid())
                defects.push_back({DefectKind::InvalidJoint, f, std::string(joint_name(id))});
            if (f > 0 && frame.has(id) != seq.frames.front().has(id))
                defects.push_back({DefectKind::InconsistentSchema, f, std::string(joint_name(id))});
        }
    }
    return defects;
}

/// Holds the last valid value of a joint over frames where it is missing or
/// has zero (or non-finite) confidence. The first frame must carry every
/// joint in `required`.
template <typename Range>
std::vector<SkeletonFrame> forward_fill(std::vector<SkeletonFrame> frames, const Range& required) {
    auto usable = [](const std::optional<Joint3D>& j) {
        return j && std::isfinite(j->x) && std::isfinite(j->y) && std::isfinite(j->z) &&
               std::isfinite(j->confidence) && j->confidence > 0.0;
    };
    if (frames.empty())
        return frames;
    for (JointId id : required)
        if (!usable(frames.front().get(id)))
            throw Error(ErrorCode::MissingJoint, "first frame lacks a valid " + std::string(joint_name(id)) +
                                                     "; sequence cannot be repaired");
    for (std::size_t f = 1; f < frames.size(); ++f)
        for (JointId id : required)
            if (!usable(frames[f].get(id)))
                frames[f].set(id, frames[f - 1].at(id));
    return frames;
}

} // namespace signflow
