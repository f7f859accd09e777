#pragma once

#include <algorithm>
#include <cmath>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "signflow/error.hpp"
#include "signflow/matrix.hpp"
#include "signflow/skeleton.hpp"

namespace signflow {

/// Hand-centred gesture descriptors. HD variants describe the hands relative
/// to the torso only; RBPD variants relate each hand to all 11 upper-body
/// joints. The -T forms pair the hands at t with the other joints at t+1.
enum class DescriptorVariant { HD, HD_T, RBPD, RBPD_T };

inline constexpr std::size_t kHdDim = 6;
inline constexpr std::size_t kRbpdDim = 2 * kUpperBodyCount * 3;
static_assert(kRbpdDim == 66);

inline constexpr std::size_t descriptor_dim(DescriptorVariant v) {
    return (v == DescriptorVariant::HD || v == DescriptorVariant::HD_T) ? kHdDim : kRbpdDim;
}

inline constexpr bool is_time_extended(DescriptorVariant v) {
    return v == DescriptorVariant::HD_T || v == DescriptorVariant::RBPD_T;
}

inline std::string_view to_string(DescriptorVariant v) {
    switch (v) {
    case DescriptorVariant::HD: return "hd";
    case DescriptorVariant::HD_T: return "hd-t";
    case DescriptorVariant::RBPD: return "rbpd";
    case DescriptorVariant::RBPD_T: return "rbpd-t";
    }
    return "?";
}

inline DescriptorVariant parse_descriptor_variant(std::string_view name) {
    for (auto v : {DescriptorVariant::HD, DescriptorVariant::HD_T, DescriptorVariant::RBPD,
                   DescriptorVariant::RBPD_T})
        if (to_string(v) == name)
            return v;
    throw Error(ErrorCode::InvalidArgument, "unknown descriptor variant '" + std::string(name) + "'");
}

struct FrameDescriptor {
    Vector values;
    DescriptorVariant variant = DescriptorVariant::RBPD;
    std::size_t frame_index = 0;
};

namespace detail {

inline void append_delta(Vector& out, const Joint3D& to, const Joint3D& from) {
    out.push_back(to.x - from.x);
    out.push_back(to.y - from.y);
    out.push_back(to.z - from.z);
}

// [RBPD_right, RBPD_left]: for each hand, joint(others_frame) - hand(hand_frame)
// over all upper-body joints in declaration order.
inline Vector relative_body_parts(const SkeletonFrame& hand_frame, const SkeletonFrame& others_frame) {
    hand_frame.require(kUpperBody);
    others_frame.require(kUpperBody);
    Vector out;
    out.reserve(kRbpdDim);
    for (JointId hand : {JointId::RHand, JointId::LHand}) {
        const Joint3D& h = hand_frame.at(hand);
        for (JointId j : kUpperBody)
            append_delta(out, others_frame.at(j), h);
    }
    return out;
}

inline Vector hands_to_torso(const SkeletonFrame& hand_frame, const SkeletonFrame& torso_frame) {
    const Joint3D& torso = torso_frame.at(JointId::Torso);
    Vector out;
    out.reserve(kHdDim);
    append_delta(out, hand_frame.at(JointId::RHand), torso);
    append_delta(out, hand_frame.at(JointId::LHand), torso);
    return out;
}

} // namespace detail

inline FrameDescriptor compute_rbpd(const SkeletonFrame& frame) {
    return {detail::relative_body_parts(frame, frame), DescriptorVariant::RBPD, 0};
}

inline FrameDescriptor compute_rbpd_t(const SkeletonFrame& frame_t, const SkeletonFrame& frame_t1) {
    return {detail::relative_body_parts(frame_t, frame_t1), DescriptorVariant::RBPD_T, 0};
}

inline FrameDescriptor compute_hd(const SkeletonFrame& frame) {
    return {detail::hands_to_torso(frame, frame), DescriptorVariant::HD, 0};
}

inline FrameDescriptor compute_hd_t(const SkeletonFrame& frame_t, const SkeletonFrame& frame_t1) {
    return {detail::hands_to_torso(frame_t, frame_t1), DescriptorVariant::HD_T, 0};
}

/// n descriptors for spatial variants, n-1 for time-extended ones.
inline std::vector<FrameDescriptor> describe_sequence(const SkeletonSequence& seq, DescriptorVariant variant) {
    detail::require(seq.frames.size() >= 2, ErrorCode::EmptyInput, "sequence needs at least 2 frames");
    const auto& frames = seq.frames;
    std::vector<FrameDescriptor> out;
    const std::size_t n = is_time_extended(variant) ? frames.size() - 1 : frames.size();
    out.reserve(n);
    for (std::size_t t = 0; t < n; ++t) {
        FrameDescriptor d;
        switch (variant) {
        case DescriptorVariant::HD: d = compute_hd(frames[t]); break;
        case DescriptorVariant::HD_T: d = compute_hd_t(frames[t], frames[t + 1]); break;
        case DescriptorVariant::RBPD: d = compute_rbpd(frames[t]); break;
        case DescriptorVariant::RBPD_T: d = compute_rbpd_t(frames[t], frames[t + 1]); break;
        }
        d.frame_index = t;
        out.push_back(std::move(d));
    }
    return out;
}

inline constexpr double kZNormFloor = 1e-8;

struct ZNormStats {
    Vector mean;
    Vector stddev;

    std::size_t dim() const noexcept { return mean.size(); }

    static ZNormStats identity(std::size_t dim) { return {Vector(dim, 0.0), Vector(dim, 1.0)}; }

    bool operator==(const ZNormStats&) const = default;
};

/// Per-component mean and population standard deviation, floored at 1e-8.
inline ZNormStats fit_znorm(std::span<const Vector> rows) {
    detail::require(rows.size() >= 2, ErrorCode::EmptyInput, "z-normalization needs at least 2 vectors");
    const std::size_t dim = rows.front().size();
    ZNormStats stats{Vector(dim, 0.0), Vector(dim, 0.0)};
    for (const auto& r : rows) {
        detail::require(r.size() == dim, ErrorCode::DimensionMismatch, "z-normalization input has mixed dimensions");
        for (std::size_t c = 0; c < dim; ++c)
            stats.mean[c] += r[c];
    }
    const double n = static_cast<double>(rows.size());
    for (auto& m : stats.mean)
        m /= n;
    for (const auto& r : rows)
        for (std::size_t c = 0; c < dim; ++c) {
            const double d = r[c] - stats.mean[c];
            stats.stddev[c] += d * d;
        }
    for (auto& s : stats.stddev)
        s = std::max(std::sqrt(s / n), kZNormFloor);
    return stats;
}

inline ZNormStats fit_znorm(std::span<const FrameDescriptor> descriptors) {
    std::vector<Vector> rows;
    rows.reserve(descriptors.size());
    for (const auto& d : descriptors)
        rows.push_back(d.values);
    return fit_znorm(std::span<const Vector>(rows));
}

inline Vector apply_znorm(const ZNormStats& stats, std::span<const double> values) {
    detail::require(values.size() == stats.dim(), ErrorCode::DimensionMismatch,
                    "descriptor dimension " + std::to_string(values.size()) + " vs z-norm dimension " +
                        std::to_string(stats.dim()));
    Vector out(values.size());
    for (std::size_t c = 0; c < values.size(); ++c)
        out[c] = (values[c] - stats.mean[c]) / stats.stddev[c];
    return out;
}

inline FrameDescriptor apply_znorm(const ZNormStats& stats, const FrameDescriptor& d) {
    return {apply_znorm(stats, d.values), d.variant, d.frame_index};
}

} // namespace signflow
