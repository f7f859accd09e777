#pragma once

#include <array>
#include <cmath>
#include <limits>
#include <numbers>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "signflow/codebook.hpp"
#include "signflow/error.hpp"
#include "signflow/linear_svm.hpp"
#include "signflow/mask.hpp"
#include "signflow/matrix.hpp"
#include "signflow/skeleton.hpp"

namespace signflow {

inline constexpr int kPatchSize = 65;
inline constexpr std::size_t kContourPoints = 20;
inline constexpr double kPostureCost = 0.8352;

// --- segmentation ----------------------------------------------------------

struct CameraIntrinsics {
    double fx = 0.0;
    double fy = 0.0;
    double cx = 0.0;
    double cy = 0.0;

    bool valid() const {
        return std::isfinite(fx) && std::isfinite(fy) && std::isfinite(cx) && std::isfinite(cy) && fx > 0.0 &&
               fy > 0.0;
    }
};

struct Point3 {
    double x = 0.0, y = 0.0, z = 0.0;
};

/// Pinhole back-projection; image v grows downward, world y grows upward.
inline Point3 back_project(double u, double v, double depth, const CameraIntrinsics& k) {
    return {(u - k.cx) * depth / k.fx, (k.cy - v) * depth / k.fy, depth};
}

/// Inverse of back_project: returns (u, v) for a point in front of the camera.
inline std::array<double, 2> project(const Point3& p, const CameraIntrinsics& k) {
    return {k.cx + k.fx * p.x / p.z, k.cy - k.fy * p.y / p.z};
}

struct DepthFrame {
    int width = 0;
    int height = 0;
    std::vector<double> depth; ///< metres, row-major, 0 = invalid
    CameraIntrinsics intrinsics;

    double at(int x, int y) const { return depth[std::size_t(y) * width + x]; }
};

enum class HandSide { Left, Right };

inline JointId hand_joint(HandSide side) { return side == HandSide::Left ? JointId::LHand : JointId::RHand; }
inline JointId elbow_joint(HandSide side) { return side == HandSide::Left ? JointId::LElbow : JointId::RElbow; }

struct HandRegion {
    BinaryMask mask{kPatchSize, kPatchSize};
    HandSide side = HandSide::Right;
    bool present = false;

    static HandRegion absent(HandSide side) { return {BinaryMask(kPatchSize, kPatchSize), side, false}; }

    static HandRegion from_mask(BinaryMask mask, HandSide side) {
        detail::require(mask.width() == kPatchSize && mask.height() == kPatchSize, ErrorCode::DimensionMismatch,
                        "hand mask must be 65x65");
        const bool present = mask.any();
        return {std::move(mask), side, present};
    }
};

/// Per-frame pair of hand regions.
struct HandPair {
    HandRegion right = HandRegion::absent(HandSide::Right);
    HandRegion left = HandRegion::absent(HandSide::Left);
};

/// Extracts the 65x65 binary patch of one hand from a depth frame.
///
/// Valid pixels are back-projected and kept when they lie within half the
/// hand-elbow distance of the hand joint and their nearest upper-body joint
/// is that hand. The largest 8-connected pixel region survives and its
/// bounding box is resampled to the patch.
inline HandRegion segment_hand(const DepthFrame& depth, const SkeletonFrame& skel, HandSide side) {
    detail::require(depth.intrinsics.valid(), ErrorCode::InvalidArgument, "invalid camera intrinsics");
    detail::require(depth.width >= 1 && depth.height >= 1 &&
                        depth.depth.size() == std::size_t(depth.width) * depth.height,
                    ErrorCode::DimensionMismatch, "depth buffer does not match frame size");
    const JointId hand_id = hand_joint(side);
    skel.require(kUpperBody);
    const Joint3D& hand = skel.at(hand_id);
    const Joint3D& elbow = skel.at(elbow_joint(side));
    const double radius = 0.5 * std::sqrt((hand.x - elbow.x) * (hand.x - elbow.x) +
                                          (hand.y - elbow.y) * (hand.y - elbow.y) +
                                          (hand.z - elbow.z) * (hand.z - elbow.z));

    BinaryMask kept(depth.width, depth.height);
    for (int v = 0; v < depth.height; ++v)
        for (int u = 0; u < depth.width; ++u) {
            const double d = depth.at(u, v);
            if (!(d > 0.0) || !std::isfinite(d))
                continue;
            const Point3 p = back_project(u, v, d, depth.intrinsics);
            auto dist2 = [&](const Joint3D& j) {
                return (p.x - j.x) * (p.x - j.x) + (p.y - j.y) * (p.y - j.y) + (p.z - j.z) * (p.z - j.z);
            };
            if (dist2(hand) > radius * radius)
                continue;
            JointId nearest = kUpperBody.front();
            double best = std::numeric_limits<double>::infinity();
            for (JointId j : kUpperBody) {
                const double dj = dist2(skel.at(j));
                if (dj < best) {
                    best = dj;
                    nearest = j;
                }
            }
            if (nearest == hand_id)
                kept.set(u, v);
        }

    const BinaryMask blob = largest_component(kept);
    if (!blob.any())
        return HandRegion::absent(side);
    // Downsampling can split thin parts; keep the single largest piece.
    BinaryMask patch = largest_component(resample_box(blob, bounding_box(blob), kPatchSize));
    if (!patch.any())
        return HandRegion::absent(side);
    return {std::move(patch), side, true};
}

// --- contour and shape context ---------------------------------------------

struct Point2 {
    double x = 0.0, y = 0.0;
};

/// `m` points at equal arc-length spacing along the traced outer boundary,
/// starting at the topmost-then-leftmost boundary pixel.
inline std::vector<Point2> sample_contour(const HandRegion& region, std::size_t m = kContourPoints) {
    detail::require(region.present, ErrorCode::InvalidArgument, "hand region is absent");
    detail::require(m >= 3, ErrorCode::InvalidArgument, "need at least 3 contour samples");
    const auto boundary = trace_boundary(region.mask);
    const std::size_t n = boundary.size();
    if (n < 2)
        throw Error(ErrorCode::DegenerateContour, "contour has " + std::to_string(n) + " pixel(s)");

    std::vector<double> cumulative(n + 1, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
        const Pixel& a = boundary[i];
        const Pixel& b = boundary[(i + 1) % n];
        cumulative[i + 1] = cumulative[i] + std::hypot(double(b.x - a.x), double(b.y - a.y));
    }
    const double perimeter = cumulative[n];

    std::vector<Point2> points;
    points.reserve(m);
    std::size_t seg = 0;
    for (std::size_t i = 0; i < m; ++i) {
        const double s = perimeter * static_cast<double>(i) / static_cast<double>(m);
        while (seg + 1 < n && cumulative[seg + 1] <= s)
            ++seg;
        const Pixel& a = boundary[seg];
        const Pixel& b = boundary[(seg + 1) % n];
        const double len = cumulative[seg + 1] - cumulative[seg];
        const double f = len > 0.0 ? (s - cumulative[seg]) / len : 0.0;
        points.push_back({a.x + f * (b.x - a.x), a.y + f * (b.y - a.y)});
    }
    return points;
}

inline constexpr std::size_t kAngularBins = 12;
inline constexpr std::size_t kRadialRings = 4; // outside the merged inner disc
inline constexpr std::size_t kShapeContextBins = kAngularBins * kRadialRings + 1;
inline constexpr double kInnerRadius = 6.0;
inline constexpr double kOuterRadius = 32.0;
static_assert(kShapeContextBins == 49);

using ShapeContextDescriptor = std::array<double, kShapeContextBins>;

/// Bin of an offset in the log-polar mask: 0 is the merged disc r < 6,
/// then 12 angle bins per geometric ring up to r = 32. Empty beyond that.
inline std::optional<std::size_t> shape_context_bin(double dx, double dy) {
    const double r = std::hypot(dx, dy);
    if (r < kInnerRadius)
        return 0;
    if (!(r < kOuterRadius))
        return std::nullopt;
    double theta = std::atan2(dy, dx);
    if (theta < 0.0)
        theta += 2.0 * std::numbers::pi;
    auto angle = static_cast<std::size_t>(theta / (2.0 * std::numbers::pi / kAngularBins));
    angle = std::min(angle, kAngularBins - 1);
    auto ring = static_cast<std::size_t>(std::log(r / kInnerRadius) / std::log(kOuterRadius / kInnerRadius) *
                                         static_cast<double>(kRadialRings));
    ring = std::min(ring, kRadialRings - 1);
    return 1 + ring * kAngularBins + angle;
}

/// Raw bin counts around points[ref] over the other points.
inline ShapeContextDescriptor shape_context_counts(std::span<const Point2> points, std::size_t ref) {
    detail::require(points.size() >= 2, ErrorCode::InvalidArgument, "shape context needs at least 2 points");
    detail::require(ref < points.size(), ErrorCode::InvalidArgument, "reference index out of range");
    ShapeContextDescriptor counts{};
    for (std::size_t i = 0; i < points.size(); ++i) {
        if (i == ref)
            continue;
        if (auto bin = shape_context_bin(points[i].x - points[ref].x, points[i].y - points[ref].y))
            counts[*bin] += 1.0;
    }
    return counts;
}

/// L1-normalized log-polar histogram; all-zero when nothing was binned.
inline ShapeContextDescriptor shape_context(std::span<const Point2> points, std::size_t ref) {
    auto hist = shape_context_counts(points, ref);
    double total = 0.0;
    for (double v : hist)
        total += v;
    if (total > 0.0)
        for (double& v : hist)
            v /= total;
    return hist;
}

/// The shape-context descriptors of every sampled contour point; empty for
/// an absent or degenerate region.
inline std::vector<Vector> region_descriptors(const HandRegion& region, std::size_t m = kContourPoints) {
    std::vector<Vector> out;
    if (!region.present)
        return out;
    std::vector<Point2> points;
    try {
        points = sample_contour(region, m);
    } catch (const Error& e) {
        if (e.code() == ErrorCode::DegenerateContour)
            return out;
        throw;
    }
    out.reserve(points.size());
    for (std::size_t i = 0; i < points.size(); ++i) {
        const auto sc = shape_context(points, i);
        out.emplace_back(sc.begin(), sc.end());
    }
    return out;
}

// --- bag of words ----------------------------------------------------------

/// [right | left] word histograms of one video, each half L1-normalized or zero.
struct PostureBoW {
    Vector histogram;
    std::string video_id;
};

inline PostureBoW encode_video_bow(std::span<const HandPair> frames, const Codebook& posture_cb,
                                   std::string video_id = {}) {
    detail::require(!frames.empty(), ErrorCode::EmptyInput, "video has no frames");
    detail::require(posture_cb.dim() == kShapeContextBins, ErrorCode::DimensionMismatch,
                    "posture codebook must live in the 49-bin shape-context space");
    const std::size_t k = posture_cb.k();
    PostureBoW bow{Vector(2 * k, 0.0), std::move(video_id)};
    for (const auto& pair : frames) {
        for (const auto& [region, offset] : {std::pair{&pair.right, std::size_t{0}}, std::pair{&pair.left, k}})
            for (const auto& d : region_descriptors(*region))
                bow.histogram[offset + quantize(posture_cb, d)] += 1.0;
    }
    for (std::size_t offset : {std::size_t{0}, k}) {
        double total = 0.0;
        for (std::size_t i = 0; i < k; ++i)
            total += bow.histogram[offset + i];
        if (total > 0.0)
            for (std::size_t i = 0; i < k; ++i)
                bow.histogram[offset + i] /= total;
    }
    return bow;
}

// --- classifier ------------------------------------------------------------

struct PostureTrainOptions {
    double cost = kPostureCost;
    std::size_t folds = kCrossValidationFolds;
    std::size_t epochs = 200;
    std::uint64_t seed = 0;
};

struct PostureModel {
    LinearMulticlassModel linear;
    Codebook codebook;
    PostureTrainOptions options;
    double cv_accuracy = 0.0;
    double train_accuracy = 0.0;

    std::size_t n_classes() const noexcept { return linear.n_classes(); }
};

/// Linear Crammer-Singer model on the BoW histograms; the codebook is stored
/// alongside so the model can encode new videos.
inline PostureModel train_posture_classifier(std::span<const PostureBoW> bows, std::span<const std::size_t> labels,
                                             std::size_t n_classes, Codebook codebook,
                                             const PostureTrainOptions& options = {}) {
    detail::require(bows.size() == labels.size() && !bows.empty(), ErrorCode::InvalidArgument,
                    "posture training needs one label per BoW");
    detail::require(detail::distinct_labels(labels) >= 2, ErrorCode::InvalidArgument,
                    "posture training needs at least two classes");
    std::vector<Vector> x;
    x.reserve(bows.size());
    for (const auto& b : bows)
        x.push_back(b.histogram);
    const LinearSvmOptions svm{options.cost, options.epochs, options.seed};
    PostureModel model;
    model.linear = train_linear_multiclass(x, labels, n_classes, svm);
    model.codebook = std::move(codebook);
    model.options = options;
    model.cv_accuracy = options.folds >= 2 ? cross_validate(x, labels, n_classes, options.folds, svm) : 0.0;
    model.train_accuracy = accuracy(model.linear, x, labels);
    return model;
}

/// W p, one score per class.
inline Vector posture_response(const PostureModel& model, const PostureBoW& p) {
    return model.linear.scores(p.histogram);
}

} // namespace signflow
