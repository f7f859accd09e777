#pragma once

#include <algorithm>
#include <cmath>
#include <numbers>
#include <optional>
#include <span>
#include <vector>

#include "signflow/error.hpp"
#include "signflow/hmm.hpp"
#include "signflow/linear_svm.hpp"
#include "signflow/matrix.hpp"

namespace signflow {

inline constexpr double kFusionCost = 0.7641;
inline constexpr double kDefaultNegInfClamp = -1e3;
inline constexpr double kBandwidthFloor = 1e-6;

/// [R_posture | R_gesture] for one sequence.
struct CoupledResponse {
    Vector values;
    std::optional<std::size_t> true_class;

    std::size_t n_classes() const noexcept { return values.size() / 2; }
};

/// Concatenates both branch responses; non-finite gesture scores are clamped
/// to `neg_inf_clamp`.
inline CoupledResponse couple(std::span<const double> posture, const GestureResponse& gesture,
                              double neg_inf_clamp = kDefaultNegInfClamp) {
    detail::require(posture.size() == gesture.scores.size(), ErrorCode::DimensionMismatch,
                    "posture and gesture responses differ in class count");
    CoupledResponse r;
    r.values.reserve(2 * posture.size());
    for (double v : posture)
        r.values.push_back(v);
    for (double v : gesture.scores)
        r.values.push_back(std::isfinite(v) ? std::max(v, neg_inf_clamp) : neg_inf_clamp);
    return r;
}

/// Optional per-branch standardization applied before either fusion rule:
/// each half is shifted and scaled by statistics of the fusion training set.
struct BranchScaling {
    bool enabled = false;
    double posture_mean = 0.0, posture_scale = 1.0;
    double gesture_mean = 0.0, gesture_scale = 1.0;

    Vector apply(std::span<const double> r) const {
        Vector out(r.begin(), r.end());
        if (!enabled)
            return out;
        const std::size_t c = r.size() / 2;
        for (std::size_t i = 0; i < c; ++i)
            out[i] = (out[i] - posture_mean) / posture_scale;
        for (std::size_t i = c; i < r.size(); ++i)
            out[i] = (out[i] - gesture_mean) / gesture_scale;
        return out;
    }

    static BranchScaling fit(std::span<const CoupledResponse> data) {
        BranchScaling s;
        s.enabled = true;
        auto stats = [&](std::size_t begin, double& mean, double& scale) {
            double sum = 0.0, sum2 = 0.0;
            std::size_t n = 0;
            for (const auto& r : data) {
                const std::size_t c = r.n_classes();
                for (std::size_t i = begin * c; i < (begin + 1) * c; ++i) {
                    sum += r.values[i];
                    sum2 += r.values[i] * r.values[i];
                    ++n;
                }
            }
            mean = n ? sum / double(n) : 0.0;
            const double var = n ? std::max(sum2 / double(n) - mean * mean, 0.0) : 0.0;
            scale = std::max(std::sqrt(var), 1e-12);
        };
        stats(0, s.posture_mean, s.posture_scale);
        stats(1, s.gesture_mean, s.gesture_scale);
        return s;
    }
};

// --- linear rule -----------------------------------------------------------

struct LinearFusionOptions {
    double cost = kFusionCost;
    std::size_t folds = kCrossValidationFolds;
    std::size_t epochs = 200;
    std::uint64_t seed = 0;
    bool standardize = false;
};

struct LinearFusionModel {
    LinearMulticlassModel omega;
    BranchScaling scaling;
    LinearFusionOptions options;
    double cv_accuracy = 0.0;
};

inline LinearFusionModel train_linear_fusion(std::span<const CoupledResponse> data,
                                             std::span<const std::size_t> labels, std::size_t n_classes,
                                             const LinearFusionOptions& options = {}) {
    detail::require(data.size() == labels.size() && !data.empty(), ErrorCode::InvalidArgument,
                    "fusion training needs one label per coupled response");
    detail::require(detail::distinct_labels(labels) >= 2, ErrorCode::InvalidArgument,
                    "fusion training needs at least two classes");
    LinearFusionModel model;
    model.options = options;
    if (options.standardize)
        model.scaling = BranchScaling::fit(data);
    std::vector<Vector> x;
    x.reserve(data.size());
    for (const auto& r : data) {
        detail::require(r.values.size() == 2 * n_classes, ErrorCode::DimensionMismatch,
                        "coupled response length must be 2C");
        x.push_back(model.scaling.apply(r.values));
    }
    const LinearSvmOptions svm{options.cost, options.epochs, options.seed};
    model.omega = train_linear_multiclass(x, labels, n_classes, svm);
    model.cv_accuracy = options.folds >= 2 ? cross_validate(x, labels, n_classes, options.folds, svm) : 0.0;
    return model;
}

/// argmax_k omega_k . r, ties to the lowest class id.
inline std::size_t predict_linear(const LinearFusionModel& model, const CoupledResponse& r) {
    return model.omega.predict(model.scaling.apply(r.values));
}

// --- probabilistic rule ----------------------------------------------------

struct KdeClass {
    std::vector<Vector> points;
    Vector bandwidth;
    double prior = 0.0;
};

/// Per-class product-Gaussian kernel density estimates with class-frequency
/// priors; prediction is the MAP class.
struct KdeFusionModel {
    std::vector<KdeClass> classes;
    BranchScaling scaling;

    std::size_t n_classes() const noexcept { return classes.size(); }
    std::size_t dim() const noexcept { return classes.empty() ? 0 : classes.front().bandwidth.size(); }
};

/// Silverman's rule of thumb per dimension: sigma * (4 / ((d + 2) n))^(1/(d+4)),
/// floored at kBandwidthFloor.
inline Vector silverman_bandwidth(std::span<const Vector> points) {
    const std::size_t n = points.size();
    const std::size_t d = points.front().size();
    const double factor = std::pow(4.0 / ((double(d) + 2.0) * double(n)), 1.0 / (double(d) + 4.0));
    Vector h(d, kBandwidthFloor);
    for (std::size_t j = 0; j < d; ++j) {
        double mean = 0.0;
        for (const auto& p : points)
            mean += p[j];
        mean /= double(n);
        double var = 0.0;
        for (const auto& p : points)
            var += (p[j] - mean) * (p[j] - mean);
        var /= double(n);
        h[j] = std::max(std::sqrt(var) * factor, kBandwidthFloor);
    }
    return h;
}

inline KdeFusionModel train_kde_fusion(std::span<const CoupledResponse> data, std::span<const std::size_t> labels,
                                       std::size_t n_classes, bool standardize = false) {
    detail::require(data.size() == labels.size() && !data.empty(), ErrorCode::InvalidArgument,
                    "fusion training needs one label per coupled response");
    detail::require(n_classes >= 1, ErrorCode::InvalidArgument, "need at least one class");
    KdeFusionModel model;
    if (standardize)
        model.scaling = BranchScaling::fit(data);
    model.classes.resize(n_classes);
    const std::size_t dim = data.front().values.size();
    for (std::size_t i = 0; i < data.size(); ++i) {
        detail::require(labels[i] < n_classes, ErrorCode::InvalidArgument, "label out of range");
        detail::require(data[i].values.size() == dim, ErrorCode::DimensionMismatch,
                        "coupled responses have mixed lengths");
        model.classes[labels[i]].points.push_back(model.scaling.apply(data[i].values));
    }
    for (std::size_t c = 0; c < n_classes; ++c) {
        auto& cls = model.classes[c];
        detail::require(!cls.points.empty(), ErrorCode::EmptyInput,
                        "class " + std::to_string(c) + " has no fusion training examples");
        cls.bandwidth = silverman_bandwidth(cls.points);
        cls.prior = double(cls.points.size()) / double(data.size());
    }
    return model;
}

/// log p(r | c) for every class, using log-sum-exp over kernel centres.
inline Vector kde_log_likelihoods(const KdeFusionModel& model, std::span<const double> raw) {
    detail::require(raw.size() == model.dim(), ErrorCode::DimensionMismatch,
                    "query length does not match the fusion model");
    const Vector r = model.scaling.apply(raw);
    const double half_log_2pi = 0.5 * std::log(2.0 * std::numbers::pi);
    Vector out;
    out.reserve(model.n_classes());
    std::vector<double> terms;
    for (const auto& cls : model.classes) {
        double norm = 0.0;
        for (double h : cls.bandwidth)
            norm += std::log(h) + half_log_2pi;
        terms.clear();
        for (const auto& p : cls.points) {
            double e = 0.0;
            for (std::size_t j = 0; j < r.size(); ++j) {
                const double z = (r[j] - p[j]) / cls.bandwidth[j];
                e -= 0.5 * z * z;
            }
            terms.push_back(e - norm);
        }
        const double peak = *std::max_element(terms.begin(), terms.end());
        double sum = 0.0;
        for (double t : terms)
            sum += std::exp(t - peak);
        out.push_back(peak + std::log(sum) - std::log(double(cls.points.size())));
    }
    return out;
}

/// argmax_c log p(r | c) + log p(c), ties to the lowest class id.
inline std::size_t predict_kde(const KdeFusionModel& model, const CoupledResponse& r) {
    Vector score = kde_log_likelihoods(model, r.values);
    for (std::size_t c = 0; c < score.size(); ++c)
        score[c] += std::log(model.classes[c].prior);
    return argmax(score);
}

} // namespace signflow
