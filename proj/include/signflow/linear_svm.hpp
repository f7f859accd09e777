#pragma once

#include <cmath>
#include <cstdint>
#include <set>
#include <span>
#include <vector>

#include "signflow/error.hpp"
#include "signflow/matrix.hpp"
#include "signflow/random.hpp"

namespace signflow {

inline constexpr std::size_t kCrossValidationFolds = 3;

struct LinearSvmOptions {
    double cost = 1.0;
    std::size_t epochs = 200;
    std::uint64_t seed = 0;
};

/// Homogeneous multiclass linear model: one weight row per class, score = W x.
struct LinearMulticlassModel {
    Matrix weights;

    std::size_t n_classes() const noexcept { return weights.rows(); }
    std::size_t dim() const noexcept { return weights.cols(); }

    Vector scores(std::span<const double> x) const {
        detail::require(x.size() == dim(), ErrorCode::DimensionMismatch,
                        "input dimension " + std::to_string(x.size()) + " vs model dimension " +
                            std::to_string(dim()));
        Vector out(n_classes());
        for (std::size_t c = 0; c < n_classes(); ++c)
            out[c] = dot(weights.row(c), x);
        return out;
    }

    std::size_t predict(std::span<const double> x) const { return argmax(scores(x)); }
};

/// Crammer-Singer multiclass hinge loss minimized by stochastic subgradient
/// steps (Pegasos schedule) on
///   1/(2 C n) |W|^2 + 1/n sum_i max(0, 1 + max_{r != y_i} w_r.x_i - w_{y_i}.x_i).
/// Returns the average of the iterates from the second half of training.
inline LinearMulticlassModel train_linear_multiclass(std::span<const Vector> x, std::span<const std::size_t> y,
                                                     std::size_t n_classes, const LinearSvmOptions& options) {
    detail::require(!x.empty() && x.size() == y.size(), ErrorCode::InvalidArgument,
                    "training set is empty or labels do not match examples");
    detail::require(n_classes >= 2, ErrorCode::InvalidArgument, "need at least two classes");
    detail::require(options.cost > 0.0 && options.epochs >= 1, ErrorCode::InvalidArgument,
                    "cost must be positive and epochs at least 1");
    const std::size_t n = x.size();
    const std::size_t dim = x.front().size();
    for (std::size_t i = 0; i < n; ++i) {
        detail::require(x[i].size() == dim, ErrorCode::DimensionMismatch, "training examples have mixed dimensions");
        detail::require(y[i] < n_classes, ErrorCode::InvalidArgument, "label out of range");
    }

    const double lambda = 1.0 / (options.cost * static_cast<double>(n));
    const double radius = 1.0 / std::sqrt(lambda);
    Matrix w(n_classes, dim);
    Matrix avg(n_classes, dim);
    std::size_t averaged = 0;
    const std::size_t average_from = options.epochs / 2;

    Rng rng(options.seed);
    std::vector<std::size_t> order(n);
    for (std::size_t i = 0; i < n; ++i)
        order[i] = i;

    std::size_t t = 0;
    for (std::size_t epoch = 0; epoch < options.epochs; ++epoch) {
        rng.shuffle(order);
        for (std::size_t i : order) {
            ++t;
            const double eta = 1.0 / (lambda * static_cast<double>(t));
            const auto& xi = x[i];
            const std::size_t yi = y[i];

            std::size_t rival = n_classes;
            double rival_score = 0.0;
            for (std::size_t c = 0; c < n_classes; ++c) {
                if (c == yi)
                    continue;
                const double s = dot(w.row(c), xi);
                if (rival == n_classes || s > rival_score) {
                    rival = c;
                    rival_score = s;
                }
            }
            const bool violated = 1.0 + rival_score - dot(w.row(yi), xi) > 0.0;

            const double shrink = 1.0 - eta * lambda;
            for (double& v : w.data())
                v *= shrink;
            if (violated) {
                auto wy = w.row(yi);
                auto wr = w.row(rival);
                for (std::size_t c = 0; c < dim; ++c) {
                    wy[c] += eta * xi[c];
                    wr[c] -= eta * xi[c];
                }
            }
            double norm2 = 0.0;
            for (double v : w.data())
                norm2 += v * v;
            if (norm2 > radius * radius) {
                const double s = radius / std::sqrt(norm2);
                for (double& v : w.data())
                    v *= s;
            }
        }
        if (epoch >= average_from) {
            for (std::size_t j = 0; j < avg.data().size(); ++j)
                avg.data()[j] += w.data()[j];
            ++averaged;
        }
    }
    for (double& v : avg.data())
        v /= static_cast<double>(averaged);
    return {std::move(avg)};
}

inline double accuracy(const LinearMulticlassModel& model, std::span<const Vector> x,
                       std::span<const std::size_t> y) {
    if (x.empty())
        return 0.0;
    std::size_t hits = 0;
    for (std::size_t i = 0; i < x.size(); ++i)
        hits += model.predict(x[i]) == y[i];
    return static_cast<double>(hits) / static_cast<double>(x.size());
}

/// Mean held-out accuracy over `folds` seeded folds.
inline double cross_validate(std::span<const Vector> x, std::span<const std::size_t> y, std::size_t n_classes,
                             std::size_t folds, const LinearSvmOptions& options) {
    detail::require(folds >= 2, ErrorCode::InvalidArgument, "cross-validation needs at least 2 folds");
    const std::size_t n = x.size();
    if (n < folds)
        return 0.0;
    std::vector<std::size_t> order(n);
    for (std::size_t i = 0; i < n; ++i)
        order[i] = i;
    Rng rng(options.seed ^ 0xc2b2ae3d27d4eb4fULL);
    rng.shuffle(order);

    double total = 0.0;
    for (std::size_t f = 0; f < folds; ++f) {
        std::vector<Vector> train_x, test_x;
        std::vector<std::size_t> train_y, test_y;
        for (std::size_t p = 0; p < n; ++p) {
            const std::size_t i = order[p];
            if (p % folds == f) {
                test_x.push_back(x[i]);
                test_y.push_back(y[i]);
            } else {
                train_x.push_back(x[i]);
                train_y.push_back(y[i]);
            }
        }
        const auto model = train_linear_multiclass(train_x, train_y, n_classes, options);
        total += accuracy(model, test_x, test_y);
    }
    return total / static_cast<double>(folds);
}

namespace detail {

inline std::size_t distinct_labels(std::span<const std::size_t> y) {
    return std::set<std::size_t>(y.begin(), y.end()).size();
}

} // namespace detail
} // namespace signflow
