#pragma once

#include <array>
#include <chrono>
#include <span>
#include <string_view>
#include <vector>

#include "signflow/error.hpp"

namespace signflow {

/// counts[true][predicted].
struct ConfusionMatrix {
    std::size_t n_classes = 0;
    std::vector<std::size_t> counts;

    explicit ConfusionMatrix(std::size_t c = 0) : n_classes(c), counts(c * c, 0) {}

    std::size_t& at(std::size_t truth, std::size_t pred) { return counts[truth * n_classes + pred]; }
    std::size_t at(std::size_t truth, std::size_t pred) const { return counts[truth * n_classes + pred]; }

    std::size_t total() const {
        std::size_t t = 0;
        for (auto c : counts)
            t += c;
        return t;
    }

    bool operator==(const ConfusionMatrix&) const = default;
};

inline ConfusionMatrix confusion(std::span<const std::size_t> preds, std::span<const std::size_t> labels,
                                 std::size_t n_classes) {
    detail::require(preds.size() == labels.size(), ErrorCode::DimensionMismatch,
                    "predictions and labels differ in length");
    ConfusionMatrix cm(n_classes);
    for (std::size_t i = 0; i < preds.size(); ++i) {
        detail::require(preds[i] < n_classes && labels[i] < n_classes, ErrorCode::InvalidArgument,
                        "class id out of range at item " + std::to_string(i));
        ++cm.at(labels[i], preds[i]);
    }
    return cm;
}

struct ClassMetrics {
    double precision = 0.0;
    double recall = 0.0;
    double fscore = 0.0;
};

struct MetricsReport {
    std::vector<ClassMetrics> per_class;
    double mean_precision = 0.0;
    double mean_recall = 0.0;
    double mean_fscore = 0.0;
    double accuracy = 0.0;
};

/// Per-class precision (diag/column), recall (diag/row), F = 2PR/(P+R), all
/// with 0/0 = 0, and their unweighted means.
inline MetricsReport precision_recall_fscore(const ConfusionMatrix& cm) {
    const std::size_t total = cm.total();
    detail::require(total > 0, ErrorCode::EmptyInput, "confusion matrix is empty");
    const std::size_t c = cm.n_classes;
    MetricsReport report;
    report.per_class.resize(c);
    std::size_t diag = 0;
    for (std::size_t k = 0; k < c; ++k) {
        std::size_t row = 0, col = 0;
        for (std::size_t j = 0; j < c; ++j) {
            row += cm.at(k, j);
            col += cm.at(j, k);
        }
        const double tp = double(cm.at(k, k));
        diag += cm.at(k, k);
        auto& m = report.per_class[k];
        m.precision = col ? tp / double(col) : 0.0;
        m.recall = row ? tp / double(row) : 0.0;
        m.fscore = (m.precision + m.recall) > 0.0 ? 2.0 * m.precision * m.recall / (m.precision + m.recall) : 0.0;
        report.mean_precision += m.precision;
        report.mean_recall += m.recall;
        report.mean_fscore += m.fscore;
    }
    report.mean_precision /= double(c);
    report.mean_recall /= double(c);
    report.mean_fscore /= double(c);
    report.accuracy = double(diag) / double(total);
    return report;
}

// --- timing ----------------------------------------------------------------

enum class Stage {
    PostureDescription,
    PostureClassification,
    GestureDescription,
    GestureClassification,
    CombinationDescription,
    CombinationClassification,
};

inline constexpr std::size_t kStageCount = 6;

inline constexpr std::array<std::string_view, kStageCount> kStageNames = {
    "postures/descr",    "postures/classif",    "gestures/descr",
    "gestures/classif",  "combination/descr",   "combination/classif",
};

/// Accumulated wall-clock seconds per inference stage.
struct StageTimings {
    std::array<double, kStageCount> seconds{};
    std::size_t sequences = 0;

    double& operator[](Stage s) { return seconds[static_cast<std::size_t>(s)]; }
    double operator[](Stage s) const { return seconds[static_cast<std::size_t>(s)]; }

    double total() const {
        double t = 0.0;
        for (double s : seconds)
            t += s;
        return t;
    }

    StageTimings& operator+=(const StageTimings& other) {
        for (std::size_t i = 0; i < kStageCount; ++i)
            seconds[i] += other.seconds[i];
        sequences += other.sequences;
        return *this;
    }
};

/// Adds the elapsed time of its scope to one stage.
class ScopedStage {
public:
    ScopedStage(StageTimings& timings, Stage stage)
        : timings_(timings), stage_(stage), start_(std::chrono::steady_clock::now()) {}
    ~ScopedStage() {
        timings_[stage_] += std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
    }
    ScopedStage(const ScopedStage&) = delete;
    ScopedStage& operator=(const ScopedStage&) = delete;

private:
    StageTimings& timings_;
    Stage stage_;
    std::chrono::steady_clock::time_point start_;
};

} // namespace signflow
