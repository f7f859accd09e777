#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "signflow/codebook.hpp"
#include "signflow/descriptors.hpp"
#include "signflow/error.hpp"
#include "signflow/eval.hpp"
#include "signflow/fusion.hpp"
#include "signflow/hmm.hpp"
#include "signflow/posture.hpp"
#include "signflow/synthetic.hpp"

namespace signflow {

enum class FusionRule { Linear, Kde, GestureOnly, PostureOnly };

inline std::string_view to_string(FusionRule r) {
    switch (r) {
    case FusionRule::Linear: return "linear";
    case FusionRule::Kde: return "kde";
    case FusionRule::GestureOnly: return "gesture-only";
    case FusionRule::PostureOnly: return "posture-only";
    }
    return "?";
}

inline FusionRule parse_fusion_rule(std::string_view s) {
    for (auto r : {FusionRule::Linear, FusionRule::Kde, FusionRule::GestureOnly, FusionRule::PostureOnly})
        if (to_string(r) == s)
            return r;
    throw Error(ErrorCode::InvalidArgument, "unknown fusion rule '" + std::string(s) + "'");
}

struct TrainConfig {
    DescriptorVariant variant = DescriptorVariant::RBPD_T;
    std::size_t gesture_k = kDefaultCodebookSize;
    std::size_t posture_k = kDefaultCodebookSize;
    std::size_t states = kDefaultStates;
    std::vector<std::size_t> states_per_class; ///< overrides `states` when non-empty
    std::size_t kmeans_max_iter = 100;
    std::size_t posture_max_samples = 20000;
    std::size_t hmm_max_iter = 50;
    double hmm_tol = 1e-4;
    double posture_cost = kPostureCost;
    double fusion_cost = kFusionCost;
    std::size_t folds = kCrossValidationFolds;
    std::size_t svm_epochs = 200;
    double neg_inf_clamp = kDefaultNegInfClamp;
    bool standardize = false;
    bool use_posture = true;
    FusionRule fusion = FusionRule::Kde;
    std::uint64_t seed = 0;
};

struct GestureBranch {
    DescriptorVariant variant = DescriptorVariant::RBPD_T;
    Codebook codebook;
    std::vector<DiscreteHMM> hmms;
    std::vector<TrainReport> reports;
};

inline constexpr int kBundleFormatVersion = 1;

struct ModelBundle {
    int format_version = kBundleFormatVersion;
    std::size_t n_classes = 0;
    std::vector<std::string> class_names;
    TrainConfig config;
    GestureBranch gesture;
    std::optional<PostureModel> posture;
    std::optional<LinearFusionModel> linear;
    std::optional<KdeFusionModel> kde;
};

namespace detail {

inline std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream) {
    std::uint64_t z = seed + 0x9e3779b97f4a7c15ULL * (stream + 1);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

inline std::size_t count_classes(std::span<const Sample> samples) {
    std::size_t c = 0;
    for (const auto& s : samples)
        c = std::max(c, s.label + 1);
    return c;
}

} // namespace detail

inline SymbolSequence gesture_symbols(const GestureBranch& branch, const Sample& sample) {
    return encode_sequence(branch.codebook, describe_sequence(sample.skeleton, branch.variant), sample.id);
}

inline GestureBranch train_gesture_branch(std::span<const Sample> train, std::size_t n_classes,
                                          const TrainConfig& cfg) {
    detail::require(!train.empty(), ErrorCode::EmptyInput, "no training sequences");
    GestureBranch branch;
    branch.variant = cfg.variant;

    std::vector<std::vector<FrameDescriptor>> described;
    described.reserve(train.size());
    std::vector<Vector> pooled;
    for (const auto& s : train) {
        described.push_back(describe_sequence(s.skeleton, cfg.variant));
        for (const auto& d : described.back())
            pooled.push_back(d.values);
    }
    branch.codebook = fit_codebook(pooled, cfg.gesture_k, detail::derive_seed(cfg.seed, 1), cfg.kmeans_max_iter,
                                   cfg.variant);

    std::vector<std::vector<SymbolSequence>> per_class(n_classes);
    for (std::size_t i = 0; i < train.size(); ++i)
        per_class[train[i].label].push_back(encode_sequence(branch.codebook, described[i], train[i].id));

    const BaumWelchOptions bw{cfg.hmm_max_iter, cfg.hmm_tol, kProbabilityFloor};
    for (std::size_t c = 0; c < n_classes; ++c) {
        detail::require(!per_class[c].empty(), ErrorCode::EmptyInput,
                        "class " + std::to_string(c) + " has no training sequences");
        const std::size_t states = c < cfg.states_per_class.size() ? cfg.states_per_class[c] : cfg.states;
        auto result = baum_welch(init_left_right(states, branch.codebook.k()), per_class[c], bw);
        branch.hmms.push_back(std::move(result.model));
        branch.reports.push_back(std::move(result.report));
    }
    return branch;
}

inline PostureBoW posture_bow(const Codebook& cb, const Sample& sample) {
    if (sample.hands.empty())
        return {Vector(2 * cb.k(), 0.0), sample.id};
    return encode_video_bow(sample.hands, cb, sample.id);
}

inline PostureModel train_posture_branch(std::span<const Sample> train, std::size_t n_classes,
                                         const TrainConfig& cfg) {
    std::vector<Vector> pooled;
    for (const auto& s : train)
        for (const auto& pair : s.hands)
            for (const auto* region : {&pair.right, &pair.left})
                for (auto& d : region_descriptors(*region))
                    pooled.push_back(std::move(d));
    detail::require(!pooled.empty(), ErrorCode::EmptyInput, "no hand postures in the training split");
    Codebook cb = fit_codebook(pooled, cfg.posture_k, detail::derive_seed(cfg.seed, 2), cfg.kmeans_max_iter,
                               std::nullopt, false, cfg.posture_max_samples);

    std::vector<PostureBoW> bows;
    std::vector<std::size_t> labels;
    for (const auto& s : train) {
        bows.push_back(posture_bow(cb, s));
        labels.push_back(s.label);
    }
    PostureTrainOptions opts{cfg.posture_cost, cfg.folds, cfg.svm_epochs, detail::derive_seed(cfg.seed, 3)};
    return train_posture_classifier(bows, labels, n_classes, std::move(cb), opts);
}

struct Inference {
    Vector posture;          ///< empty without a posture branch
    GestureResponse gesture;
    std::optional<CoupledResponse> coupled;
    std::size_t predicted = 0;
};

/// Runs both branches and the requested decision rule, charging each step to
/// its stage in `timings`.
inline Inference infer(const ModelBundle& bundle, const Sample& sample, FusionRule rule,
                       StageTimings* timings = nullptr) {
    StageTimings local;
    StageTimings& t = timings ? *timings : local;
    Inference out;

    if (bundle.posture) {
        PostureBoW bow;
        {
            ScopedStage s(t, Stage::PostureDescription);
            bow = posture_bow(bundle.posture->codebook, sample);
        }
        ScopedStage s(t, Stage::PostureClassification);
        out.posture = posture_response(*bundle.posture, bow);
    }

    SymbolSequence symbols;
    {
        ScopedStage s(t, Stage::GestureDescription);
        symbols = gesture_symbols(bundle.gesture, sample);
    }
    {
        ScopedStage s(t, Stage::GestureClassification);
        out.gesture = classify_gesture(bundle.gesture.hmms, symbols);
    }

    if (bundle.posture) {
        ScopedStage s(t, Stage::CombinationDescription);
        out.coupled = couple(out.posture, out.gesture, bundle.config.neg_inf_clamp);
    }

    {
        ScopedStage s(t, Stage::CombinationClassification);
        switch (rule) {
        case FusionRule::GestureOnly:
            out.predicted = out.gesture.best;
            break;
        case FusionRule::PostureOnly:
            detail::require(bundle.posture.has_value(), ErrorCode::InvalidArgument, "bundle has no posture branch");
            out.predicted = argmax(out.posture);
            break;
        case FusionRule::Linear:
            detail::require(bundle.linear && out.coupled, ErrorCode::InvalidArgument, "bundle has no linear fusion model");
            out.predicted = predict_linear(*bundle.linear, *out.coupled);
            break;
        case FusionRule::Kde:
            detail::require(bundle.kde && out.coupled, ErrorCode::InvalidArgument, "bundle has no KDE fusion model");
            out.predicted = predict_kde(*bundle.kde, *out.coupled);
            break;
        }
    }
    ++t.sequences;
    return out;
}

/// Gesture and posture branches from the training split; fusion models from
/// the validation split.
inline ModelBundle train_bundle(std::span<const Sample> samples, std::vector<std::string> class_names,
                                const TrainConfig& cfg) {
    std::vector<Sample> train, validation;
    for (const auto& s : samples) {
        if (s.split == Split::Train)
            train.push_back(s);
        else if (s.split == Split::Validation)
            validation.push_back(s);
    }
    detail::require(!train.empty(), ErrorCode::EmptyInput, "training split is empty");

    ModelBundle bundle;
    bundle.config = cfg;
    bundle.n_classes = std::max(detail::count_classes(samples), class_names.size());
    bundle.class_names = std::move(class_names);
    for (std::size_t c = bundle.class_names.size(); c < bundle.n_classes; ++c)
        bundle.class_names.push_back("class" + std::to_string(c));

    bundle.gesture = train_gesture_branch(train, bundle.n_classes, cfg);

    bool have_hands = false;
    for (const auto& s : train)
        have_hands |= !s.hands.empty();
    if (cfg.use_posture && have_hands)
        bundle.posture = train_posture_branch(train, bundle.n_classes, cfg);
    bundle.config.use_posture = bundle.posture.has_value();

    if (bundle.posture) {
        detail::require(!validation.empty(), ErrorCode::EmptyInput,
                        "fusion needs a validation split disjoint from training");
        std::vector<CoupledResponse> coupled;
        std::vector<std::size_t> labels;
        for (const auto& s : validation) {
            auto inf = infer(bundle, s, FusionRule::GestureOnly);
            inf.coupled->true_class = s.label;
            coupled.push_back(std::move(*inf.coupled));
            labels.push_back(s.label);
        }
        LinearFusionOptions lin{cfg.fusion_cost, cfg.folds, cfg.svm_epochs, detail::derive_seed(cfg.seed, 4),
                                cfg.standardize};
        bundle.linear = train_linear_fusion(coupled, labels, bundle.n_classes, lin);
        bundle.kde = train_kde_fusion(coupled, labels, bundle.n_classes, cfg.standardize);
    } else if (bundle.config.fusion != FusionRule::GestureOnly) {
        bundle.config.fusion = FusionRule::GestureOnly;
    }
    return bundle;
}

struct EvaluationResult {
    std::vector<std::string> ids;
    std::vector<std::size_t> labels;
    std::vector<std::size_t> predictions;
    ConfusionMatrix confusion;
    MetricsReport metrics;
    StageTimings timings;
};

inline EvaluationResult evaluate(const ModelBundle& bundle, std::span<const Sample> samples, FusionRule rule) {
    EvaluationResult r;
    for (const auto& s : samples) {
        const auto inf = infer(bundle, s, rule, &r.timings);
        r.ids.push_back(s.id);
        r.labels.push_back(s.label);
        r.predictions.push_back(inf.predicted);
    }
    r.confusion = confusion(r.predictions, r.labels, bundle.n_classes);
    r.metrics = precision_recall_fscore(r.confusion);
    return r;
}

/// Picks a shared HMM state count from `candidates` by gesture-only
/// validation accuracy (ties to the smaller count).
inline std::size_t select_state_count(std::span<const Sample> samples, const TrainConfig& cfg,
                                      std::span<const std::size_t> candidates) {
    std::vector<Sample> train, validation;
    for (const auto& s : samples) {
        if (s.split == Split::Train)
            train.push_back(s);
        else if (s.split == Split::Validation)
            validation.push_back(s);
    }
    detail::require(!validation.empty() && !candidates.empty(), ErrorCode::EmptyInput,
                    "state sweep needs validation data and candidates");
    const std::size_t n_classes = detail::count_classes(samples);
    std::size_t best = candidates.front();
    double best_acc = -1.0;
    for (std::size_t n : candidates) {
        TrainConfig c = cfg;
        c.states = n;
        c.states_per_class.clear();
        ModelBundle b;
        b.n_classes = n_classes;
        b.config = c;
        b.gesture = train_gesture_branch(train, n_classes, c);
        const auto res = evaluate(b, validation, FusionRule::GestureOnly);
        if (res.metrics.accuracy > best_acc) {
            best_acc = res.metrics.accuracy;
            best = n;
        }
    }
    return best;
}

} // namespace signflow
