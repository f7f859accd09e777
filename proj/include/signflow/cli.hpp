#pragma once

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "signflow/io/corpus.hpp"
#include "signflow/io/json_io.hpp"
#include "signflow/pipeline.hpp"
#include "signflow/version.hpp"

namespace signflow::cli {

namespace fs = std::filesystem;
using io::json;

namespace detail {

inline std::string fmt(double v, const char* spec = "%.17g") {
    char buf[64];
    std::snprintf(buf, sizeof buf, spec, v);
    return buf;
}

/// --seed wins, then SIGNFLOW_SEED, then `fallback`.
inline std::uint64_t resolve_seed(const std::optional<std::uint64_t>& flag, std::uint64_t fallback) {
    if (flag)
        return *flag;
    if (const char* env = std::getenv("SIGNFLOW_SEED")) {
        try {
            return std::stoull(env);
        } catch (const std::exception&) {
            throw Error(ErrorCode::InvalidArgument, std::string("SIGNFLOW_SEED is not an integer: ") + env);
        }
    }
    return fallback;
}

inline std::ofstream open_report(const fs::path& path, const std::string& header) {
    std::ofstream out(path);
    if (!out)
        throw Error(ErrorCode::Io, "cannot write " + path.string());
    out << "# " << header << '\n';
    return out;
}

inline void print_timings(std::ostream& out, const StageTimings& t) {
    const double n = t.sequences ? static_cast<double>(t.sequences) : 1.0;
    out << "stage                  avg_seconds   accum_seconds\n";
    double accum = 0.0;
    for (std::size_t i = 0; i < kStageCount; ++i) {
        const double avg = t.seconds[i] / n;
        accum += avg;
        char line[128];
        std::snprintf(line, sizeof line, "%-22s %-13.6f %.6f\n", std::string(kStageNames[i]).c_str(), avg, accum);
        out << line;
    }
    char line[128];
    std::snprintf(line, sizeof line, "%-22s %-13.6f\n", "total", t.total() / n);
    out << line;
}

} // namespace detail

/// Entry point of the `signflow` tool. Returns the process exit code.
inline int run_cli(int argc, const char* const* argv, std::ostream& out = std::cout, std::ostream& err = std::cerr) {
    CLI::App app{"signflow: skeleton + hand-posture sign recognition"};
    app.set_version_flag("--version", kVersion);
    app.require_subcommand(1);

    std::optional<std::uint64_t> seed;
    auto add_seed = [&](CLI::App* sub) {
        sub->add_option("--seed", seed, "Seed for every random choice (falls back to SIGNFLOW_SEED)");
    };

    // synth
    auto* synth = app.add_subcommand("synth", "Generate a synthetic corpus");
    std::string synth_config, synth_out;
    synth->add_option("--config", synth_config, "Synthetic corpus config (JSON)")->required()->check(CLI::ExistingFile);
    synth->add_option("--out", synth_out, "Output directory")->required();
    add_seed(synth);

    // train
    auto* train = app.add_subcommand("train", "Fit codebooks, HMMs, posture model and fusion");
    std::string train_manifest, train_out, train_config;
    std::optional<std::string> descriptor, fusion_flag;
    std::optional<std::size_t> gesture_k, posture_k, states;
    bool states_sweep = false, no_posture = false, standardize = false;
    train->add_option("--manifest", train_manifest, "Dataset manifest")->required()->check(CLI::ExistingFile);
    train->add_option("--out", train_out, "Output bundle path")->required();
    train->add_option("--config", train_config, "Training config (JSON)")->check(CLI::ExistingFile);
    train->add_option("--descriptor", descriptor, "Gesture descriptor")
        ->check(CLI::IsMember({"hd", "hd-t", "rbpd", "rbpd-t"}));
    train->add_option("--gesture-k", gesture_k, "Gesture codebook size");
    train->add_option("--posture-k", posture_k, "Posture codebook size");
    train->add_option("--states", states, "HMM states per class");
    train->add_flag("--states-sweep", states_sweep, "Choose the state count in 3..12 on the validation split");
    train->add_flag("--no-posture", no_posture, "Skip the posture branch");
    train->add_flag("--standardize", standardize, "Standardize each branch before fusion");
    train->add_option("--fusion", fusion_flag, "Default decision rule stored in the bundle")
        ->check(CLI::IsMember({"linear", "kde", "gesture-only", "posture-only"}));
    add_seed(train);

    // predict
    auto* predict = app.add_subcommand("predict", "Classify one sequence");
    std::string predict_bundle, predict_sequence;
    std::optional<std::string> predict_masks, predict_fusion;
    predict->add_option("--bundle", predict_bundle, "Model bundle")->required()->check(CLI::ExistingFile);
    predict->add_option("--sequence", predict_sequence, "Skeleton CSV (native layout)")->required()->check(CLI::ExistingFile);
    predict->add_option("--masks", predict_masks, "Mask archive directory")->check(CLI::ExistingDirectory);
    predict->add_option("--fusion", predict_fusion, "Decision rule")
        ->check(CLI::IsMember({"linear", "kde", "gesture-only", "posture-only"}));
    add_seed(predict);

    // eval
    auto* eval = app.add_subcommand("eval", "Evaluate a bundle on one manifest split");
    std::string eval_bundle, eval_manifest, eval_split = "test", eval_out;
    std::optional<std::string> eval_fusion;
    eval->add_option("--bundle", eval_bundle, "Model bundle")->required()->check(CLI::ExistingFile);
    eval->add_option("--manifest", eval_manifest, "Dataset manifest")->required()->check(CLI::ExistingFile);
    eval->add_option("--split", eval_split, "Split to evaluate")->check(CLI::IsMember({"train", "validation", "test"}));
    eval->add_option("--out", eval_out, "Report directory")->required();
    eval->add_option("--fusion", eval_fusion, "Decision rule")
        ->check(CLI::IsMember({"linear", "kde", "gesture-only", "posture-only"}));
    add_seed(eval);

    // inspect
    auto* inspect = app.add_subcommand("inspect", "Summarize a bundle");
    std::string inspect_bundle;
    inspect->add_option("--bundle", inspect_bundle, "Model bundle")->required()->check(CLI::ExistingFile);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e, out, err);
    }

    try {
        if (synth->parsed()) {
            auto cfg = io::synthetic_config_from_json(io::read_json_file(synth_config, ErrorCode::InvalidArgument));
            cfg.seed = detail::resolve_seed(seed, cfg.seed);
            const auto corpus = generate_synthetic_corpus(cfg);
            const auto manifest = io::write_corpus(corpus, cfg, synth_out);
            out << "wrote " << manifest.entries.size() << " sequences (" << corpus.class_names.size()
                << " classes) to " << synth_out << '\n';
            return 0;
        }

        if (train->parsed()) {
            TrainConfig cfg;
            if (!train_config.empty())
                cfg = io::train_config_from_json(io::read_json_file(train_config, ErrorCode::InvalidArgument));
            if (descriptor)
                cfg.variant = parse_descriptor_variant(*descriptor);
            if (gesture_k)
                cfg.gesture_k = *gesture_k;
            if (posture_k)
                cfg.posture_k = *posture_k;
            if (states)
                cfg.states = *states;
            if (no_posture)
                cfg.use_posture = false;
            if (standardize)
                cfg.standardize = true;
            if (fusion_flag)
                cfg.fusion = parse_fusion_rule(*fusion_flag);
            cfg.seed = detail::resolve_seed(seed, cfg.seed);

            const auto manifest = io::read_manifest(train_manifest);
            std::vector<Sample> samples;
            for (const auto& e : manifest.entries)
                if (e.split != Split::Test)
                    samples.push_back(io::load_sample(manifest, e));
            if (states_sweep) {
                const std::vector<std::size_t> candidates = {3, 4, 5, 6, 7, 8, 9, 10, 11, 12};
                cfg.states = select_state_count(samples, cfg, candidates);
                out << "state sweep selected " << cfg.states << " states\n";
            }
            const auto bundle = train_bundle(samples, manifest.classes, cfg);
            io::save_bundle(bundle, train_out);
            out << "trained " << bundle.n_classes << " classes, descriptor " << to_string(bundle.gesture.variant)
                << ", K=" << bundle.gesture.codebook.k() << ", posture branch "
                << (bundle.posture ? "on" : "off") << "; bundle written to " << train_out << '\n';
            return 0;
        }

        if (predict->parsed()) {
            const auto bundle = io::load_bundle(predict_bundle);
            Sample sample;
            sample.id = fs::path(predict_sequence).stem().string();
            sample.skeleton = io::parse_skeleton_csv(predict_sequence);
            if (predict_masks)
                sample.hands = io::read_mask_archive(*predict_masks, sample.skeleton.size());
            const FusionRule rule = predict_fusion ? parse_fusion_rule(*predict_fusion) : bundle.config.fusion;
            const auto inf = infer(bundle, sample, rule);
            json doc = {{"sequence", sample.id},
                        {"rule", std::string(to_string(rule))},
                        {"gesture", inf.gesture.scores},
                        {"gesture_only", inf.gesture.best},
                        {"predicted", inf.predicted},
                        {"predicted_name", bundle.class_names[inf.predicted]}};
            if (!inf.posture.empty()) {
                doc["posture"] = inf.posture;
                doc["posture_only"] = argmax(inf.posture);
            }
            if (inf.coupled) {
                if (bundle.linear)
                    doc["linear"] = predict_linear(*bundle.linear, *inf.coupled);
                if (bundle.kde)
                    doc["kde"] = predict_kde(*bundle.kde, *inf.coupled);
            }
            out << doc.dump(1) << '\n';
            return 0;
        }

        if (eval->parsed()) {
            const auto bundle = io::load_bundle(eval_bundle);
            const auto manifest = io::read_manifest(eval_manifest);
            const Split split = parse_split(eval_split);
            const FusionRule rule = eval_fusion ? parse_fusion_rule(*eval_fusion) : bundle.config.fusion;
            const auto samples = io::load_samples(manifest, split);
            if (samples.empty())
                throw Error(ErrorCode::EmptyInput, "split '" + eval_split + "' has no sequences");
            const auto result = evaluate(bundle, samples, rule);

            json echo = io::to_json(bundle.config);
            echo["eval_split"] = eval_split;
            echo["eval_rule"] = std::string(to_string(rule));
            const std::string header = io::header_line(echo);
            fs::create_directories(eval_out);
            const fs::path dir(eval_out);

            {
                auto f = detail::open_report(dir / "metrics.csv", header);
                f << "class,name,precision,recall,fscore\n";
                for (std::size_t c = 0; c < bundle.n_classes; ++c) {
                    const auto& m = result.metrics.per_class[c];
                    f << c << ',' << bundle.class_names[c] << ',' << detail::fmt(m.precision) << ','
                      << detail::fmt(m.recall) << ',' << detail::fmt(m.fscore) << '\n';
                }
                f << "mean,," << detail::fmt(result.metrics.mean_precision) << ','
                  << detail::fmt(result.metrics.mean_recall) << ',' << detail::fmt(result.metrics.mean_fscore)
                  << '\n';
            }
            {
                auto f = detail::open_report(dir / "confusion.csv", header);
                f << "true\\pred";
                for (std::size_t c = 0; c < bundle.n_classes; ++c)
                    f << ',' << c;
                f << '\n';
                for (std::size_t r = 0; r < bundle.n_classes; ++r) {
                    f << r;
                    for (std::size_t c = 0; c < bundle.n_classes; ++c)
                        f << ',' << result.confusion.at(r, c);
                    f << '\n';
                }
            }
            {
                auto f = detail::open_report(dir / "predictions.csv", header);
                f << "id,label,predicted\n";
                for (std::size_t i = 0; i < result.ids.size(); ++i)
                    f << result.ids[i] << ',' << result.labels[i] << ',' << result.predictions[i] << '\n';
            }
            {
                // wall-clock numbers: the only report that differs between runs
                auto f = detail::open_report(dir / "timing.csv", header);
                const double n = static_cast<double>(result.timings.sequences);
                f << "stage,avg_seconds,accum_seconds,total_seconds\n";
                double accum = 0.0;
                for (std::size_t i = 0; i < kStageCount; ++i) {
                    accum += result.timings.seconds[i] / n;
                    f << kStageNames[i] << ',' << detail::fmt(result.timings.seconds[i] / n) << ','
                      << detail::fmt(accum) << ',' << detail::fmt(result.timings.seconds[i]) << '\n';
                }
                f << "total," << detail::fmt(result.timings.total() / n) << ',' << detail::fmt(accum) << ','
                  << detail::fmt(result.timings.total()) << '\n';
            }

            out << "evaluated " << samples.size() << " sequences (split " << eval_split << ", rule "
                << to_string(rule) << ")\n";
            out << "mean precision: " << detail::fmt(result.metrics.mean_precision, "%.4f") << '\n';
            out << "mean recall:    " << detail::fmt(result.metrics.mean_recall, "%.4f") << '\n';
            out << "macro F-score:  " << detail::fmt(result.metrics.mean_fscore, "%.4f") << '\n';
            out << "accuracy:       " << detail::fmt(result.metrics.accuracy, "%.4f") << '\n';
            detail::print_timings(out, result.timings);
            return 0;
        }

        if (inspect->parsed()) {
            const auto bundle = io::load_bundle(inspect_bundle);
            out << "format version: " << bundle.format_version << '\n';
            out << "classes:        " << bundle.n_classes << '\n';
            for (std::size_t c = 0; c < bundle.n_classes; ++c)
                out << "  " << c << ": " << bundle.class_names[c] << " (" << bundle.gesture.hmms[c].n_states()
                    << " states, " << bundle.gesture.reports[c].iterations << " EM iterations)\n";
            out << "descriptor:     " << to_string(bundle.gesture.variant) << " (dim "
                << bundle.gesture.codebook.dim() << ")\n";
            out << "gesture K:      " << bundle.gesture.codebook.k() << '\n';
            if (bundle.posture)
                out << "posture K:      " << bundle.posture->codebook.k() << " (cv accuracy "
                    << detail::fmt(bundle.posture->cv_accuracy, "%.3f") << ")\n";
            else
                out << "posture:        none\n";
            out << "fusion:         " << (bundle.linear ? "linear " : "") << (bundle.kde ? "kde " : "")
                << "(default " << to_string(bundle.config.fusion) << ")\n";
            out << "config hash:    " << io::config_hash(io::to_json(bundle.config)) << '\n';
            return 0;
        }
    } catch (const Error& e) {
        err << "signflow: " << e.what() << '\n';
        return 1;
    } catch (const std::exception& e) {
        err << "signflow: unexpected failure: " << e.what() << '\n';
        return 1;
    }
    return 1;
}

} // namespace signflow::cli
