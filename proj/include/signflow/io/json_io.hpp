#pragma once

#include <cstdint>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <string>

#include <json.hpp>

#include "signflow/pipeline.hpp"
#include "signflow/synthetic.hpp"
#include "signflow/version.hpp"

namespace signflow::io {

using json = nlohmann::json;

/// FNV-1a over the canonical (sorted-key) JSON dump.
inline std::string config_hash(const json& config) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : config.dump()) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

inline std::string header_line(const json& config) {
    return std::string("signflow ") + kVersion + " config=" + config_hash(config);
}

/// Reads a JSON document, skipping leading '#' header lines.
inline json read_json_file(const std::string& path, ErrorCode on_error = ErrorCode::Parse) {
    std::ifstream in(path);
    if (!in)
        throw Error(ErrorCode::Io, "cannot open " + path);
    std::string line, body;
    bool in_header = true;
    while (std::getline(in, line)) {
        if (in_header && !line.empty() && line.front() == '#') {
            body += '\n'; // keep line numbers stable
            continue;
        }
        in_header = false;
        body += line;
        body += '\n';
    }
    try {
        return json::parse(body);
    } catch (const json::parse_error& e) {
        throw Error(on_error, path + ": byte " + std::to_string(e.byte) + ": " + e.what());
    }
}

inline void write_json_file(const std::string& path, const json& doc, const std::string& header) {
    std::ofstream out(path);
    if (!out)
        throw Error(ErrorCode::Io, "cannot write " + path);
    out << "# " << header << '\n' << doc.dump(1) << '\n';
}

// --- primitives ------------------------------------------------------------

inline json to_json(const Matrix& m) {
    json rows = json::array();
    for (std::size_t r = 0; r < m.rows(); ++r)
        rows.push_back(std::vector<double>(m.row(r).begin(), m.row(r).end()));
    return rows;
}

inline Matrix matrix_from_json(const json& j) {
    std::vector<Vector> rows;
    for (const auto& r : j)
        rows.push_back(r.get<Vector>());
    return Matrix::from_rows(rows);
}

inline json to_json(const Codebook& cb) {
    return {{"k", cb.k()},
            {"dim", cb.dim()},
            {"seed", cb.seed},
            {"variant", cb.variant ? json(std::string(to_string(*cb.variant))) : json(nullptr)},
            {"mean", cb.znorm.mean},
            {"stddev", cb.znorm.stddev},
            {"centers", to_json(cb.centers)}};
}

inline Codebook codebook_from_json(const json& j) {
    Codebook cb;
    cb.seed = j.at("seed").get<std::uint64_t>();
    if (!j.at("variant").is_null())
        cb.variant = parse_descriptor_variant(j.at("variant").get<std::string>());
    cb.znorm.mean = j.at("mean").get<Vector>();
    cb.znorm.stddev = j.at("stddev").get<Vector>();
    cb.centers = matrix_from_json(j.at("centers"));
    if (cb.k() != j.at("k").get<std::size_t>() || cb.dim() != j.at("dim").get<std::size_t>() ||
        cb.znorm.dim() != cb.dim() || cb.znorm.stddev.size() != cb.dim())
        throw Error(ErrorCode::Corrupt, "codebook shape is inconsistent");
    return cb;
}

inline json to_json(const DiscreteHMM& h) { return {{"pi", h.pi}, {"A", to_json(h.A)}, {"B", to_json(h.B)}}; }

inline DiscreteHMM hmm_from_json(const json& j) {
    DiscreteHMM h{j.at("pi").get<Vector>(), matrix_from_json(j.at("A")), matrix_from_json(j.at("B"))};
    if (h.A.rows() != h.n_states() || h.A.cols() != h.n_states() || h.B.rows() != h.n_states())
        throw Error(ErrorCode::Corrupt, "HMM shape is inconsistent");
    return h;
}

inline json to_json(const BranchScaling& s) {
    return {{"enabled", s.enabled},
            {"posture_mean", s.posture_mean},
            {"posture_scale", s.posture_scale},
            {"gesture_mean", s.gesture_mean},
            {"gesture_scale", s.gesture_scale}};
}

inline BranchScaling scaling_from_json(const json& j) {
    return {j.at("enabled").get<bool>(), j.at("posture_mean").get<double>(), j.at("posture_scale").get<double>(),
            j.at("gesture_mean").get<double>(), j.at("gesture_scale").get<double>()};
}

// --- configs ---------------------------------------------------------------

inline json to_json(const TrainConfig& c) {
    return {{"descriptor", std::string(to_string(c.variant))},
            {"gesture_k", c.gesture_k},
            {"posture_k", c.posture_k},
            {"states", c.states},
            {"states_per_class", c.states_per_class},
            {"kmeans_max_iter", c.kmeans_max_iter},
            {"posture_max_samples", c.posture_max_samples},
            {"hmm_max_iter", c.hmm_max_iter},
            {"hmm_tol", c.hmm_tol},
            {"posture_cost", c.posture_cost},
            {"fusion_cost", c.fusion_cost},
            {"folds", c.folds},
            {"svm_epochs", c.svm_epochs},
            {"neg_inf_clamp", c.neg_inf_clamp},
            {"standardize", c.standardize},
            {"use_posture", c.use_posture},
            {"fusion", std::string(to_string(c.fusion))},
            {"seed", c.seed}};
}

/// Missing keys keep their defaults, so partial config files are accepted.
inline TrainConfig train_config_from_json(const json& j, TrainConfig c = {}) {
    if (j.contains("descriptor"))
        c.variant = parse_descriptor_variant(j.at("descriptor").get<std::string>());
    auto opt = [&](const char* key, auto& field) {
        if (j.contains(key))
            field = j.at(key).get<std::decay_t<decltype(field)>>();
    };
    opt("gesture_k", c.gesture_k);
    opt("posture_k", c.posture_k);
    opt("states", c.states);
    opt("states_per_class", c.states_per_class);
    opt("kmeans_max_iter", c.kmeans_max_iter);
    opt("posture_max_samples", c.posture_max_samples);
    opt("hmm_max_iter", c.hmm_max_iter);
    opt("hmm_tol", c.hmm_tol);
    opt("posture_cost", c.posture_cost);
    opt("fusion_cost", c.fusion_cost);
    opt("folds", c.folds);
    opt("svm_epochs", c.svm_epochs);
    opt("neg_inf_clamp", c.neg_inf_clamp);
    opt("standardize", c.standardize);
    opt("use_posture", c.use_posture);
    opt("seed", c.seed);
    if (j.contains("fusion"))
        c.fusion = parse_fusion_rule(j.at("fusion").get<std::string>());
    return c;
}

inline std::optional<JointId> joint_from_json(const json& j) {
    if (j.is_null())
        return std::nullopt;
    const auto name = j.get<std::string>();
    auto id = parse_joint_name(name);
    if (!id)
        throw Error(ErrorCode::InvalidArgument, "unknown joint '" + name + "'");
    return id;
}

inline json to_json(const SyntheticConfig& c) {
    json classes = json::array();
    for (const auto& cls : c.classes)
        classes.push_back({{"name", cls.name},
                           {"trajectory", cls.trajectory},
                           {"anchor", cls.anchor ? json(std::string(joint_name(*cls.anchor))) : json(nullptr)},
                           {"anchor_offset", cls.anchor_offset},
                           {"center", cls.center},
                           {"posture", cls.posture},
                           {"left_posture", cls.left_posture ? json(*cls.left_posture) : json(nullptr)}});
    return {{"classes", classes},
            {"train_per_class", c.train_per_class},
            {"validation_per_class", c.validation_per_class},
            {"test_per_class", c.test_per_class},
            {"train_subjects", c.train_subjects},
            {"validation_subjects", c.validation_subjects},
            {"test_subjects", c.test_subjects},
            {"noise", c.noise},
            {"min_frames", c.min_frames},
            {"max_frames", c.max_frames},
            {"fps", c.fps},
            {"subject_spread", c.subject_spread},
            {"speed_jitter", c.speed_jitter},
            {"posture_jitter", c.posture_jitter},
            {"seed", c.seed}};
}

inline SyntheticConfig synthetic_config_from_json(const json& j) {
    SyntheticConfig c;
    try {
        for (const auto& e : j.at("classes")) {
            SyntheticClass cls;
            cls.name = e.value("name", "class" + std::to_string(c.classes.size()));
            cls.trajectory = e.value("trajectory", cls.trajectory);
            if (e.contains("anchor"))
                cls.anchor = joint_from_json(e.at("anchor"));
            if (e.contains("anchor_offset"))
                cls.anchor_offset = e.at("anchor_offset").get<Vec3>();
            if (e.contains("center"))
                cls.center = e.at("center").get<Vec3>();
            cls.posture = e.value("posture", cls.posture);
            if (e.contains("left_posture") && !e.at("left_posture").is_null())
                cls.left_posture = e.at("left_posture").get<std::string>();
            c.classes.push_back(std::move(cls));
        }
        auto opt = [&](const char* key, auto& field) {
            if (j.contains(key))
                field = j.at(key).get<std::decay_t<decltype(field)>>();
        };
        opt("train_per_class", c.train_per_class);
        opt("validation_per_class", c.validation_per_class);
        opt("test_per_class", c.test_per_class);
        opt("train_subjects", c.train_subjects);
        opt("validation_subjects", c.validation_subjects);
        opt("test_subjects", c.test_subjects);
        opt("noise", c.noise);
        opt("min_frames", c.min_frames);
        opt("max_frames", c.max_frames);
        opt("fps", c.fps);
        opt("subject_spread", c.subject_spread);
        opt("speed_jitter", c.speed_jitter);
        opt("posture_jitter", c.posture_jitter);
        opt("seed", c.seed);
    } catch (const json::exception& e) {
        throw Error(ErrorCode::InvalidArgument, std::string("synthetic config: ") + e.what());
    }
    c.validate();
    return c;
}

// --- bundle ----------------------------------------------------------------

inline json to_json(const ModelBundle& b) {
    json doc;
    doc["format"] = "signflow-bundle";
    doc["format_version"] = b.format_version;
    doc["n_classes"] = b.n_classes;
    doc["class_names"] = b.class_names;
    doc["config"] = to_json(b.config);

    json hmms = json::array();
    for (const auto& h : b.gesture.hmms)
        hmms.push_back(to_json(h));
    json reports = json::array();
    for (const auto& r : b.gesture.reports)
        reports.push_back({{"log_likelihood", r.log_likelihood}, {"iterations", r.iterations}, {"converged", r.converged}});
    doc["gesture"] = {{"variant", std::string(to_string(b.gesture.variant))},
                      {"codebook", to_json(b.gesture.codebook)},
                      {"hmms", hmms},
                      {"reports", reports}};

    if (b.posture) {
        const auto& p = *b.posture;
        doc["posture"] = {{"weights", to_json(p.linear.weights)},
                          {"codebook", to_json(p.codebook)},
                          {"cost", p.options.cost},
                          {"folds", p.options.folds},
                          {"epochs", p.options.epochs},
                          {"seed", p.options.seed},
                          {"cv_accuracy", p.cv_accuracy},
                          {"train_accuracy", p.train_accuracy}};
    } else {
        doc["posture"] = nullptr;
    }

    json fusion = json::object();
    if (b.linear)
        fusion["linear"] = {{"omega", to_json(b.linear->omega.weights)},
                            {"scaling", to_json(b.linear->scaling)},
                            {"cost", b.linear->options.cost},
                            {"folds", b.linear->options.folds},
                            {"epochs", b.linear->options.epochs},
                            {"seed", b.linear->options.seed},
                            {"cv_accuracy", b.linear->cv_accuracy}};
    if (b.kde) {
        json classes = json::array();
        for (const auto& c : b.kde->classes)
            classes.push_back({{"prior", c.prior}, {"bandwidth", c.bandwidth}, {"points", c.points}});
        fusion["kde"] = {{"scaling", to_json(b.kde->scaling)}, {"classes", classes}};
    }
    doc["fusion"] = fusion;
    return doc;
}

inline ModelBundle bundle_from_json(const json& doc) {
    ModelBundle b;
    try {
        if (doc.value("format", "") != "signflow-bundle")
            throw Error(ErrorCode::Corrupt, "not a signflow model bundle");
        b.format_version = doc.at("format_version").get<int>();
        if (b.format_version != kBundleFormatVersion)
            throw Error(ErrorCode::Version, "bundle format version " + std::to_string(b.format_version) +
                                                " is not supported (expected " +
                                                std::to_string(kBundleFormatVersion) + ")");
        b.n_classes = doc.at("n_classes").get<std::size_t>();
        b.class_names = doc.at("class_names").get<std::vector<std::string>>();
        b.config = train_config_from_json(doc.at("config"));

        const auto& g = doc.at("gesture");
        b.gesture.variant = parse_descriptor_variant(g.at("variant").get<std::string>());
        b.gesture.codebook = codebook_from_json(g.at("codebook"));
        for (const auto& h : g.at("hmms"))
            b.gesture.hmms.push_back(hmm_from_json(h));
        for (const auto& r : g.at("reports"))
            b.gesture.reports.push_back({r.at("log_likelihood").get<std::vector<double>>(),
                                         r.at("iterations").get<std::size_t>(), r.at("converged").get<bool>()});

        if (!doc.at("posture").is_null()) {
            const auto& p = doc.at("posture");
            PostureModel m;
            m.linear.weights = matrix_from_json(p.at("weights"));
            m.codebook = codebook_from_json(p.at("codebook"));
            m.options = {p.at("cost").get<double>(), p.at("folds").get<std::size_t>(),
                         p.at("epochs").get<std::size_t>(), p.at("seed").get<std::uint64_t>()};
            m.cv_accuracy = p.at("cv_accuracy").get<double>();
            m.train_accuracy = p.at("train_accuracy").get<double>();
            b.posture = std::move(m);
        }

        const auto& f = doc.at("fusion");
        if (f.contains("linear")) {
            const auto& l = f.at("linear");
            LinearFusionModel m;
            m.omega.weights = matrix_from_json(l.at("omega"));
            m.scaling = scaling_from_json(l.at("scaling"));
            m.options.cost = l.at("cost").get<double>();
            m.options.folds = l.at("folds").get<std::size_t>();
            m.options.epochs = l.at("epochs").get<std::size_t>();
            m.options.seed = l.at("seed").get<std::uint64_t>();
            m.options.standardize = m.scaling.enabled;
            m.cv_accuracy = l.at("cv_accuracy").get<double>();
            b.linear = std::move(m);
        }
        if (f.contains("kde")) {
            const auto& k = f.at("kde");
            KdeFusionModel m;
            m.scaling = scaling_from_json(k.at("scaling"));
            for (const auto& c : k.at("classes"))
                m.classes.push_back({c.at("points").get<std::vector<Vector>>(), c.at("bandwidth").get<Vector>(),
                                     c.at("prior").get<double>()});
            b.kde = std::move(m);
        }
    } catch (const json::exception& e) {
        throw Error(ErrorCode::Corrupt, std::string("malformed bundle: ") + e.what());
    }

    // cross-member consistency
    const std::size_t C = b.n_classes;
    const std::size_t K = b.gesture.codebook.k();
    auto check = [](bool ok, const std::string& what) {
        if (!ok)
            throw Error(ErrorCode::Corrupt, "inconsistent bundle: " + what);
    };
    check(b.class_names.size() == C, "class name count");
    check(b.gesture.hmms.size() == C, "HMM count vs class count");
    check(b.gesture.codebook.dim() == descriptor_dim(b.gesture.variant), "gesture codebook dimension");
    for (const auto& h : b.gesture.hmms)
        check(h.n_symbols() == K, "HMM symbol count vs codebook size");
    if (b.posture) {
        check(b.posture->linear.weights.rows() == C, "posture weight rows");
        check(b.posture->linear.weights.cols() == 2 * b.posture->codebook.k(), "posture weight columns");
        check(b.posture->codebook.dim() == kShapeContextBins, "posture codebook dimension");
    }
    if (b.linear)
        check(b.linear->omega.weights.rows() == C && b.linear->omega.weights.cols() == 2 * C, "linear fusion shape");
    if (b.kde) {
        check(b.kde->classes.size() == C, "KDE class count");
        for (const auto& c : b.kde->classes) {
            check(c.bandwidth.size() == 2 * C && !c.points.empty(), "KDE class shape");
            for (const auto& p : c.points)
                check(p.size() == 2 * C, "KDE point length");
        }
    }
    return b;
}

inline void save_bundle(const ModelBundle& bundle, const std::string& path) {
    write_json_file(path, to_json(bundle), header_line(to_json(bundle.config)));
}

inline ModelBundle load_bundle(const std::string& path) {
    return bundle_from_json(read_json_file(path, ErrorCode::Corrupt));
}

} // namespace signflow::io
