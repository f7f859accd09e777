#pragma once

#include <cstdio>
#include <filesystem>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "signflow/io/json_io.hpp"
#include "signflow/io/pgm.hpp"
#include "signflow/io/skeleton_csv.hpp"
#include "signflow/posture.hpp"
#include "signflow/synthetic.hpp"

namespace signflow::io {

namespace fs = std::filesystem;

struct ManifestEntry {
    std::string id;
    std::string sequence;             ///< skeleton CSV, relative to the manifest
    std::optional<std::string> masks; ///< directory of {frame:05}_{L|R}.pgm
    std::optional<std::string> depth; ///< directory of {frame:05}.pgm, 16-bit millimetres
    std::optional<CameraIntrinsics> intrinsics;
    std::size_t label = 0;
    std::string subject;
    Split split = Split::Train;
};

struct DatasetManifest {
    std::vector<std::string> classes;
    SkeletonCsvSchema schema = SkeletonCsvSchema::native();
    std::vector<ManifestEntry> entries;
    fs::path base_dir;
};

/// Rejects manifests whose subjects span splits or whose labels do not
/// cover 0..C-1 exactly.
inline void validate_manifest(const DatasetManifest& m) {
    std::map<std::string, Split> subject_split;
    std::set<std::size_t> labels;
    for (const auto& e : m.entries) {
        auto [it, inserted] = subject_split.emplace(e.subject, e.split);
        if (!inserted && it->second != e.split)
            throw Error(ErrorCode::InvalidManifest, "subject '" + e.subject + "' appears in both " +
                                                        std::string(to_string(it->second)) + " and " +
                                                        std::string(to_string(e.split)) + " splits");
        labels.insert(e.label);
    }
    if (!labels.empty() && (*labels.begin() != 0 || *labels.rbegin() + 1 != labels.size()))
        throw Error(ErrorCode::InvalidManifest, "labels do not form a contiguous 0..C-1 range");
    if (!m.classes.empty() && labels.size() > m.classes.size())
        throw Error(ErrorCode::InvalidManifest, "more labels than declared classes");
}

inline json schema_to_json(const SkeletonCsvSchema& s) {
    json cols = json::object();
    for (const auto& [id, group] : s.columns)
        cols[std::string(joint_name(id))] = group;
    return {{"joint_count", s.joint_count},
            {"fields_per_joint", s.fields_per_joint},
            {"columns", cols},
            {"timestamp_scale", s.timestamp_scale},
            {"delimiter", std::string(1, s.delimiter)}};
}

inline SkeletonCsvSchema schema_from_json(const json& j) {
    SkeletonCsvSchema s;
    s.joint_count = j.value("joint_count", s.joint_count);
    s.fields_per_joint = j.value("fields_per_joint", s.fields_per_joint);
    s.timestamp_scale = j.value("timestamp_scale", s.timestamp_scale);
    const auto delim = j.value("delimiter", std::string(","));
    signflow::detail::require(delim.size() == 1, ErrorCode::InvalidArgument, "delimiter must be one character");
    s.delimiter = delim.front();
    if (j.contains("columns")) {
        for (const auto& [name, group] : j.at("columns").items()) {
            auto id = parse_joint_name(name);
            if (!id)
                throw Error(ErrorCode::InvalidArgument, "schema names unknown joint '" + name + "'");
            s.columns.emplace_back(*id, group.get<std::size_t>());
        }
    } else {
        s.columns = SkeletonCsvSchema::native().columns;
    }
    return s;
}

inline DatasetManifest read_manifest(const std::string& path) {
    const json doc = read_json_file(path, ErrorCode::InvalidManifest);
    DatasetManifest m;
    m.base_dir = fs::path(path).parent_path();
    try {
        m.classes = doc.value("classes", std::vector<std::string>{});
        if (doc.contains("schema"))
            m.schema = schema_from_json(doc.at("schema"));
        for (const auto& e : doc.at("entries")) {
            ManifestEntry entry;
            entry.sequence = e.at("sequence").get<std::string>();
            entry.id = e.value("id", fs::path(entry.sequence).stem().string());
            if (e.contains("masks") && !e.at("masks").is_null())
                entry.masks = e.at("masks").get<std::string>();
            if (e.contains("depth") && !e.at("depth").is_null()) {
                entry.depth = e.at("depth").get<std::string>();
                const auto& k = e.at("intrinsics");
                entry.intrinsics = CameraIntrinsics{k.at("fx").get<double>(), k.at("fy").get<double>(),
                                                    k.at("cx").get<double>(), k.at("cy").get<double>()};
            }
            entry.label = e.at("label").get<std::size_t>();
            entry.subject = e.at("subject").get<std::string>();
            entry.split = parse_split(e.at("split").get<std::string>());
            m.entries.push_back(std::move(entry));
        }
    } catch (const json::exception& e) {
        throw Error(ErrorCode::InvalidManifest, path + ": " + e.what());
    }
    validate_manifest(m);
    return m;
}

inline json manifest_to_json(const DatasetManifest& m) {
    json entries = json::array();
    for (const auto& e : m.entries) {
        json j = {{"id", e.id},
                  {"sequence", e.sequence},
                  {"label", e.label},
                  {"subject", e.subject},
                  {"split", std::string(to_string(e.split))}};
        if (e.masks)
            j["masks"] = *e.masks;
        if (e.depth) {
            j["depth"] = *e.depth;
            j["intrinsics"] = {{"fx", e.intrinsics->fx},
                               {"fy", e.intrinsics->fy},
                               {"cx", e.intrinsics->cx},
                               {"cy", e.intrinsics->cy}};
        }
        entries.push_back(std::move(j));
    }
    return {{"format", "signflow-manifest"},
            {"version", 1},
            {"classes", m.classes},
            {"schema", schema_to_json(m.schema)},
            {"entries", entries}};
}

inline std::string frame_file(std::size_t frame, const char* suffix) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%05zu%s.pgm", frame, suffix);
    return buf;
}

inline std::vector<HandPair> read_mask_archive(const fs::path& dir, std::size_t n_frames) {
    if (!fs::is_directory(dir))
        throw Error(ErrorCode::Io, "mask archive " + dir.string() + " is not a directory");
    std::vector<HandPair> frames(n_frames);
    for (std::size_t f = 0; f < n_frames; ++f) {
        for (auto [suffix, side] : {std::pair{"_R", HandSide::Right}, std::pair{"_L", HandSide::Left}}) {
            const fs::path p = dir / frame_file(f, suffix);
            if (!fs::exists(p))
                continue;
            auto region = HandRegion::from_mask(read_mask_pgm(p.string()), side);
            (side == HandSide::Right ? frames[f].right : frames[f].left) = std::move(region);
        }
    }
    return frames;
}

inline void write_mask_archive(const fs::path& dir, std::span<const HandPair> frames) {
    fs::create_directories(dir);
    for (std::size_t f = 0; f < frames.size(); ++f) {
        if (frames[f].right.present)
            write_mask_pgm((dir / frame_file(f, "_R")).string(), frames[f].right.mask);
        if (frames[f].left.present)
            write_mask_pgm((dir / frame_file(f, "_L")).string(), frames[f].left.mask);
    }
}

/// Segments both hands from a directory of 16-bit millimetre depth images.
inline std::vector<HandPair> read_depth_archive(const fs::path& dir, const CameraIntrinsics& k,
                                                const SkeletonSequence& seq) {
    std::vector<HandPair> frames(seq.frames.size());
    for (std::size_t f = 0; f < seq.frames.size(); ++f) {
        const fs::path p = dir / frame_file(f, "");
        if (!fs::exists(p))
            continue;
        const auto img = read_pgm(p.string());
        DepthFrame depth{img.width, img.height, {}, k};
        depth.depth.reserve(img.pixels.size());
        for (auto v : img.pixels)
            depth.depth.push_back(v * 1e-3);
        frames[f].right = segment_hand(depth, seq.frames[f], HandSide::Right);
        frames[f].left = segment_hand(depth, seq.frames[f], HandSide::Left);
    }
    return frames;
}

inline Sample load_sample(const DatasetManifest& m, const ManifestEntry& e) {
    Sample s;
    s.id = e.id;
    s.label = e.label;
    s.subject = e.subject;
    s.split = e.split;
    s.skeleton = parse_skeleton_csv((m.base_dir / e.sequence).string(), m.schema);
    s.skeleton.label = static_cast<int>(e.label);
    s.skeleton.subject = e.subject;
    const auto defects = validate_sequence(s.skeleton);
    for (const auto& d : defects)
        if (d.kind != DefectKind::InconsistentSchema)
            throw Error(ErrorCode::Parse, e.sequence + ": " + std::string(to_string(d.kind)) + " at frame " +
                                              std::to_string(d.frame_index));
    if (e.masks)
        s.hands = read_mask_archive(m.base_dir / *e.masks, s.skeleton.size());
    else if (e.depth)
        s.hands = read_depth_archive(m.base_dir / *e.depth, *e.intrinsics, s.skeleton);
    return s;
}

inline std::vector<Sample> load_samples(const DatasetManifest& m, std::optional<Split> split = std::nullopt) {
    std::vector<Sample> out;
    for (const auto& e : m.entries)
        if (!split || e.split == *split)
            out.push_back(load_sample(m, e));
    return out;
}

/// Writes sequences/, masks/, manifest.json and the config echo under `dir`.
inline DatasetManifest write_corpus(const SyntheticCorpus& corpus, const SyntheticConfig& cfg, const fs::path& dir) {
    fs::create_directories(dir / "sequences");
    fs::create_directories(dir / "masks");
    const json cfg_json = to_json(cfg);
    const std::string header = header_line(cfg_json);

    DatasetManifest m;
    m.classes = corpus.class_names;
    m.base_dir = dir;
    for (const auto& s : corpus.samples) {
        ManifestEntry e;
        e.id = s.id;
        e.sequence = "sequences/" + s.id + ".csv";
        write_skeleton_csv((dir / e.sequence).string(), s.skeleton, header);
        if (!s.hands.empty()) {
            e.masks = "masks/" + s.id;
            write_mask_archive(dir / *e.masks, s.hands);
        }
        e.label = s.label;
        e.subject = s.subject;
        e.split = s.split;
        m.entries.push_back(std::move(e));
    }
    validate_manifest(m);
    write_json_file((dir / "manifest.json").string(), manifest_to_json(m), header);
    write_json_file((dir / "synth_config.json").string(), cfg_json, header);
    return m;
}

} // namespace signflow::io
