#pragma once

#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "signflow/error.hpp"
#include "signflow/skeleton.hpp"

namespace signflow::io {

/// Column layout of a skeleton recording: one row per frame, a timestamp
/// column followed by `joint_count` groups of `fields_per_joint` numbers
/// (x, y, z and, when present, confidence). `columns` maps each JointId to
/// its group index; unmapped joints are absent from the frames.
struct SkeletonCsvSchema {
    std::size_t joint_count = kJointCount;
    std::size_t fields_per_joint = 4;
    std::vector<std::pair<JointId, std::size_t>> columns;
    double timestamp_scale = 1.0;
    char delimiter = ',';

    static SkeletonCsvSchema native() {
        SkeletonCsvSchema s;
        for (std::size_t i = 0; i < kJointCount; ++i)
            s.columns.emplace_back(kAllJoints[i], i);
        return s;
    }

    std::size_t row_width() const { return 1 + joint_count * fields_per_joint; }
};

namespace detail {

inline std::vector<std::string_view> split(std::string_view line, char delim) {
    std::vector<std::string_view> cells;
    std::size_t start = 0;
    while (true) {
        const std::size_t pos = line.find(delim, start);
        cells.push_back(line.substr(start, pos == std::string_view::npos ? std::string_view::npos : pos - start));
        if (pos == std::string_view::npos)
            break;
        start = pos + 1;
    }
    return cells;
}

inline std::string_view trim(std::string_view s) {
    while (!s.empty() && (s.front() == ' ' || s.front() == '\t' || s.front() == '\r'))
        s.remove_prefix(1);
    while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r'))
        s.remove_suffix(1);
    return s;
}

inline bool parse_double(std::string_view s, double& out) {
    s = trim(s);
    if (s.empty())
        return false;
    // from_chars for double is available in libstdc++ 11.
    const auto res = std::from_chars(s.data(), s.data() + s.size(), out);
    return res.ec == std::errc() && res.ptr == s.data() + s.size();
}

} // namespace detail

inline SkeletonSequence parse_skeleton_csv(std::istream& in, const SkeletonCsvSchema& schema,
                                           const std::string& origin = "<stream>") {
    signflow::detail::require(schema.fields_per_joint >= 3, ErrorCode::InvalidArgument,
                              "schema needs at least x, y, z per joint");
    for (const auto& [id, group] : schema.columns)
        signflow::detail::require(group < schema.joint_count, ErrorCode::InvalidArgument,
                                  "schema maps " + std::string(joint_name(id)) + " outside the joint groups");
    for (JointId id : kUpperBody) {
        bool mapped = false;
        for (const auto& c : schema.columns)
            mapped |= c.first == id;
        if (!mapped)
            throw Error(ErrorCode::InvalidArgument,
                        "schema does not map required joint " + std::string(joint_name(id)));
    }

    std::vector<SkeletonFrame> frames;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        const auto body = detail::trim(line);
        if (body.empty() || body.front() == '#')
            continue;
        const auto cells = detail::split(body, schema.delimiter);
        if (cells.size() != schema.row_width())
            throw Error(ErrorCode::Parse, origin + ": row " + std::to_string(line_no) + " has " +
                                              std::to_string(cells.size()) + " columns, expected " +
                                              std::to_string(schema.row_width()));
        std::vector<double> values(cells.size());
        for (std::size_t c = 0; c < cells.size(); ++c)
            if (!detail::parse_double(cells[c], values[c]))
                throw Error(ErrorCode::Parse, origin + ": row " + std::to_string(line_no) + " column " +
                                                  std::to_string(c + 1) + " is not numeric: '" +
                                                  std::string(cells[c]) + "'");
        SkeletonFrame frame(values[0] * schema.timestamp_scale);
        for (const auto& [id, group] : schema.columns) {
            const std::size_t base = 1 + group * schema.fields_per_joint;
            Joint3D j{values[base], values[base + 1], values[base + 2], 1.0};
            if (schema.fields_per_joint >= 4)
                j.confidence = values[base + 3];
            frame.set(id, j);
        }
        frames.push_back(frame);
    }

    SkeletonSequence seq;
    seq.frames = forward_fill(std::move(frames), kUpperBody);
    return seq;
}

inline SkeletonSequence parse_skeleton_csv(const std::string& path,
                                           const SkeletonCsvSchema& schema = SkeletonCsvSchema::native()) {
    std::ifstream in(path);
    if (!in)
        throw Error(ErrorCode::Io, "cannot open " + path);
    return parse_skeleton_csv(in, schema, path);
}

/// Writes the native layout: timestamp then 15 x (x, y, z, confidence).
/// Absent joints are written with zero confidence.
inline void write_skeleton_csv(std::ostream& out, const SkeletonSequence& seq, const std::string& header = {}) {
    if (!header.empty())
        out << "# " << header << '\n';
    char buf[32];
    auto put = [&](double v) {
        std::snprintf(buf, sizeof buf, "%.17g", v);
        out << buf;
    };
    for (const auto& frame : seq.frames) {
        put(frame.timestamp());
        for (JointId id : kAllJoints) {
            const auto& j = frame.get(id);
            const Joint3D v = j ? *j : Joint3D{0.0, 0.0, 0.0, 0.0};
            for (double x : {v.x, v.y, v.z, v.confidence}) {
                out << ',';
                put(x);
            }
        }
        out << '\n';
    }
}

inline void write_skeleton_csv(const std::string& path, const SkeletonSequence& seq, const std::string& header = {}) {
    std::ofstream out(path);
    if (!out)
        throw Error(ErrorCode::Io, "cannot write " + path);
    write_skeleton_csv(out, seq, header);
}

} // namespace signflow::io
