#pragma once

#include <cctype>
#include <cstdint>
#include <fstream>
#include <string>
#include <vector>

#include "signflow/error.hpp"
#include "signflow/mask.hpp"

namespace signflow::io {

struct GrayImage {
    int width = 0;
    int height = 0;
    int maxval = 255;
    std::vector<std::uint16_t> pixels;
};

namespace detail {

inline int read_pnm_int(std::istream& in) {
    int c = in.peek();
    while (in && (std::isspace(c) || c == '#')) {
        if (c == '#') {
            std::string comment;
            std::getline(in, comment);
        } else {
            in.get();
        }
        c = in.peek();
    }
    int v = -1;
    in >> v;
    return v;
}

} // namespace detail

/// Reads binary (P5) or ASCII (P2) PGM, 8- or 16-bit.
inline GrayImage read_pgm(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in)
        throw Error(ErrorCode::Io, "cannot open " + path);
    std::string magic(2, '\0');
    in.read(magic.data(), 2);
    if (magic != "P5" && magic != "P2")
        throw Error(ErrorCode::Parse, path + ": not a PGM file");
    GrayImage img;
    img.width = detail::read_pnm_int(in);
    img.height = detail::read_pnm_int(in);
    img.maxval = detail::read_pnm_int(in);
    if (img.width <= 0 || img.height <= 0 || img.maxval <= 0 || img.maxval > 65535)
        throw Error(ErrorCode::Parse, path + ": bad PGM header");
    const std::size_t n = std::size_t(img.width) * img.height;
    img.pixels.resize(n);
    if (magic == "P5") {
        in.get(); // single whitespace after maxval
        const bool wide = img.maxval > 255;
        std::vector<unsigned char> raw(n * (wide ? 2 : 1));
        in.read(reinterpret_cast<char*>(raw.data()), static_cast<std::streamsize>(raw.size()));
        if (in.gcount() != static_cast<std::streamsize>(raw.size()))
            throw Error(ErrorCode::Parse, path + ": truncated pixel data");
        for (std::size_t i = 0; i < n; ++i)
            img.pixels[i] = wide ? static_cast<std::uint16_t>((raw[2 * i] << 8) | raw[2 * i + 1]) : raw[i];
    } else {
        for (std::size_t i = 0; i < n; ++i) {
            const int v = detail::read_pnm_int(in);
            if (v < 0)
                throw Error(ErrorCode::Parse, path + ": truncated pixel data");
            img.pixels[i] = static_cast<std::uint16_t>(v);
        }
    }
    return img;
}

inline void write_pgm(const std::string& path, const GrayImage& img) {
    std::ofstream out(path, std::ios::binary);
    if (!out)
        throw Error(ErrorCode::Io, "cannot write " + path);
    out << "P5\n" << img.width << ' ' << img.height << '\n' << img.maxval << '\n';
    const bool wide = img.maxval > 255;
    for (auto p : img.pixels) {
        if (wide)
            out.put(static_cast<char>(p >> 8));
        out.put(static_cast<char>(p & 0xff));
    }
}

inline BinaryMask read_mask_pgm(const std::string& path) {
    const auto img = read_pgm(path);
    BinaryMask mask(img.width, img.height);
    for (int y = 0; y < img.height; ++y)
        for (int x = 0; x < img.width; ++x)
            if (img.pixels[std::size_t(y) * img.width + x] * 2 > img.maxval)
                mask.set(x, y);
    return mask;
}

inline void write_mask_pgm(const std::string& path, const BinaryMask& mask) {
    GrayImage img{mask.width(), mask.height(), 255, {}};
    img.pixels.reserve(mask.data().size());
    for (auto v : mask.data())
        img.pixels.push_back(v ? 255 : 0);
    write_pgm(path, img);
}

} // namespace signflow::io
