#include "srp/pgm.hpp"

#include <cmath>
#include <fstream>

namespace srp::geom {

void write_pgm16(const DepthImage& img, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write " + path);
    out << "P5\n" << img.width << " " << img.height << "\n65535\n";
    std::vector<unsigned char> row(static_cast<size_t>(img.width) * 2);
    for (int y = 0; y < img.height; ++y) {
        for (int x = 0; x < img.width; ++x) {
            double mm = std::round(static_cast<double>(img.at(x, y)) * 1000.0);
            uint16_t v = static_cast<uint16_t>(std::clamp(mm, 0.0, 65535.0));
            row[2 * x] = static_cast<unsigned char>(v >> 8);
            row[2 * x + 1] = static_cast<unsigned char>(v & 0xFF);
        }
        out.write(reinterpret_cast<const char*>(row.data()), static_cast<std::streamsize>(row.size()));
    }
    if (!out) throw std::runtime_error("write failed: " + path);
}

namespace {

// Reads the next whitespace/comment-delimited token of a PNM header.
std::string next_header_token(std::istream& in) {
    std::string tok;
    int c;
    while ((c = in.get()) != EOF) {
        if (c == '#') {
            while ((c = in.get()) != EOF && c != '\n') {}
            continue;
        }
        if (std::isspace(c)) {
            if (!tok.empty()) return tok;
            continue;
        }
        tok.push_back(static_cast<char>(c));
    }
    return tok;
}

}  // namespace

DepthImage read_pgm16(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open " + path);
    if (next_header_token(in) != "P5") throw std::runtime_error(path + ": not a binary PGM (P5)");
    int w = std::stoi(next_header_token(in));
    int h = std::stoi(next_header_token(in));
    int maxval = std::stoi(next_header_token(in));
    if (maxval != 65535) throw std::runtime_error(path + ": expected maxval 65535");
    if (w < 1 || h < 1) throw std::runtime_error(path + ": bad dimensions");
    DepthImage img(w, h);
    std::vector<unsigned char> buf(static_cast<size_t>(w) * h * 2);
    in.read(reinterpret_cast<char*>(buf.data()), static_cast<std::streamsize>(buf.size()));
    if (in.gcount() != static_cast<std::streamsize>(buf.size()))
        throw std::runtime_error(path + ": truncated pixel data");
    for (size_t i = 0; i < static_cast<size_t>(w) * h; ++i) {
        uint16_t v = static_cast<uint16_t>((buf[2 * i] << 8) | buf[2 * i + 1]);
        img.data[i] = static_cast<float>(v) / 1000.0f;
    }
    return img;
}

}  // namespace srp::geom
