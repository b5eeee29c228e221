// Depth images on disk: 16-bit binary PGM (P5, maxval 65535), big-endian,
// value = millimeters, 0 = missing.
#pragma once

#include <string>

#include "srp/geometry.hpp"

namespace srp::geom {

void write_pgm16(const DepthImage& img, const std::string& path);
DepthImage read_pgm16(const std::string& path);

}  // namespace srp::geom
