#pragma once

#include <filesystem>
#include <vector>

#include "pfl/grid.hpp"

namespace pfl::io {

// Binary PGM (P5, maxval 255). Values are clamped to [0,1] and quantized as
// round(255*x), halves rounding up; header is exactly "P5\n<w> <h>\n255\n".
std::vector<unsigned char> encode_pgm(const Field2D& frame);
void write_pgm(const std::filesystem::path& path, const Field2D& frame);

// Binary PPM (P6) with the gray value replicated into all three channels.
std::vector<unsigned char> encode_ppm(const Field2D& frame);
void write_ppm(const std::filesystem::path& path, const Field2D& frame);

// Readers for the two formats above; pixel bytes map back to value/255.
// PPM channels are averaged.
Field2D read_pgm(const std::filesystem::path& path);
Field2D read_ppm(const std::filesystem::path& path);

}  // namespace pfl::io
