#pragma once

#include <filesystem>
#include <string>

#include "spim/optics.hpp"

namespace spim {

/// Binary PGM (P5), maxval 65535, big-endian samples scaled so the image max maps to 65535.
/// Negative pixels (noisy images) clip to 0.
std::string encode_pgm16(const IntensityImage& image);
void write_pgm16(const std::filesystem::path& path, const IntensityImage& image);

// Raw dump: 8-byte magic "SPIMIMG1", uint64 rows, uint64 cols, uint8 normalized flag,
// 7 bytes zero padding, then rows*cols little-endian doubles, row-major.
std::string encode_raw(const IntensityImage& image);
IntensityImage decode_raw(std::string_view bytes);
void write_raw(const std::filesystem::path& path, const IntensityImage& image);
IntensityImage read_raw(const std::filesystem::path& path);

}  // namespace spim
