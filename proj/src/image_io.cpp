#include "spim/image_io.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <stdexcept>

#include "spim/instance_io.hpp"

namespace spim {

namespace {

constexpr char kMagic[8] = {'S', 'P', 'I', 'M', 'I', 'M', 'G', '1'};
constexpr std::size_t kHeaderBytes = 32;

static_assert(std::endian::native == std::endian::little, "raw image I/O assumes a little-endian host");

void put_u64(std::string& out, std::uint64_t v) {
  char b[8];
  std::memcpy(b, &v, 8);
  out.append(b, 8);
}

std::uint64_t get_u64(std::string_view in, std::size_t offset) {
  std::uint64_t v;
  std::memcpy(&v, in.data() + offset, 8);
  return v;
}

}  // namespace

std::string encode_pgm16(const IntensityImage& image) {
  const auto& px = image.pixels.data();
  double peak = 0.0;
  for (double v : px) peak = std::max(peak, v);
  std::string out = "P5\n" + std::to_string(image.cols()) + " " + std::to_string(image.rows()) + "\n65535\n";
  out.reserve(out.size() + 2 * px.size());
  for (double v : px) {
    const double scaled = peak > 0.0 ? std::clamp(v / peak, 0.0, 1.0) * 65535.0 : 0.0;
    const auto s = static_cast<std::uint16_t>(std::lround(scaled));
    out.push_back(static_cast<char>(s >> 8));
    out.push_back(static_cast<char>(s & 0xff));
  }
  return out;
}

void write_pgm16(const std::filesystem::path& path, const IntensityImage& image) {
  write_file_atomic(path, encode_pgm16(image));
}

std::string encode_raw(const IntensityImage& image) {
  std::string out(kMagic, 8);
  put_u64(out, image.rows());
  put_u64(out, image.cols());
  out.push_back(image.normalized ? 1 : 0);
  out.append(7, '\0');
  const auto& px = image.pixels.data();
  out.append(reinterpret_cast<const char*>(px.data()), px.size() * sizeof(double));
  return out;
}

IntensityImage decode_raw(std::string_view bytes) {
  if (bytes.size() < kHeaderBytes || std::memcmp(bytes.data(), kMagic, 8) != 0)
    throw std::runtime_error("not a raw intensity image");
  const std::uint64_t rows = get_u64(bytes, 8), cols = get_u64(bytes, 16);
  if (rows != 0 && cols > (bytes.size() - kHeaderBytes) / sizeof(double) / rows)
    throw std::runtime_error("raw image truncated");
  if (bytes.size() != kHeaderBytes + rows * cols * sizeof(double)) throw std::runtime_error("raw image size mismatch");
  IntensityImage img{Grid2D<double>(rows, cols), bytes[24] != 0};
  std::memcpy(img.pixels.data().data(), bytes.data() + kHeaderBytes, rows * cols * sizeof(double));
  return img;
}

void write_raw(const std::filesystem::path& path, const IntensityImage& image) {
  write_file_atomic(path, encode_raw(image));
}

IntensityImage read_raw(const std::filesystem::path& path) { return decode_raw(read_file(path)); }

}  // namespace spim
