#include "spim/noise.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <stdexcept>

namespace spim {

void NoiseSpec::validate() const {
  if (!(level >= 0.0)) throw std::invalid_argument("noise level must be >= 0");
  if (level >= 1.0) throw std::invalid_argument("noise level must be < 1");
}

IntensityImage normalize_image(const IntensityImage& image) {
  double peak = -std::numeric_limits<double>::infinity();
  for (double v : image.pixels.data()) peak = std::max(peak, v);
  if (!(peak > 0.0)) throw std::invalid_argument("cannot normalize an image without a positive maximum");
  IntensityImage out = image;
  for (double& v : out.pixels.data()) v /= peak;
  out.normalized = true;
  return out;
}

IntensityImage add_noise(const IntensityImage& image, double level, Rng& rng) {
  NoiseSpec{level, 0}.validate();
  IntensityImage out = image;
  if (level == 0.0) return out;
  std::normal_distribution<double> gauss(0.0, std::sqrt(level));
  for (double& v : out.pixels.data()) v += gauss(rng);
  return out;
}

IntensityImage add_noise(const IntensityImage& image, const NoiseSpec& spec) {
  Rng rng = make_rng(spec.seed, 0, 0x6e6f697365);
  return add_noise(image, spec.level, rng);
}

}  // namespace spim
