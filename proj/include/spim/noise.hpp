#pragma once

#include <cstdint>

#include "spim/optics.hpp"
#include "spim/rng.hpp"

namespace spim {

/// Zero-mean Gaussian detector noise; `level` is the variance on the
/// max-normalized intensity scale.
struct NoiseSpec {
  double level = 0.0;
  std::uint64_t seed = 0;

  /// Throws std::invalid_argument unless 0 <= level < 1.
  void validate() const;
  bool enabled() const noexcept { return level > 0.0; }
};

/// Divides by the image maximum. Throws if the maximum is not positive.
IntensityImage normalize_image(const IntensityImage& image);

/// Adds i.i.d. N(0, level) to every pixel, no clamping. Draws from `rng`.
IntensityImage add_noise(const IntensityImage& image, double level, Rng& rng);
/// Same, with a generator seeded from spec.seed.
IntensityImage add_noise(const IntensityImage& image, const NoiseSpec& spec);

}  // namespace spim
