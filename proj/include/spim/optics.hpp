#pragma once

#include <complex>
#include <cstddef>
#include <cstdint>
#include <memory>
#include <optional>
#include <utility>
#include <vector>

#include "spim/encoding.hpp"
#include "spim/graph.hpp"

namespace spim {

/// Row-major 2D array.
template <class T>
class Grid2D {
 public:
  Grid2D() = default;
  Grid2D(std::size_t rows, std::size_t cols, T fill = T{}) : rows_(rows), cols_(cols), data_(rows * cols, fill) {}

  std::size_t rows() const noexcept { return rows_; }
  std::size_t cols() const noexcept { return cols_; }
  std::size_t size() const noexcept { return data_.size(); }

  T& operator()(std::size_t r, std::size_t c) noexcept { return data_[r * cols_ + c]; }
  const T& operator()(std::size_t r, std::size_t c) const noexcept { return data_[r * cols_ + c]; }

  std::vector<T>& data() noexcept { return data_; }
  const std::vector<T>& data() const noexcept { return data_; }

  friend bool operator==(const Grid2D&, const Grid2D&) = default;

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<T> data_;
};

struct OpticalGeometry {
  std::size_t slm_cols = 1920;
  std::size_t slm_rows = 1080;
  std::size_t macropixel = 10;  // pixels per spin cell side; even
  std::size_t padding = 2;      // zero-padding factor of the simulated Fourier plane
  // Physical metadata; the simulator works in DFT sample units.
  double wavelength_nm = 632.8;
  double focal_length_mm = 150.0;
  double pixel_pitch_um = 6.4;

  void validate() const;
  std::size_t max_grid_cols() const noexcept { return slm_cols / macropixel; }
  std::size_t max_grid_rows() const noexcept { return slm_rows / macropixel; }
};

/// Spin l sits in macropixel (l / grid_cols, l % grid_cols); remaining cells are dark.
struct MacropixelLayout {
  std::size_t n = 0;
  std::size_t grid_cols = 0;
  std::size_t grid_rows = 0;
  std::size_t padding = 1;

  std::pair<std::size_t, std::size_t> cell_of(std::size_t spin) const noexcept {
    return {spin / grid_cols, spin % grid_cols};
  }
  std::optional<std::size_t> spin_at(std::size_t row, std::size_t col) const noexcept {
    const std::size_t s = row * grid_cols + col;
    return s < n ? std::optional<std::size_t>(s) : std::nullopt;
  }
  std::size_t cells() const noexcept { return grid_cols * grid_rows; }
  std::size_t dark_cells() const noexcept { return cells() - n; }
};

/// Compact near-square grid within the SLM; throws if n does not fit.
MacropixelLayout build_layout(std::size_t n, const OpticalGeometry& geometry = {});
/// Explicit grid (padding 1).
MacropixelLayout build_layout(std::size_t n, std::size_t grid_cols, std::size_t grid_rows, std::size_t padding = 1);

/// SLM plane at sub-block resolution: each macropixel is a 2x2 block laid out
/// [phi - alpha, theta - beta; phi + alpha, theta + beta].
struct PhaseMask {
  Grid2D<double> phase;       // radians in [0, 2pi)
  Grid2D<std::uint8_t> live;  // 0 = dark (zero amplitude)
};

/// Which quadrature sub-blocks transmit light.
enum class MaskPart { both, x_only, y_only };

PhaseMask synthesize_mask(const Rank2Encoding& enc, const SpinConfig& config, const MacropixelLayout& layout,
                          MaskPart part = MaskPart::both);

using ComplexField = Grid2D<std::complex<double>>;

struct IntensityImage {
  Grid2D<double> pixels;
  bool normalized = false;

  std::size_t rows() const noexcept { return pixels.rows(); }
  std::size_t cols() const noexcept { return pixels.cols(); }
  double center() const noexcept { return pixels(pixels.rows() / 2, pixels.cols() / 2); }
};

/// Field amplitude sum over one spin cell is 2 (x eps + i y eta), so the
/// centre intensity is this factor times the closed-form readout.
inline constexpr double kCellAreaFactor = 4.0;

/// Centered, unnormalized 2D DFT of exp(i phase) (dark samples contribute 0),
/// zero-padded by `padding` along each axis. DC lands at (rows/2, cols/2).
/// Reuses one FFTW plan per instance; not shareable across threads.
class FourierPropagator {
 public:
  FourierPropagator(std::size_t rows, std::size_t cols);
  ~FourierPropagator();
  FourierPropagator(const FourierPropagator&) = delete;
  FourierPropagator& operator=(const FourierPropagator&) = delete;
  FourierPropagator(FourierPropagator&&) noexcept;
  FourierPropagator& operator=(FourierPropagator&&) noexcept;

  std::size_t rows() const noexcept;
  std::size_t cols() const noexcept;

  ComplexField propagate(const PhaseMask& mask);
  /// |propagate(mask)|^2 without materializing the complex field.
  IntensityImage intensity(const PhaseMask& mask);

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

ComplexField propagate(const PhaseMask& mask, std::size_t padding = 1);
IntensityImage intensity_of(const ComplexField& field);

struct DcReadout {
  double p_x = 0.0;  // (sum eps_l x_l)^2
  double p_y = 0.0;  // (sum eta_l y_l)^2, y = A x
  double total() const noexcept { return p_x + p_y; }
};

/// Closed-form centre readout, O(n).
DcReadout dc_readout(const Rank2Encoding& enc, const SpinConfig& config);

/// H = -sum_{l<k} (eps_l eps_k x_l x_k + s eta_l eta_k y_l y_k)
///   = -1/2 [(P_x - sum eps^2) + s (P_y - sum eta^2)].
double quadrature_hamiltonian_readout(const Rank2Encoding& enc, const SpinConfig& config);

/// Focused spot of the unmodulated beam: every grid cell live at zero phase, max-normalized.
IntensityImage target_image(const MacropixelLayout& layout);

/// Elementwise L2 norm of a - b.
double image_distance(const IntensityImage& a, const IntensityImage& b);

}  // namespace spim
