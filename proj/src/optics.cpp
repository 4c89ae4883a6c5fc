#include "spim/optics.hpp"

#include <fftw3.h>

#include <cmath>
#include <mutex>
#include <numbers>
#include <stdexcept>
#include <string>

namespace spim {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

// FFTW's planner is not re-entrant.
std::mutex& planner_mutex() {
  static std::mutex m;
  return m;
}

double wrap_phase(double phase) {
  double p = std::fmod(phase, kTwoPi);
  if (p < 0.0) p += kTwoPi;
  if (p >= kTwoPi) p = 0.0;
  return p;
}

std::size_t ceil_sqrt(std::size_t n) {
  auto r = static_cast<std::size_t>(std::sqrt(static_cast<double>(n)));
  while (r * r < n) ++r;
  while (r > 0 && (r - 1) * (r - 1) >= n) --r;
  return r;
}

void check_sizes(const Rank2Encoding& enc, const SpinConfig& config) {
  if (enc.size() != config.size())
    throw std::invalid_argument("encoding has " + std::to_string(enc.size()) + " spins, config has " +
                                std::to_string(config.size()));
}

}  // namespace

void OpticalGeometry::validate() const {
  if (macropixel == 0 || macropixel % 2 != 0)
    throw std::invalid_argument("macropixel must be a positive even number of pixels");
  if (slm_cols < macropixel || slm_rows < macropixel)
    throw std::invalid_argument("SLM smaller than one macropixel");
  if (padding == 0) throw std::invalid_argument("padding factor must be >= 1");
}

MacropixelLayout build_layout(std::size_t n, const OpticalGeometry& geometry) {
  geometry.validate();
  if (n == 0) throw std::invalid_argument("layout needs at least one spin");
  const std::size_t max_cols = geometry.max_grid_cols();
  const std::size_t max_rows = geometry.max_grid_rows();
  if (n > max_cols * max_rows)
    throw std::invalid_argument(std::to_string(n) + " spins do not fit on a " + std::to_string(max_cols) + "x" +
                                std::to_string(max_rows) + " macropixel grid");
  std::size_t cols = std::max(ceil_sqrt(n), (n + max_rows - 1) / max_rows);
  cols = std::min(cols, max_cols);
  const std::size_t rows = (n + cols - 1) / cols;
  return MacropixelLayout{n, cols, rows, geometry.padding};
}

MacropixelLayout build_layout(std::size_t n, std::size_t grid_cols, std::size_t grid_rows, std::size_t padding) {
  if (n == 0) throw std::invalid_argument("layout needs at least one spin");
  if (padding == 0) throw std::invalid_argument("padding factor must be >= 1");
  if (grid_cols * grid_rows < n)
    throw std::invalid_argument(std::to_string(n) + " spins do not fit on a " + std::to_string(grid_cols) + "x" +
                                std::to_string(grid_rows) + " grid");
  return MacropixelLayout{n, grid_cols, grid_rows, padding};
}

PhaseMask synthesize_mask(const Rank2Encoding& enc, const SpinConfig& config, const MacropixelLayout& layout,
                          MaskPart part) {
  check_sizes(enc, config);
  if (layout.n != config.size()) throw std::invalid_argument("layout size does not match config");
  const SpinConfig y = enc.aux.apply(config);

  PhaseMask mask{Grid2D<double>(2 * layout.grid_rows, 2 * layout.grid_cols, 0.0),
                 Grid2D<std::uint8_t>(2 * layout.grid_rows, 2 * layout.grid_cols, 0)};
  const bool x_live = part != MaskPart::y_only;
  const bool y_live = part != MaskPart::x_only;
  for (std::size_t l = 0; l < config.size(); ++l) {
    const auto [row, col] = layout.cell_of(l);
    const double phi = config[l] > 0 ? 0.0 : std::numbers::pi;
    const double theta = y[l] > 0 ? 0.5 * std::numbers::pi : 1.5 * std::numbers::pi;
    const std::size_t r = 2 * row, c = 2 * col;
    mask.phase(r, c) = wrap_phase(phi - enc.alpha[l]);
    mask.phase(r, c + 1) = wrap_phase(theta - enc.beta[l]);
    mask.phase(r + 1, c) = wrap_phase(phi + enc.alpha[l]);
    mask.phase(r + 1, c + 1) = wrap_phase(theta + enc.beta[l]);
    mask.live(r, c) = mask.live(r + 1, c) = x_live;
    mask.live(r, c + 1) = mask.live(r + 1, c + 1) = y_live;
  }
  return mask;
}

struct FourierPropagator::Impl {
  std::size_t rows = 0, cols = 0;
  fftw_complex* buffer = nullptr;
  fftw_plan plan = nullptr;

  Impl(std::size_t r, std::size_t c) : rows(r), cols(c) {
    if (r == 0 || c == 0) throw std::invalid_argument("empty transform");
    std::lock_guard lock(planner_mutex());
    buffer = static_cast<fftw_complex*>(fftw_malloc(sizeof(fftw_complex) * r * c));
    if (!buffer) throw std::bad_alloc();
    plan = fftw_plan_dft_2d(static_cast<int>(r), static_cast<int>(c), buffer, buffer, FFTW_FORWARD, FFTW_ESTIMATE);
    if (!plan) {
      fftw_free(buffer);
      throw std::runtime_error("FFTW planning failed");
    }
  }
  ~Impl() {
    std::lock_guard lock(planner_mutex());
    fftw_destroy_plan(plan);
    fftw_free(buffer);
  }

  void load_and_run(const PhaseMask& mask) {
    const std::size_t mr = mask.phase.rows(), mc = mask.phase.cols();
    if (mr > rows || mc > cols) throw std::invalid_argument("mask larger than transform");
    for (std::size_t i = 0; i < rows * cols; ++i) buffer[i][0] = buffer[i][1] = 0.0;
    for (std::size_t r = 0; r < mr; ++r)
      for (std::size_t c = 0; c < mc; ++c) {
        if (!mask.live(r, c)) continue;
        const double p = mask.phase(r, c);
        buffer[r * cols + c][0] = std::cos(p);
        buffer[r * cols + c][1] = std::sin(p);
      }
    fftw_execute(plan);
  }

  // Frequency (fr, fc) goes to the DC-centred position.
  std::size_t shifted(std::size_t fr, std::size_t fc) const noexcept {
    return ((fr + rows / 2) % rows) * cols + (fc + cols / 2) % cols;
  }
};

FourierPropagator::FourierPropagator(std::size_t rows, std::size_t cols) : impl_(std::make_unique<Impl>(rows, cols)) {}
FourierPropagator::~FourierPropagator() = default;
FourierPropagator::FourierPropagator(FourierPropagator&&) noexcept = default;
FourierPropagator& FourierPropagator::operator=(FourierPropagator&&) noexcept = default;

std::size_t FourierPropagator::rows() const noexcept { return impl_->rows; }
std::size_t FourierPropagator::cols() const noexcept { return impl_->cols; }

ComplexField FourierPropagator::propagate(const PhaseMask& mask) {
  impl_->load_and_run(mask);
  ComplexField out(impl_->rows, impl_->cols);
  auto& data = out.data();
  for (std::size_t fr = 0; fr < impl_->rows; ++fr)
    for (std::size_t fc = 0; fc < impl_->cols; ++fc) {
      const auto& v = impl_->buffer[fr * impl_->cols + fc];
      data[impl_->shifted(fr, fc)] = {v[0], v[1]};
    }
  return out;
}

IntensityImage FourierPropagator::intensity(const PhaseMask& mask) {
  impl_->load_and_run(mask);
  IntensityImage out{Grid2D<double>(impl_->rows, impl_->cols), false};
  auto& data = out.pixels.data();
  for (std::size_t fr = 0; fr < impl_->rows; ++fr)
    for (std::size_t fc = 0; fc < impl_->cols; ++fc) {
      const auto& v = impl_->buffer[fr * impl_->cols + fc];
      data[impl_->shifted(fr, fc)] = v[0] * v[0] + v[1] * v[1];
    }
  return out;
}

ComplexField propagate(const PhaseMask& mask, std::size_t padding) {
  if (padding == 0) throw std::invalid_argument("padding factor must be >= 1");
  FourierPropagator prop(mask.phase.rows() * padding, mask.phase.cols() * padding);
  return prop.propagate(mask);
}

IntensityImage intensity_of(const ComplexField& field) {
  IntensityImage out{Grid2D<double>(field.rows(), field.cols()), false};
  for (std::size_t i = 0; i < field.size(); ++i) out.pixels.data()[i] = std::norm(field.data()[i]);
  return out;
}

DcReadout dc_readout(const Rank2Encoding& enc, const SpinConfig& config) {
  check_sizes(enc, config);
  const SpinConfig y = enc.aux.apply(config);
  double sx = 0.0, sy = 0.0;
  for (std::size_t l = 0; l < config.size(); ++l) {
    sx += enc.eps(l) * config[l];
    sy += enc.eta(l) * y[l];
  }
  return {sx * sx, sy * sy};
}

double quadrature_hamiltonian_readout(const Rank2Encoding& enc, const SpinConfig& config) {
  const DcReadout dc = dc_readout(enc, config);
  double ee = 0.0, hh = 0.0;
  for (std::size_t l = 0; l < enc.size(); ++l) {
    ee += enc.eps(l) * enc.eps(l);
    hh += enc.eta(l) * enc.eta(l);
  }
  return -0.5 * ((dc.p_x - ee) + enc.sign * (dc.p_y - hh));
}

IntensityImage target_image(const MacropixelLayout& layout) {
  PhaseMask mask{Grid2D<double>(2 * layout.grid_rows, 2 * layout.grid_cols, 0.0),
                 Grid2D<std::uint8_t>(2 * layout.grid_rows, 2 * layout.grid_cols, 1)};
  FourierPropagator prop(mask.phase.rows() * layout.padding, mask.phase.cols() * layout.padding);
  IntensityImage img = prop.intensity(mask);
  double peak = 0.0;
  for (double v : img.pixels.data()) peak = std::max(peak, v);
  for (double& v : img.pixels.data()) v /= peak;
  img.normalized = true;
  return img;
}

double image_distance(const IntensityImage& a, const IntensityImage& b) {
  if (a.rows() != b.rows() || a.cols() != b.cols())
    throw std::invalid_argument("image dimensions differ: " + std::to_string(a.rows()) + "x" + std::to_string(a.cols()) +
                                " vs " + std::to_string(b.rows()) + "x" + std::to_string(b.cols()));
  double sum = 0.0;
  const auto& pa = a.pixels.data();
  const auto& pb = b.pixels.data();
  for (std::size_t i = 0; i < pa.size(); ++i) {
    const double d = pa[i] - pb[i];
    sum += d * d;
  }
  return std::sqrt(sum);
}

}  // namespace spim
