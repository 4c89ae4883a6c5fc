#include "spim/anneal.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <numeric>
#include <random>
#include <stdexcept>

namespace spim {

namespace {

constexpr std::uint64_t kMoveTag = 0x6d6f7665;
constexpr std::uint64_t kNoiseTag = 0x6e6f6973;
constexpr std::uint64_t kInitTag = 0x696e6974;

double stddev(const std::vector<double>& v) {
  if (v.size() < 2) return 0.0;
  const double mean = std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
  double ss = 0.0;
  for (double x : v) ss += (x - mean) * (x - mean);
  return std::sqrt(ss / static_cast<double>(v.size() - 1));
}

SpinConfig random_config(std::size_t n, Rng& rng) {
  std::vector<std::int8_t> x(n);
  std::bernoulli_distribution coin(0.5);
  for (auto& s : x) s = coin(rng) ? 1 : -1;
  return SpinConfig(std::move(x));
}

std::size_t hamming(const SpinConfig& a, const SpinConfig& b) {
  std::size_t d = 0;
  for (std::size_t i = 0; i < a.size(); ++i) d += a[i] != b[i];
  return d;
}

}  // namespace

std::string to_string(CostBackend backend) {
  return backend == CostBackend::full_field ? "full_field" : "closed_form";
}

std::string to_string(Objective objective) {
  return objective == Objective::hamiltonian ? "hamiltonian" : "image_distance";
}

CostBackend parse_backend(const std::string& text) {
  if (text == "full_field") return CostBackend::full_field;
  if (text == "closed_form") return CostBackend::closed_form;
  throw std::invalid_argument("unknown cost backend '" + text + "'");
}

Objective parse_objective(const std::string& text) {
  if (text == "hamiltonian") return Objective::hamiltonian;
  if (text == "image_distance") return Objective::image_distance;
  throw std::invalid_argument("unknown objective '" + text + "'");
}

void AnnealParams::validate() const {
  if (iterations < 1) throw std::invalid_argument("iterations must be >= 1");
  if (restarts < 1) throw std::invalid_argument("restarts must be >= 1");
  if (!(initial_flip_fraction > 0.0 && initial_flip_fraction <= 1.0))
    throw std::invalid_argument("initial flip fraction must lie in (0, 1]");
  if (final_flip_fraction && !(*final_flip_fraction > 0.0 && *final_flip_fraction <= initial_flip_fraction))
    throw std::invalid_argument("final flip fraction must lie in (0, initial flip fraction]");
  if (!(cooling_rate > 0.0 && cooling_rate < 1.0)) throw std::invalid_argument("cooling rate must lie in (0, 1)");
  if (temperature_start && !(*temperature_start > 0.0)) throw std::invalid_argument("start temperature must be > 0");
  if (backend == CostBackend::closed_form && objective == Objective::image_distance)
    throw std::invalid_argument("image_distance objective requires the full_field backend");
  noise.validate();
}

CostBackend AnnealParams::resolved_backend(std::size_t n) const noexcept {
  if (backend) return *backend;
  if (objective == Objective::image_distance) return CostBackend::full_field;
  return n > kFullFieldMaxSpins ? CostBackend::closed_form : CostBackend::full_field;
}

double AnnealParams::resolved_final_flip_fraction(std::size_t n) const noexcept {
  if (final_flip_fraction) return *final_flip_fraction;
  return std::min(initial_flip_fraction, 1.0 / static_cast<double>(n));
}

CostEvaluator::CostEvaluator(const Rank2Encoding& enc, const MacropixelLayout& layout, CostBackend backend,
                             Objective objective, double noise_level, Rng noise_rng)
    : enc_(enc),
      layout_(layout),
      eps_(enc.eps_vector()),
      coupled_eta_(enc.coupled_eta()),
      backend_(backend),
      objective_(objective),
      noise_level_(noise_level),
      noise_rng_(noise_rng) {
  enc_.validate();
  NoiseSpec{noise_level, 0}.validate();
  if (layout.n != enc.size()) throw std::invalid_argument("layout size does not match encoding");
  if (backend == CostBackend::closed_form && objective == Objective::image_distance)
    throw std::invalid_argument("image_distance objective requires the full_field backend");

  if (backend == CostBackend::full_field) {
    propagator_ = std::make_unique<FourierPropagator>(2 * layout.grid_rows * layout.padding,
                                                      2 * layout.grid_cols * layout.padding);
    if (objective == Objective::image_distance) target_ = target_image(layout);
  } else {
    // Peak of the focused target, i.e. the intensity that normalizes detected images.
    double se = 0.0, sh = 0.0;
    for (std::size_t l = 0; l < eps_.size(); ++l) {
      se += std::abs(eps_[l]);
      sh += std::abs(coupled_eta_[l]);
    }
    closed_form_scale_ = se * se + sh * sh;
  }
}

CostEvaluator::~CostEvaluator() = default;
CostEvaluator::CostEvaluator(CostEvaluator&&) noexcept = default;
CostEvaluator& CostEvaluator::operator=(CostEvaluator&&) noexcept = default;

// Centre pixel of one quadrature-resolved detection, returned in closed-form units.
double CostEvaluator::quadrature_power(const SpinConfig& config, MaskPart part) {
  const IntensityImage raw = propagator_->intensity(synthesize_mask(enc_, config, layout_, part));
  double peak = 0.0;
  for (double v : raw.pixels.data()) peak = std::max(peak, v);
  if (!(peak > 0.0)) return 0.0;
  double centre = raw.center() / peak;
  // Only the centre pixel is read, so drawing the one sample that lands on it
  // is equivalent to noising the whole normalized frame.
  if (noise_level_ > 0.0) centre += std::normal_distribution<double>(0.0, std::sqrt(noise_level_))(noise_rng_);
  return centre * peak / kCellAreaFactor;
}

double CostEvaluator::operator()(const SpinConfig& config) {
  if (config.size() != eps_.size()) throw std::invalid_argument("config size does not match encoding");

  if (backend_ == CostBackend::closed_form) {
    double sx = 0.0, sy = 0.0;
    for (std::size_t l = 0; l < eps_.size(); ++l) {
      sx += eps_[l] * config[l];
      sy += coupled_eta_[l] * config[l];
    }
    double px = sx * sx, py = sy * sy;
    if (noise_level_ > 0.0) {
      std::normal_distribution<double> gauss(0.0, std::sqrt(noise_level_) * closed_form_scale_);
      px += gauss(noise_rng_);
      py += gauss(noise_rng_);
    }
    return px + enc_.sign * py;
  }

  if (objective_ == Objective::image_distance) {
    IntensityImage img = normalize_image(propagator_->intensity(synthesize_mask(enc_, config, layout_)));
    if (noise_level_ > 0.0) img = add_noise(img, noise_level_, noise_rng_);
    return image_distance(target_, img);
  }

  const double px = quadrature_power(config, MaskPart::x_only);
  const double py = quadrature_power(config, MaskPart::y_only);
  return px + enc_.sign * py;
}

SpinConfig propose_batch_flip(const SpinConfig& config, double flip_fraction, Rng& rng) {
  if (!(flip_fraction > 0.0 && flip_fraction <= 1.0)) throw std::invalid_argument("flip fraction must lie in (0, 1]");
  if (config.size() == 0) return config;
  SpinConfig out = config;
  std::bernoulli_distribution flip(flip_fraction);
  bool any = false;
  for (std::size_t i = 0; i < out.size(); ++i)
    if (flip(rng)) {
      out.flip(i);
      any = true;
    }
  if (!any) out.flip(std::uniform_int_distribution<std::size_t>(0, out.size() - 1)(rng));
  return out;
}

bool metropolis_accept(double delta_cost, double temperature, Rng& rng) {
  if (!(temperature > 0.0)) throw std::invalid_argument("temperature must be > 0");
  if (delta_cost <= 0.0) return true;
  return std::uniform_real_distribution<double>(0.0, 1.0)(rng) < std::exp(-delta_cost / temperature);
}

double cost_eval(const Rank2Encoding& enc, const SpinConfig& config, const MacropixelLayout& layout,
                 const AnnealParams& params) {
  params.validate();
  CostEvaluator eval(enc, layout, params.resolved_backend(enc.size()), params.objective, params.noise.level,
                     make_rng(params.noise.seed, 0, kNoiseTag));
  return eval(config);
}

namespace {

AnnealTrace run_restart(const MaxCutInstance& instance, const Rank2Encoding& enc, const MacropixelLayout& layout,
                        const AnnealParams& params, std::size_t restart) {
  const std::size_t n = instance.size();
  AnnealTrace trace;
  trace.restart = restart;
  trace.seed = derive_seed(params.seed, restart, kMoveTag);

  Rng moves(trace.seed);
  Rng init = make_rng(params.seed, restart, kInitTag);
  CostEvaluator cost(enc, layout, params.resolved_backend(n), params.objective, params.noise.level,
                     make_rng(derive_seed(params.seed, params.noise.seed), restart, kNoiseTag));

  SpinConfig current = random_config(n, init);
  double current_cost = cost(current);

  double t0 = 0.0;
  if (params.temperature_start) {
    t0 = *params.temperature_start;
  } else {
    std::vector<double> warm;
    warm.reserve(params.warmup_proposals);
    for (std::size_t i = 0; i < params.warmup_proposals; ++i)
      warm.push_back(cost(propose_batch_flip(current, params.initial_flip_fraction, init)));
    t0 = stddev(warm);
    if (!(t0 > 0.0) || !std::isfinite(t0)) t0 = std::max(1e-12, 1e-12 * std::abs(current_cost));
  }
  trace.initial_temperature = t0;

  double current_cut = cut_value(instance, current);
  double current_h = hamiltonian(instance, current);
  trace.initial_cut = current_cut;
  trace.best_cut = current_cut;
  trace.best_config = current;

  const double p0 = params.initial_flip_fraction;
  const double p1 = params.resolved_final_flip_fraction(n);
  const std::size_t iters = params.iterations;
  trace.records.reserve(iters);
  double temperature = t0;
  for (std::size_t t = 0; t < iters; ++t) {
    const double progress = iters > 1 ? static_cast<double>(t) / static_cast<double>(iters - 1) : 0.0;
    const double fraction = p0 * std::pow(p1 / p0, progress);

    SpinConfig candidate = propose_batch_flip(current, fraction, moves);
    const std::size_t flips = hamming(current, candidate);
    const double candidate_cost = cost(candidate);
    const bool accepted = metropolis_accept(candidate_cost - current_cost, temperature, moves);
    if (accepted) {
      current = std::move(candidate);
      current_cost = candidate_cost;
      current_cut = cut_value(instance, current);
      current_h = hamiltonian(instance, current);
      if (current_cut > trace.best_cut) {
        trace.best_cut = current_cut;
        trace.best_config = current;
      }
    }
    trace.records.push_back({t, current_cost, candidate_cost, current_h, current_cut, trace.best_cut, temperature,
                             fraction, flips, accepted});
    temperature *= params.cooling_rate;
  }
  return trace;
}

}  // namespace

AnnealResult anneal(const MaxCutInstance& instance, const Rank2Encoding& enc, const MacropixelLayout& layout,
                    const AnnealParams& params) {
  params.validate();
  enc.validate();
  if (instance.size() != enc.size())
    throw std::invalid_argument("instance has " + std::to_string(instance.size()) + " vertices, encoding has " +
                                std::to_string(enc.size()) + " spins");
  if (layout.n != enc.size()) throw std::invalid_argument("layout size does not match encoding");

  const auto start = std::chrono::steady_clock::now();
  AnnealResult result;
  result.traces.reserve(params.restarts);
  for (std::size_t r = 0; r < params.restarts; ++r) {
    result.traces.push_back(run_restart(instance, enc, layout, params, r));
    if (result.traces[r].best_cut > result.traces[result.best_restart].best_cut) result.best_restart = r;
  }
  const double elapsed = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  result.report =
      make_report(instance, result.traces[result.best_restart].best_config, "euler-sim", params.seed, elapsed);
  return result;
}

}  // namespace spim
