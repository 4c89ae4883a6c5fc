#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "spim/encoding.hpp"
#include "spim/graph.hpp"
#include "spim/noise.hpp"
#include "spim/optics.hpp"
#include "spim/rng.hpp"

namespace spim {

enum class CostBackend { full_field, closed_form };

// hamiltonian: cost = P_x + s P_y = 2 H + const, where H = sum w x x is the
//   Max-cut Hamiltonian of the encoded weights; minimizing it maximizes the cut.
// image_distance: ||I_T - I||_2 against the focused target (full_field only).
//   It is minimized by concentrating light at the centre, which drives the
//   machine toward the opposite (ferromagnetic) end of the same Hamiltonian.
enum class Objective { hamiltonian, image_distance };

std::string to_string(CostBackend backend);
std::string to_string(Objective objective);
CostBackend parse_backend(const std::string& text);
Objective parse_objective(const std::string& text);

/// Backend used when none is requested: closed form above this spin count.
inline constexpr std::size_t kFullFieldMaxSpins = 1024;

struct AnnealParams {
  std::size_t iterations = 100;
  std::size_t restarts = 1;
  double initial_flip_fraction = 0.5;
  std::optional<double> final_flip_fraction;  // default 1/n
  std::optional<double> temperature_start;    // default: std-dev of warm-up costs
  std::size_t warmup_proposals = 20;
  double cooling_rate = 0.95;
  std::optional<CostBackend> backend;  // default by problem size
  Objective objective = Objective::hamiltonian;
  NoiseSpec noise;
  std::uint64_t seed = 0;

  void validate() const;
  CostBackend resolved_backend(std::size_t n) const noexcept;
  double resolved_final_flip_fraction(std::size_t n) const noexcept;
};

struct TraceRecord {
  std::size_t iteration = 0;
  double cost = 0.0;           // cost of the current state after the accept/reject decision
  double proposed_cost = 0.0;
  double hamiltonian = 0.0;    // noiseless, on the scoring instance
  double cut_value = 0.0;
  double best_cut = 0.0;
  double temperature = 0.0;
  double flip_fraction = 0.0;
  std::size_t flips_proposed = 0;
  bool accepted = false;
};

struct AnnealTrace {
  std::vector<TraceRecord> records;
  double initial_cut = 0.0;
  double initial_temperature = 0.0;
  SpinConfig best_config;
  double best_cut = 0.0;
  std::size_t restart = 0;
  std::uint64_t seed = 0;
};

struct AnnealResult {
  CutReport report;
  std::vector<AnnealTrace> traces;  // one per restart
  std::size_t best_restart = 0;
};

/// Stateful cost measurement for one annealing run: keeps the FFT plan, the
/// target image and the noise stream.
class CostEvaluator {
 public:
  CostEvaluator(const Rank2Encoding& enc, const MacropixelLayout& layout, CostBackend backend, Objective objective,
                double noise_level, Rng noise_rng);
  ~CostEvaluator();
  CostEvaluator(CostEvaluator&&) noexcept;
  CostEvaluator& operator=(CostEvaluator&&) noexcept;

  double operator()(const SpinConfig& config);

  CostBackend backend() const noexcept { return backend_; }
  Objective objective() const noexcept { return objective_; }

 private:
  double quadrature_power(const SpinConfig& config, MaskPart part);

  Rank2Encoding enc_;
  MacropixelLayout layout_;
  std::vector<double> eps_;
  std::vector<double> coupled_eta_;
  CostBackend backend_;
  Objective objective_;
  double noise_level_;
  double closed_form_scale_ = 0.0;
  Rng noise_rng_;
  std::unique_ptr<FourierPropagator> propagator_;
  IntensityImage target_;
};

/// Each spin flips independently with probability `flip_fraction`; if none
/// did, one uniformly chosen spin is flipped.
SpinConfig propose_batch_flip(const SpinConfig& config, double flip_fraction, Rng& rng);

/// Accept when delta <= 0, otherwise with probability exp(-delta / temperature).
bool metropolis_accept(double delta_cost, double temperature, Rng& rng);

/// One cost measurement; the noise stream is seeded from params.noise.seed.
double cost_eval(const Rank2Encoding& enc, const SpinConfig& config, const MacropixelLayout& layout,
                 const AnnealParams& params);

/// Simulated annealing with the optical cost in the loop. The returned report
/// holds the best state by noiseless cut value on `instance` over all restarts.
AnnealResult anneal(const MaxCutInstance& instance, const Rank2Encoding& enc, const MacropixelLayout& layout,
                    const AnnealParams& params);

}  // namespace spim
