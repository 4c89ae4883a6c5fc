#pragma once

#include <cstdint>
#include <vector>

#include "spim/graph.hpp"

namespace spim {

/// Signed permutation y = A x with (A x)_{p(l)} = sigma_l * x_l.
/// These are exactly the linear maps sending every spin vector to a spin vector.
struct SignedPermutation {
  std::vector<std::uint32_t> perm;
  std::vector<std::int8_t> sigma;

  static SignedPermutation identity(std::size_t n);

  std::size_t size() const noexcept { return perm.size(); }
  bool is_identity() const noexcept;
  /// Throws std::invalid_argument unless perm is a permutation and sigma is +-1.
  void validate() const;
  SpinConfig apply(const SpinConfig& x) const;
};

/// Snaps |cos(angle)| below 1e-15 to exactly zero so that pi/2 phases yield
/// exact zero couplings.
double amplitude_of(double angle) noexcept;

/// Per-spin Euler phases: eps_l = cos(alpha_l), eta_l = cos(beta_l).
struct Rank2Encoding {
  std::vector<double> alpha;
  std::vector<double> beta;
  int sign = 1;
  SignedPermutation aux;

  static Rank2Encoding from_phases(std::vector<double> alpha, std::vector<double> beta, int sign);
  /// Amplitudes in [-1, 1] are converted with acos.
  static Rank2Encoding from_amplitudes(const std::vector<double>& eps, const std::vector<double>& eta, int sign,
                                       SignedPermutation aux);

  std::size_t size() const noexcept { return alpha.size(); }
  double eps(std::size_t l) const noexcept { return amplitude_of(alpha[l]); }
  double eta(std::size_t l) const noexcept { return amplitude_of(beta[l]); }
  std::vector<double> eps_vector() const;
  std::vector<double> eta_vector() const;
  /// Amplitude multiplying x_l in the quadrature term: sigma_l * eta_{p(l)}.
  std::vector<double> coupled_eta() const;

  void validate() const;
};

/// w_lk = eps_l eps_k + s * sigma_l sigma_k eta_{p(l)} eta_{p(k)}, as an implicit dense instance.
MaxCutInstance weights_from_encoding(const Rank2Encoding& enc);

struct GeneratedInstance {
  MaxCutInstance instance;  // exactly floor(density * n(n-1)/2) nonzero pairs
  Rank2Encoding encoding;   // parent encoding the machine optimizes
};

/// alpha, beta ~ U[0, pi]. Density below 1 is reached by silencing one
/// quadrature on two disjoint vertex groups A (eta = 0) and B (eps = 0), which
/// zeroes all A-B pairs exactly; any remaining zeros are the smallest-|w| pairs.
/// When no such remainder is needed the instance equals the parent and is
/// stored in implicit low-rank form.
GeneratedInstance generate_instance(std::size_t n, double density, int sign, std::uint64_t seed);

struct Rank2Fit {
  Rank2Encoding encoding;
  double residual = 0.0;  // ||offdiag(W - scale * W_enc)||_F
  double scale = 1.0;     // W ~ scale * weights_from_encoding(encoding)
  bool exact = false;     // diagonal completion found an in-family representation
};

/// Two-term signed spectral approximation of an arbitrary instance (dense eigendecomposition).
Rank2Fit fit_rank2(const MaxCutInstance& instance);

}  // namespace spim
