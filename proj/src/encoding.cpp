#include "spim/encoding.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>
#include <random>
#include <sstream>
#include <string>

#include "spim/rng.hpp"

namespace spim {

namespace {

std::string format_density(double d) {
  std::ostringstream ss;
  ss << d;
  return ss.str();
}

}  // namespace

SignedPermutation SignedPermutation::identity(std::size_t n) {
  SignedPermutation a;
  a.perm.resize(n);
  std::iota(a.perm.begin(), a.perm.end(), 0u);
  a.sigma.assign(n, 1);
  return a;
}

bool SignedPermutation::is_identity() const noexcept {
  for (std::size_t l = 0; l < perm.size(); ++l)
    if (perm[l] != l || sigma[l] != 1) return false;
  return true;
}

void SignedPermutation::validate() const {
  if (perm.size() != sigma.size()) throw std::invalid_argument("permutation and sigma differ in length");
  std::vector<bool> seen(perm.size(), false);
  for (auto p : perm) {
    if (p >= perm.size() || seen[p]) throw std::invalid_argument("aux map is not a permutation");
    seen[p] = true;
  }
  for (auto s : sigma)
    if (s != 1 && s != -1) throw std::invalid_argument("aux map signs must be +-1");
}

SpinConfig SignedPermutation::apply(const SpinConfig& x) const {
  if (x.size() != perm.size()) throw std::invalid_argument("aux map size does not match config");
  std::vector<std::int8_t> y(x.size());
  for (std::size_t l = 0; l < x.size(); ++l) y[perm[l]] = static_cast<std::int8_t>(sigma[l] * x[l]);
  return SpinConfig(std::move(y));
}

double amplitude_of(double angle) noexcept {
  const double a = std::cos(angle);
  return std::abs(a) < 1e-15 ? 0.0 : a;
}

Rank2Encoding Rank2Encoding::from_phases(std::vector<double> alpha, std::vector<double> beta, int sign) {
  Rank2Encoding enc;
  enc.aux = SignedPermutation::identity(alpha.size());
  enc.alpha = std::move(alpha);
  enc.beta = std::move(beta);
  enc.sign = sign;
  enc.validate();
  return enc;
}

Rank2Encoding Rank2Encoding::from_amplitudes(const std::vector<double>& eps, const std::vector<double>& eta, int sign,
                                             SignedPermutation aux) {
  auto to_phase = [](double a) {
    if (!(a >= -1.0 - 1e-12 && a <= 1.0 + 1e-12)) throw std::invalid_argument("amplitude outside [-1, 1]");
    return std::acos(std::clamp(a, -1.0, 1.0));
  };
  Rank2Encoding enc;
  enc.alpha.reserve(eps.size());
  enc.beta.reserve(eta.size());
  for (double a : eps) enc.alpha.push_back(to_phase(a));
  for (double a : eta) enc.beta.push_back(to_phase(a));
  enc.sign = sign;
  enc.aux = std::move(aux);
  enc.validate();
  return enc;
}

std::vector<double> Rank2Encoding::eps_vector() const {
  std::vector<double> out(size());
  for (std::size_t l = 0; l < size(); ++l) out[l] = eps(l);
  return out;
}

std::vector<double> Rank2Encoding::eta_vector() const {
  std::vector<double> out(size());
  for (std::size_t l = 0; l < size(); ++l) out[l] = eta(l);
  return out;
}

std::vector<double> Rank2Encoding::coupled_eta() const {
  std::vector<double> out(size());
  for (std::size_t l = 0; l < size(); ++l) out[l] = aux.sigma[l] * eta(aux.perm[l]);
  return out;
}

void Rank2Encoding::validate() const {
  if (alpha.empty()) throw std::invalid_argument("encoding must have at least one spin");
  if (beta.size() != alpha.size()) throw std::invalid_argument("alpha and beta differ in length");
  if (sign != 1 && sign != -1) throw std::invalid_argument("encoding sign must be +1 or -1");
  if (aux.size() != alpha.size()) throw std::invalid_argument("aux map size does not match encoding");
  aux.validate();
  for (std::size_t l = 0; l < alpha.size(); ++l)
    if (!std::isfinite(alpha[l]) || !std::isfinite(beta[l])) throw std::invalid_argument("non-finite phase");
}

MaxCutInstance weights_from_encoding(const Rank2Encoding& enc) {
  enc.validate();
  LowRankWeights w;
  w.u = enc.eps_vector();
  w.v = enc.coupled_eta();
  w.sign = enc.sign;
  return MaxCutInstance::from_low_rank(std::move(w), {{"family", "rank2"}, {"sign", std::to_string(enc.sign)}});
}

GeneratedInstance generate_instance(std::size_t n, double density, int sign, std::uint64_t seed) {
  if (n < 2) throw std::invalid_argument("generate_instance requires n >= 2");
  if (!(density > 0.0 && density <= 1.0)) throw std::invalid_argument("density must lie in (0, 1]");
  if (sign != 1 && sign != -1) throw std::invalid_argument("sign must be +1 or -1");

  const std::size_t pairs = n * (n - 1) / 2;
  const auto keep = static_cast<std::size_t>(std::floor(density * static_cast<double>(pairs) + 1e-9));
  if (keep == 0) throw std::invalid_argument("density too low: the generated graph would be empty");
  const std::size_t zeros = pairs - keep;

  Rng rng = make_rng(seed, 0, 0x67656e);
  std::uniform_real_distribution<double> phase(0.0, std::numbers::pi);
  std::vector<double> alpha(n), beta(n);
  for (std::size_t l = 0; l < n; ++l) {
    alpha[l] = phase(rng);
    beta[l] = phase(rng);
  }

  // Vertices in group A carry no quadrature amplitude (beta = pi/2), vertices
  // in group B no in-phase amplitude (alpha = pi/2); every A-B pair then has an
  // exact zero weight. a * b is the largest product <= zeros with a + b <= n.
  std::size_t group_a = 0, group_b = 0;
  for (std::size_t a = 1; a <= n / 2 && zeros > 0; ++a) {
    const std::size_t b = std::min(n - a, zeros / a);
    if (b >= a && a * b >= group_a * group_b) {
      group_a = a;
      group_b = b;
    }
  }
  std::vector<std::uint32_t> order(n);
  std::iota(order.begin(), order.end(), 0u);
  std::shuffle(order.begin(), order.end(), rng);
  for (std::size_t i = 0; i < group_a; ++i) beta[order[i]] = 0.5 * std::numbers::pi;
  for (std::size_t i = group_a; i < group_a + group_b; ++i) alpha[order[i]] = 0.5 * std::numbers::pi;

  GeneratedInstance out{MaxCutInstance{}, Rank2Encoding::from_phases(std::move(alpha), std::move(beta), sign)};

  Metadata meta{{"family", "rank2"},
                {"n", std::to_string(n)},
                {"density", format_density(density)},
                {"sign", std::to_string(sign)},
                {"seed", std::to_string(seed)}};

  MaxCutInstance parent = weights_from_encoding(out.encoding);
  const std::size_t remainder = zeros - group_a * group_b;
  if (remainder == 0) {
    out.instance = MaxCutInstance::from_low_rank(parent.low_rank(), std::move(meta));
    return out;
  }

  // Remaining zeros come from the weakest couplings.
  std::vector<Edge> live;
  live.reserve(pairs - group_a * group_b);
  parent.for_each_edge([&](const Edge& e) { live.push_back(e); });
  auto stronger = [](const Edge& a, const Edge& b) {
    const double ma = std::abs(a.w), mb = std::abs(b.w);
    if (ma != mb) return ma > mb;
    return a.l != b.l ? a.l < b.l : a.k < b.k;
  };
  std::nth_element(live.begin(), live.begin() + static_cast<std::ptrdiff_t>(keep), live.end(), stronger);
  live.resize(keep);
  out.instance = MaxCutInstance::from_edges(n, std::move(live), std::move(meta));
  return out;
}

}  // namespace spim
