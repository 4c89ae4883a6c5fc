#include "spim/graph.hpp"

#include <algorithm>
#include <string>

namespace spim {

namespace {

void check_spin(int value) {
  if (value != 1 && value != -1)
    throw std::invalid_argument("spin value must be +1 or -1, got " + std::to_string(value));
}

void check_dims(const MaxCutInstance& instance, const SpinConfig& config) {
  if (config.size() != instance.size())
    throw std::invalid_argument("config length " + std::to_string(config.size()) +
                                " does not match instance size " + std::to_string(instance.size()));
}

// Split sums of the rank-2 amplitudes over the two sides of the cut.
struct SideSums {
  double u_plus = 0, u_minus = 0, v_plus = 0, v_minus = 0, uu = 0, vv = 0;
};

SideSums side_sums(const LowRankWeights& r, const SpinConfig& x) {
  SideSums s;
  for (std::size_t l = 0; l < x.size(); ++l) {
    if (x[l] > 0) {
      s.u_plus += r.u[l];
      s.v_plus += r.v[l];
    } else {
      s.u_minus += r.u[l];
      s.v_minus += r.v[l];
    }
    s.uu += r.u[l] * r.u[l];
    s.vv += r.v[l] * r.v[l];
  }
  return s;
}

}  // namespace

SpinConfig::SpinConfig(std::vector<std::int8_t> spins) : spins_(std::move(spins)) {
  for (auto s : spins_) check_spin(s);
}

SpinConfig::SpinConfig(std::initializer_list<int> spins) {
  spins_.reserve(spins.size());
  for (int s : spins) {
    check_spin(s);
    spins_.push_back(static_cast<std::int8_t>(s));
  }
}

void SpinConfig::set(std::size_t i, int value) {
  check_spin(value);
  spins_.at(i) = static_cast<std::int8_t>(value);
}

SpinConfig SpinConfig::negated() const {
  SpinConfig out = *this;
  for (auto& s : out.spins_) s = static_cast<std::int8_t>(-s);
  return out;
}

MaxCutInstance MaxCutInstance::from_edges(std::size_t n, std::vector<Edge> edges, Metadata metadata) {
  if (n == 0) throw std::invalid_argument("instance must have at least one vertex");
  for (Edge& e : edges) {
    if (e.l >= n || e.k >= n)
      throw std::invalid_argument("edge (" + std::to_string(e.l) + "," + std::to_string(e.k) +
                                  ") out of range for n=" + std::to_string(n));
    if (e.l == e.k) throw std::invalid_argument("self loop at vertex " + std::to_string(e.l));
    if (e.l > e.k) std::swap(e.l, e.k);
  }
  std::sort(edges.begin(), edges.end(),
            [](const Edge& a, const Edge& b) { return a.l != b.l ? a.l < b.l : a.k < b.k; });
  auto dup = std::adjacent_find(edges.begin(), edges.end(),
                                [](const Edge& a, const Edge& b) { return a.l == b.l && a.k == b.k; });
  if (dup != edges.end())
    throw std::invalid_argument("duplicate pair (" + std::to_string(dup->l) + "," + std::to_string(dup->k) + ")");

  MaxCutInstance inst;
  inst.n_ = n;
  inst.edges_ = std::move(edges);
  inst.metadata_ = std::move(metadata);
  return inst;
}

MaxCutInstance MaxCutInstance::from_low_rank(LowRankWeights weights, Metadata metadata) {
  if (weights.u.empty()) throw std::invalid_argument("instance must have at least one vertex");
  if (weights.u.size() != weights.v.size()) throw std::invalid_argument("rank-2 amplitude vectors differ in length");
  if (weights.sign != 1 && weights.sign != -1) throw std::invalid_argument("rank-2 sign must be +1 or -1");
  MaxCutInstance inst;
  inst.n_ = weights.u.size();
  inst.low_rank_ = true;
  inst.rank2_ = std::move(weights);
  inst.metadata_ = std::move(metadata);
  return inst;
}

double MaxCutInstance::weight(std::size_t l, std::size_t k) const {
  if (l >= n_ || k >= n_) throw std::out_of_range("vertex index out of range");
  if (l == k) return 0.0;
  if (low_rank_) return rank2_.weight(l, k);
  if (l > k) std::swap(l, k);
  auto it = std::lower_bound(edges_.begin(), edges_.end(), std::pair{l, k}, [](const Edge& e, const auto& key) {
    return e.l != key.first ? e.l < key.first : e.k < key.second;
  });
  return (it != edges_.end() && it->l == l && it->k == k) ? it->w : 0.0;
}

std::size_t MaxCutInstance::nonzero_pairs() const {
  std::size_t count = 0;
  for_each_edge([&](const Edge&) { ++count; });
  return count;
}

double MaxCutInstance::density() const {
  if (n_ < 2) return 0.0;
  const double pairs = 0.5 * static_cast<double>(n_) * static_cast<double>(n_ - 1);
  return static_cast<double>(nonzero_pairs()) / pairs;
}

std::vector<double> MaxCutInstance::dense_matrix() const {
  std::vector<double> m(n_ * n_, 0.0);
  for_each_edge([&](const Edge& e) {
    m[e.l * n_ + e.k] = e.w;
    m[e.k * n_ + e.l] = e.w;
  });
  return m;
}

double cut_value(const MaxCutInstance& instance, const SpinConfig& config) {
  check_dims(instance, config);
  if (instance.is_low_rank()) {
    const auto& r = instance.low_rank();
    const SideSums s = side_sums(r, config);
    return s.u_plus * s.u_minus + r.sign * s.v_plus * s.v_minus;
  }
  double cut = 0.0;
  for (const Edge& e : instance.edges())
    if (config[e.l] != config[e.k]) cut += e.w;
  return cut;
}

double hamiltonian(const MaxCutInstance& instance, const SpinConfig& config) {
  check_dims(instance, config);
  if (instance.is_low_rank()) {
    const auto& r = instance.low_rank();
    const SideSums s = side_sums(r, config);
    const double du = s.u_plus - s.u_minus;
    const double dv = s.v_plus - s.v_minus;
    return 0.5 * ((du * du - s.uu) + r.sign * (dv * dv - s.vv));
  }
  double h = 0.0;
  for (const Edge& e : instance.edges()) h += e.w * config[e.l] * config[e.k];
  return h;
}

double total_weight(const MaxCutInstance& instance) {
  if (instance.is_low_rank()) {
    const auto& r = instance.low_rank();
    double su = 0, sv = 0, uu = 0, vv = 0;
    for (std::size_t l = 0; l < instance.size(); ++l) {
      su += r.u[l];
      sv += r.v[l];
      uu += r.u[l] * r.u[l];
      vv += r.v[l] * r.v[l];
    }
    return 0.5 * ((su * su - uu) + r.sign * (sv * sv - vv));
  }
  double s = 0.0;
  for (const Edge& e : instance.edges()) s += e.w;
  return s;
}

CutReport make_report(const MaxCutInstance& instance, SpinConfig config, std::string solver_id, std::uint64_t seed,
                      double wall_time_seconds) {
  CutReport r;
  r.cut_value = cut_value(instance, config);
  r.hamiltonian = hamiltonian(instance, config);
  r.config = std::move(config);
  r.solver_id = std::move(solver_id);
  r.seed = seed;
  r.wall_time_seconds = wall_time_seconds;
  return r;
}

}  // namespace spim
