#include "spim/baselines.hpp"

#include <algorithm>
#include <bit>
#include <chrono>
#include <cmath>
#include <numeric>
#include <random>
#include <stdexcept>
#include <string>

#include "spim/rng.hpp"

namespace spim {

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

// Compressed adjacency of an explicit instance.
struct Adjacency {
  std::vector<std::size_t> offset;
  std::vector<std::uint32_t> neighbor;
  std::vector<double> weight;
};

Adjacency build_adjacency(const MaxCutInstance& instance) {
  const std::size_t n = instance.size();
  Adjacency adj;
  adj.offset.assign(n + 1, 0);
  for (const Edge& e : instance.edges()) {
    ++adj.offset[e.l + 1];
    ++adj.offset[e.k + 1];
  }
  std::partial_sum(adj.offset.begin(), adj.offset.end(), adj.offset.begin());
  adj.neighbor.resize(adj.offset[n]);
  adj.weight.resize(adj.offset[n]);
  std::vector<std::size_t> fill(adj.offset.begin(), adj.offset.end() - 1);
  for (const Edge& e : instance.edges()) {
    adj.neighbor[fill[e.l]] = e.k;
    adj.weight[fill[e.l]++] = e.w;
    adj.neighbor[fill[e.k]] = e.l;
    adj.weight[fill[e.k]++] = e.w;
  }
  return adj;
}

void check_order(const std::vector<std::uint32_t>& order, std::size_t n) {
  if (order.size() != n) throw std::invalid_argument("vertex order must list all " + std::to_string(n) + " vertices");
  std::vector<bool> seen(n, false);
  for (auto v : order) {
    if (v >= n || seen[v]) throw std::invalid_argument("vertex order is not a permutation");
    seen[v] = true;
  }
}

SpinConfig greedy_pass(const MaxCutInstance& instance, const std::vector<std::uint32_t>& order) {
  const std::size_t n = instance.size();
  std::vector<std::int8_t> side(n, 0);
  std::size_t count_a = 0, count_b = 0;

  auto place = [&](std::uint32_t v, double to_a, double to_b) {
    // Joining A cuts the edges to B and vice versa.
    bool join_a;
    if (to_b != to_a)
      join_a = to_b > to_a;
    else
      join_a = count_a <= count_b;
    side[v] = join_a ? 1 : -1;
    ++(join_a ? count_a : count_b);
  };

  if (instance.is_low_rank()) {
    const auto& r = instance.low_rank();
    double ua = 0, va = 0, ub = 0, vb = 0;
    for (auto v : order) {
      const double to_a = r.u[v] * ua + r.sign * r.v[v] * va;
      const double to_b = r.u[v] * ub + r.sign * r.v[v] * vb;
      place(v, to_a, to_b);
      if (side[v] > 0) {
        ua += r.u[v];
        va += r.v[v];
      } else {
        ub += r.u[v];
        vb += r.v[v];
      }
    }
  } else {
    const Adjacency adj = build_adjacency(instance);
    std::vector<double> weight_to_a(n, 0.0), weight_to_b(n, 0.0);
    for (auto v : order) {
      place(v, weight_to_a[v], weight_to_b[v]);
      auto& acc = side[v] > 0 ? weight_to_a : weight_to_b;
      for (std::size_t i = adj.offset[v]; i < adj.offset[v + 1]; ++i) acc[adj.neighbor[i]] += adj.weight[i];
    }
  }
  return SpinConfig(std::move(side));
}

}  // namespace

CutReport sahni_gonzalez(const MaxCutInstance& instance, const std::vector<std::uint32_t>& order) {
  const auto start = Clock::now();
  std::vector<std::uint32_t> ord = order;
  if (ord.empty()) {
    ord.resize(instance.size());
    std::iota(ord.begin(), ord.end(), 0u);
  }
  check_order(ord, instance.size());
  SpinConfig x = greedy_pass(instance, ord);
  return make_report(instance, std::move(x), "sg", 0, seconds_since(start));
}

CutReport sahni_gonzalez_multistart(const MaxCutInstance& instance, std::size_t starts, std::uint64_t seed) {
  if (starts < 1) throw std::invalid_argument("multistart needs at least one start");
  const auto start = Clock::now();
  std::vector<std::uint32_t> ord(instance.size());
  std::iota(ord.begin(), ord.end(), 0u);
  CutReport best = sahni_gonzalez(instance, ord);
  Rng rng = make_rng(seed, 0, 0x7367);
  for (std::size_t s = 1; s < starts; ++s) {
    std::shuffle(ord.begin(), ord.end(), rng);
    CutReport r = sahni_gonzalez(instance, ord);
    if (r.cut_value > best.cut_value) best = std::move(r);
  }
  best.solver_id = "sg-multistart";
  best.seed = seed;
  best.wall_time_seconds = seconds_since(start);
  return best;
}

CutReport brute_force_maxcut(const MaxCutInstance& instance) {
  const std::size_t n = instance.size();
  if (n > kBruteForceMaxVertices)
    throw std::invalid_argument("brute force is limited to n <= " + std::to_string(kBruteForceMaxVertices) +
                                " (got n=" + std::to_string(n) + ")");
  const auto start = Clock::now();
  const std::vector<double> w = instance.dense_matrix();

  // local[k] = sum_j w_kj x_j.
  std::vector<std::int8_t> x(n, 1);
  std::vector<double> local(n, 0.0);
  for (std::size_t k = 0; k < n; ++k)
    for (std::size_t j = 0; j < n; ++j) local[k] += w[k * n + j];
  double cut = 0.0;

  const double tol = 1e-12 * std::max(1.0, [&] {
    double s = 0.0;
    for (double v : w) s += std::abs(v);
    return 0.5 * s;
  }());

  std::vector<std::int8_t> best = x;
  double best_cut = cut;
  const std::uint64_t steps = n > 1 ? (std::uint64_t{1} << (n - 1)) : 1;
  for (std::uint64_t g = 1; g < steps; ++g) {
    // Gray code step g flips bit ctz(g); bit b maps to spin b + 1 so spin 0 stays +1.
    const std::size_t j = static_cast<std::size_t>(std::countr_zero(g)) + 1;
    // Cut change when x_j flips: sum_k w_jk x_j x_k = x_j * local[j].
    cut += x[j] * local[j];
    const double two_xj = 2.0 * x[j];
    for (std::size_t k = 0; k < n; ++k) local[k] -= two_xj * w[k * n + j];
    x[j] = static_cast<std::int8_t>(-x[j]);

    if (cut > best_cut + tol) {
      best_cut = cut;
      best = x;
    } else if (cut >= best_cut - tol && x < best) {
      best_cut = std::max(best_cut, cut);
      best = x;
    }
  }
  return make_report(instance, SpinConfig(std::move(best)), "brute", 0, seconds_since(start));
}

CutReport random_cut(const MaxCutInstance& instance, std::size_t samples, std::uint64_t seed) {
  if (samples < 1) throw std::invalid_argument("random_cut needs at least one sample");
  const auto start = Clock::now();
  Rng rng = make_rng(seed, 0, 0x726e64);
  std::bernoulli_distribution coin(0.5);
  SpinConfig best;
  double best_cut = 0.0;
  for (std::size_t s = 0; s < samples; ++s) {
    std::vector<std::int8_t> x(instance.size());
    for (auto& v : x) v = coin(rng) ? 1 : -1;
    SpinConfig cfg(std::move(x));
    const double c = cut_value(instance, cfg);
    if (s == 0 || c > best_cut) {
      best_cut = c;
      best = std::move(cfg);
    }
  }
  return make_report(instance, std::move(best), "random", seed, seconds_since(start));
}

}  // namespace spim
