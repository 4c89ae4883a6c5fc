#pragma once

#include <cstddef>
#include <cstdint>
#include <initializer_list>
#include <map>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace spim {

/// Binary spin vector x in {-1,+1}^n.
class SpinConfig {
 public:
  SpinConfig() = default;
  /// All spins +1.
  explicit SpinConfig(std::size_t n) : spins_(n, 1) {}
  /// Throws std::invalid_argument if any entry is not exactly +-1.
  explicit SpinConfig(std::vector<std::int8_t> spins);
  SpinConfig(std::initializer_list<int> spins);

  std::size_t size() const noexcept { return spins_.size(); }
  int operator[](std::size_t i) const noexcept { return spins_[i]; }
  void flip(std::size_t i) noexcept { spins_[i] = static_cast<std::int8_t>(-spins_[i]); }
  void set(std::size_t i, int value);
  SpinConfig negated() const;
  std::span<const std::int8_t> values() const noexcept { return spins_; }

  /// Lexicographic order with -1 < +1.
  friend auto operator<=>(const SpinConfig&, const SpinConfig&) = default;
  friend bool operator==(const SpinConfig&, const SpinConfig&) = default;

 private:
  std::vector<std::int8_t> spins_;
};

/// Undirected weighted edge, 0-based, l < k.
struct Edge {
  std::uint32_t l = 0;
  std::uint32_t k = 0;
  double w = 0.0;

  friend bool operator==(const Edge&, const Edge&) = default;
};

/// Dense rank-2 coupling w_lk = u_l u_k + sign * v_l v_k (l != k); the diagonal is ignored.
struct LowRankWeights {
  std::vector<double> u;
  std::vector<double> v;
  int sign = 1;

  double weight(std::size_t l, std::size_t k) const noexcept { return u[l] * u[k] + sign * v[l] * v[k]; }
};

using Metadata = std::map<std::string, std::string>;

/// Symmetric weighted graph with zero diagonal. Stored either as an explicit
/// sorted edge list or implicitly as a dense rank-2 form (fully connected
/// encoder output, which is too large to materialize at n ~ 2e4).
class MaxCutInstance {
 public:
  MaxCutInstance() = default;

  /// Validates indices, normalizes l < k, sorts, rejects self loops and duplicate pairs.
  static MaxCutInstance from_edges(std::size_t n, std::vector<Edge> edges, Metadata metadata = {});
  static MaxCutInstance from_low_rank(LowRankWeights weights, Metadata metadata = {});

  std::size_t size() const noexcept { return n_; }
  bool is_low_rank() const noexcept { return low_rank_; }

  /// Explicit storage only (empty for the low-rank form).
  const std::vector<Edge>& edges() const noexcept { return edges_; }
  /// Low-rank storage only.
  const LowRankWeights& low_rank() const noexcept { return rank2_; }

  double weight(std::size_t l, std::size_t k) const;

  /// Visits every unordered pair with a nonzero weight, in (l, k) order.
  template <class F>
  void for_each_edge(F&& f) const {
    if (low_rank_) {
      for (std::size_t l = 0; l < n_; ++l)
        for (std::size_t k = l + 1; k < n_; ++k) {
          const double w = rank2_.weight(l, k);
          if (w != 0.0) f(Edge{static_cast<std::uint32_t>(l), static_cast<std::uint32_t>(k), w});
        }
    } else {
      for (const Edge& e : edges_)
        if (e.w != 0.0) f(e);
    }
  }

  std::size_t nonzero_pairs() const;
  /// nonzero_pairs / (n(n-1)/2); 0 for n < 2.
  double density() const;

  /// Dense symmetric matrix, row-major n*n, zero diagonal.
  std::vector<double> dense_matrix() const;

  const Metadata& metadata() const noexcept { return metadata_; }
  Metadata& metadata() noexcept { return metadata_; }

 private:
  std::size_t n_ = 0;
  bool low_rank_ = false;
  std::vector<Edge> edges_;
  LowRankWeights rank2_;
  Metadata metadata_;
};

struct CutReport {
  double cut_value = 0.0;
  double hamiltonian = 0.0;
  SpinConfig config;
  std::string solver_id;
  double wall_time_seconds = 0.0;
  std::uint64_t seed = 0;
};

/// Sum of w_lk over unordered pairs with x_l != x_k.
double cut_value(const MaxCutInstance& instance, const SpinConfig& config);
/// H = sum_{l<k} w_lk x_l x_k.
double hamiltonian(const MaxCutInstance& instance, const SpinConfig& config);
/// S = sum_{l<k} w_lk.
double total_weight(const MaxCutInstance& instance);

/// Fills cut_value and hamiltonian for `config`.
CutReport make_report(const MaxCutInstance& instance, SpinConfig config, std::string solver_id,
                      std::uint64_t seed = 0, double wall_time_seconds = 0.0);

}  // namespace spim
