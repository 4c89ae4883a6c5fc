#pragma once

// Independent reference computations for the test suites. Nothing here calls
// the library's arithmetic; only its data types are used.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <numbers>
#include <random>
#include <string>
#include <vector>

#include "spim/encoding.hpp"
#include "spim/graph.hpp"

namespace oracle {

using Matrix = std::vector<std::vector<double>>;

// w_lk straight from the phases, with the aux map applied by hand.
inline Matrix encoded_weights(const spim::Rank2Encoding& enc) {
  const std::size_t n = enc.size();
  std::vector<double> e(n), h(n);
  for (std::size_t l = 0; l < n; ++l) {
    e[l] = std::cos(enc.alpha[l]);
    if (std::abs(e[l]) < 1e-15) e[l] = 0.0;
    double b = std::cos(enc.beta[enc.aux.perm[l]]);
    if (std::abs(b) < 1e-15) b = 0.0;
    h[l] = enc.aux.sigma[l] * b;
  }
  Matrix w(n, std::vector<double>(n, 0.0));
  for (std::size_t l = 0; l < n; ++l)
    for (std::size_t k = 0; k < n; ++k)
      if (l != k) w[l][k] = e[l] * e[k] + enc.sign * h[l] * h[k];
  return w;
}

inline Matrix dense(const spim::MaxCutInstance& inst) {
  const std::size_t n = inst.size();
  Matrix w(n, std::vector<double>(n, 0.0));
  for (std::size_t l = 0; l < n; ++l)
    for (std::size_t k = l + 1; k < n; ++k) w[l][k] = w[k][l] = inst.weight(l, k);
  return w;
}

inline double cut(const Matrix& w, const spim::SpinConfig& x) {
  double s = 0.0;
  for (std::size_t l = 0; l < w.size(); ++l)
    for (std::size_t k = l + 1; k < w.size(); ++k)
      if (x[l] != x[k]) s += w[l][k];
  return s;
}

inline double energy(const Matrix& w, const spim::SpinConfig& x) {
  double s = 0.0;
  for (std::size_t l = 0; l < w.size(); ++l)
    for (std::size_t k = l + 1; k < w.size(); ++k) s += w[l][k] * x[l] * x[k];
  return s;
}

inline double total(const Matrix& w) {
  double s = 0.0;
  for (std::size_t l = 0; l < w.size(); ++l)
    for (std::size_t k = l + 1; k < w.size(); ++k) s += w[l][k];
  return s;
}

inline spim::SpinConfig config_from_bits(std::size_t n, std::uint64_t bits) {
  std::vector<std::int8_t> x(n);
  for (std::size_t i = 0; i < n; ++i) x[i] = (bits >> i) & 1 ? -1 : 1;
  return spim::SpinConfig(std::move(x));
}

struct Optimum {
  double cut = -INFINITY;
  spim::SpinConfig config;
};

// Every configuration with x_0 = +1, scored from scratch; keeps the
// lexicographically smallest among ties within `tol`.
inline Optimum enumerate(const Matrix& w, double tol = 1e-9) {
  const std::size_t n = w.size();
  Optimum best;
  for (std::uint64_t bits = 0; bits < (std::uint64_t{1} << (n - 1)); ++bits) {
    const spim::SpinConfig x = config_from_bits(n, bits << 1);
    const double c = cut(w, x);
    if (c > best.cut + tol || (std::abs(c - best.cut) <= tol && x < best.config)) {
      best.cut = std::max(best.cut, c);
      best.config = x;
    }
  }
  return best;
}

struct Eigen {
  std::vector<double> values;
  Matrix vectors;  // vectors[j] is the j-th eigenvector
};

// Cyclic Jacobi rotations on a symmetric matrix.
inline Eigen jacobi(Matrix a) {
  const std::size_t n = a.size();
  Matrix v(n, std::vector<double>(n, 0.0));
  for (std::size_t i = 0; i < n; ++i) v[i][i] = 1.0;
  for (int sweep = 0; sweep < 100; ++sweep) {
    double off = 0.0;
    for (std::size_t p = 0; p < n; ++p)
      for (std::size_t q = p + 1; q < n; ++q) off += a[p][q] * a[p][q];
    if (off < 1e-30) break;
    for (std::size_t p = 0; p < n; ++p)
      for (std::size_t q = p + 1; q < n; ++q) {
        if (std::abs(a[p][q]) < 1e-300) continue;
        const double theta = (a[q][q] - a[p][p]) / (2.0 * a[p][q]);
        const double t = (theta >= 0 ? 1.0 : -1.0) / (std::abs(theta) + std::sqrt(theta * theta + 1.0));
        const double c = 1.0 / std::sqrt(t * t + 1.0), s = t * c;
        for (std::size_t k = 0; k < n; ++k) {
          const double akp = a[k][p], akq = a[k][q];
          a[k][p] = c * akp - s * akq;
          a[k][q] = s * akp + c * akq;
        }
        for (std::size_t k = 0; k < n; ++k) {
          const double apk = a[p][k], aqk = a[q][k];
          a[p][k] = c * apk - s * aqk;
          a[q][k] = s * apk + c * aqk;
        }
        for (std::size_t k = 0; k < n; ++k) {
          const double vkp = v[k][p], vkq = v[k][q];
          v[k][p] = c * vkp - s * vkq;
          v[k][q] = s * vkp + c * vkq;
        }
      }
  }
  Eigen out;
  out.values.resize(n);
  out.vectors.assign(n, std::vector<double>(n));
  for (std::size_t j = 0; j < n; ++j) {
    out.values[j] = a[j][j];
    for (std::size_t i = 0; i < n; ++i) out.vectors[j][i] = v[i][j];
  }
  return out;
}

// Off-diagonal residual of the best approximation a a^T + s b b^T built from
// at most two eigenpairs of w (at most one of them negative), found by trying
// every admissible subset.
inline double two_term_residual(const Matrix& w) {
  const std::size_t n = w.size();
  const Eigen e = jacobi(w);
  double best_kept = -1.0;
  std::vector<std::size_t> best_set;
  auto consider = [&](std::vector<std::size_t> set) {
    std::size_t negatives = 0;
    double kept = 0.0;
    for (auto j : set) {
      negatives += e.values[j] < 0.0;
      kept += e.values[j] * e.values[j];
    }
    if (negatives > 1) return;
    if (kept > best_kept) {
      best_kept = kept;
      best_set = set;
    }
  };
  consider({});
  for (std::size_t i = 0; i < n; ++i) {
    consider({i});
    for (std::size_t j = i + 1; j < n; ++j) consider({i, j});
  }
  double r = 0.0;
  for (std::size_t l = 0; l < n; ++l)
    for (std::size_t k = 0; k < n; ++k) {
      if (l == k) continue;
      double approx = 0.0;
      for (auto j : best_set) approx += e.values[j] * e.vectors[j][l] * e.vectors[j][k];
      r += (w[l][k] - approx) * (w[l][k] - approx);
    }
  return std::sqrt(r);
}

inline spim::Rank2Encoding random_encoding(std::size_t n, int sign, std::mt19937_64& rng, bool shuffle_aux = false) {
  std::uniform_real_distribution<double> phase(0.0, std::numbers::pi);
  std::vector<double> a(n), b(n);
  for (std::size_t l = 0; l < n; ++l) {
    a[l] = phase(rng);
    b[l] = phase(rng);
  }
  spim::Rank2Encoding enc = spim::Rank2Encoding::from_phases(std::move(a), std::move(b), sign);
  if (shuffle_aux) {
    std::shuffle(enc.aux.perm.begin(), enc.aux.perm.end(), rng);
    for (auto& s : enc.aux.sigma) s = std::bernoulli_distribution(0.5)(rng) ? 1 : -1;
  }
  return enc;
}

inline spim::SpinConfig random_config(std::size_t n, std::mt19937_64& rng) {
  std::vector<std::int8_t> x(n);
  for (auto& s : x) s = std::bernoulli_distribution(0.5)(rng) ? 1 : -1;
  return spim::SpinConfig(std::move(x));
}

inline spim::MaxCutInstance random_instance(std::size_t n, double keep, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> weight(-1.0, 1.0);
  std::vector<spim::Edge> edges;
  for (std::uint32_t l = 0; l < n; ++l)
    for (std::uint32_t k = l + 1; k < n; ++k)
      if (std::bernoulli_distribution(keep)(rng)) edges.push_back({l, k, weight(rng)});
  return spim::MaxCutInstance::from_edges(n, std::move(edges));
}

// Fresh directory under the system temp dir, removed on destruction.
class TempDir {
 public:
  explicit TempDir(const std::string& tag) {
    std::random_device rd;
    path_ = std::filesystem::temp_directory_path() / ("spim-" + tag + "-" + std::to_string(rd()));
    std::filesystem::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;
  const std::filesystem::path& path() const { return path_; }

 private:
  std::filesystem::path path_;
};

}  // namespace oracle
