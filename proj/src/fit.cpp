#include <Eigen/Dense>
#include <algorithm>
#include <cmath>

#include "spim/encoding.hpp"

namespace spim {

namespace {

struct TwoTerm {
  Eigen::VectorXd u;  // coefficient +1
  Eigen::VectorXd v;  // coefficient sign
  int sign = 1;
};

// u u^T + v v^T, u u^T - v v^T, or the better of the two.
enum class Family { best, plus, minus };

// Nearest matrix of the requested form built from at most two eigenpairs; two
// negative eigenvalues cannot be expressed in either family.
TwoTerm truncate(const Eigen::MatrixXd& m, Family family = Family::best) {
  const Eigen::Index n = m.rows();
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(m);
  const Eigen::VectorXd& lambda = es.eigenvalues();  // ascending
  const Eigen::MatrixXd& vecs = es.eigenvectors();

  TwoTerm t;
  t.u = Eigen::VectorXd::Zero(n);
  t.v = Eigen::VectorXd::Zero(n);
  const double top = std::max(lambda(n - 1), 0.0);
  const double second = n >= 2 ? std::max(lambda(n - 2), 0.0) : 0.0;
  const double bottom = std::min(lambda(0), 0.0);

  bool negative = family == Family::minus;
  if (family == Family::best) negative = -bottom > second;
  t.u = std::sqrt(top) * vecs.col(n - 1);
  if (negative) {
    t.v = std::sqrt(-bottom) * vecs.col(0);
    t.sign = -1;
  } else {
    t.v = std::sqrt(second) * vecs.col(n - 2);
  }
  return t;
}

Eigen::MatrixXd assemble(const TwoTerm& t) { return t.u * t.u.transpose() + t.sign * (t.v * t.v.transpose()); }

double offdiag_residual(const Eigen::MatrixXd& w, const Eigen::MatrixXd& approx) {
  Eigen::MatrixXd d = w - approx;
  d.diagonal().setZero();
  return d.norm();
}

// Levenberg-Marquardt on the factors against the off-diagonal entries of w.
// Returns true once the residual drops to tol.
bool polish(const Eigen::MatrixXd& w, TwoTerm& t, double tol) {
  const Eigen::Index n = w.rows();
  const Eigen::Index pairs = n * (n - 1) / 2;
  Eigen::VectorXd p(2 * n);
  p << t.u, t.v;
  auto residuals = [&](const Eigen::VectorXd& q) {
    Eigen::VectorXd r(pairs);
    Eigen::Index i = 0;
    for (Eigen::Index l = 0; l < n; ++l)
      for (Eigen::Index k = l + 1; k < n; ++k) r(i++) = q(l) * q(k) + t.sign * q(n + l) * q(n + k) - w(l, k);
    return r;
  };
  Eigen::VectorXd r = residuals(p);
  double cost = r.squaredNorm();
  double mu = 1e-3;
  Eigen::MatrixXd jac(pairs, 2 * n);
  for (int it = 0; it < 500 && std::sqrt(2 * cost) > tol; ++it) {
    jac.setZero();
    Eigen::Index i = 0;
    for (Eigen::Index l = 0; l < n; ++l)
      for (Eigen::Index k = l + 1; k < n; ++k, ++i) {
        jac(i, l) = p(k);
        jac(i, k) = p(l);
        jac(i, n + l) = t.sign * p(n + k);
        jac(i, n + k) = t.sign * p(n + l);
      }
    const Eigen::MatrixXd jtj = jac.transpose() * jac;
    const Eigen::VectorXd g = jac.transpose() * r;
    bool improved = false;
    for (int tries = 0; tries < 20 && !improved; ++tries) {
      Eigen::MatrixXd a = jtj;
      a.diagonal().array() += mu * (1.0 + jtj.diagonal().array());
      const Eigen::VectorXd q = p - a.ldlt().solve(g);
      const Eigen::VectorXd rq = residuals(q);
      if (rq.squaredNorm() < cost) {
        p = q;
        r = rq;
        cost = rq.squaredNorm();
        mu = std::max(mu / 3, 1e-12);
        improved = true;
      } else {
        mu *= 4;
      }
    }
    if (!improved) break;
  }
  t.u = p.head(n);
  t.v = p.tail(n);
  return std::sqrt(2 * cost) <= tol;
}

}  // namespace

Rank2Fit fit_rank2(const MaxCutInstance& instance) {
  const auto n = static_cast<Eigen::Index>(instance.size());
  if (n < 2) throw std::invalid_argument("fit_rank2 requires n >= 2");

  const std::vector<double> dense = instance.dense_matrix();
  const Eigen::MatrixXd w = Eigen::Map<const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>>(
      dense.data(), n, n);
  const double w_norm = w.norm();
  const double exact_tol = 1e-11 * std::max(w_norm, 1e-300);

  TwoTerm best = truncate(w);
  double residual = offdiag_residual(w, assemble(best));
  bool exact = residual <= exact_tol;

  // The diagonal is free (it only shifts H by a constant), so an in-family
  // graph is recovered by alternating between the projection onto one sign
  // family and resetting the off-diagonal part to W.
  if (!exact) {
    const int max_iter = n <= 64 ? 20000 : (n <= 256 ? 2000 : 50);
    const Family first = best.sign < 0 ? Family::minus : Family::plus;
    for (Family family : {first, first == Family::plus ? Family::minus : Family::plus}) {
      Eigen::MatrixXd filled = w;
      TwoTerm t = truncate(w, family);
      double prev = offdiag_residual(w, assemble(t));
      for (int it = 0; it < max_iter && !exact; ++it) {
        filled.diagonal() = assemble(t).diagonal();
        t = truncate(filled, family);
        const double r = offdiag_residual(w, assemble(t));
        if (r <= exact_tol) {
          best = t;
          residual = r;
          exact = true;
        } else if (it % 50 == 49) {
          if (r > prev * (1.0 - 1e-6)) break;  // stalled away from zero
          prev = r;
        }
      }
      if (!exact && n <= 64 && polish(w, t, exact_tol)) {
        best = t;
        residual = offdiag_residual(w, assemble(t));
        exact = true;
      }
      if (exact) break;
    }
  }

  double scale = 1.0;
  const double peak = std::max(best.u.cwiseAbs().maxCoeff(), best.v.cwiseAbs().maxCoeff());
  if (peak > 1.0) scale = peak * peak;
  const double inv = 1.0 / std::sqrt(scale);

  std::vector<double> eps(static_cast<std::size_t>(n)), eta(static_cast<std::size_t>(n));
  for (Eigen::Index l = 0; l < n; ++l) {
    eps[static_cast<std::size_t>(l)] = std::clamp(best.u(l) * inv, -1.0, 1.0);
    eta[static_cast<std::size_t>(l)] = std::clamp(best.v(l) * inv, -1.0, 1.0);
  }

  Rank2Fit fit;
  fit.encoding =
      Rank2Encoding::from_amplitudes(eps, eta, best.sign, SignedPermutation::identity(static_cast<std::size_t>(n)));
  fit.residual = residual;
  fit.scale = scale;
  fit.exact = exact;
  return fit;
}

}  // namespace spim
