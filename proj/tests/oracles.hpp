#pragma once

// Reference computations used to check the library. Each one takes a
// different route from the code under test: brute-force enumeration, dense
// eigen/SVD factorizations, grids, or direct linear solves.

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <numeric>
#include <utility>
#include <vector>

namespace oracle {

using Eigen::MatrixXd;
using Eigen::VectorXd;

// Visits every k-subset of {0..n-1}.
inline void subsets(int n, int k, const std::function<void(const std::vector<int>&)>& f) {
  std::vector<int> idx(static_cast<std::size_t>(k));
  std::iota(idx.begin(), idx.end(), 0);
  if (k > n) return;
  while (true) {
    f(idx);
    int i = k - 1;
    while (i >= 0 && idx[static_cast<std::size_t>(i)] == n - k + i) --i;
    if (i < 0) return;
    ++idx[static_cast<std::size_t>(i)];
    for (int j = i + 1; j < k; ++j) idx[static_cast<std::size_t>(j)] = idx[static_cast<std::size_t>(j - 1)] + 1;
  }
}

inline MatrixXd columns(const MatrixXd& a, const std::vector<int>& cols) {
  MatrixXd out(a.rows(), static_cast<Eigen::Index>(cols.size()));
  for (std::size_t j = 0; j < cols.size(); ++j) out.col(static_cast<Eigen::Index>(j)) = a.col(cols[j]);
  return out;
}

// Largest singular value from the eigenvalues of A'A.
inline double spectral_norm(const MatrixXd& a) {
  Eigen::SelfAdjointEigenSolver<MatrixXd> es(a.transpose() * a);
  return std::sqrt(std::max(0.0, es.eigenvalues().maxCoeff()));
}

// Non-squared RIP deviation from Gram eigenvalues of every K-column block.
inline double rip_by_gram(const MatrixXd& a, int K) {
  double worst = 0.0;
  subsets(static_cast<int>(a.cols()), K, [&](const std::vector<int>& t) {
    const MatrixXd at = columns(a, t);
    Eigen::SelfAdjointEigenSolver<MatrixXd> es(at.transpose() * at);
    const double lo = std::sqrt(std::max(0.0, es.eigenvalues().minCoeff()));
    const double hi = std::sqrt(std::max(0.0, es.eigenvalues().maxCoeff()));
    worst = std::max({worst, hi - 1.0, 1.0 - lo});
  });
  return worst;
}

// min ||x||_1 s.t. Ax = y over basic solutions (A full row rank, tiny sizes).
// A minimizer of an LP in standard form is attained at a vertex, i.e. at a
// solution supported on m linearly independent columns.
inline VectorXd l1_by_vertices(const MatrixXd& a, const VectorXd& y) {
  const int m = static_cast<int>(a.rows());
  const int n = static_cast<int>(a.cols());
  double best = std::numeric_limits<double>::infinity();
  VectorXd arg = VectorXd::Zero(n);
  subsets(n, m, [&](const std::vector<int>& b) {
    const MatrixXd ab = columns(a, b);
    Eigen::FullPivLU<MatrixXd> lu(ab);
    if (lu.rank() < m) return;
    const VectorXd xb = lu.solve(y);
    const double v = xb.lpNorm<1>();
    if (v < best - 1e-12) {
      best = v;
      arg.setZero();
      for (std::size_t j = 0; j < b.size(); ++j) arg(b[j]) = xb(static_cast<Eigen::Index>(j));
    }
  });
  return arg;
}

// Orthonormal kernel basis from the eigenvectors of A'A with zero eigenvalue.
inline MatrixXd kernel(const MatrixXd& a) {
  Eigen::SelfAdjointEigenSolver<MatrixXd> es(a.transpose() * a);
  const double scale = std::max(1.0, es.eigenvalues().cwiseAbs().maxCoeff());
  std::vector<Eigen::Index> zero;
  for (Eigen::Index i = 0; i < es.eigenvalues().size(); ++i) {
    if (std::abs(es.eigenvalues()(i)) <= 1e-10 * scale) zero.push_back(i);
  }
  MatrixXd out(a.cols(), static_cast<Eigen::Index>(zero.size()));
  for (std::size_t j = 0; j < zero.size(); ++j) out.col(static_cast<Eigen::Index>(j)) = es.eigenvectors().col(zero[j]);
  return out;
}

// Ratio ||z_L||_1 / ||z_Lc||_1 maximized over |L| = k for one vector.
inline double nsp_ratio(const VectorXd& z, int k) {
  std::vector<double> mag(static_cast<std::size_t>(z.size()));
  for (Eigen::Index i = 0; i < z.size(); ++i) mag[static_cast<std::size_t>(i)] = std::abs(z(i));
  std::sort(mag.begin(), mag.end(), std::greater<>());
  const double top = std::accumulate(mag.begin(), mag.begin() + k, 0.0);
  const double rest = std::accumulate(mag.begin() + k, mag.end(), 0.0);
  return rest > 0.0 ? top / rest : std::numeric_limits<double>::infinity();
}

// Exact NSP constant when dim ker A <= 2. In two dimensions the ratio is
// linear-fractional between consecutive rays where some coordinate of z
// vanishes, so the maximum sits on one of those rays.
inline double nsp_small_kernel(const MatrixXd& a, int k) {
  const MatrixXd kb = kernel(a);
  if (kb.cols() == 0) return 0.0;
  if (kb.cols() == 1) return nsp_ratio(kb.col(0), k);
  if (kb.cols() != 2) return std::numeric_limits<double>::quiet_NaN();
  double best = 0.0;
  for (Eigen::Index i = 0; i < kb.rows(); ++i) {
    // direction orthogonal (in coefficient space) to row i of the basis
    const VectorXd z = -kb(i, 1) * kb.col(0) + kb(i, 0) * kb.col(1);
    if (z.norm() < 1e-14) continue;
    best = std::max(best, nsp_ratio(z, k));
  }
  return best;
}

// min over the unit circle of max_i |A_i' z| for m = 2, by a fine angular
// grid followed by golden-section refinement around the best cell.
inline double beta_2d(const MatrixXd& a) {
  auto f = [&](double th) {
    const Eigen::Vector2d z(std::cos(th), std::sin(th));
    return (a.transpose() * z).cwiseAbs().maxCoeff();
  };
  const int n = 20000;
  const double pi = std::acos(-1.0);
  int best = 0;
  double bv = f(0.0);
  for (int i = 1; i < n; ++i) {
    const double v = f(pi * i / n);
    if (v < bv) {
      bv = v;
      best = i;
    }
  }
  double lo = pi * (best - 1) / n;
  double hi = pi * (best + 1) / n;
  const double g = (std::sqrt(5.0) - 1.0) / 2.0;
  for (int it = 0; it < 200; ++it) {
    const double c = hi - g * (hi - lo);
    const double d = lo + g * (hi - lo);
    if (f(c) < f(d)) hi = d; else lo = c;
  }
  return std::min(bv, f(0.5 * (lo + hi)));
}

// Least squares on a fixed support, zero elsewhere.
inline VectorXd restricted_lsq(const MatrixXd& a, const VectorXd& y, const std::vector<int>& s) {
  VectorXd x = VectorXd::Zero(a.cols());
  if (s.empty()) return x;
  const VectorXd xs = columns(a, s).colPivHouseholderQr().solve(y);
  for (std::size_t j = 0; j < s.size(); ++j) x(s[j]) = xs(static_cast<Eigen::Index>(j));
  return x;
}

// Cubic c0 + c1 t + c2 t^2 + c3 t^3 through (s1, v1, d1) and (s2, v2, d2),
// from the 4x4 monomial system.
struct Cubic {
  Eigen::Vector4d c;
  double value(double t) const { return c(0) + t * (c(1) + t * (c(2) + t * c(3))); }
  double deriv(double t) const { return c(1) + t * (2.0 * c(2) + t * 3.0 * c(3)); }
};

inline Cubic hermite(double s1, double v1, double d1, double s2, double v2, double d2) {
  Eigen::Matrix4d m;
  m << 1, s1, s1 * s1, s1 * s1 * s1,
       0, 1, 2 * s1, 3 * s1 * s1,
       1, s2, s2 * s2, s2 * s2 * s2,
       0, 1, 2 * s2, 3 * s2 * s2;
  const Eigen::Vector4d rhs(v1, d1, v2, d2);
  return {m.fullPivLu().solve(rhs)};
}

struct ScalarMin {
  double argmin = 0.0;
  double value = 0.0;
  bool unique = true;  // false when a separated competitor ties within tolerance
};

// Global minimizer of f on [lo, hi]: dense grid, then golden-section on each
// grid-local minimum. Two local minima farther apart than `sep` whose values
// agree within `tie` mark the answer as nonunique.
inline ScalarMin minimize_scalar(const std::function<double(double)>& f, double lo, double hi,
                                 int grid = 4001, double tie = 1e-9, double sep = 1e-4) {
  std::vector<double> t(static_cast<std::size_t>(grid));
  std::vector<double> v(static_cast<std::size_t>(grid));
  for (int i = 0; i < grid; ++i) {
    t[static_cast<std::size_t>(i)] = lo + (hi - lo) * i / (grid - 1);
    v[static_cast<std::size_t>(i)] = f(t[static_cast<std::size_t>(i)]);
  }
  std::vector<std::pair<double, double>> cands;  // (value, argmin)
  const double g = (std::sqrt(5.0) - 1.0) / 2.0;
  for (int i = 0; i < grid; ++i) {
    const double left = i > 0 ? v[static_cast<std::size_t>(i - 1)] : std::numeric_limits<double>::infinity();
    const double right = i + 1 < grid ? v[static_cast<std::size_t>(i + 1)] : std::numeric_limits<double>::infinity();
    const double here = v[static_cast<std::size_t>(i)];
    if (!(here <= left && here <= right)) continue;
    double a = t[static_cast<std::size_t>(std::max(0, i - 1))];
    double b = t[static_cast<std::size_t>(std::min(grid - 1, i + 1))];
    for (int it = 0; it < 200 && b - a > 1e-15; ++it) {
      const double c = b - g * (b - a);
      const double d = a + g * (b - a);
      if (f(c) <= f(d)) b = d; else a = c;
    }
    const double x = 0.5 * (a + b);
    double fx = f(x);
    double best_x = x;
    if (here < fx) {
      fx = here;
      best_x = t[static_cast<std::size_t>(i)];
    }
    cands.emplace_back(fx, best_x);
  }
  std::sort(cands.begin(), cands.end());
  ScalarMin out;
  out.value = cands.front().first;
  out.argmin = cands.front().second;
  for (std::size_t j = 1; j < cands.size(); ++j) {
    if (cands[j].first - out.value > tie) break;
    if (std::abs(cands[j].second - out.argmin) > sep) out.unique = false;
  }
  return out;
}

// Smallest centered second difference of f on a uniform grid.
inline double min_second_difference(const std::function<double(double)>& f, double lo, double hi,
                                    int n) {
  const double h = (hi - lo) / n;
  double worst = std::numeric_limits<double>::infinity();
  for (int i = 1; i < n; ++i) {
    const double t = lo + i * h;
    worst = std::min(worst, (f(t + h) - 2.0 * f(t) + f(t - h)) / (h * h));
  }
  return worst;
}

inline double central_derivative(const std::function<double(double)>& f, double t, double h = 1e-6) {
  return (f(t + h) - f(t - h)) / (2.0 * h);
}

}  // namespace oracle
