#include "foldsense/errors.hpp"
#include "foldsense/iht.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace foldsense {

using Eigen::MatrixXd;
using Eigen::VectorXd;

namespace {

struct Barrier {
  // Variables are the columns listed in `vars`; the first n_on of them are the
  // support (sign constraints), the rest form the ball block.
  MatrixXd g;
  VectorXd c;
  std::vector<double> sign;
  Eigen::Index n_on = 0;
  Eigen::Index n_off = 0;
  double rho_sq = 0.0;

  bool feasible(const VectorXd& v) const {
    for (Eigen::Index j = 0; j < n_on; ++j) {
      if (!(sign[static_cast<std::size_t>(j)] * v(j) - r_ > 0.0)) return false;
    }
    if (n_off > 0 && !(rho_sq - v.tail(n_off).squaredNorm() > 0.0)) return false;
    return true;
  }

  double objective(const VectorXd& v) const { return 0.5 * v.dot(g * v) - c.dot(v); }

  double phi(const VectorXd& v, double t) const {
    double s = t * objective(v);
    for (Eigen::Index j = 0; j < n_on; ++j) {
      s -= std::log(sign[static_cast<std::size_t>(j)] * v(j) - r_);
    }
    if (n_off > 0) s -= std::log(rho_sq - v.tail(n_off).squaredNorm());
    return s;
  }

  double r_ = 0.0;
};

}  // namespace

QcqpResult qcqp_solve(const QcqpProblem& prob) {
  const Eigen::Index N = prob.A.cols();
  if (prob.y.size() != prob.A.rows()) throw DimensionError("qcqp: y length mismatch");
  if (prob.support.empty()) throw ParameterError("qcqp: support must be nonempty");
  if (prob.signs.size() != prob.support.size()) {
    throw ParameterError("qcqp: one sign per support index required");
  }
  if (!(prob.eta >= 0.0) || !(prob.r > 0.0)) throw ParameterError("qcqp: need eta >= 0, r > 0");
  if (!(prob.p >= 1.0 && prob.p <= 2.0)) throw DomainError("qcqp: p must lie in [1, 2]");
  std::vector<char> on(static_cast<std::size_t>(N), 0);
  for (int i : prob.support) {
    if (i < 0 || i >= N || on[static_cast<std::size_t>(i)]) {
      throw ParameterError("qcqp: support indices must be distinct and in range");
    }
    on[static_cast<std::size_t>(i)] = 1;
  }
  for (double s : prob.signs) {
    if (s != 1.0 && s != -1.0) throw ParameterError("qcqp: signs must be +-1");
  }

  const Eigen::Index k = static_cast<Eigen::Index>(prob.support.size());
  const Eigen::Index off_count = N - k;
  // lp-ball surrogate: |z|_2^2 <= (N - k)^{1 - 2/p} eta^2.
  const double rho_sq =
      off_count > 0 ? std::pow(static_cast<double>(off_count), 1.0 - 2.0 / prob.p) * prob.eta * prob.eta
                    : 0.0;
  const bool ball = off_count > 0 && rho_sq > 0.0;

  std::vector<int> vars(prob.support.begin(), prob.support.end());
  if (ball) {
    for (Eigen::Index i = 0; i < N; ++i) {
      if (!on[static_cast<std::size_t>(i)]) vars.push_back(static_cast<int>(i));
    }
  }
  const Eigen::Index n = static_cast<Eigen::Index>(vars.size());
  MatrixXd av(prob.A.rows(), n);
  for (Eigen::Index j = 0; j < n; ++j) av.col(j) = prob.A.col(vars[static_cast<std::size_t>(j)]);

  Barrier b;
  b.g = av.transpose() * av;
  b.c = av.transpose() * prob.y;
  b.sign = prob.signs;
  b.n_on = k;
  b.n_off = ball ? off_count : 0;
  b.rho_sq = rho_sq;
  b.r_ = prob.r;

  // Strictly feasible start.
  VectorXd v = VectorXd::Zero(n);
  const double margin = std::max(1e-3, 0.05 * prob.r);
  for (Eigen::Index j = 0; j < k; ++j) {
    double mag = prob.r;
    if (prob.hint.size() == N) {
      mag = std::max(mag, std::abs(prob.hint(prob.support[static_cast<std::size_t>(j)])));
    }
    v(j) = prob.signs[static_cast<std::size_t>(j)] * (mag + margin);
  }
  if (!b.feasible(v)) throw InfeasibleError("qcqp: could not build a strictly feasible start");

  const double m_c = static_cast<double>(k + (ball ? 1 : 0));
  const double gscale = std::max(1.0, b.g.diagonal().maxCoeff());
  double t = 1.0 / gscale;
  QcqpResult res;
  bool centered = false;
  VectorXd grad(n);
  MatrixXd h(n, n);

  while (true) {
    centered = false;
    while (res.newton_steps < prob.max_newton) {
      grad = t * (b.g * v - b.c);
      h = t * b.g;
      for (Eigen::Index j = 0; j < k; ++j) {
        const double s = b.sign[static_cast<std::size_t>(j)];
        const double slack = s * v(j) - prob.r;
        grad(j) -= s / slack;
        h(j, j) += 1.0 / (slack * slack);
      }
      if (b.n_off > 0) {
        const auto w = v.tail(b.n_off);
        const double slack = rho_sq - w.squaredNorm();
        grad.tail(b.n_off) += 2.0 * w / slack;
        h.bottomRightCorner(b.n_off, b.n_off).diagonal().array() += 2.0 / slack;
        h.bottomRightCorner(b.n_off, b.n_off) += (4.0 / (slack * slack)) * w * w.transpose();
      }
      const Eigen::LDLT<MatrixXd> ldlt(h);
      if (ldlt.info() != Eigen::Success) throw NumericError("qcqp: Newton system is singular");
      const VectorXd dv = -ldlt.solve(grad);
      const double dec = -grad.dot(dv);
      ++res.newton_steps;
      if (!(dec >= 0.0) || dec / 2.0 <= 1e-12) {
        centered = true;
        break;
      }
      double step = 1.0;
      while (!b.feasible(v + step * dv) && step > 1e-20) step *= 0.5;
      const double phi0 = b.phi(v, t);
      while (step > 1e-20 && b.phi(v + step * dv, t) > phi0 - 0.25 * step * dec) step *= 0.5;
      if (step <= 1e-20) {
        centered = true;  // no further progress possible at this t
        break;
      }
      const double phi1 = b.phi(v + step * dv, t);
      v += step * dv;
      // Decrease lost in round-off: the decrement cannot get smaller here.
      if (phi0 - phi1 <= 64.0 * std::numeric_limits<double>::epsilon() * std::max(1.0, std::abs(phi0))) {
        centered = true;
        break;
      }
    }
    if (m_c / t <= prob.gap_tol || !centered) break;
    t *= prob.barrier_growth;
  }

  // Dual estimates from the central path.
  VectorXd stat = b.g * v - b.c;
  for (Eigen::Index j = 0; j < k; ++j) {
    const double s = b.sign[static_cast<std::size_t>(j)];
    const double lam = 1.0 / (t * (s * v(j) - prob.r));
    stat(j) -= lam * s;
  }
  double viol = 0.0;
  if (b.n_off > 0) {
    const auto w = v.tail(b.n_off);
    const double lam0 = 1.0 / (t * (rho_sq - w.squaredNorm()));
    stat.tail(b.n_off) += 2.0 * lam0 * w;
    viol = std::max(viol, w.squaredNorm() - rho_sq);
  }
  for (Eigen::Index j = 0; j < k; ++j) {
    viol = std::max(viol, prob.r - b.sign[static_cast<std::size_t>(j)] * v(j));
  }

  res.z = VectorXd::Zero(N);
  for (Eigen::Index j = 0; j < n; ++j) res.z(vars[static_cast<std::size_t>(j)]) = v(j);
  res.kkt_residual = stat.cwiseAbs().maxCoeff();
  res.duality_gap = m_c / t;
  res.max_violation = viol;
  res.converged = centered && res.duality_gap <= prob.gap_tol && viol <= prob.feas_tol;
  return res;
}

VectorXd qcqp_correct(const QcqpProblem& prob) { return qcqp_solve(prob).z; }

}  // namespace foldsense
