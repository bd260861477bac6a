#include "foldsense/l1.hpp"

#include "foldsense/errors.hpp"

#include <algorithm>
#include <cmath>
#include <iostream>

namespace foldsense {
namespace {

using Eigen::MatrixXd;
using Eigen::VectorXd;

VectorXd soft(const VectorXd& v, const VectorXd& t) {
  VectorXd out(v.size());
  for (Eigen::Index i = 0; i < v.size(); ++i) {
    const double mag = std::abs(v(i)) - t(i);
    out(i) = mag > 0.0 ? (v(i) > 0.0 ? mag : -mag) : 0.0;
  }
  return out;
}

std::vector<int> nonzeros(const VectorXd& z) {
  std::vector<int> s;
  for (Eigen::Index i = 0; i < z.size(); ++i) {
    if (z(i) != 0.0) s.push_back(static_cast<int>(i));
  }
  return s;
}

MatrixXd columns(const MatrixXd& a, const std::vector<int>& s) {
  MatrixXd out(a.rows(), static_cast<Eigen::Index>(s.size()));
  for (std::size_t j = 0; j < s.size(); ++j) out.col(static_cast<Eigen::Index>(j)) = a.col(s[j]);
  return out;
}

// Solves A A' v = b; falls back to a pseudo-inverse if A lacks full row rank.
class RowGram {
 public:
  explicit RowGram(const MatrixXd& a) : gram_(a * a.transpose()) {
    ldlt_.compute(gram_);
    const auto d = ldlt_.vectorD();
    const double scale = std::max(1.0, d.cwiseAbs().maxCoeff());
    full_rank_ = ldlt_.info() == Eigen::Success && d.minCoeff() > 1e-12 * scale;
    if (!full_rank_) cod_.compute(gram_);
  }
  VectorXd solve(const VectorXd& b) const {
    if (full_rank_) return ldlt_.solve(b);
    return cod_.solve(b);
  }

 private:
  MatrixXd gram_;
  Eigen::LDLT<MatrixXd> ldlt_;
  Eigen::CompleteOrthogonalDecomposition<MatrixXd> cod_;
  bool full_rank_ = false;
};

struct Polished {
  bool ok = false;
  VectorXd x;
};

bool signs_match(const VectorXd& xs, const VectorXd& z, const std::vector<int>& s) {
  for (std::size_t j = 0; j < s.size(); ++j) {
    const double v = xs(static_cast<Eigen::Index>(j));
    if (v == 0.0 || (v > 0.0) != (z(s[j]) > 0.0)) return false;
  }
  return true;
}

// Equality case: solve on supp(z) and certify with a dual vector built from
// the splitting multiplier (rho*u lies in the l1 subdifferential at z).
Polished polish_equality(const MatrixXd& a, const VectorXd& y, const VectorXd& w,
                         const RowGram& row_gram, const VectorXd& z, const VectorXd& rho_u,
                         const ConvexSolveOptions& opts) {
  Polished out;
  const std::vector<int> s = nonzeros(z);
  if (s.empty() || static_cast<Eigen::Index>(s.size()) > a.rows()) return out;
  const MatrixXd as = columns(a, s);
  Eigen::ColPivHouseholderQR<MatrixXd> qr(as);
  if (qr.rank() < static_cast<Eigen::Index>(s.size())) return out;
  const VectorXd xs = qr.solve(y);
  if ((as * xs - y).norm() > opts.primal_tol * std::max(1.0, y.norm())) return out;
  if (!signs_match(xs, z, s)) return out;

  VectorXd b(static_cast<Eigen::Index>(s.size()));
  for (std::size_t j = 0; j < s.size(); ++j) {
    b(static_cast<Eigen::Index>(j)) = w(s[j]) * (z(s[j]) > 0.0 ? 1.0 : -1.0);
  }
  VectorXd lambda = row_gram.solve(a * rho_u);
  const MatrixXd g = as.transpose() * as;
  lambda += as * g.ldlt().solve(b - as.transpose() * lambda);
  const VectorXd corr = a.transpose() * lambda;
  std::vector<char> on(static_cast<std::size_t>(a.cols()), 0);
  for (int i : s) on[static_cast<std::size_t>(i)] = 1;
  for (Eigen::Index i = 0; i < a.cols(); ++i) {
    if (!on[static_cast<std::size_t>(i)] && std::abs(corr(i)) > w(i) * (1.0 + opts.dual_tol)) {
      return out;
    }
  }
  out.x = VectorXd::Zero(a.cols());
  for (std::size_t j = 0; j < s.size(); ++j) out.x(s[j]) = xs(static_cast<Eigen::Index>(j));
  out.ok = true;
  return out;
}

// Ball case: on a fixed support and sign pattern the problem is a linear
// objective over an ellipsoid, solvable in closed form.
Polished polish_ball(const MatrixXd& a, const VectorXd& y, const VectorXd& w, double delta,
                     const VectorXd& z, const ConvexSolveOptions& opts) {
  Polished out;
  const std::vector<int> s = nonzeros(z);
  if (s.empty() || static_cast<Eigen::Index>(s.size()) > a.rows()) return out;
  const MatrixXd as = columns(a, s);
  const MatrixXd g = as.transpose() * as;
  Eigen::LDLT<MatrixXd> ldlt(g);
  if (ldlt.info() != Eigen::Success || ldlt.vectorD().minCoeff() <= 1e-12 * g.diagonal().maxCoeff()) {
    return out;
  }
  VectorXd c(static_cast<Eigen::Index>(s.size()));
  for (std::size_t j = 0; j < s.size(); ++j) {
    c(static_cast<Eigen::Index>(j)) = w(s[j]) * (z(s[j]) > 0.0 ? 1.0 : -1.0);
  }
  const VectorXd x_ls = ldlt.solve(as.transpose() * y);
  const double r0_sq = (as * x_ls - y).squaredNorm();
  if (r0_sq >= delta * delta) return out;
  const VectorXd gc = ldlt.solve(c);
  const double cgc = c.dot(gc);
  if (!(cgc > 0.0)) return out;
  const double t = std::sqrt((delta * delta - r0_sq) / cgc);
  const VectorXd xs = x_ls - t * gc;
  if (!signs_match(xs, z, s)) return out;

  VectorXd x = VectorXd::Zero(a.cols());
  for (std::size_t j = 0; j < s.size(); ++j) x(s[j]) = xs(static_cast<Eigen::Index>(j));
  const VectorXd corr = a.transpose() * (a * x - y) / t;
  std::vector<char> on(static_cast<std::size_t>(a.cols()), 0);
  for (int i : s) on[static_cast<std::size_t>(i)] = 1;
  for (Eigen::Index i = 0; i < a.cols(); ++i) {
    if (!on[static_cast<std::size_t>(i)] && std::abs(corr(i)) > w(i) * (1.0 + opts.dual_tol)) {
      return out;
    }
  }
  out.x = std::move(x);
  out.ok = true;
  return out;
}

struct Engine {
  VectorXd x;
  bool converged = false;
  bool polished = false;
  int iterations = 0;
  std::vector<double> history;
};

Engine admm_equality(const MatrixXd& a, const VectorXd& y, const VectorXd& w,
                     const ConvexSolveOptions& opts) {
  const Eigen::Index n = a.cols();
  const RowGram row_gram(a);
  auto project = [&](const VectorXd& v) -> VectorXd {
    return v - a.transpose() * row_gram.solve(a * v - y);
  };

  Engine e;
  VectorXd z = VectorXd::Zero(n);
  VectorXd u = VectorXd::Zero(n);
  VectorXd x = VectorXd::Zero(n);
  double rho = opts.penalty;
  const double tol_rel = opts.dual_tol;
  const double tol_abs = 1e-2 * opts.dual_tol;
  std::vector<int> last_support;
  int polish_left = opts.max_inner;

  for (int it = 1; it <= opts.max_outer; ++it) {
    x = project(z - u);
    const VectorXd z_old = z;
    z = soft(x + u, w / rho);
    u += x - z;
    e.iterations = it;

    const double r_pri = (x - z).norm();
    const double r_dual = rho * (z - z_old).norm();
    e.history.push_back(r_pri);
    const double sq = std::sqrt(static_cast<double>(n));
    const double eps_pri = sq * tol_abs + tol_rel * std::max(x.norm(), z.norm());
    const double eps_dual = sq * tol_abs + tol_rel * rho * u.norm();

    const bool done = r_pri <= eps_pri && r_dual <= eps_dual;
    if ((it % opts.polish_every == 0 && polish_left > 0) || done) {
      std::vector<int> support = nonzeros(z);
      if (support == last_support || done) {
        --polish_left;
        const Polished p = polish_equality(a, y, w, row_gram, z, rho * u, opts);
        if (p.ok) {
          e.x = p.x;
          e.converged = true;
          e.polished = true;
          return e;
        }
      }
      last_support = std::move(support);
    }
    if (done) {
      e.converged = true;
      break;
    }
    if (it % 10 == 0) {
      if (r_pri > 10.0 * r_dual) {
        rho *= 2.0;
        u *= 0.5;
      } else if (r_dual > 10.0 * r_pri) {
        rho *= 0.5;
        u *= 2.0;
      }
    }
    if (opts.verbose && it % 500 == 0) {
      std::cerr << "bp_eq it=" << it << " r_pri=" << r_pri << " r_dual=" << r_dual << '\n';
    }
  }
  e.x = project(z);
  return e;
}

Engine admm_ball(const MatrixXd& a, const VectorXd& y, const VectorXd& w, double delta,
                 const ConvexSolveOptions& opts) {
  const Eigen::Index n = a.cols();
  const Eigen::Index m = a.rows();
  // (I + A'A)^{-1} b = b - A' (I + AA')^{-1} A b
  const MatrixXd small = MatrixXd::Identity(m, m) + a * a.transpose();
  const Eigen::LLT<MatrixXd> llt(small);
  auto solve_normal = [&](const VectorXd& b) -> VectorXd {
    return b - a.transpose() * llt.solve(a * b);
  };
  auto project_ball = [&](const VectorXd& v) -> VectorXd {
    const VectorXd d = v - y;
    const double nd = d.norm();
    return nd <= delta ? v : VectorXd(y + d * (delta / nd));
  };

  Engine e;
  VectorXd x = VectorXd::Zero(n);
  VectorXd z = VectorXd::Zero(n);
  VectorXd u1 = VectorXd::Zero(n);
  VectorXd v = project_ball(VectorXd::Zero(m));
  VectorXd u2 = VectorXd::Zero(m);
  double rho = opts.penalty;
  const double tol_rel = opts.dual_tol;
  const double tol_abs = 1e-2 * opts.dual_tol;
  std::vector<int> last_support;
  int polish_left = opts.max_inner;

  for (int it = 1; it <= opts.max_outer; ++it) {
    x = solve_normal(z - u1 + a.transpose() * (v - u2));
    const VectorXd z_old = z;
    const VectorXd v_old = v;
    z = soft(x + u1, w / rho);
    const VectorXd ax = a * x;
    v = project_ball(ax + u2);
    u1 += x - z;
    u2 += ax - v;
    e.iterations = it;

    const double r_pri = std::sqrt((x - z).squaredNorm() + (ax - v).squaredNorm());
    const double r_dual =
        rho * std::sqrt((z - z_old).squaredNorm() + (a.transpose() * (v - v_old)).squaredNorm());
    e.history.push_back(r_pri);
    const double sq = std::sqrt(static_cast<double>(n + m));
    const double eps_pri =
        sq * tol_abs + tol_rel * std::max({x.norm(), z.norm(), v.norm()});
    const double eps_dual =
        sq * tol_abs + tol_rel * rho * std::sqrt(u1.squaredNorm() + u2.squaredNorm());
    const bool done = r_pri <= eps_pri && r_dual <= eps_dual;

    if ((it % opts.polish_every == 0 && polish_left > 0) || done) {
      std::vector<int> support = nonzeros(z);
      if (support == last_support || done) {
        --polish_left;
        const Polished p = polish_ball(a, y, w, delta, z, opts);
        if (p.ok) {
          e.x = p.x;
          e.converged = true;
          e.polished = true;
          return e;
        }
      }
      last_support = std::move(support);
    }
    if (done) {
      e.converged = true;
      break;
    }
    if (it % 10 == 0) {
      if (r_pri > 10.0 * r_dual) {
        rho *= 2.0;
        u1 *= 0.5;
        u2 *= 0.5;
      } else if (r_dual > 10.0 * r_pri) {
        rho *= 0.5;
        u1 *= 2.0;
        u2 *= 2.0;
      }
    }
    if (opts.verbose && it % 500 == 0) {
      std::cerr << "bp_ball it=" << it << " r_pri=" << r_pri << " r_dual=" << r_dual << '\n';
    }
  }
  e.x = (a * z - y).norm() <= delta + opts.primal_tol ? z : x;
  return e;
}

void check_inputs(const Encoder& a, const VectorXd& y, double delta) {
  if (y.size() != a.rows()) {
    throw DimensionError("l1 decoder: y has length " + std::to_string(y.size()) +
                         ", expected " + std::to_string(a.rows()));
  }
  if (!(delta >= 0.0)) throw ParameterError("l1 decoder: delta must be >= 0");
}

DecodeResult weighted_core(const Encoder& enc, const VectorXd& y, const VectorXd& w, double delta,
                           const ConvexSolveOptions& opts, std::string tag) {
  Stopwatch clock;
  check_inputs(enc, y, delta);
  const MatrixXd& a = enc.matrix();
  if (w.size() != a.cols()) throw DimensionError("l1 decoder: weight length mismatch");
  if (!(w.minCoeff() > 0.0) || !w.allFinite()) {
    throw ParameterError("l1 decoder: weights must be positive and finite");
  }
  if (opts.max_outer < 1 || opts.penalty <= 0.0 || opts.primal_tol <= 0.0 || opts.dual_tol <= 0.0) {
    throw ParameterError("l1 decoder: invalid solver options");
  }

  DecodeResult r;
  r.method_tag = std::move(tag);
  if (y.norm() <= delta) {
    // Origin is feasible and has the smallest possible objective.
    r.xstar = VectorXd::Zero(a.cols());
    r.converged = true;
  } else {
    // Only the direction of w matters for the minimizer.
    const VectorXd wn = w / w.maxCoeff();
    Engine e = delta == 0.0 ? admm_equality(a, y, wn, opts) : admm_ball(a, y, wn, delta, opts);
    r.xstar = std::move(e.x);
    r.iterations = e.iterations;
    r.history = std::move(e.history);
    r.converged = e.converged;
  }
  r.residual = (a * r.xstar - y).norm();
  if (r.converged && r.residual > delta + opts.primal_tol * std::max(1.0, y.norm())) {
    r.converged = false;
  }
  r.objective = w.cwiseProduct(r.xstar.cwiseAbs()).sum();
  r.wall_time_ms = clock.elapsed_ms();
  return r;
}

}  // namespace

DecodeResult solve_bp_equality(const Encoder& a, const VectorXd& y, const ConvexSolveOptions& opts) {
  return weighted_core(a, y, VectorXd::Ones(a.cols()), 0.0, opts, "l1_eq");
}

DecodeResult solve_bp_inequality(const Encoder& a, const VectorXd& y, double delta,
                                 const ConvexSolveOptions& opts) {
  return weighted_core(a, y, VectorXd::Ones(a.cols()), delta, opts, "l1_ineq");
}

DecodeResult solve_weighted_bp(const Encoder& a, const VectorXd& y, const VectorXd& w, double delta,
                               const ConvexSolveOptions& opts) {
  return weighted_core(a, y, w, delta, opts, "l1_weighted");
}

DecodeResult irw_l1(const Encoder& a, const VectorXd& y, double a_reg, int n_iters, double delta,
                    const ConvexSolveOptions& opts) {
  if (!(a_reg > 0.0)) throw ParameterError("irw_l1: a must be > 0");
  if (n_iters < 1) throw ParameterError("irw_l1: n_iters must be >= 1");
  Stopwatch clock;
  VectorXd w = VectorXd::Ones(a.cols());
  DecodeResult out;
  int total = 0;
  bool all_converged = true;
  for (int n = 0; n < n_iters; ++n) {
    DecodeResult step = weighted_core(a, y, w, delta, opts, "irw_l1");
    total += step.iterations;
    all_converged = all_converged && step.converged;
    out.history.push_back(step.residual);
    w = (step.xstar.cwiseAbs().array() + a_reg).inverse().matrix();
    out.xstar = std::move(step.xstar);
  }
  out.method_tag = "irw_l1";
  out.iterations = total;
  out.converged = all_converged;
  out.residual = (a.matrix() * out.xstar - y).norm();
  out.objective = out.xstar.lpNorm<1>();
  out.wall_time_ms = clock.elapsed_ms();
  return out;
}

double delta_param(double sigma, int m) {
  if (sigma < 0.0) throw ParameterError("delta_param: sigma must be >= 0");
  if (m < 1) throw ParameterError("delta_param: m must be >= 1");
  const double md = static_cast<double>(m);
  return std::sqrt(sigma * sigma * (md + 2.0 * std::sqrt(2.0 * md)));
}

}  // namespace foldsense
