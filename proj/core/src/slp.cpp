#include "foldsense/slp.hpp"

#include "foldsense/errors.hpp"
#include "format.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <ostream>

namespace foldsense {
namespace {

using Eigen::MatrixXd;
using Eigen::VectorXd;

void check_domain(double r, double eps, double p, const char* where) {
  if (!(r > 0.0) || !(eps > 0.0) || !(eps < r)) {
    throw DomainError(std::string(where) + ": need 0 < eps < r");
  }
  if (!(p >= 1.0 && p <= 2.0)) throw DomainError(std::string(where) + ": p must lie in [1, 2]");
}

// Minimizer of mu t^p + (t - a)^2 over t >= 0, for a >= 0.
double power_branch_min(double a, double mu, double p) {
  if (p == 2.0) return a / (1.0 + mu);
  if (p == 1.0) return std::max(a - 0.5 * mu, 0.0);
  if (p == 1.5) {
    // 2u^2 + 1.5 mu u - 2a = 0 with u = sqrt(t)
    const double u = (-1.5 * mu + std::sqrt(2.25 * mu * mu + 16.0 * a)) / 4.0;
    return u * u;
  }
  // mu p t^{p-1} + 2(t - a) is increasing in t; its root lies in [0, a].
  double lo = 0.0;
  double hi = a;
  double t = 0.5 * a;
  for (int it = 0; it < 200 && hi - lo > 1e-15 * std::max(1.0, a); ++it) {
    const double g = mu * p * std::pow(t, p - 1.0) + 2.0 * (t - a);
    if (g > 0.0) {
      hi = t;
    } else {
      lo = t;
    }
    const double h = mu * p * (p - 1.0) * std::pow(t, p - 2.0) + 2.0;
    double next = t - g / h;
    if (!(next > lo && next < hi)) next = 0.5 * (lo + hi);
    t = next;
  }
  return t;
}

}  // namespace

double CubicCoeffs::value(double t) const {
  const double u = t - s2;
  return (a3 * u + b2) * u * u + c0;
}

double CubicCoeffs::d1(double t) const {
  const double u = t - s2;
  return (3.0 * a3 * u + 2.0 * b2) * u;
}

double CubicCoeffs::d2(double t) const { return 6.0 * a3 * (t - s2) + 2.0 * b2; }

CubicCoeffs pi_coeffs(double r, double eps, double p) {
  check_domain(r, eps, p, "pi_coeffs");
  CubicCoeffs c;
  c.s1 = r - eps;
  c.s2 = r + eps;
  c.mu1 = p * std::pow(c.s1, p - 1.0);
  c.mu2 = std::pow(c.s1, p);
  c.mu3 = std::pow(r, p);
  const double d = c.s2 - c.s1;
  c.c0 = c.mu3;
  c.b2 = c.mu1 / d - 3.0 * (c.mu3 - c.mu2) / (d * d);
  c.a3 = c.mu1 / (3.0 * d * d) + 2.0 * c.b2 / (3.0 * d);
  return c;
}

double w_trunc(double t, double r, double eps, double p) {
  const CubicCoeffs c = pi_coeffs(r, eps, p);
  const double a = std::abs(t);
  if (a < c.s1) return std::pow(a, p);
  if (a <= c.s2) return c.value(a);
  return c.mu3;
}

double w_trunc_derivative(double t, double r, double eps, double p) {
  const CubicCoeffs c = pi_coeffs(r, eps, p);
  const double a = std::abs(t);
  const double sign = t < 0.0 ? -1.0 : 1.0;
  if (a < c.s1) return a == 0.0 ? 0.0 : sign * p * std::pow(a, p - 1.0);
  if (a <= c.s2) return sign * c.d1(a);
  return 0.0;
}

double sp_functional(const VectorXd& x, const SPParams& params) {
  const CubicCoeffs c = pi_coeffs(params.r, params.eps, params.p);
  double s = 0.0;
  for (Eigen::Index i = 0; i < x.size(); ++i) {
    const double a = std::abs(x(i));
    if (a < c.s1) {
      s += std::pow(a, params.p);
    } else if (a <= c.s2) {
      s += c.value(a);
    } else {
      s += c.mu3;
    }
  }
  return s;
}

double omega_for_nu_convexity(double r, double eps, double p) {
  const CubicCoeffs c = pi_coeffs(r, eps, p);
  // pi'' is linear, so its minimum over [s1, s2] sits at an endpoint. The
  // power branch t^p is convex for p >= 1 and adds nothing.
  const double min_curv = std::min(c.d2(c.s1), c.d2(c.s2));
  return std::max(0.0, -min_curv) / 2.0 + 1e-6;
}

double threshold_s2(double xi, double mu, double r, double eps) {
  if (!(mu > 0.0)) throw DomainError("threshold_s2: mu must be > 0");
  check_domain(r, eps, 2.0, "threshold_s2");
  const double a = std::abs(xi);
  const double sign = xi < 0.0 ? -1.0 : 1.0;
  if (a < (r - eps) * (1.0 + mu)) return xi / (1.0 + mu);
  if (a <= r + eps) {
    const double k = mu / (4.0 * eps);
    const double gamma = 4.0 * (1.0 + k * k * (2.0 * r + eps) * (2.0 * r + eps) +
                                (mu / (2.0 * eps)) * (2.0 * eps + r) - (3.0 * mu / (2.0 * eps)) * a);
    if (gamma < 0.0) {
      throw NumericError("threshold_s2: Gamma(xi) < 0 in the middle branch");
    }
    return sign * (4.0 * eps / (3.0 * mu)) * (1.0 + k * (2.0 * eps + r) - std::sqrt(gamma / 4.0));
  }
  return xi;
}

double threshold_sp(double xi, double mu, double r, double eps, double p) {
  if (!(mu > 0.0)) throw DomainError("threshold_sp: mu must be > 0");
  check_domain(r, eps, p, "threshold_sp");
  // The closed form is the exact minimizer when mu * W is 2-weakly convex.
  if (p == 2.0 && mu < 4.0 * eps / (2.0 * r + eps)) return threshold_s2(xi, mu, r, eps);

  const CubicCoeffs c = pi_coeffs(r, eps, p);
  const double a = std::abs(xi);
  const double sign = xi < 0.0 ? -1.0 : 1.0;

  std::array<double, 8> cand{};
  int n = 0;
  cand[n++] = std::min(power_branch_min(a, mu, p), c.s1);
  // mu pi'(t) + 2(t - a) = 0 with u = t - s2
  const double qa = 3.0 * mu * c.a3;
  const double qb = 2.0 * mu * c.b2 + 2.0;
  const double qc = 2.0 * (c.s2 - a);
  if (std::abs(qa) < 1e-14) {
    if (qb != 0.0) cand[n++] = std::clamp(c.s2 - qc / qb, c.s1, c.s2);
  } else {
    const double disc = qb * qb - 4.0 * qa * qc;
    if (disc >= 0.0) {
      const double sq = std::sqrt(disc);
      cand[n++] = std::clamp(c.s2 + (-qb + sq) / (2.0 * qa), c.s1, c.s2);
      cand[n++] = std::clamp(c.s2 + (-qb - sq) / (2.0 * qa), c.s1, c.s2);
    }
  }
  cand[n++] = std::max(a, c.s2);
  cand[n++] = 0.0;
  cand[n++] = c.s1;
  cand[n++] = c.s2;

  auto objective = [&](double t) {
    double w = 0.0;
    if (t < c.s1) {
      w = std::pow(t, p);
    } else if (t <= c.s2) {
      w = c.value(t);
    } else {
      w = c.mu3;
    }
    return mu * w + (t - a) * (t - a);
  };
  double best_t = cand[0];
  double best = objective(best_t);
  for (int i = 1; i < n; ++i) {
    const double v = objective(cand[static_cast<std::size_t>(i)]);
    if (v < best) {
      best = v;
      best_t = cand[static_cast<std::size_t>(i)];
    }
  }
  return sign * best_t;
}

SlpWeights resolve_slp_weights(const SPParams& params, double op_norm) {
  if (!(params.lambda > 0.0)) throw ParameterError("slp: lambda must be > 0");
  const double omega_min = omega_for_nu_convexity(params.r, params.eps, params.p);
  SlpWeights w;
  w.omega = params.omega > 0.0 ? params.omega : omega_min;
  if (w.omega < omega_min * (1.0 - 1e-12)) {
    throw ParameterError("slp: omega below the convexification bound");
  }
  const double norm_sq = op_norm * op_norm;
  if (params.mu > 0.0) {
    w.mu = params.mu;
    w.lipschitz = (1.0 / params.mu - w.omega) / params.lambda;
    if (w.lipschitz < norm_sq * (1.0 - 1e-12)) {
      throw ParameterError("slp: mu too large for the encoder norm (need 1/mu >= omega + lambda ||A||^2)");
    }
  } else {
    w.lipschitz = norm_sq;
    w.mu = 1.0 / (w.omega + params.lambda * w.lipschitz);
  }
  return w;
}

namespace {

struct InnerOut {
  VectorXd x;
  int iterations = 0;
};

InnerOut inner_loop(const MatrixXd& a, const VectorXd& target, const VectorXd& xprime,
                    const VectorXd& x_start, const SPParams& params, const SlpWeights& w) {
  const double lam = params.lambda;
  const double denom = 2.0 * w.omega + 2.0 * lam * w.lipschitz;
  const double guard = 1e6 * (1.0 + x_start.norm() + xprime.norm() + target.norm());
  InnerOut out;
  out.x = x_start;
  VectorXd xi(a.cols());
  for (int it = 1; it <= params.max_inner; ++it) {
    xi = (2.0 * w.omega * xprime +
          2.0 * lam * (w.lipschitz * out.x - a.transpose() * (a * out.x - target))) /
         denom;
    double diff_sq = 0.0;
    for (Eigen::Index i = 0; i < xi.size(); ++i) {
      const double t = threshold_sp(xi(i), w.mu, params.r, params.eps, params.p);
      const double d = t - out.x(i);
      diff_sq += d * d;
      out.x(i) = t;
    }
    out.iterations = it;
    if (!std::isfinite(diff_sq) || out.x.norm() > guard) {
      throw NumericError("slp inner iteration diverged at step " + std::to_string(it) +
                         " (||x|| = " + std::to_string(out.x.norm()) + ")");
    }
    if (std::sqrt(diff_sq) <= params.tol_inner) break;
  }
  return out;
}

}  // namespace

VectorXd inner_fixed_point(const Encoder& a, const VectorXd& target, const VectorXd& xprime,
                           const SPParams& params, const VectorXd& x_start, int* iterations) {
  if (target.size() != a.rows() || xprime.size() != a.cols()) {
    throw DimensionError("inner_fixed_point: size mismatch");
  }
  const double norm = operator_norm(a);
  if (norm > std::sqrt(2.0) * (1.0 + 1e-12)) {
    throw ParameterError("inner_fixed_point: needs ||A|| <= sqrt(2)");
  }
  const SlpWeights w = resolve_slp_weights(params, norm);
  const VectorXd& start = x_start.size() == 0 ? xprime : x_start;
  if (start.size() != a.cols()) throw DimensionError("inner_fixed_point: x_start size mismatch");
  InnerOut out = inner_loop(a.matrix(), target, xprime, start, params, w);
  if (iterations != nullptr) *iterations = out.iterations;
  return out.x;
}

DecodeResult slp_decode(const Encoder& a, const VectorXd& y, const VectorXd& x0,
                        const SPParams& params, std::vector<SlpTraceRow>* trace) {
  Stopwatch clock;
  if (y.size() != a.rows() || x0.size() != a.cols()) {
    throw DimensionError("slp_decode: size mismatch");
  }
  if (!(params.alpha > 1.0)) throw ParameterError("slp_decode: alpha must be > 1");
  if (params.max_outer < 1 || params.max_bregman < 1 || params.max_inner < 1) {
    throw ParameterError("slp_decode: iteration budgets must be >= 1");
  }
  const double norm = operator_norm(a);
  const double scale = 1.0 / std::max(1.0, norm);
  const MatrixXd as = a.matrix() * scale;
  const VectorXd ys = y * scale;
  const SlpWeights w = resolve_slp_weights(params, norm * scale);
  const double lam = params.lambda;

  DecodeResult r;
  r.method_tag = "slp";
  VectorXd x = x0;
  VectorXd q = VectorXd::Zero(y.size());
  double q_prev_norm = 0.0;
  int total_inner = 0;
  for (int l = 1; l <= params.max_outer; ++l) {
    const VectorXd xprime = x;
    const double budget = 1.0 / std::pow(static_cast<double>(l), params.alpha);
    int k = 0;
    int inner_this = 0;
    for (k = 1; k <= params.max_bregman; ++k) {
      const VectorXd target = ys + q / (2.0 * lam);
      InnerOut in = inner_loop(as, target, xprime, x, params, w);
      x = std::move(in.x);
      inner_this += in.iterations;
      q += 2.0 * lam * (ys - as * x);
      if ((1.0 + q_prev_norm) * (as * x - ys).norm() <= budget) break;
    }
    total_inner += inner_this;
    q_prev_norm = q.norm();
    const double step = (x - xprime).norm();
    const double res = (a.matrix() * x - y).norm();
    r.history.push_back(res);
    if (trace != nullptr) {
      trace->push_back({l, std::min(k, params.max_bregman), inner_this, res,
                        sp_functional(x, params), step});
    }
    r.iterations = total_inner;
    if (step <= params.tol_outer) {
      r.converged = true;
      break;
    }
  }
  r.xstar = std::move(x);
  r.residual = (a.matrix() * r.xstar - y).norm();
  r.objective = sp_functional(r.xstar, params);
  r.wall_time_ms = clock.elapsed_ms();
  return r;
}

void write_slp_trace_csv(std::ostream& out, const std::vector<SlpTraceRow>& trace) {
  out << "iteration,bregman,inner,residual,sp_value,step\n";
  for (const auto& t : trace) {
    out << t.outer << ',' << t.bregman << ',' << t.inner << ',' << detail::fmt_g(t.residual)
        << ',' << detail::fmt_g(t.sp_value) << ',' << detail::fmt_g(t.step) << '\n';
  }
}

}  // namespace foldsense
