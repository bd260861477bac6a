#pragma once

#include "foldsense/decode_result.hpp"
#include "foldsense/encoders.hpp"

#include <Eigen/Dense>

#include <iosfwd>
#include <vector>

namespace foldsense {

struct SPParams {
  double r = 0.4;
  double eps = 0.3;
  double p = 2.0;
  double lambda = 0.5;
  double omega = 0.0;   // <= 0: use omega_for_nu_convexity
  double alpha = 1.1;
  double tol_outer = 1e-6;
  double tol_inner = 1e-8;
  double mu = 0.0;      // <= 0: derived from omega, lambda and ||A||^2
  int max_outer = 1000;
  int max_bregman = 200;
  int max_inner = 2000;
};

/// Cubic blend pi(t) = A (t - s2)^3 + B (t - s2)^2 + C on [s1, s2].
struct CubicCoeffs {
  double a3 = 0.0;
  double b2 = 0.0;
  double c0 = 0.0;
  double s1 = 0.0;
  double s2 = 0.0;
  double mu1 = 0.0;  // p s1^{p-1}
  double mu2 = 0.0;  // s1^p
  double mu3 = 0.0;  // r^p

  double value(double t) const;
  double d1(double t) const;
  double d2(double t) const;
};

CubicCoeffs pi_coeffs(double r, double eps, double p);

/// Even potential: |t|^p below r - eps, the cubic blend, r^p above r + eps.
double w_trunc(double t, double r, double eps, double p);
double w_trunc_derivative(double t, double r, double eps, double p);

/// sum_j w_trunc(x_j).
double sp_functional(const Eigen::VectorXd& x, const SPParams& params);

/// Half the most negative curvature of the potential, plus 1e-6.
double omega_for_nu_convexity(double r, double eps, double p);

/// Three-branch closed form for p = 2 (first matching branch wins, odd in xi).
double threshold_s2(double xi, double mu, double r, double eps);

/// argmin_t mu * w_trunc(t) + (t - xi)^2 by comparing the stationary points of
/// each branch; closed forms for p in {1, 3/2, 2}, safeguarded Newton otherwise.
double threshold_sp(double xi, double mu, double r, double eps, double p);

/// The weights the inner iteration actually uses.
struct SlpWeights {
  double omega = 0.0;
  double mu = 0.0;
  double lipschitz = 0.0;  // L in the majorizer, >= ||A||^2
};

SlpWeights resolve_slp_weights(const SPParams& params, double op_norm);

/// Componentwise fixed-point iteration for
///   min SP(x) + omega ||x - xprime||^2 + lambda ||A x - target||^2,
/// started at x_start (xprime if empty). Needs ||A|| <= sqrt(2).
Eigen::VectorXd inner_fixed_point(const Encoder& a, const Eigen::VectorXd& target,
                                  const Eigen::VectorXd& xprime, const SPParams& params,
                                  const Eigen::VectorXd& x_start = Eigen::VectorXd(),
                                  int* iterations = nullptr);

struct SlpTraceRow {
  int outer = 0;
  int bregman = 0;
  int inner = 0;
  double residual = 0.0;
  double sp_value = 0.0;
  double step = 0.0;  // ||x_l - x_{l-1}||
};

/// Outer re-centering, Bregman multiplier loop, inner thresholding iteration.
/// A and y are rescaled by 1 / max(1, ||A||) internally.
DecodeResult slp_decode(const Encoder& a, const Eigen::VectorXd& y, const Eigen::VectorXd& x0,
                        const SPParams& params, std::vector<SlpTraceRow>* trace = nullptr);

void write_slp_trace_csv(std::ostream& out, const std::vector<SlpTraceRow>& trace);

}  // namespace foldsense
