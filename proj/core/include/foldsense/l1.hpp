#pragma once

#include "foldsense/decode_result.hpp"
#include "foldsense/encoders.hpp"

#include <Eigen/Dense>

namespace foldsense {

struct ConvexSolveOptions {
  int max_outer = 20000;    // splitting iterations
  int max_inner = 200;      // polishing attempts
  double primal_tol = 1e-9;
  double dual_tol = 1e-7;
  double penalty = 1.0;     // initial augmented-Lagrangian penalty
  int polish_every = 25;
  bool verbose = false;
};

/// argmin ||z||_1 s.t. Az = y.
DecodeResult solve_bp_equality(const Encoder& a, const Eigen::VectorXd& y,
                               const ConvexSolveOptions& opts = {});

/// argmin ||z||_1 s.t. ||Az - y||_2 <= delta.
DecodeResult solve_bp_inequality(const Encoder& a, const Eigen::VectorXd& y, double delta,
                                 const ConvexSolveOptions& opts = {});

/// argmin sum w_i |z_i| s.t. ||Az - y||_2 <= delta (equality when delta = 0).
DecodeResult solve_weighted_bp(const Encoder& a, const Eigen::VectorXd& y,
                               const Eigen::VectorXd& w, double delta,
                               const ConvexSolveOptions& opts = {});

inline constexpr double kIrwDefaultA = 0.1;
inline constexpr int kIrwDefaultIters = 8;

/// Iteratively reweighted l1: w^{n} = 1 / (|z^{n}| + a), starting from w = 1.
DecodeResult irw_l1(const Encoder& a, const Eigen::VectorXd& y, double a_reg = kIrwDefaultA,
                    int n_iters = kIrwDefaultIters, double delta = 0.0,
                    const ConvexSolveOptions& opts = {});

/// sqrt(sigma^2 (m + 2 sqrt(2m))).
double delta_param(double sigma, int m);

}  // namespace foldsense
