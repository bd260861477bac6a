#pragma once

#include <Eigen/Dense>

#include <vector>

namespace foldsense::lp {

/// maximize objective'x  s.t.  ineq x <= ineq_rhs,  eq x == eq_rhs,
/// x_j >= 0 unless free_vars[j] is set.
struct LinearProgram {
  Eigen::VectorXd objective;
  Eigen::MatrixXd ineq;
  Eigen::VectorXd ineq_rhs;
  Eigen::MatrixXd eq;
  Eigen::VectorXd eq_rhs;
  std::vector<bool> free_vars;  // empty means every variable is nonnegative
};

enum class Status { Optimal, Infeasible, Unbounded, IterationLimit };

struct Solution {
  Status status = Status::IterationLimit;
  double objective = 0.0;
  Eigen::VectorXd x;
};

/// Dense two-phase tableau simplex with Bland's rule. Meant for the small
/// certification problems in this library (a few hundred rows at most).
Solution solve(const LinearProgram& problem, int max_pivots = 200000);

}  // namespace foldsense::lp
