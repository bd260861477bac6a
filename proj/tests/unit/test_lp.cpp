#include "foldsense/lp.hpp"

#include <doctest.h>

using namespace foldsense;
using Eigen::MatrixXd;
using Eigen::VectorXd;

TEST_SUITE("lp") {

TEST_CASE("textbook maximization") {
  // max 3x + 5y, x <= 4, 2y <= 12, 3x + 2y <= 18 -> (2, 6), 36
  lp::LinearProgram p;
  p.objective = VectorXd{{3.0, 5.0}};
  p.ineq = MatrixXd{{1, 0}, {0, 2}, {3, 2}};
  p.ineq_rhs = VectorXd{{4.0, 12.0, 18.0}};
  const lp::Solution s = lp::solve(p);
  REQUIRE(s.status == lp::Status::Optimal);
  CHECK(s.objective == doctest::Approx(36.0));
  CHECK(s.x(0) == doctest::Approx(2.0));
  CHECK(s.x(1) == doctest::Approx(6.0));
}

TEST_CASE("equalities and free variables") {
  // max -|x| style: max -t, t >= x, t >= -x, x = -2 (x free)
  lp::LinearProgram p;
  p.objective = VectorXd{{0.0, -1.0}};
  p.ineq = MatrixXd{{1, -1}, {-1, -1}};
  p.ineq_rhs = VectorXd::Zero(2);
  p.eq = MatrixXd{{1, 0}};
  p.eq_rhs = VectorXd{{-2.0}};
  p.free_vars = {true, false};
  const lp::Solution s = lp::solve(p);
  REQUIRE(s.status == lp::Status::Optimal);
  CHECK(s.x(0) == doctest::Approx(-2.0));
  CHECK(s.objective == doctest::Approx(-2.0));
}

TEST_CASE("infeasible and unbounded") {
  lp::LinearProgram inf;
  inf.objective = VectorXd{{1.0}};
  inf.ineq = MatrixXd{{1.0}};
  inf.ineq_rhs = VectorXd{{-1.0}};
  CHECK(lp::solve(inf).status == lp::Status::Infeasible);

  lp::LinearProgram unb;
  unb.objective = VectorXd{{1.0, 0.0}};
  unb.ineq = MatrixXd{{-1.0, 1.0}};
  unb.ineq_rhs = VectorXd{{1.0}};
  CHECK(lp::solve(unb).status == lp::Status::Unbounded);
}

}
