#include "foldsense/lp.hpp"

#include "foldsense/errors.hpp"

#include <cmath>
#include <limits>

namespace foldsense::lp {
namespace {

constexpr double kTol = 1e-10;

struct Tableau {
  Eigen::MatrixXd a;    // rows x cols, constraint coefficients
  Eigen::VectorXd b;    // rhs
  Eigen::VectorXd d;    // reduced profits, one per column
  double value = 0.0;   // objective value of the current basis
  std::vector<int> basis;
  std::vector<bool> enterable;

  void pivot(int r, int c) {
    const double p = a(r, c);
    a.row(r) /= p;
    b(r) /= p;
    for (int i = 0; i < a.rows(); ++i) {
      if (i == r) continue;
      const double f = a(i, c);
      if (f != 0.0) {
        a.row(i) -= f * a.row(r);
        b(i) -= f * b(r);
        a(i, c) = 0.0;
      }
    }
    const double dc = d(c);
    if (dc != 0.0) {
      value += dc * b(r);
      d -= dc * a.row(r).transpose();
      d(c) = 0.0;
    }
    a(r, c) = 1.0;
    basis[static_cast<std::size_t>(r)] = c;
  }

  // Returns Optimal, Unbounded or IterationLimit.
  Status run(int& pivots_left) {
    const int cols = static_cast<int>(a.cols());
    const int rows = static_cast<int>(a.rows());
    while (true) {
      int enter = -1;
      for (int j = 0; j < cols; ++j) {
        if (enterable[static_cast<std::size_t>(j)] && d(j) > kTol) {
          enter = j;
          break;
        }
      }
      if (enter < 0) return Status::Optimal;
      int leave = -1;
      double best = std::numeric_limits<double>::infinity();
      for (int i = 0; i < rows; ++i) {
        const double aij = a(i, enter);
        if (aij > kTol) {
          const double ratio = b(i) / aij;
          if (ratio < best - kTol ||
              (ratio <= best + kTol && leave >= 0 &&
               basis[static_cast<std::size_t>(i)] < basis[static_cast<std::size_t>(leave)])) {
            best = std::min(best, ratio);
            leave = i;
          }
        }
      }
      if (leave < 0) return Status::Unbounded;
      if (--pivots_left < 0) return Status::IterationLimit;
      pivot(leave, enter);
    }
  }
};

}  // namespace

Solution solve(const LinearProgram& problem, int max_pivots) {
  const int n = static_cast<int>(problem.objective.size());
  const int n_ineq = static_cast<int>(problem.ineq.rows());
  const int n_eq = static_cast<int>(problem.eq.rows());
  if ((n_ineq > 0 && problem.ineq.cols() != n) || (n_eq > 0 && problem.eq.cols() != n) ||
      problem.ineq_rhs.size() != n_ineq || problem.eq_rhs.size() != n_eq ||
      (!problem.free_vars.empty() && static_cast<int>(problem.free_vars.size()) != n)) {
    throw DimensionError("lp::solve: inconsistent problem dimensions");
  }

  // Column layout: split variables, then slacks, then artificials.
  std::vector<int> plus_col(static_cast<std::size_t>(n));
  std::vector<int> minus_col(static_cast<std::size_t>(n), -1);
  int cols = 0;
  for (int j = 0; j < n; ++j) {
    plus_col[static_cast<std::size_t>(j)] = cols++;
    if (!problem.free_vars.empty() && problem.free_vars[static_cast<std::size_t>(j)]) {
      minus_col[static_cast<std::size_t>(j)] = cols++;
    }
  }
  const int slack0 = cols;
  cols += n_ineq;
  const int rows = n_ineq + n_eq;

  // Rows needing an artificial: equalities and inequalities with negative rhs.
  std::vector<int> art_row;
  for (int i = 0; i < n_ineq; ++i) {
    if (problem.ineq_rhs(i) < 0.0) art_row.push_back(i);
  }
  for (int i = 0; i < n_eq; ++i) art_row.push_back(n_ineq + i);
  const int art0 = cols;
  cols += static_cast<int>(art_row.size());

  Tableau t;
  t.a = Eigen::MatrixXd::Zero(rows, cols);
  t.b = Eigen::VectorXd::Zero(rows);
  t.basis.assign(static_cast<std::size_t>(rows), -1);

  auto fill_row = [&](int row, const Eigen::RowVectorXd& coeffs, double rhs, double sign) {
    for (int j = 0; j < n; ++j) {
      t.a(row, plus_col[static_cast<std::size_t>(j)]) = sign * coeffs(j);
      if (minus_col[static_cast<std::size_t>(j)] >= 0) {
        t.a(row, minus_col[static_cast<std::size_t>(j)]) = -sign * coeffs(j);
      }
    }
    t.b(row) = sign * rhs;
  };
  for (int i = 0; i < n_ineq; ++i) {
    const double sign = problem.ineq_rhs(i) < 0.0 ? -1.0 : 1.0;
    fill_row(i, problem.ineq.row(i), problem.ineq_rhs(i), sign);
    t.a(i, slack0 + i) = sign;
    if (sign > 0.0) t.basis[static_cast<std::size_t>(i)] = slack0 + i;
  }
  for (int i = 0; i < n_eq; ++i) {
    const double sign = problem.eq_rhs(i) < 0.0 ? -1.0 : 1.0;
    fill_row(n_ineq + i, problem.eq.row(i), problem.eq_rhs(i), sign);
  }
  for (std::size_t q = 0; q < art_row.size(); ++q) {
    const int row = art_row[q];
    t.a(row, art0 + static_cast<int>(q)) = 1.0;
    t.basis[static_cast<std::size_t>(row)] = art0 + static_cast<int>(q);
  }

  int pivots_left = max_pivots;
  Solution out;

  // Phase 1: maximize -sum(artificials).
  t.enterable.assign(static_cast<std::size_t>(cols), true);
  if (!art_row.empty()) {
    t.d = Eigen::VectorXd::Zero(cols);
    t.value = 0.0;
    for (int row : art_row) {
      t.d.head(art0) += t.a.row(row).head(art0).transpose();
      t.value -= t.b(row);
    }
    const Status s1 = t.run(pivots_left);
    if (s1 == Status::IterationLimit) {
      out.status = s1;
      return out;
    }
    if (t.value < -1e-8 * (1.0 + t.b.cwiseAbs().maxCoeff())) {
      out.status = Status::Infeasible;
      return out;
    }
    // Drive artificials at zero level out of the basis; drop redundant rows.
    std::vector<int> keep;
    for (int i = 0; i < rows; ++i) {
      if (t.basis[static_cast<std::size_t>(i)] >= art0) {
        int c = -1;
        for (int j = 0; j < art0; ++j) {
          if (std::abs(t.a(i, j)) > 1e-9) {
            c = j;
            break;
          }
        }
        if (c >= 0) {
          t.pivot(i, c);
          keep.push_back(i);
        }
      } else {
        keep.push_back(i);
      }
    }
    if (static_cast<int>(keep.size()) < rows) {
      Tableau r;
      r.a.resize(static_cast<Eigen::Index>(keep.size()), cols);
      r.b.resize(static_cast<Eigen::Index>(keep.size()));
      for (std::size_t q = 0; q < keep.size(); ++q) {
        r.a.row(static_cast<Eigen::Index>(q)) = t.a.row(keep[q]);
        r.b(static_cast<Eigen::Index>(q)) = t.b(keep[q]);
        r.basis.push_back(t.basis[static_cast<std::size_t>(keep[q])]);
      }
      t = std::move(r);
    }
    t.enterable.assign(static_cast<std::size_t>(cols), true);
    for (int j = art0; j < cols; ++j) t.enterable[static_cast<std::size_t>(j)] = false;
  }

  // Phase 2.
  Eigen::VectorXd cost = Eigen::VectorXd::Zero(cols);
  for (int j = 0; j < n; ++j) {
    cost(plus_col[static_cast<std::size_t>(j)]) = problem.objective(j);
    if (minus_col[static_cast<std::size_t>(j)] >= 0) {
      cost(minus_col[static_cast<std::size_t>(j)]) = -problem.objective(j);
    }
  }
  t.d = cost;
  t.value = 0.0;
  for (std::size_t i = 0; i < t.basis.size(); ++i) {
    const int bc = t.basis[i];
    const double cb = cost(bc);
    if (cb != 0.0) {
      t.d -= cb * t.a.row(static_cast<Eigen::Index>(i)).transpose();
      t.value += cb * t.b(static_cast<Eigen::Index>(i));
    }
  }
  for (int bc : t.basis) t.d(bc) = 0.0;

  const Status s2 = t.run(pivots_left);
  out.status = s2;
  if (s2 != Status::Optimal) return out;

  Eigen::VectorXd col_values = Eigen::VectorXd::Zero(cols);
  for (std::size_t i = 0; i < t.basis.size(); ++i) {
    col_values(t.basis[i]) = t.b(static_cast<Eigen::Index>(i));
  }
  out.x.resize(n);
  for (int j = 0; j < n; ++j) {
    double v = col_values(plus_col[static_cast<std::size_t>(j)]);
    if (minus_col[static_cast<std::size_t>(j)] >= 0) v -= col_values(minus_col[static_cast<std::size_t>(j)]);
    out.x(j) = v;
  }
  out.objective = problem.objective.dot(out.x);
  return out;
}

}  // namespace foldsense::lp
