#include "foldsense/encoders.hpp"
#include "foldsense/errors.hpp"
#include "foldsense/l1.hpp"
#include "foldsense/signals.hpp"

#include "../oracles.hpp"

#include <doctest.h>

#include <cmath>

using namespace foldsense;
using Eigen::MatrixXd;
using Eigen::VectorXd;

TEST_SUITE("l1") {

TEST_CASE("delta_param") {
  CHECK(delta_param(0.0, 40) == 0.0);
  CHECK(delta_param(1.0, 40) == doctest::Approx(std::sqrt(40.0 + 2.0 * std::sqrt(80.0))));
  CHECK(delta_param(1.0, 40) == doctest::Approx(7.6085).epsilon(1e-4));
  CHECK(delta_param(2.0, 40) == doctest::Approx(2.0 * delta_param(1.0, 40)));
  CHECK_THROWS_AS(delta_param(-1.0, 4), ParameterError);
}

TEST_CASE("equality minimizer matches vertex enumeration") {
  for (std::uint64_t s = 0; s < 15; ++s) {
    const Encoder a = gaussian_encoder(5, 10, 1000 + s);
    const NoisySignal sig = generate_signal(10, {0.3, 2, 0.8, 2.0}, 2, 2000 + s);
    const VectorXd y = a.matrix() * sig.x;
    const DecodeResult r = solve_bp_equality(a, y);
    const VectorXd ref = oracle::l1_by_vertices(a.matrix(), y);
    CHECK(r.converged);
    CHECK(r.method_tag == "l1_eq");
    CHECK(r.xstar.lpNorm<1>() == doctest::Approx(ref.lpNorm<1>()).epsilon(1e-8));
    CHECK((a.matrix() * r.xstar - y).norm() <= 1e-8);
    CHECK(r.objective == doctest::Approx(r.xstar.lpNorm<1>()));
  }
}

TEST_CASE("noiseless sparse recovery on certified instances") {
  int used = 0;
  for (std::uint64_t s = 0; used < 8 && s < 100; ++s) {
    const Encoder a = gaussian_encoder(9, 12, 3000 + s);
    if (!(nsp_constant(a, 2) < 1.0)) continue;
    ++used;
    const NoisySignal sig = generate_signal(12, {0.0, 2, 0.8, 2.0}, 2, 4000 + s);
    const DecodeResult r = solve_bp_equality(a, a.matrix() * sig.x);
    CHECK((r.xstar - sig.x).norm() <= 1e-6);
  }
  CHECK(used == 8);
}

TEST_CASE("instance optimality on certified instances") {
  int used = 0;
  for (std::uint64_t s = 0; used < 10 && s < 200; ++s) {
    const Encoder a = gaussian_encoder(7, 12, 5000 + s);
    const double g = nsp_constant(a, 1);
    if (!(g < 1.0)) continue;
    ++used;
    const NoisySignal sig = generate_signal(12, {0.2, 1, 0.8, 2.0}, 1, 6000 + s);
    const DecodeResult r = solve_bp_equality(a, a.matrix() * sig.x);
    const double bound = 2.0 * (1.0 + g) / (1.0 - g) * best_k_term(sig.x, 1, 1.0).second;
    CHECK((sig.x - r.xstar).lpNorm<1>() <= bound + 1e-7);
  }
  CHECK(used == 10);
}

TEST_CASE("sign-flip equivariance") {
  for (std::uint64_t s = 0; s < 5; ++s) {
    const Encoder a = gaussian_encoder(20, 50, 7000 + s);
    const NoisySignal sig = generate_signal(50, {0.5, 3, 0.8, 2.0}, 3, s);
    const VectorXd y = a.matrix() * sig.x;
    const DecodeResult p = solve_bp_equality(a, y);
    const DecodeResult n = solve_bp_equality(a, -y);
    CHECK((p.xstar + n.xstar).cwiseAbs().maxCoeff() <= 1e-12);
  }
}

TEST_CASE("converged implies feasibility") {
  ConvexSolveOptions o;
  for (std::uint64_t s = 0; s < 10; ++s) {
    const Encoder a = gaussian_encoder(15, 40, 8000 + s);
    const NoisySignal sig = generate_signal(40, {0.75, 3, 0.8, 2.0}, 3, s);
    const VectorXd y = a.matrix() * sig.x;
    const DecodeResult r = solve_bp_equality(a, y, o);
    if (r.converged) CHECK(r.residual <= o.primal_tol * std::max(1.0, y.norm()));
  }
}

TEST_CASE("zero data decodes to zero") {
  const Encoder a = gaussian_encoder(4, 9, 1);
  CHECK(solve_bp_equality(a, VectorXd::Zero(4)).xstar.isZero());
  const VectorXd y = VectorXd::Constant(4, 0.1);
  CHECK(solve_bp_inequality(a, y, y.norm() + 1e-9).xstar.isZero());
}

TEST_CASE("inequality minimizer satisfies the KKT conditions") {
  for (std::uint64_t s = 0; s < 8; ++s) {
    const Encoder a = gaussian_encoder(20, 50, 9000 + s);
    const NoisySignal sig = generate_signal(50, {0.5, 3, 0.8, 2.0}, 3, 100 + s);
    const VectorXd y = a.matrix() * sig.x;
    const double delta = 0.3;
    const DecodeResult r = solve_bp_inequality(a, y, delta);
    CHECK(r.method_tag == "l1_ineq");
    CHECK(r.residual <= delta + 1e-8);
    CHECK(r.residual == doctest::Approx(delta).epsilon(1e-6));
    // A'(y - Ax) / ||A'(y - Ax)||_inf is a subgradient of ||x||_1 at x*.
    const VectorXd g = a.matrix().transpose() * (y - a.matrix() * r.xstar);
    const double gmax = g.cwiseAbs().maxCoeff();
    for (Eigen::Index i = 0; i < g.size(); ++i) {
      if (r.xstar(i) != 0.0) CHECK(g(i) / gmax == doctest::Approx(r.xstar(i) > 0 ? 1.0 : -1.0).epsilon(1e-5));
    }
    CHECK(r.xstar.lpNorm<1>() <= solve_bp_equality(a, y).xstar.lpNorm<1>() + 1e-9);
  }
}

TEST_CASE("unit weights reproduce plain basis pursuit") {
  const Encoder a = gaussian_encoder(12, 30, 11);
  const NoisySignal sig = generate_signal(30, {0.4, 2, 0.8, 2.0}, 2, 12);
  const VectorXd y = a.matrix() * sig.x;
  const DecodeResult w = solve_weighted_bp(a, y, VectorXd::Ones(30), 0.0);
  const DecodeResult p = solve_bp_equality(a, y);
  CHECK((w.xstar - p.xstar).norm() <= 1e-7);
}

TEST_CASE("irw-l1 records each pass") {
  const Encoder a = gaussian_encoder(20, 50, 21);
  const NoisySignal sig = generate_signal(50, {0.5, 3, 0.8, 2.0}, 3, 22);
  const VectorXd y = a.matrix() * sig.x;
  const DecodeResult r = irw_l1(a, y, 0.1, 5);
  CHECK(r.method_tag == "irw_l1");
  CHECK(r.history.size() == 5);
  CHECK(r.residual <= 1e-7);
  CHECK(r.objective == doctest::Approx(r.xstar.lpNorm<1>()));
  CHECK_THROWS_AS(irw_l1(a, y, 0.0, 5), ParameterError);
  CHECK_THROWS_AS(irw_l1(a, y, 0.1, 0), ParameterError);
}

TEST_CASE("input validation") {
  const Encoder a = gaussian_encoder(4, 9, 1);
  CHECK_THROWS_AS(solve_bp_equality(a, VectorXd::Zero(5)), DimensionError);
  CHECK_THROWS_AS(solve_bp_inequality(a, VectorXd::Zero(4), -1.0), ParameterError);
  CHECK_THROWS_AS(solve_weighted_bp(a, VectorXd::Zero(4), VectorXd::Zero(9), 0.0), ParameterError);
}

}
