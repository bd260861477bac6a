#include "foldsense/errors.hpp"
#include "foldsense/signals.hpp"

#include <doctest.h>

#include <algorithm>
#include <cmath>

using namespace foldsense;
using Eigen::VectorXd;

namespace {

VectorXd vec(std::initializer_list<double> v) {
  VectorXd x(static_cast<Eigen::Index>(v.size()));
  Eigen::Index i = 0;
  for (double d : v) x(i++) = d;
  return x;
}

NoisySignal wrap(const VectorXd& x, double r) {
  NoisySignal s;
  s.x = x;
  s.params.r = r;
  s.relevant_support = support_above(x, r);
  return s;
}

}  // namespace

TEST_SUITE("signals") {

TEST_CASE("kappa_p values") {
  CHECK(kappa_p(100, 5, 1.0) == 1.0);
  CHECK(kappa_p(5, 1, 2.0) == doctest::Approx(2.0));
  CHECK(kappa_p(28, 1, 1.5) == doctest::Approx(3.0));
  CHECK_THROWS_AS(kappa_p(10, 2, 2.5), DomainError);
  CHECK_THROWS_AS(kappa_p(10, 2, 0.5), DomainError);
  CHECK_THROWS_AS(kappa_p(10, 10, 2.0), DimensionError);
}

TEST_CASE("kappa_p is nondecreasing in p") {
  for (int N : {5, 20, 100}) {
    for (int k : {1, 3}) {
      double prev = 0.0;
      for (double p = 1.0; p <= 2.0 + 1e-12; p += 0.05) {
        const double v = kappa_p(N, k, std::min(p, 2.0));
        CHECK(v >= prev - 1e-14);
        prev = v;
      }
    }
  }
}

TEST_CASE("generate_signal examples") {
  SUBCASE("noiseless is exactly sparse") {
    const NoisySignal s = generate_signal(20, {0.0, 3, 0.8, 2.0}, 3, 1);
    CHECK(support_of(s.x).size() == 3);
    CHECK(s.relevant_support.size() == 3);
    CHECK(s.noise_norm == 0.0);
  }
  SUBCASE("noise rescaled to eta") {
    const NoisySignal s = generate_signal(100, {0.75, 7, 0.8, 2.0}, 7, 2);
    VectorXd off = s.x;
    for (int i : s.relevant_support) off(i) = 0.0;
    CHECK(std::abs(off.norm() - 0.75) <= 1e-12);
  }
  SUBCASE("lp rescale for p = 1.5") {
    const NoisySignal s = generate_signal(50, {0.3, 2, 0.8, 1.5}, 2, 3);
    VectorXd off = s.x;
    for (int i : s.relevant_support) off(i) = 0.0;
    CHECK(lp_norm(off, 1.5) == doctest::Approx(0.3).epsilon(1e-12));
  }
  SUBCASE("deterministic per seed") {
    CHECK(generate_signal(30, {0.5, 4, 0.8, 2.0}, 4, 5).x ==
          generate_signal(30, {0.5, 4, 0.8, 2.0}, 4, 5).x);
  }
  SUBCASE("amplitudes lie in the requested band") {
    const NoisySignal s = generate_signal(40, {0.2, 5, 0.8, 2.0}, 5, 0.9, 1.3, 6);
    for (int i : s.relevant_support) {
      CHECK(std::abs(s.x(i)) >= 0.9);
      CHECK(std::abs(s.x(i)) <= 1.3);
    }
  }
  SUBCASE("errors") {
    CHECK_THROWS_AS(generate_signal(10, {0.1, 2, 0.8, 2.0}, 2, 0.8, 1.0, 1), ParameterError);
    CHECK_THROWS_AS(generate_signal(10, {0.9, 2, 0.8, 2.0}, 2, 1), ParameterError);
    CHECK_THROWS_AS(generate_signal(10, {0.1, 2, 0.8, 2.0}, 3, 1), ParameterError);
  }
}

TEST_CASE("generated signals are class members") {
  for (std::uint64_t s = 0; s < 200; ++s) {
    const double p = 1.0 + (s % 5) * 0.25;
    const ClassParams cls{0.1 + 0.6 * double(s % 7) / 7.0, 1 + int(s % 6), 0.8, p};
    const NoisySignal sig = generate_signal(60, cls, cls.k, s);
    CHECK(class_membership(sig.x, cls));
  }
}

TEST_CASE("support_above is strict") {
  CHECK(support_above(vec({0.9, -0.2, 1.1}), 0.8) == std::vector<int>{0, 2});
  CHECK(support_above(vec({0.9, -0.2, 1.1}), 1.1).empty());
  CHECK(support_above(vec({0.8}), 0.8).empty());
}

TEST_CASE("best k-term approximation") {
  const VectorXd x = vec({3, -1, 2});
  auto [x3, s3] = best_k_term(x, 3, 1.0);
  CHECK(x3 == x);
  CHECK(s3 == 0.0);
  auto [x1, s1] = best_k_term(x, 1, 1.0);
  CHECK(x1 == vec({3, 0, 0}));
  CHECK(s1 == doctest::Approx(3.0));
  auto [x2, s2] = best_k_term(x, 2, 2.0);
  CHECK(x2 == vec({3, 0, 2}));
  CHECK(s2 == doctest::Approx(1.0));
}

TEST_CASE("top-k ties go to the lowest index") {
  CHECK(top_k_indices(vec({1, -2, 2, 0.5}), 1) == std::vector<int>{1});
  CHECK(top_k_indices(vec({1, 1, 1}), 2) == std::vector<int>{0, 1});
}

TEST_CASE("sigma_k is nonincreasing in k and zero iff k-sparse") {
  for (std::uint64_t s = 0; s < 20; ++s) {
    const NoisySignal sig = generate_signal(25, {0.4, 4, 0.8, 2.0}, 4, 900 + s);
    double prev = std::numeric_limits<double>::infinity();
    for (int k = 0; k <= 25; ++k) {
      const double v = best_k_term(sig.x, k, 1.5).second;
      CHECK(v <= prev + 1e-15);
      CHECK((v == 0.0) == (int(support_of(sig.x).size()) <= k));
      prev = v;
    }
  }
}

TEST_CASE("class membership") {
  CHECK(class_membership(VectorXd::Zero(5), {0.1, 1, 0.8, 2.0}));
  CHECK_FALSE(class_membership(vec({1, 1, 0}), {0.1, 1, 0.8, 2.0}));
  CHECK(class_membership(vec({1, 0.3, 0.4}), {0.5, 1, 0.8, 2.0}));
  CHECK_FALSE(class_membership(vec({1, 0.3, 0.41}), {0.5, 1, 0.8, 2.0}));
}

TEST_CASE("gap thresholds") {
  const GapThresholds g = gap_thresholds(0, 0, 0, 1, 1, 1);
  CHECK(*g.r1 == doctest::Approx(2.0));
  CHECK(*g.r1rew == doctest::Approx(19.2));
  CHECK(*g.rS == doctest::Approx(1.0));
  const GapThresholds z = gap_thresholds(0.3, 0.5, 0.1, 2, 2, 0.0);
  CHECK(*z.r1 == 0.0);
  CHECK(*z.r1rew == 0.0);
  CHECK(*z.rS == 0.0);
  const GapThresholds u = gap_thresholds(1.0, 0.5, 0.5, 1, 1, 1);
  CHECK_FALSE(u.r1.has_value());
  CHECK_FALSE(u.r1rew.has_value());
}

TEST_CASE("support metrics") {
  SUBCASE("identity") {
    const NoisySignal s = generate_signal(30, {0.5, 3, 0.8, 2.0}, 3, 4);
    const SupportMetrics m = support_metrics(s, s.x);
    CHECK(m.symdiff_count == 0);
    CHECK(m.exact_by_r);
    CHECK(m.exact_by_topk);
    CHECK(m.err_full == 0.0);
  }
  SUBCASE("zero decode") {
    const NoisySignal s = generate_signal(30, {0.5, 3, 0.8, 2.0}, 3, 4);
    const SupportMetrics m = support_metrics(s, VectorXd::Zero(30));
    CHECK(m.symdiff_count == 3);
    CHECK_FALSE(m.exact_by_r);
    CHECK_FALSE(m.exact_by_topk);
  }
  SUBCASE("hand instance") {
    const SupportMetrics m = support_metrics(wrap(vec({1, 0.1}), 0.8), vec({0.9, 0.85}));
    CHECK(m.symdiff_count == 1);
    CHECK(m.separation_gap == doctest::Approx(0.05));
    CHECK_FALSE(m.exact_by_r);
    CHECK(m.exact_by_topk);
    CHECK(m.err_full == doctest::Approx(std::hypot(0.1, 0.75)));
    CHECK(m.err_restricted_truth == doctest::Approx(0.1));
    CHECK(m.err_restricted_decoded == doctest::Approx(std::hypot(0.1, 0.75)));
    CHECK(m.residual_noise == 0.0);
  }
  SUBCASE("symdiff zero iff exact") {
    for (std::uint64_t s = 0; s < 50; ++s) {
      const NoisySignal sig = generate_signal(20, {0.5, 3, 0.8, 2.0}, 3, s);
      const NoisySignal other = generate_signal(20, {0.5, 3, 0.8, 2.0}, 3, s + 1000);
      const SupportMetrics m = support_metrics(sig, 0.5 * (sig.x + other.x));
      CHECK((m.symdiff_count == 0) == m.exact_by_r);
      CHECK(m.err_full >= 0.0);
      CHECK(m.residual_noise >= 0.0);
    }
  }
  CHECK_THROWS_AS(support_metrics(wrap(vec({1}), 0.5), vec({1, 2})), DimensionError);
}

TEST_CASE("signal json round trip") {
  const NoisySignal s = generate_signal(15, {0.3, 2, 0.8, 1.5}, 2, 8);
  const NoisySignal t = signal_from_json(signal_to_json(s));
  CHECK(t.x == s.x);
  CHECK(t.relevant_support == s.relevant_support);
  CHECK(t.params.p == 1.5);
  CHECK(t.noise_norm == s.noise_norm);
}

TEST_CASE("metrics csv") {
  CHECK(metrics_csv_header() ==
        "symdiff_count,exact_by_r,exact_by_topk,separation_gap,err_full,err_restricted_truth,"
        "err_restricted_decoded,residual_noise");
  SupportMetrics m;
  m.symdiff_count = 2;
  m.exact_by_topk = true;
  m.err_full = 0.5;
  CHECK(metrics_csv_fields(m) == "2,0,1,0,0.5,0,0,0");
}

}
