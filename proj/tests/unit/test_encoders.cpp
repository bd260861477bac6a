#include "foldsense/encoders.hpp"
#include "foldsense/errors.hpp"

#include "../oracles.hpp"

#include <doctest.h>

#include <cmath>
#include <set>
#include <sstream>

using namespace foldsense;
using Eigen::MatrixXd;
using Eigen::VectorXd;

TEST_SUITE("encoders") {

TEST_CASE("gaussian encoder is reproducible per seed") {
  const Encoder a = gaussian_encoder(2, 2, 7);
  const Encoder b = gaussian_encoder(2, 2, 7);
  CHECK(a.matrix() == b.matrix());
  CHECK(gaussian_encoder(5, 9, 8).matrix() != gaussian_encoder(5, 9, 9).matrix());
  CHECK(a.kind() == EncoderKind::Gaussian);
  CHECK(a.seed() == 7);
}

TEST_CASE("gaussian column norms concentrate near one") {
  // Monte-Carlo over 100 seeds of the mean squared column norm.
  double total = 0.0;
  for (std::uint64_t s = 0; s < 100; ++s) {
    const MatrixXd a = gaussian_encoder(40, 100, s).matrix();
    total += a.colwise().squaredNorm().mean();
  }
  const double mean = total / 100.0;
  CHECK(mean >= 0.8);
  CHECK(mean <= 1.2);
  CHECK(mean == doctest::Approx(1.0).epsilon(0.02));
}

TEST_CASE("encoder dimension errors") {
  CHECK_THROWS_AS(gaussian_encoder(0, 5, 1), DimensionError);
  CHECK_THROWS_AS(gaussian_encoder(6, 5, 1), DimensionError);
  CHECK_THROWS_AS(subsampled_cosine_encoder(5, 4, 1), DimensionError);
  CHECK_THROWS_AS(Encoder(MatrixXd::Constant(1, 1, std::nan(""))), DomainError);
}

TEST_CASE("cosine transform is orthonormal") {
  const MatrixXd c = cosine_transform(16);
  CHECK((c * c.transpose() - MatrixXd::Identity(16, 16)).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("full subsampled cosine gives A A' = I") {
  const Encoder a = subsampled_cosine_encoder(12, 12, 3);
  const MatrixXd g = a.matrix() * a.matrix().transpose();
  CHECK((g - MatrixXd::Identity(12, 12)).cwiseAbs().maxCoeff() < 1e-10);
}

TEST_CASE("single cosine row has squared norm N/m") {
  const Encoder a = subsampled_cosine_encoder(1, 4, 11);
  CHECK(a.matrix().row(0).squaredNorm() == doctest::Approx(4.0).epsilon(1e-10));
}

TEST_CASE("cosine rows are distinct and of full rank") {
  for (std::uint64_t s = 0; s < 100; ++s) {
    const Encoder a = subsampled_cosine_encoder(40, 100, s);
    const std::set<int> rows(a.row_indices().begin(), a.row_indices().end());
    REQUIRE(rows.size() == 40);
    if (s < 5) {
      Eigen::FullPivLU<MatrixXd> lu(a.matrix());
      CHECK(lu.rank() == 40);
    }
  }
  CHECK(subsampled_cosine_encoder(7, 30, 5).matrix() == subsampled_cosine_encoder(7, 30, 5).matrix());
}

TEST_CASE("operator norm") {
  CHECK(operator_norm(Encoder(MatrixXd::Identity(4, 4))) == doctest::Approx(1.0).epsilon(1e-12));
  MatrixXd d(2, 2);
  d << 2, 0, 0, 1;
  CHECK(operator_norm(Encoder(d)) == doctest::Approx(2.0).epsilon(1e-12));
  for (std::uint64_t s = 0; s < 10; ++s) {
    const Encoder a = gaussian_encoder(5, 8, 100 + s);
    const double svd = Eigen::JacobiSVD<MatrixXd>(a.matrix()).singularValues()(0);
    CHECK(std::abs(operator_norm(a) - svd) <= 1e-8 * svd);
    REQUIRE(a.cached_op_norm().has_value());
    CHECK(*a.cached_op_norm() == operator_norm(a));
  }
}

TEST_CASE("scaled encoder gets its own norm cache") {
  const Encoder a = gaussian_encoder(4, 6, 2);
  const double n = operator_norm(a);
  const Encoder b = a.scaled(3.0);
  CHECK_FALSE(b.cached_op_norm().has_value());
  CHECK(operator_norm(b) == doctest::Approx(3.0 * n).epsilon(1e-10));
  CHECK(b.kind() == EncoderKind::Explicit);
}

TEST_CASE("rip constant examples") {
  CHECK(rip_constant(Encoder(MatrixXd::Identity(3, 3)), 1) == doctest::Approx(0.0));
  MatrixXd two(1, 1);
  two << 2.0;
  CHECK(rip_constant(Encoder(two), 1) >= 1.0);
  MatrixXd wide(1, 2);
  wide << 2.0, 0.0;
  const MatrixCertificate c = certify(Encoder(wide), 1, 1);
  CHECK(c.rip_violated);
  CHECK(std::isinf(c.nsp_gamma));
  MatrixXd a(2, 3);
  const double h = 1.0 / std::sqrt(2.0);
  a << 1, 0, h, 0, 1, h;
  CHECK(rip_constant(Encoder(a), 1) == doctest::Approx(0.0).epsilon(1e-12));
}

TEST_CASE("rip constant matches the Gram-eigenvalue oracle") {
  for (std::uint64_t s = 0; s < 8; ++s) {
    const Encoder a = gaussian_encoder(5, 9, 40 + s);
    for (int K = 1; K <= 3; ++K) {
      CHECK(rip_constant(a, K) == doctest::Approx(oracle::rip_by_gram(a.matrix(), K)).epsilon(1e-9));
    }
  }
}

TEST_CASE("rip constant is monotone in K") {
  for (std::uint64_t s = 0; s < 10; ++s) {
    const Encoder a = gaussian_encoder(6, 10, 60 + s);
    double prev = 0.0;
    for (int K = 1; K <= 6; ++K) {
      const double d = rip_constant(a, K);
      CHECK(d >= prev - 1e-12);
      prev = d;
    }
  }
}

TEST_CASE("rip budget and order errors") {
  const Encoder a = gaussian_encoder(10, 40, 1);
  CHECK_THROWS_AS(rip_constant(a, 11), DimensionError);
  CHECK_THROWS_AS(rip_constant(a, 8, 1000), BudgetError);
}

TEST_CASE("nsp constant examples") {
  MatrixXd a(1, 2);
  a << 1, 1;
  CHECK(nsp_constant(Encoder(a), 1) == doctest::Approx(1.0).epsilon(1e-9));
  a << 1, 2;
  CHECK(nsp_constant(Encoder(a), 1) == doctest::Approx(2.0).epsilon(1e-9));
  CHECK(nsp_constant(Encoder(MatrixXd::Identity(3, 3)), 1) == 0.0);
}

TEST_CASE("nsp constant matches the two-dimensional kernel oracle") {
  for (std::uint64_t s = 0; s < 10; ++s) {
    const Encoder a = gaussian_encoder(6, 8, 200 + s);
    for (int k = 1; k <= 3; ++k) {
      const double want = oracle::nsp_small_kernel(a.matrix(), k);
      CHECK(nsp_constant(a, k) == doctest::Approx(want).epsilon(1e-7));
    }
  }
}

TEST_CASE("nsp constant is invariant under scaling") {
  for (std::uint64_t s = 0; s < 5; ++s) {
    const Encoder a = gaussian_encoder(5, 8, 300 + s);
    const double g = nsp_constant(a, 2);
    CHECK(nsp_constant(a.scaled(-3.5), 2) == doctest::Approx(g).epsilon(1e-8));
    CHECK(nsp_constant(a.scaled(1e-3), 2) == doctest::Approx(g).epsilon(1e-8));
  }
}

TEST_CASE("rip to nsp bridge") {
  // gamma_k <= sqrt(k/h) (1 + delta_K) / (1 - delta_K) with K = k + h.
  int checked = 0;
  for (std::uint64_t s = 0; s < 40 && checked < 10; ++s) {
    const Encoder a = gaussian_encoder(8, 10, 400 + s).scaled(1.0);
    const int k = 1;
    const int h = 2;
    const double d = rip_constant(a, k + h);
    if (d >= 1.0) continue;
    ++checked;
    CHECK(nsp_constant(a, k) <= std::sqrt(double(k) / h) * (1 + d) / (1 - d) + 1e-9);
  }
  CHECK(checked > 0);
}

TEST_CASE("nsp errors") {
  const Encoder a = gaussian_encoder(3, 6, 1);
  CHECK_THROWS_AS(nsp_constant(a, 0), DimensionError);
  CHECK_THROWS_AS(nsp_constant(a, 6), DimensionError);
  CHECK_THROWS_AS(nsp_constant(gaussian_encoder(10, 30, 1), 4, 1000), BudgetError);
}

TEST_CASE("beta lower bound examples") {
  CHECK(beta_lower_bound(Encoder(MatrixXd::Identity(4, 4)), 16, 30) ==
        doctest::Approx(0.5).epsilon(1e-6));
  MatrixXd three(1, 1);
  three << 3.0;
  CHECK(beta_lower_bound(Encoder(three), 2, 5) == doctest::Approx(3.0));
  CHECK_THROWS_AS(beta_lower_bound(Encoder(MatrixXd::Zero(2, 2)), 2, 2), DomainError);
}

TEST_CASE("beta search matches the angular oracle in two dimensions") {
  for (std::uint64_t s = 0; s < 6; ++s) {
    const Encoder a = gaussian_encoder(2, 7, 500 + s);
    const double want = oracle::beta_2d(a.matrix());
    const double got = beta_lower_bound(a, 8, 20);
    CHECK(got >= want - 1e-9);
    CHECK(got == doctest::Approx(want).epsilon(1e-6));
  }
}

TEST_CASE("beta estimate is nonincreasing in samples") {
  const Encoder a = gaussian_encoder(5, 12, 77);
  double prev = std::numeric_limits<double>::infinity();
  for (int n = 1; n <= 6; ++n) {
    const double b = beta_lower_bound(a, n, 3, 99);
    CHECK(b <= prev + 1e-15);
    prev = b;
  }
}

TEST_CASE("certificate fields") {
  const Encoder a = gaussian_encoder(5, 8, 3);
  const MatrixCertificate c = certify(a, 2, 1);
  CHECK(c.order == 2);
  CHECK(c.rip_method == CertMethod::Exact);
  CHECK(c.nsp_method == CertMethod::Exact);
  CHECK(c.beta_method == CertMethod::Sampled);
  CHECK(c.rip_delta == doctest::Approx(rip_constant(a, 2)));
  CHECK(c.nsp_gamma == doctest::Approx(nsp_constant(a, 1)));
  CHECK(c.beta_lower > 0.0);
}

TEST_CASE("kernel basis spans the null space") {
  const Encoder a = gaussian_encoder(4, 9, 8);
  const MatrixXd k = kernel_basis(a.matrix());
  CHECK(k.cols() == 5);
  CHECK((a.matrix() * k).cwiseAbs().maxCoeff() < 1e-12);
  CHECK((k.transpose() * k - MatrixXd::Identity(5, 5)).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("enc round trip") {
  SUBCASE("explicit payload") {
    MatrixXd m(2, 3);
    m << 1.5, -0.25, 1e-300, 3, std::nextafter(1.0, 2.0), -7;
    const Encoder a(m, EncoderKind::Explicit, 9, 1.0);
    std::stringstream ss;
    write_encoder(ss, a);
    const Encoder b = read_encoder(ss);
    CHECK(b.matrix() == a.matrix());
    CHECK(b.kind() == EncoderKind::Explicit);
  }
  SUBCASE("regenerated kinds") {
    for (const Encoder& a : {gaussian_encoder(4, 10, 5), subsampled_cosine_encoder(4, 10, 5)}) {
      std::stringstream ss;
      write_encoder(ss, a);
      const Encoder b = read_encoder(ss);
      CHECK(b.matrix() == a.matrix());
      CHECK(b.kind() == a.kind());
      CHECK(b.seed() == a.seed());
    }
  }
  SUBCASE("bad header") {
    std::stringstream ss("{\"format\":\"nope\"}\n");
    CHECK_THROWS_AS(read_encoder(ss), Error);
  }
}

TEST_CASE("kind names") {
  CHECK(encoder_kind_from_string("gaussian") == EncoderKind::Gaussian);
  CHECK(encoder_kind_from_string("subsampled_cosine") == EncoderKind::SubsampledCosine);
  CHECK(to_string(EncoderKind::SubsampledCosine) == "subsampled_cosine");
  CHECK_THROWS_AS(encoder_kind_from_string("bernoulli"), ParameterError);
}

}
