#include "foldsense/encoders.hpp"

#include "combinations.hpp"
#include "foldsense/errors.hpp"
#include "foldsense/lp.hpp"
#include "foldsense/rng.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <limits>
#include <mutex>
#include <numeric>

namespace foldsense {

struct Encoder::NormCache {
  std::once_flag once;
  std::atomic<bool> ready{false};
  double value = 0.0;
};

std::string to_string(EncoderKind kind) {
  switch (kind) {
    case EncoderKind::Gaussian: return "gaussian";
    case EncoderKind::SubsampledCosine: return "subsampled_cosine";
    case EncoderKind::Explicit: return "explicit";
  }
  return "explicit";
}

EncoderKind encoder_kind_from_string(std::string_view name) {
  if (name == "gaussian" || name == "Gaussian") return EncoderKind::Gaussian;
  if (name == "subsampled_cosine" || name == "SubsampledCosine" || name == "cosine") {
    return EncoderKind::SubsampledCosine;
  }
  if (name == "explicit" || name == "Explicit") return EncoderKind::Explicit;
  throw ParameterError("unknown encoder kind '" + std::string(name) + "'");
}

std::string to_string(CertMethod method) {
  return method == CertMethod::Exact ? "exact" : "sampled";
}

Encoder::Encoder(Eigen::MatrixXd entries, EncoderKind kind, std::uint64_t seed, double col_scale,
                 std::vector<int> row_indices)
    : entries_(std::move(entries)),
      kind_(kind),
      seed_(seed),
      col_scale_(col_scale),
      row_indices_(std::move(row_indices)),
      norm_(std::make_shared<NormCache>()) {
  if (entries_.rows() < 1 || entries_.cols() < 1) {
    throw DimensionError("encoder needs at least one row and one column");
  }
  if (!entries_.allFinite()) throw DomainError("encoder entries must be finite");
}

std::optional<double> Encoder::cached_op_norm() const {
  if (norm_->ready.load(std::memory_order_acquire)) return norm_->value;
  return std::nullopt;
}

Encoder Encoder::scaled(double c) const {
  return Encoder(entries_ * c, EncoderKind::Explicit, seed_, col_scale_ * c);
}

Encoder gaussian_encoder(int m, int N, std::uint64_t seed) {
  if (m < 1 || N < 1 || m > N) {
    throw DimensionError("gaussian_encoder: need 1 <= m <= N, got m=" + std::to_string(m) +
                         " N=" + std::to_string(N));
  }
  Rng rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  const double scale = 1.0 / std::sqrt(static_cast<double>(m));
  Eigen::MatrixXd a(m, N);
  // Row-major fill so the draw order matches the .enc payload layout.
  for (int i = 0; i < m; ++i) {
    for (int j = 0; j < N; ++j) a(i, j) = scale * normal(rng);
  }
  return Encoder(std::move(a), EncoderKind::Gaussian, seed, scale);
}

Eigen::MatrixXd cosine_transform(int N) {
  if (N < 1) throw DimensionError("cosine_transform: N must be positive");
  Eigen::MatrixXd c(N, N);
  const double pi = std::acos(-1.0);
  for (int k = 0; k < N; ++k) {
    const double alpha = std::sqrt((k == 0 ? 1.0 : 2.0) / N);
    for (int n = 0; n < N; ++n) c(k, n) = alpha * std::cos(pi * (2.0 * n + 1.0) * k / (2.0 * N));
  }
  return c;
}

Encoder subsampled_cosine_encoder(int m, int N, std::uint64_t seed) {
  if (m < 1 || N < 1 || m > N) {
    throw DimensionError("subsampled_cosine_encoder: need 1 <= m <= N, got m=" +
                         std::to_string(m) + " N=" + std::to_string(N));
  }
  std::vector<int> perm(static_cast<std::size_t>(N));
  std::iota(perm.begin(), perm.end(), 0);
  Rng rng(seed);
  for (int i = 0; i < m; ++i) {
    std::uniform_int_distribution<int> pick(i, N - 1);
    std::swap(perm[static_cast<std::size_t>(i)], perm[static_cast<std::size_t>(pick(rng))]);
  }
  perm.resize(static_cast<std::size_t>(m));

  const Eigen::MatrixXd c = cosine_transform(N);
  const double scale = std::sqrt(static_cast<double>(N) / m);
  Eigen::MatrixXd a(m, N);
  for (int i = 0; i < m; ++i) a.row(i) = scale * c.row(perm[static_cast<std::size_t>(i)]);
  return Encoder(std::move(a), EncoderKind::SubsampledCosine, seed, scale, std::move(perm));
}

namespace {

double power_iteration(const Eigen::MatrixXd& a) {
  const Eigen::Index n = a.cols();
  Eigen::VectorXd v(n);
  for (Eigen::Index j = 0; j < n; ++j) v(j) = 1.0 + 0.01 * static_cast<double>(j % 7);
  v.normalize();
  double lambda = (a * v).squaredNorm();
  if (lambda == 0.0) {
    // Unlucky start in the kernel; fall back to the column of largest norm.
    Eigen::Index j = 0;
    a.colwise().squaredNorm().maxCoeff(&j);
    v.setZero();
    v(j) = 1.0;
    lambda = (a * v).squaredNorm();
    if (lambda == 0.0) return 0.0;
  }
  for (int it = 0; it < 200000; ++it) {
    Eigen::VectorXd w = a.transpose() * (a * v);
    const double nw = w.norm();
    if (nw == 0.0) break;
    v = w / nw;
    const double next = (a * v).squaredNorm();
    const bool done = std::abs(next - lambda) <= 1e-15 * next;
    lambda = next;
    if (done) break;
  }
  return std::sqrt(lambda);
}

}  // namespace

double operator_norm(const Encoder& a) {
  auto& cache = *a.norm_;
  std::call_once(cache.once, [&] {
    cache.value = power_iteration(a.matrix());
    cache.ready.store(true, std::memory_order_release);
  });
  return cache.value;
}

std::uint64_t binomial(int n, int k) noexcept {
  if (k < 0 || n < 0 || k > n) return 0;
  k = std::min(k, n - k);
  std::uint64_t result = 1;
  for (int i = 1; i <= k; ++i) {
    // result * (n - k + i) / i stays integral at each step.
    const std::uint64_t num = static_cast<std::uint64_t>(n - k + i);
    if (result > std::numeric_limits<std::uint64_t>::max() / num) {
      return std::numeric_limits<std::uint64_t>::max();
    }
    result = result * num / static_cast<std::uint64_t>(i);
  }
  return result;
}

double rip_constant(const Encoder& a, int K, std::uint64_t budget) {
  const int m = a.rows();
  const int N = a.cols();
  if (K < 1 || K > N) throw DimensionError("rip_constant: need 1 <= K <= N");
  if (K > m) throw DimensionError("rip_constant: order K must not exceed m");
  const std::uint64_t count = binomial(N, K);
  if (count > budget) {
    throw BudgetError("rip_constant: C(" + std::to_string(N) + "," + std::to_string(K) +
                      ") supports exceed the enumeration budget");
  }
  const Eigen::MatrixXd& mat = a.matrix();
  double delta = 0.0;
  Eigen::MatrixXd sub(m, K);
  detail::for_each_combination(N, K, [&](const std::vector<int>& idx) {
    for (int j = 0; j < K; ++j) sub.col(j) = mat.col(idx[static_cast<std::size_t>(j)]);
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(sub);
    const auto& s = svd.singularValues();
    delta = std::max({delta, s(0) - 1.0, 1.0 - s(K - 1)});
    return true;
  });
  return delta;
}

Eigen::MatrixXd kernel_basis(const Eigen::MatrixXd& a, double rel_tol) {
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(a, Eigen::ComputeFullV);
  const auto& s = svd.singularValues();
  const double cutoff = rel_tol * std::max<double>(1.0, s.size() ? s(0) : 0.0) *
                        static_cast<double>(std::max(a.rows(), a.cols()));
  Eigen::Index rank = 0;
  for (Eigen::Index i = 0; i < s.size(); ++i) {
    if (s(i) > cutoff) ++rank;
  }
  const Eigen::Index n = a.cols();
  return svd.matrixV().rightCols(n - rank);
}

double nsp_constant(const Encoder& a, int k, std::uint64_t budget) {
  const int N = a.cols();
  if (k < 1 || k >= N) throw DimensionError("nsp_constant: need 1 <= k < N");
  const Eigen::MatrixXd basis = kernel_basis(a.matrix());
  const int d = static_cast<int>(basis.cols());
  if (d == 0) return 0.0;

  const std::uint64_t supports = binomial(N, k);
  const std::uint64_t signs = std::uint64_t{1} << std::min(k, 62);
  if (supports > budget || (supports > 0 && signs > budget / supports)) {
    throw BudgetError("nsp_constant: C(" + std::to_string(N) + "," + std::to_string(k) +
                      ")*2^k linear programs exceed the enumeration budget");
  }

  // Variables: c (d, free) with z = basis * c, then t_j >= 0 for j off the support.
  const int off = N - k;
  lp::LinearProgram prob;
  prob.free_vars.assign(static_cast<std::size_t>(d + off), false);
  for (int j = 0; j < d; ++j) prob.free_vars[static_cast<std::size_t>(j)] = true;
  prob.ineq = Eigen::MatrixXd::Zero(2 * off + 1, d + off);
  prob.ineq_rhs = Eigen::VectorXd::Zero(2 * off + 1);
  prob.ineq.row(2 * off).tail(off).setOnes();
  prob.ineq_rhs(2 * off) = 1.0;
  for (int j = 0; j < off; ++j) {
    prob.ineq(2 * j, d + j) = -1.0;
    prob.ineq(2 * j + 1, d + j) = -1.0;
  }

  double gamma = 0.0;
  std::vector<char> in_support(static_cast<std::size_t>(N));
  detail::for_each_combination(N, k, [&](const std::vector<int>& lam) {
    std::fill(in_support.begin(), in_support.end(), 0);
    for (int i : lam) in_support[static_cast<std::size_t>(i)] = 1;
    int row = 0;
    for (int j = 0; j < N; ++j) {
      if (in_support[static_cast<std::size_t>(j)]) continue;
      prob.ineq.block(2 * row, 0, 1, d) = basis.row(j);
      prob.ineq.block(2 * row + 1, 0, 1, d) = -basis.row(j);
      ++row;
    }
    // z -> -z flips every sign, so the first sign can stay +1.
    const std::uint64_t patterns = std::uint64_t{1} << (k - 1);
    for (std::uint64_t mask = 0; mask < patterns; ++mask) {
      prob.objective = Eigen::VectorXd::Zero(d + off);
      for (int q = 0; q < k; ++q) {
        const double s = (q > 0 && ((mask >> (q - 1)) & 1U)) ? -1.0 : 1.0;
        prob.objective.head(d) += s * basis.row(lam[static_cast<std::size_t>(q)]).transpose();
      }
      const lp::Solution sol = lp::solve(prob);
      if (sol.status == lp::Status::Unbounded) {
        gamma = std::numeric_limits<double>::infinity();
        return false;
      }
      if (sol.status != lp::Status::Optimal) {
        throw NumericError("nsp_constant: linear program did not reach optimality");
      }
      gamma = std::max(gamma, sol.objective);
    }
    return true;
  });
  return gamma;
}

double beta_lower_bound(const Encoder& a, int samples, int descent_steps, std::uint64_t seed) {
  if (samples < 1) throw ParameterError("beta_lower_bound: samples must be >= 1");
  if (descent_steps < 0) throw ParameterError("beta_lower_bound: descent_steps must be >= 0");
  const Eigen::MatrixXd& mat = a.matrix();
  if (mat.cwiseAbs().maxCoeff() == 0.0) throw DomainError("beta_lower_bound: A is zero");
  const int m = a.rows();
  const int N = a.cols();

  auto value = [&](const Eigen::VectorXd& z) {
    return (mat.transpose() * z).cwiseAbs().maxCoeff() / z.norm();
  };

  // min t  s.t. |A_i' z| <= t, zc' z = 1. Variables: z (m, free), t >= 0.
  lp::LinearProgram prob;
  prob.objective = Eigen::VectorXd::Zero(m + 1);
  prob.objective(m) = -1.0;
  prob.free_vars.assign(static_cast<std::size_t>(m + 1), true);
  prob.free_vars[static_cast<std::size_t>(m)] = false;
  prob.ineq.resize(2 * N, m + 1);
  prob.ineq_rhs = Eigen::VectorXd::Zero(2 * N);
  for (int i = 0; i < N; ++i) {
    prob.ineq.block(2 * i, 0, 1, m) = mat.col(i).transpose();
    prob.ineq.block(2 * i + 1, 0, 1, m) = -mat.col(i).transpose();
    prob.ineq(2 * i, m) = -1.0;
    prob.ineq(2 * i + 1, m) = -1.0;
  }
  prob.eq.resize(1, m + 1);
  prob.eq_rhs = Eigen::VectorXd::Ones(1);

  Rng rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  double best = std::numeric_limits<double>::infinity();
  for (int s = 0; s < samples; ++s) {
    Eigen::VectorXd z(m);
    do {
      for (int i = 0; i < m; ++i) z(i) = normal(rng);
    } while (z.norm() == 0.0);
    z.normalize();
    double cur = value(z);
    for (int step = 0; step < descent_steps; ++step) {
      prob.eq.block(0, 0, 1, m) = z.transpose();
      prob.eq(0, m) = 0.0;
      const lp::Solution sol = lp::solve(prob);
      if (sol.status != lp::Status::Optimal) break;
      Eigen::VectorXd next = sol.x.head(m);
      if (next.norm() == 0.0) break;
      next.normalize();
      const double v = value(next);
      if (v >= cur * (1.0 - 1e-12)) {
        cur = std::min(cur, v);
        break;
      }
      z = next;
      cur = v;
    }
    best = std::min(best, cur);
  }
  return best;
}

MatrixCertificate certify(const Encoder& a, int K, int k, const CertifyOptions& opts) {
  MatrixCertificate cert;
  cert.order = K;
  cert.rip_delta = rip_constant(a, K, opts.budget);
  cert.rip_violated = cert.rip_delta >= 1.0;
  cert.rip_method = CertMethod::Exact;
  cert.nsp_order = k;
  cert.nsp_gamma = nsp_constant(a, k, opts.budget);
  cert.nsp_method = CertMethod::Exact;
  cert.beta_lower = beta_lower_bound(a, opts.beta_samples, opts.beta_descent_steps, opts.seed);
  cert.beta_method = CertMethod::Sampled;
  return cert;
}

}  // namespace foldsense
