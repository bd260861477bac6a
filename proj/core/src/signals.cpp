#include "foldsense/signals.hpp"

#include "foldsense/errors.hpp"
#include "foldsense/rng.hpp"

#include <algorithm>
#include <iterator>
#include <cmath>
#include <numeric>

namespace foldsense {
namespace {

void check_p(double p, const char* where) {
  if (!(p >= 1.0 && p <= 2.0)) {
    throw DomainError(std::string(where) + ": p must lie in [1, 2]");
  }
}

// Indices sorted by decreasing magnitude; stable, so ties keep index order.
std::vector<int> magnitude_order(const Eigen::VectorXd& x) {
  std::vector<int> order(static_cast<std::size_t>(x.size()));
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](int a, int b) { return std::abs(x(a)) > std::abs(x(b)); });
  return order;
}

}  // namespace

double lp_norm(const Eigen::VectorXd& x, double p) {
  if (p == 2.0) return x.norm();
  if (p == 1.0) return x.lpNorm<1>();
  if (x.size() == 0) return 0.0;
  const double scale = x.cwiseAbs().maxCoeff();
  if (scale == 0.0) return 0.0;
  double s = 0.0;
  for (Eigen::Index i = 0; i < x.size(); ++i) s += std::pow(std::abs(x(i)) / scale, p);
  return scale * std::pow(s, 1.0 / p);
}

double kappa_p(int N, int k, double p) {
  check_p(p, "kappa_p");
  if (k < 1 || k >= N) throw DimensionError("kappa_p: need 1 <= k < N");
  if (p == 1.0) return 1.0;
  const double inv_q = 1.0 - 1.0 / p;
  return std::pow(static_cast<double>(N - k), inv_q);
}

NoisySignal generate_signal(int N, const ClassParams& params, int kk, double amp_lo,
                            double amp_hi, std::uint64_t seed) {
  check_p(params.p, "generate_signal");
  if (N < 1) throw DimensionError("generate_signal: N must be positive");
  if (kk < 0 || kk > params.k || kk > N) {
    throw ParameterError("generate_signal: need 0 <= kk <= min(k, N)");
  }
  if (!(amp_lo > params.r)) {
    throw ParameterError("generate_signal: amp_lo must exceed r");
  }
  if (!(amp_hi >= amp_lo)) throw ParameterError("generate_signal: amp_hi must be >= amp_lo");
  if (params.eta < 0.0) throw ParameterError("generate_signal: eta must be >= 0");
  if (!(params.r > params.eta)) throw ParameterError("generate_signal: need r > eta");

  Rng rng(seed);
  std::vector<int> perm(static_cast<std::size_t>(N));
  std::iota(perm.begin(), perm.end(), 0);
  for (int i = 0; i < kk; ++i) {
    std::uniform_int_distribution<int> pick(i, N - 1);
    std::swap(perm[static_cast<std::size_t>(i)], perm[static_cast<std::size_t>(pick(rng))]);
  }
  std::vector<int> support(perm.begin(), perm.begin() + kk);
  std::sort(support.begin(), support.end());

  NoisySignal s;
  s.params = params;
  s.x = Eigen::VectorXd::Zero(N);
  std::uniform_real_distribution<double> amp(amp_lo, amp_hi);
  std::bernoulli_distribution coin(0.5);
  for (int i : support) {
    const double a = amp(rng);
    s.x(i) = coin(rng) ? a : -a;
  }

  std::vector<char> on(static_cast<std::size_t>(N), 0);
  for (int i : support) on[static_cast<std::size_t>(i)] = 1;
  Eigen::VectorXd noise(N - kk);
  std::normal_distribution<double> normal(0.0, 1.0);
  for (Eigen::Index j = 0; j < noise.size(); ++j) noise(j) = normal(rng);
  const double nn = lp_norm(noise, params.p);
  if (params.eta > 0.0 && nn > 0.0) {
    noise *= params.eta / nn;
  } else {
    noise.setZero();
  }
  Eigen::Index q = 0;
  for (int i = 0; i < N; ++i) {
    if (!on[static_cast<std::size_t>(i)]) s.x(i) = noise(q++);
  }

  s.relevant_support = support_above(s.x, params.r);
  s.noise_norm = lp_norm(noise, params.p);
  return s;
}

NoisySignal generate_signal(int N, const ClassParams& params, int kk, std::uint64_t seed) {
  return generate_signal(N, params, kk, params.r + kDefaultAmpLoOffset,
                         std::max(kDefaultAmpHiFactor * params.r, params.r + kDefaultAmpLoOffset),
                         seed);
}

std::vector<int> support_above(const Eigen::VectorXd& x, double r) {
  std::vector<int> s;
  for (Eigen::Index i = 0; i < x.size(); ++i) {
    if (std::abs(x(i)) > r) s.push_back(static_cast<int>(i));
  }
  return s;
}

std::vector<int> support_of(const Eigen::VectorXd& x) {
  std::vector<int> s;
  for (Eigen::Index i = 0; i < x.size(); ++i) {
    if (x(i) != 0.0) s.push_back(static_cast<int>(i));
  }
  return s;
}

std::vector<int> top_k_indices(const Eigen::VectorXd& x, int k) {
  if (k < 0 || k > x.size()) throw DimensionError("top_k_indices: need 0 <= k <= N");
  std::vector<int> order = magnitude_order(x);
  order.resize(static_cast<std::size_t>(k));
  std::sort(order.begin(), order.end());
  return order;
}

std::pair<Eigen::VectorXd, double> best_k_term(const Eigen::VectorXd& x, int k, double p) {
  if (k < 0 || k > x.size()) throw DimensionError("best_k_term: need 0 <= k <= N");
  const std::vector<int> order = magnitude_order(x);
  Eigen::VectorXd head = Eigen::VectorXd::Zero(x.size());
  Eigen::VectorXd tail(x.size() - k);
  for (std::size_t q = 0; q < order.size(); ++q) {
    const int i = order[q];
    if (static_cast<int>(q) < k) {
      head(i) = x(i);
    } else {
      tail(static_cast<Eigen::Index>(q) - k) = x(i);
    }
  }
  return {head, lp_norm(tail, p)};
}

bool class_membership(const Eigen::VectorXd& x, const ClassParams& params) {
  const std::vector<int> s = support_above(x, params.r);
  if (static_cast<int>(s.size()) > params.k) return false;
  Eigen::VectorXd rest = x;
  for (int i : s) rest(i) = 0.0;
  return lp_norm(rest, params.p) <= params.eta + kMembershipTol;
}

GapThresholds gap_thresholds(double gamma_k, double gamma_2k, double delta_2k, double kappa,
                             int k, double eta) {
  GapThresholds g;
  if (gamma_k >= 0.0 && gamma_k < 1.0) {
    g.r1 = 2.0 * (1.0 + gamma_k) / (1.0 - gamma_k) * kappa * eta;
  }
  const double rip_limit = std::sqrt(2.0) - 1.0;
  if (delta_2k >= 0.0 && delta_2k < rip_limit && k >= 1) {
    g.r1rew = 9.6 * std::sqrt(1.0 + delta_2k) / (1.0 - (std::sqrt(2.0) + 1.0) * delta_2k) *
              (1.0 + kappa / std::sqrt(static_cast<double>(k))) * eta;
  }
  if (gamma_2k >= 0.0 && std::isfinite(gamma_2k)) {
    g.rS = eta * (1.0 + 2.0 * gamma_2k * kappa);
  }
  return g;
}

SupportMetrics support_metrics(const NoisySignal& x, const Eigen::VectorXd& xstar) {
  const Eigen::Index n = x.x.size();
  if (xstar.size() != n) throw DimensionError("support_metrics: length mismatch");
  const double r = x.params.r;
  const std::vector<int> truth = support_above(x.x, r);
  const std::vector<int> decoded = support_above(xstar, r);

  SupportMetrics m;
  std::vector<int> diff;
  std::set_symmetric_difference(truth.begin(), truth.end(), decoded.begin(), decoded.end(),
                                std::back_inserter(diff));
  m.symdiff_count = static_cast<int>(diff.size());
  m.exact_by_r = diff.empty();

  const std::vector<int> top = top_k_indices(xstar, static_cast<int>(truth.size()));
  m.exact_by_topk = top == truth;
  for (int i : top) {
    if (xstar(i) == 0.0) m.exact_by_topk = false;  // a zero entry is not "large"
  }

  std::vector<char> in_truth(static_cast<std::size_t>(n), 0);
  for (int i : truth) in_truth[static_cast<std::size_t>(i)] = 1;
  double min_on = 0.0;
  double max_off = 0.0;
  bool have_on = false;
  for (Eigen::Index i = 0; i < n; ++i) {
    const double v = std::abs(xstar(i));
    if (in_truth[static_cast<std::size_t>(i)]) {
      min_on = have_on ? std::min(min_on, v) : v;
      have_on = true;
    } else {
      max_off = std::max(max_off, v);
    }
  }
  m.separation_gap = min_on - max_off;

  const Eigen::VectorXd e = x.x - xstar;
  m.err_full = e.norm();
  double on_truth = 0.0;
  for (int i : truth) on_truth += e(i) * e(i);
  m.err_restricted_truth = std::sqrt(on_truth);
  double on_decoded = 0.0;
  for (int i : decoded) on_decoded += e(i) * e(i);
  m.err_restricted_decoded = std::sqrt(on_decoded);
  Eigen::VectorXd rest = xstar;
  for (int i : decoded) rest(i) = 0.0;
  m.residual_noise = rest.norm();
  return m;
}

}  // namespace foldsense
