#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace foldsense {

/// Parameters of the class of vectors with at most k entries above r and
/// lp mass at most eta elsewhere.
struct ClassParams {
  double eta = 0.0;
  int k = 1;
  double r = 1.0;
  double p = 2.0;
};

struct NoisySignal {
  Eigen::VectorXd x;
  ClassParams params;
  std::vector<int> relevant_support;  // S_r(x), ascending
  double noise_norm = 0.0;            // ||x off S_r(x)||_p
};

struct SupportMetrics {
  int symdiff_count = 0;
  bool exact_by_r = false;
  bool exact_by_topk = false;
  double separation_gap = 0.0;
  double err_full = 0.0;
  double err_restricted_truth = 0.0;
  double err_restricted_decoded = 0.0;
  double residual_noise = 0.0;
};

/// (sum |x_i|^p)^(1/p) for p >= 1.
double lp_norm(const Eigen::VectorXd& x, double p);

/// 1 for p = 1, (N - k)^(1/q) with 1/p + 1/q = 1 otherwise.
double kappa_p(int N, int k, double p);

inline constexpr double kDefaultAmpLoOffset = 0.05;  // amp_lo = r + offset
inline constexpr double kDefaultAmpHiFactor = 2.0;   // amp_hi = factor * r

/// kk relevant entries with magnitude uniform in [amp_lo, amp_hi] and random
/// sign at distinct uniform positions; the rest i.i.d. normal rescaled to
/// lp norm eta.
NoisySignal generate_signal(int N, const ClassParams& params, int kk, double amp_lo,
                            double amp_hi, std::uint64_t seed);
NoisySignal generate_signal(int N, const ClassParams& params, int kk, std::uint64_t seed);

/// {i : |x_i| > r}, ascending.
std::vector<int> support_above(const Eigen::VectorXd& x, double r);

/// {i : x_i != 0}, ascending.
std::vector<int> support_of(const Eigen::VectorXd& x);

/// Indices of the k largest magnitudes, ties to the lowest index; ascending.
std::vector<int> top_k_indices(const Eigen::VectorXd& x, int k);

/// Best k-term approximation x_[k] and sigma_k(x)_p.
std::pair<Eigen::VectorXd, double> best_k_term(const Eigen::VectorXd& x, int k, double p);

inline constexpr double kMembershipTol = 1e-12;

bool class_membership(const Eigen::VectorXd& x, const ClassParams& params);

/// Sufficient relevance thresholds. A field is empty when its formula is
/// undefined for the given constants.
struct GapThresholds {
  std::optional<double> r1;     // plain l1
  std::optional<double> r1rew;  // reweighted l1
  std::optional<double> rS;     // unique identification
};

GapThresholds gap_thresholds(double gamma_k, double gamma_2k, double delta_2k, double kappa,
                             int k, double eta);

SupportMetrics support_metrics(const NoisySignal& x, const Eigen::VectorXd& xstar);

// JSON record {"x": [...], "params": {...}, "support": [...], "noise_norm": ...}.
std::string signal_to_json(const NoisySignal& s);
NoisySignal signal_from_json(const std::string& text);

/// Fixed CSV header, one column per SupportMetrics field.
const std::string& metrics_csv_header();
std::string metrics_csv_fields(const SupportMetrics& m);

}  // namespace foldsense
