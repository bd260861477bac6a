#pragma once

#include "foldsense/decode_result.hpp"
#include "foldsense/encoders.hpp"
#include "foldsense/l1.hpp"
#include "foldsense/signals.hpp"

#include <Eigen/Dense>

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace foldsense {

struct IHTParams {
  double tau = 0.01;  // threshold is sqrt(tau)
  int max_iters = 5000;
  double fp_tol = 1e-10;
  bool rescale = true;  // enforce ||A|| <= 1 by scaling A and y together
};

/// Keeps entries with |z_i| > thresh.
Eigen::VectorXd hard_threshold(const Eigen::VectorXd& z, double thresh);

/// x <- H_sqrt(tau)(x + A'(y - Ax)). history holds J0(x) = ||Ax - y||^2 + tau |supp x|
/// per iterate (in the rescaled problem).
DecodeResult iht_decode(const Encoder& a, const Eigen::VectorXd& y, const Eigen::VectorXd& x0,
                        const IHTParams& params);

/// Admissible tau interval (bounds on tau, i.e. squared bounds on sqrt(tau)).
struct TauRange {
  double lo = 0.0;
  double hi = 0.0;
  /// ((sqrt(lo) + sqrt(hi)) / 2)^2
  double midpoint() const;
};

/// Throws ParameterError unless r > eta (1 + (1 + 1/beta) / (1 - delta_2k)).
TauRange tau_range(double eta, double r, double delta_2k, double beta);

/// True when the tau interval is nonempty.
bool tau_range_valid(double eta, double r, double delta_2k, double beta);

struct QcqpProblem {
  Eigen::MatrixXd A;
  Eigen::VectorXd y;
  std::vector<int> support;   // Lambda, ascending
  std::vector<double> signs;  // +-1 per support index
  double eta = 0.0;
  double r = 0.0;
  double p = 2.0;
  Eigen::VectorXd hint;       // optional; used for the starting point on Lambda
  double gap_tol = 1e-8;
  double feas_tol = 1e-8;
  int max_newton = 400;
  double barrier_growth = 10.0;
};

struct QcqpResult {
  Eigen::VectorXd z;
  double kkt_residual = 0.0;   // stationarity of the Lagrangian, inf-norm
  double duality_gap = 0.0;    // constraints / t at exit
  double max_violation = 0.0;  // largest constraint violation
  int newton_steps = 0;
  bool converged = false;
};

/// min 1/2 |Az - y|^2 s.t. |z off Lambda|_2^2 <= (N - |Lambda|)^{1 - 2/p} eta^2,
/// signs_i z_i >= r on Lambda. Log barrier with Newton centering.
QcqpResult qcqp_solve(const QcqpProblem& prob);
Eigen::VectorXd qcqp_correct(const QcqpProblem& prob);

struct PipelineOptions {
  ConvexSolveOptions l1;
  IHTParams iht;                      // tau is overwritten by the selection rule
  std::optional<double> tau_override;
  double fallback_sqrt_tau_ratio = 0.5;  // sqrt(tau) = ratio * r when the range is empty
  int beta_samples = 4;
  int beta_descent_steps = 10;
  std::uint64_t beta_seed = 0x5eedULL;
  double qcqp_gap_tol = 1e-8;
};

/// Constants fed to tau selection. beta is estimated on demand when missing.
struct PipelineCerts {
  double delta_2k = 0.0;
  std::optional<double> beta;
};

PipelineCerts certs_from(const MatrixCertificate& cert);

struct PipelineDiagnostics {
  double tau = 0.0;
  bool tau_fallback = false;
  bool tau_overridden = false;
  std::optional<double> beta_used;
  int l1_iterations = 0;
  int iht_iterations = 0;
  bool iht_converged = false;
  int qcqp_newton_steps = 0;
  bool qcqp_skipped = false;  // IHT returned the zero vector
  double qcqp_kkt_residual = 0.0;
  std::uint64_t warm_start_hash = 0;
  std::vector<double> j0_trace;
};

struct PipelineResult {
  DecodeResult result;
  PipelineDiagnostics diag;
};

/// l1 warm start, tau selection, hard-threshold init, IHT, QCQP on supp(x_IHT).
/// Pass `warm` to reuse an existing l1 solution for the same (A, y).
PipelineResult l1_iht_pipeline(const Encoder& a, const Eigen::VectorXd& y,
                               const ClassParams& cls, const PipelineCerts& certs,
                               const PipelineOptions& opts = {},
                               const DecodeResult* warm = nullptr);

std::string stage_trace_json(const PipelineDiagnostics& d);

/// FNV-1a over the little-endian bytes of the entries.
std::uint64_t vector_hash(const Eigen::VectorXd& v);

}  // namespace foldsense
