#include "foldsense/iht.hpp"

#include "foldsense/errors.hpp"

#include <json.hpp>

#include <bit>
#include <cmath>
#include <cstdio>
#include <limits>

namespace foldsense {

using Eigen::MatrixXd;
using Eigen::VectorXd;

VectorXd hard_threshold(const VectorXd& z, double thresh) {
  if (!(thresh >= 0.0)) throw ParameterError("hard_threshold: threshold must be >= 0");
  VectorXd out = z;
  for (Eigen::Index i = 0; i < z.size(); ++i) {
    if (!(std::abs(z(i)) > thresh)) out(i) = 0.0;
  }
  return out;
}

namespace {

double j0(const MatrixXd& a, const VectorXd& y, const VectorXd& x, double tau) {
  Eigen::Index nnz = 0;
  for (Eigen::Index i = 0; i < x.size(); ++i) nnz += x(i) != 0.0;
  return (a * x - y).squaredNorm() + tau * static_cast<double>(nnz);
}

}  // namespace

DecodeResult iht_decode(const Encoder& enc, const VectorXd& y, const VectorXd& x0,
                        const IHTParams& params) {
  Stopwatch clock;
  if (y.size() != enc.rows() || x0.size() != enc.cols()) {
    throw DimensionError("iht_decode: size mismatch");
  }
  if (!(params.tau > 0.0)) throw ParameterError("iht_decode: tau must be > 0");
  if (!(params.fp_tol > 0.0)) throw ParameterError("iht_decode: fp_tol must be > 0");
  if (params.max_iters < 0) throw ParameterError("iht_decode: max_iters must be >= 0");

  double scale = 1.0;
  const double norm = operator_norm(enc);
  if (params.rescale) {
    scale = 1.0 / std::max(1.0, norm);
  } else if (norm > 1.0 + 1e-12) {
    throw ParameterError("iht_decode: needs ||A|| <= 1 (enable rescale)");
  }
  const MatrixXd a = enc.matrix() * scale;
  const VectorXd ys = y * scale;
  const double thresh = std::sqrt(params.tau);

  DecodeResult r;
  r.method_tag = "iht";
  VectorXd x = x0;
  VectorXd best = x;
  double best_j = j0(a, ys, x, params.tau);
  r.history.push_back(best_j);
  for (int it = 1; it <= params.max_iters; ++it) {
    VectorXd next = hard_threshold(x + a.transpose() * (ys - a * x), thresh);
    const double step = (next - x).norm();
    x = std::move(next);
    const double j = j0(a, ys, x, params.tau);
    r.history.push_back(j);
    r.iterations = it;
    if (j < best_j) {
      best_j = j;
      best = x;
    }
    if (step <= params.fp_tol) {
      r.converged = true;
      break;
    }
  }
  if (params.max_iters == 0) r.converged = false;
  r.xstar = r.converged ? x : best;
  r.objective = j0(a, ys, r.xstar, params.tau);
  r.residual = (enc.matrix() * r.xstar - y).norm();
  r.wall_time_ms = clock.elapsed_ms();
  return r;
}

double TauRange::midpoint() const {
  const double s = 0.5 * (std::sqrt(lo) + std::sqrt(hi));
  return s * s;
}

bool tau_range_valid(double eta, double r, double delta_2k, double beta) {
  if (!(delta_2k >= 0.0 && delta_2k < 1.0) || !(beta > 0.0) || !(eta >= 0.0)) return false;
  return r > eta * (1.0 + (1.0 + 1.0 / beta) / (1.0 - delta_2k));
}

TauRange tau_range(double eta, double r, double delta_2k, double beta) {
  if (!(delta_2k >= 0.0 && delta_2k < 1.0)) {
    throw ParameterError("tau_range: delta_2k must lie in [0, 1)");
  }
  if (!(beta > 0.0)) throw ParameterError("tau_range: beta must be > 0");
  if (!(eta >= 0.0)) throw ParameterError("tau_range: eta must be >= 0");
  if (!tau_range_valid(eta, r, delta_2k, beta)) {
    const double need = eta * (1.0 + (1.0 + 1.0 / beta) / (1.0 - delta_2k));
    throw ParameterError("tau_range: empty range, r must exceed eta(1 + (1 + 1/beta)/(1 - delta_2k)) = " +
                         std::to_string(need));
  }
  const double hi = (r - eta / (1.0 - delta_2k)) / (1.0 + 1.0 / ((1.0 - delta_2k) * beta));
  return {eta * eta, hi * hi};
}

PipelineCerts certs_from(const MatrixCertificate& cert) {
  PipelineCerts c;
  c.delta_2k = cert.rip_delta;
  if (cert.beta_lower > 0.0) c.beta = cert.beta_lower;
  return c;
}

std::uint64_t vector_hash(const VectorXd& v) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (Eigen::Index i = 0; i < v.size(); ++i) {
    const auto bits = std::bit_cast<std::uint64_t>(v(i));
    for (int b = 0; b < 8; ++b) {
      h ^= (bits >> (8 * b)) & 0xffU;
      h *= 0x100000001b3ULL;
    }
  }
  return h;
}

PipelineResult l1_iht_pipeline(const Encoder& a, const VectorXd& y, const ClassParams& cls,
                               const PipelineCerts& certs, const PipelineOptions& opts,
                               const DecodeResult* warm) {
  Stopwatch clock;
  PipelineResult out;
  PipelineDiagnostics& d = out.diag;

  // (1) warm start
  DecodeResult l1;
  if (warm != nullptr) {
    l1 = *warm;
  } else {
    try {
      l1 = solve_bp_equality(a, y, opts.l1);
    } catch (const Error& e) {
      throw StageError("l1", e.what());
    }
  }
  if (l1.xstar.size() != a.cols()) throw StageError("l1", "warm start has wrong length");
  d.l1_iterations = l1.iterations;
  d.warm_start_hash = vector_hash(l1.xstar);

  // (2) tau
  try {
    if (opts.tau_override) {
      d.tau = *opts.tau_override;
      d.tau_overridden = true;
    } else {
      const double delta = certs.delta_2k;
      // Without a valid delta, or when even beta = inf leaves the range empty,
      // beta cannot rescue the condition, so do not spend time estimating it.
      const bool hopeless = !(delta >= 0.0 && delta < 1.0) ||
                            !(cls.r > cls.eta * (1.0 + 1.0 / (1.0 - delta)));
      std::optional<double> beta = certs.beta;
      if (!hopeless && !beta) {
        beta = beta_lower_bound(a, opts.beta_samples, opts.beta_descent_steps, opts.beta_seed);
      }
      d.beta_used = beta;
      if (!hopeless && tau_range_valid(cls.eta, cls.r, delta, *beta)) {
        d.tau = tau_range(cls.eta, cls.r, delta, *beta).midpoint();
      } else {
        const double s = opts.fallback_sqrt_tau_ratio * cls.r;
        d.tau = s * s;
        d.tau_fallback = true;
      }
    }
    if (!(d.tau > 0.0)) throw ParameterError("selected tau must be > 0");
  } catch (const StageError&) {
    throw;
  } catch (const Error& e) {
    throw StageError("tau", e.what());
  }

  // (3) + (4)
  DecodeResult iht;
  try {
    IHTParams ip = opts.iht;
    ip.tau = d.tau;
    const VectorXd x0 = hard_threshold(l1.xstar, std::sqrt(d.tau));
    iht = iht_decode(a, y, x0, ip);
  } catch (const Error& e) {
    throw StageError("iht", e.what());
  }
  d.iht_iterations = iht.iterations;
  d.iht_converged = iht.converged;
  d.j0_trace = iht.history;

  // (5) correction on the IHT support
  VectorXd z = iht.xstar;
  const std::vector<int> lam = support_of(iht.xstar);
  if (lam.empty()) {
    d.qcqp_skipped = true;
  } else {
    try {
      QcqpProblem prob;
      prob.A = a.matrix();
      prob.y = y;
      prob.support = lam;
      for (int i : lam) prob.signs.push_back(iht.xstar(i) > 0.0 ? 1.0 : -1.0);
      prob.eta = cls.eta;
      prob.r = cls.r;
      prob.p = cls.p;
      prob.hint = iht.xstar;
      prob.gap_tol = opts.qcqp_gap_tol;
      const QcqpResult q = qcqp_solve(prob);
      z = q.z;
      d.qcqp_newton_steps = q.newton_steps;
      d.qcqp_kkt_residual = q.kkt_residual;
    } catch (const Error& e) {
      throw StageError("qcqp", e.what());
    }
  }

  DecodeResult& r = out.result;
  r.method_tag = "l1_iht";
  r.xstar = std::move(z);
  r.iterations = l1.iterations + iht.iterations + d.qcqp_newton_steps;
  r.residual = (a.matrix() * r.xstar - y).norm();
  r.objective = 0.5 * r.residual * r.residual;
  r.converged = l1.converged && iht.converged;
  r.history = iht.history;
  r.wall_time_ms = clock.elapsed_ms() + (warm != nullptr ? warm->wall_time_ms : 0.0);
  return out;
}

std::string stage_trace_json(const PipelineDiagnostics& d) {
  char hash[20];
  std::snprintf(hash, sizeof hash, "%016llx", static_cast<unsigned long long>(d.warm_start_hash));
  nlohmann::json j = {
      {"warm_start_hash", hash},
      {"tau", d.tau},
      {"sqrt_tau", std::sqrt(d.tau)},
      {"tau_fallback", d.tau_fallback},
      {"tau_overridden", d.tau_overridden},
      {"iterations", {{"l1", d.l1_iterations}, {"iht", d.iht_iterations},
                      {"qcqp_newton", d.qcqp_newton_steps}}},
      {"iht_converged", d.iht_converged},
      {"qcqp_skipped", d.qcqp_skipped},
      {"qcqp_kkt_residual", d.qcqp_kkt_residual},
      {"j0_trace", d.j0_trace},
  };
  if (d.beta_used) j["beta"] = *d.beta_used;
  return j.dump();
}

}  // namespace foldsense
