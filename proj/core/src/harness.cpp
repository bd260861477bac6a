#include "foldsense/harness.hpp"

#include "foldsense/errors.hpp"
#include "foldsense/rng.hpp"
#include "format.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <istream>
#include <map>
#include <ostream>
#include <sstream>
#include <random>
#include <thread>
#include <tuple>

namespace foldsense {

using Eigen::VectorXd;

std::string to_string(Method m) {
  switch (m) {
    case Method::L1Eq: return "l1_eq";
    case Method::L1Ineq: return "l1_ineq";
    case Method::IrwL1: return "irw_l1";
    case Method::SlpCold: return "slp_cold";
    case Method::L1Slp: return "l1_slp";
    case Method::L1Iht: return "l1_iht";
  }
  return "l1_eq";
}

Method method_from_string(std::string_view name) {
  for (Method m : all_methods()) {
    if (to_string(m) == name) return m;
  }
  throw ConfigError("unknown method '" + std::string(name) + "'");
}

const std::vector<Method>& all_methods() {
  static const std::vector<Method> all{Method::L1Eq,    Method::L1Ineq, Method::IrwL1,
                                       Method::SlpCold, Method::L1Slp,  Method::L1Iht};
  return all;
}

std::uint64_t child_seed(std::uint64_t seed_base, int m, int k, int trial) {
  return mix_seed({seed_base, static_cast<std::uint64_t>(m), static_cast<std::uint64_t>(k),
                   static_cast<std::uint64_t>(trial)});
}

namespace {

double delta_rule(std::optional<double> fixed, double fraction, double eta, int m) {
  if (fixed) return *fixed;
  if (fraction <= 0.0) return 0.0;
  // Folded noise has per-measurement standard deviation about eta / sqrt(m).
  return fraction * delta_param(eta / std::sqrt(static_cast<double>(m)), m);
}

}  // namespace

double ineq_delta_for(const TrialConfig& cfg, int m) {
  return delta_rule(cfg.ineq_delta, cfg.ineq_delta_fraction, cfg.eta, m);
}

double irw_delta_for(const TrialConfig& cfg, int m) {
  return delta_rule(cfg.irw_delta, cfg.irw_delta_fraction, cfg.eta, m);
}

SPParams slp_params_for(const TrialConfig& cfg) {
  SPParams p = cfg.slp;
  p.r = cfg.slp_r_ratio * cfg.r;
  p.eps = cfg.slp_eps_ratio * cfg.r;
  p.p = cfg.p;
  return p;
}

TrialInstance make_instance(const TrialConfig& cfg, int N, int m, int k, int trial) {
  const std::uint64_t seed = child_seed(cfg.seed_base, m, k, trial);
  const std::uint64_t enc_seed = mix_seed({seed, 1});
  const std::uint64_t sig_seed = mix_seed({seed, 2});
  Encoder enc = cfg.ensemble == EncoderKind::SubsampledCosine
                    ? subsampled_cosine_encoder(m, N, enc_seed)
                    : gaussian_encoder(m, N, enc_seed);
  const ClassParams cls{cfg.eta, k, cfg.r, cfg.p};
  const double lo = cfg.r + cfg.amp_lo_offset;
  const double hi = std::max(cfg.amp_hi_factor * cfg.r, lo);
  NoisySignal sig = generate_signal(N, cls, k, lo, hi, sig_seed);
  VectorXd y = enc.matrix() * sig.x;
  return {std::move(enc), std::move(sig), std::move(y)};
}

std::vector<TrialRow> run_trial(const TrialConfig& cfg, int m, int k, int trial,
                                const std::vector<Method>& methods) {
  const std::uint64_t seed = child_seed(cfg.seed_base, m, k, trial);
  std::vector<TrialRow> rows;
  rows.reserve(methods.size());

  auto base_row = [&](Method method) {
    TrialRow row;
    row.method = method;
    row.m = m;
    row.k = k;
    row.trial = trial;
    row.seed = seed;
    return row;
  };

  std::optional<TrialInstance> inst;
  std::string inst_error;
  try {
    inst = make_instance(cfg, cfg.N, m, k, trial);
  } catch (const std::exception& e) {
    inst_error = std::string("instance: ") + e.what();
  }
  if (!inst) {
    for (Method method : methods) {
      TrialRow row = base_row(method);
      row.failed = true;
      row.error = inst_error;
      rows.push_back(std::move(row));
    }
    return rows;
  }
  const Encoder& a = inst->encoder;
  const NoisySignal& sig = inst->signal;
  const VectorXd& y = inst->y;

  // The l1 solution is shared by l1_eq and both warm-started methods.
  std::optional<DecodeResult> l1;
  std::string l1_error;
  auto need_l1 = [&]() -> const DecodeResult& {
    if (!l1 && l1_error.empty()) {
      try {
        l1 = solve_bp_equality(a, y, cfg.l1);
      } catch (const std::exception& e) {
        l1_error = std::string("l1: ") + e.what();
      }
    }
    if (!l1) throw Error(l1_error);
    return *l1;
  };

  for (Method method : methods) {
    TrialRow row = base_row(method);
    try {
      DecodeResult res;
      switch (method) {
        case Method::L1Eq:
          res = need_l1();
          break;
        case Method::L1Ineq:
          res = solve_bp_inequality(a, y, ineq_delta_for(cfg, m), cfg.l1);
          break;
        case Method::IrwL1:
          res = irw_l1(a, y, cfg.irw_a, cfg.irw_iters, irw_delta_for(cfg, m), cfg.l1);
          break;
        case Method::SlpCold:
          res = slp_decode(a, y, VectorXd::Zero(a.cols()), slp_params_for(cfg));
          break;
        case Method::L1Slp: {
          const DecodeResult& warm = need_l1();
          res = slp_decode(a, y, warm.xstar, slp_params_for(cfg));
          res.wall_time_ms += warm.wall_time_ms;
          break;
        }
        case Method::L1Iht: {
          const DecodeResult& warm = need_l1();
          const PipelineCerts certs{cfg.iht_delta_2k, cfg.iht_beta};
          const ClassParams cls{cfg.eta, k, cfg.r, cfg.p};
          res = l1_iht_pipeline(a, y, cls, certs, cfg.iht, &warm).result;
          break;
        }
      }
      res.method_tag = to_string(method);
      row.metrics = support_metrics(sig, res.xstar);
      row.iterations = res.iterations;
      row.residual = res.residual;
      row.objective = res.objective;
      row.converged = res.converged;
      row.wall_time_ms = res.wall_time_ms;
    } catch (const std::exception& e) {
      row.failed = true;
      row.error = e.what();
    }
    rows.push_back(std::move(row));
  }
  return rows;
}

std::vector<TrialRow> run_trial(const TrialConfig& cfg, int k, int trial) {
  return run_trial(cfg, cfg.m, k, trial, cfg.methods);
}

void parallel_for(int n, int workers, const std::function<void(int)>& fn) {
  if (n <= 0) return;
  workers = std::max(1, std::min(workers, n));
  if (workers == 1) {
    for (int i = 0; i < n; ++i) fn(i);
    return;
  }
  std::atomic<int> next{0};
  std::exception_ptr first_error;
  std::atomic<bool> has_error{false};
  std::vector<std::thread> pool;
  pool.reserve(static_cast<std::size_t>(workers));
  for (int w = 0; w < workers; ++w) {
    pool.emplace_back([&] {
      while (true) {
        const int i = next.fetch_add(1);
        if (i >= n) return;
        try {
          fn(i);
        } catch (...) {
          bool expected = false;
          if (has_error.compare_exchange_strong(expected, true)) first_error = std::current_exception();
        }
      }
    });
  }
  for (auto& t : pool) t.join();
  if (first_error) std::rethrow_exception(first_error);
}

std::vector<TrialRow> run_battery(const TrialConfig& cfg) {
  validate(cfg);
  const int per_k = cfg.trials_per_cell;
  const int n = static_cast<int>(cfg.k_list.size()) * per_k;
  std::vector<std::vector<TrialRow>> slots(static_cast<std::size_t>(n));
  parallel_for(n, cfg.workers, [&](int i) {
    const int k = cfg.k_list[static_cast<std::size_t>(i / per_k)];
    slots[static_cast<std::size_t>(i)] = run_trial(cfg, cfg.m, k, i % per_k, cfg.methods);
  });
  std::vector<TrialRow> rows;
  for (auto& s : slots) {
    for (auto& r : s) rows.push_back(std::move(r));
  }
  return rows;
}

std::vector<AggregateRow> aggregate(const std::vector<TrialRow>& rows) {
  std::vector<AggregateRow> out;
  for (Method method : all_methods()) {
    std::vector<int> ks;
    for (const auto& r : rows) {
      if (r.method == method) ks.push_back(r.k);
    }
    std::sort(ks.begin(), ks.end());
    ks.erase(std::unique(ks.begin(), ks.end()), ks.end());
    for (int k : ks) {
      AggregateRow a;
      a.method = method;
      a.k = k;
      for (const auto& r : rows) {
        if (r.method != method || r.k != k) continue;
        if (r.failed) {
          ++a.failed;
          continue;
        }
        ++a.count;
        a.mean_err_full += r.metrics.err_full;
        a.mean_residual_noise += r.metrics.residual_noise;
        a.mean_wall_ms += r.wall_time_ms;
        a.mean_separation_gap += r.metrics.separation_gap;
        a.topk_rate += r.metrics.exact_by_topk ? 1.0 : 0.0;
        a.sr_rate += r.metrics.exact_by_r ? 1.0 : 0.0;
        a.mean_err_restricted_truth += r.metrics.err_restricted_truth;
        a.mean_err_restricted_decoded += r.metrics.err_restricted_decoded;
      }
      if (a.count > 0) {
        const double c = a.count;
        a.mean_err_full /= c;
        a.mean_residual_noise /= c;
        a.mean_wall_ms /= c;
        a.mean_separation_gap /= c;
        a.topk_rate /= c;
        a.sr_rate /= c;
        a.mean_err_restricted_truth /= c;
        a.mean_err_restricted_decoded /= c;
      }
      out.push_back(a);
    }
  }
  return out;
}

std::vector<AggregateRow> massive_stats(const TrialConfig& cfg, std::vector<TrialRow>* rows_out) {
  std::vector<TrialRow> rows = run_battery(cfg);
  std::vector<AggregateRow> agg = aggregate(rows);
  if (rows_out != nullptr) *rows_out = std::move(rows);
  return agg;
}

namespace {

std::string sanitize(std::string s) {
  for (char& c : s) {
    if (c == ',' || c == '\n' || c == '\r' || c == '"') c = ';';
  }
  return s;
}

std::vector<std::string> split_csv(const std::string& line) {
  std::vector<std::string> out;
  std::string cur;
  for (char c : line) {
    if (c == ',') {
      out.push_back(cur);
      cur.clear();
    } else if (c != '\r') {
      cur.push_back(c);
    }
  }
  out.push_back(cur);
  return out;
}

const char* kRowsHeader =
    "method,m,k,trial,seed,status,symdiff_count,exact_by_r,exact_by_topk,separation_gap,"
    "err_full,err_restricted_truth,err_restricted_decoded,residual_noise,iterations,residual,"
    "objective,converged,error";

}  // namespace

void write_rows_csv(std::ostream& out, const std::vector<TrialRow>& rows) {
  out << kRowsHeader << '\n';
  for (const auto& r : rows) {
    out << to_string(r.method) << ',' << r.m << ',' << r.k << ',' << r.trial << ',' << r.seed << ','
        << (r.timeout ? "timeout" : (r.failed ? "failed" : "ok")) << ','
        << metrics_csv_fields(r.metrics) << ',' << r.iterations << ','
        << detail::fmt_g(r.residual) << ',' << detail::fmt_g(r.objective) << ','
        << (r.converged ? 1 : 0) << ',' << sanitize(r.error) << '\n';
  }
}

void write_timings_csv(std::ostream& out, const std::vector<TrialRow>& rows) {
  out << "method,m,k,trial,wall_time_ms\n";
  for (const auto& r : rows) {
    out << to_string(r.method) << ',' << r.m << ',' << r.k << ',' << r.trial << ','
        << detail::fmt_g(r.wall_time_ms) << '\n';
  }
}

void write_aggregate_csv(std::ostream& out, const std::vector<AggregateRow>& agg) {
  out << "method,k,count,failed,mean_err_full,mean_residual_noise,mean_wall_ms,"
         "mean_separation_gap,topk_rate,sr_rate,mean_err_restricted_truth,"
         "mean_err_restricted_decoded\n";
  for (const auto& a : agg) {
    using detail::fmt_g;
    out << to_string(a.method) << ',' << a.k << ',' << a.count << ',' << a.failed << ','
        << fmt_g(a.mean_err_full, 6) << ',' << fmt_g(a.mean_residual_noise, 6) << ','
        << fmt_g(a.mean_wall_ms, 6) << ',' << fmt_g(a.mean_separation_gap, 6) << ','
        << fmt_g(a.topk_rate, 6) << ',' << fmt_g(a.sr_rate, 6) << ','
        << fmt_g(a.mean_err_restricted_truth, 6) << ','
        << fmt_g(a.mean_err_restricted_decoded, 6) << '\n';
  }
}

std::vector<TrialRow> read_rows_csv(std::istream& in) {
  std::string line;
  if (!std::getline(in, line)) throw ConfigError("read_rows_csv: empty input");
  if (split_csv(line) != split_csv(kRowsHeader)) throw ConfigError("read_rows_csv: unexpected header");
  std::vector<TrialRow> rows;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const auto f = split_csv(line);
    if (f.size() != 19) throw ConfigError("read_rows_csv: wrong field count");
    TrialRow r;
    try {
      r.method = method_from_string(f[0]);
      r.m = std::stoi(f[1]);
      r.k = std::stoi(f[2]);
      r.trial = std::stoi(f[3]);
      r.seed = std::stoull(f[4]);
      r.timeout = f[5] == "timeout";
      r.failed = f[5] != "ok";
      r.metrics.symdiff_count = std::stoi(f[6]);
      r.metrics.exact_by_r = f[7] == "1";
      r.metrics.exact_by_topk = f[8] == "1";
      r.metrics.separation_gap = std::stod(f[9]);
      r.metrics.err_full = std::stod(f[10]);
      r.metrics.err_restricted_truth = std::stod(f[11]);
      r.metrics.err_restricted_decoded = std::stod(f[12]);
      r.metrics.residual_noise = std::stod(f[13]);
      r.iterations = std::stoi(f[14]);
      r.residual = std::stod(f[15]);
      r.objective = std::stod(f[16]);
      r.converged = f[17] == "1";
      r.error = f[18];
    } catch (const std::logic_error& e) {
      throw ConfigError(std::string("read_rows_csv: bad field: ") + e.what());
    }
    rows.push_back(std::move(r));
  }
  return rows;
}

void merge_timings_csv(std::istream& in, std::vector<TrialRow>& rows) {
  std::string line;
  if (!std::getline(in, line)) throw ConfigError("merge_timings_csv: empty input");
  std::map<std::tuple<int, int, int, int>, double> t;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const auto f = split_csv(line);
    if (f.size() != 5) throw ConfigError("merge_timings_csv: wrong field count");
    t[{static_cast<int>(method_from_string(f[0])), std::stoi(f[1]), std::stoi(f[2]),
       std::stoi(f[3])}] = std::stod(f[4]);
  }
  for (auto& r : rows) {
    const auto it = t.find({static_cast<int>(r.method), r.m, r.k, r.trial});
    if (it != t.end()) r.wall_time_ms = it->second;
  }
}

double noise_folding_check(int N, int m, double sigma_n, int trials, std::uint64_t seed) {
  if (!(sigma_n > 0.0)) throw ParameterError("noise_folding_check: sigma_n must be > 0");
  if (trials < 1 || static_cast<long long>(trials) * m < 10000) {
    throw ParameterError("noise_folding_check: need trials * m >= 10^4 samples");
  }
  Rng rng(mix_seed({seed, 0xf01d}));
  std::normal_distribution<double> normal(0.0, sigma_n);
  VectorXd n(N);
  // Welford accumulation over the pooled entries.
  double mean = 0.0;
  double m2 = 0.0;
  long long count = 0;
  for (int t = 0; t < trials; ++t) {
    const Encoder a = gaussian_encoder(m, N, mix_seed({seed, static_cast<std::uint64_t>(t)}));
    for (int i = 0; i < N; ++i) n(i) = normal(rng);
    const VectorXd w = a.matrix() * n;
    for (Eigen::Index i = 0; i < w.size(); ++i) {
      ++count;
      const double d = w(i) - mean;
      mean += d / static_cast<double>(count);
      m2 += d * (w(i) - mean);
    }
  }
  return m2 / static_cast<double>(count - 1) / (sigma_n * sigma_n);
}

}  // namespace foldsense
