// foldsense: trial / battery / phase / folding / certify.

#include "foldsense/encoders.hpp"
#include "foldsense/errors.hpp"
#include "foldsense/harness.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

namespace fs = std::filesystem;
using namespace foldsense;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitError = 1;
constexpr int kExitConfig = 2;
constexpr int kExitTimeout = 3;

struct Overrides {
  std::string config;
  std::optional<int> N;
  std::optional<int> m;
  std::optional<double> r;
  std::optional<double> eta;
  std::vector<int> k;
  std::vector<std::string> methods;
  std::optional<std::uint64_t> seed;
  std::optional<int> trials;
  std::optional<double> timeout_s;
  std::optional<int> workers;
  std::optional<std::string> ensemble;
  std::string out = ".";
};

std::vector<Method> parse_methods(const std::vector<std::string>& names) {
  std::vector<Method> out;
  for (const auto& n : names) out.push_back(method_from_string(n));
  return out;
}

// Config file first, then flags on top.
TrialConfig build_config(const Overrides& o, bool phase) {
  TrialConfig c = o.config.empty() ? TrialConfig{} : load_config(o.config);
  if (phase) {
    if (o.N) c.phase_N = *o.N;
    if (o.trials) c.phase_trials = *o.trials;
    if (!o.methods.empty()) c.phase_methods = parse_methods(o.methods);
  } else {
    if (o.N) c.N = *o.N;
    if (o.trials) c.trials_per_cell = *o.trials;
    if (!o.methods.empty()) c.methods = parse_methods(o.methods);
  }
  if (o.m) c.m = *o.m;
  if (o.r) c.r = *o.r;
  if (o.eta) c.eta = *o.eta;
  if (!o.k.empty()) c.k_list = o.k;
  if (o.seed) c.seed_base = *o.seed;
  if (o.timeout_s) c.timeout_s = *o.timeout_s;
  if (o.workers) c.workers = *o.workers;
  if (o.ensemble) {
    try {
      c.ensemble = encoder_kind_from_string(*o.ensemble);
    } catch (const Error& e) {
      throw ConfigError(e.what());
    }
  }
  validate(c);
  return c;
}

std::ofstream open_out(const fs::path& p) {
  std::ofstream f(p, std::ios::binary);
  if (!f) throw Error("cannot write " + p.string());
  return f;
}

void ensure_dir(const std::string& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw Error("cannot create " + dir + ": " + ec.message());
}

int cmd_trial(const Overrides& o, int trial) {
  const TrialConfig c = build_config(o, false);
  std::vector<TrialRow> rows;
  for (int k : c.k_list) {
    auto part = run_trial(c, c.m, k, trial, c.methods);
    rows.insert(rows.end(), part.begin(), part.end());
  }
  write_rows_csv(std::cout, rows);
  return kExitOk;
}

int cmd_battery(const Overrides& o) {
  const TrialConfig c = build_config(o, false);
  ensure_dir(o.out);
  std::vector<TrialRow> rows;
  const auto agg = massive_stats(c, &rows);
  {
    auto f = open_out(fs::path(o.out) / "rows.csv");
    write_rows_csv(f, rows);
  }
  {
    auto f = open_out(fs::path(o.out) / "timings.csv");
    write_timings_csv(f, rows);
  }
  {
    auto f = open_out(fs::path(o.out) / "aggregate.csv");
    write_aggregate_csv(f, agg);
  }
  {
    auto f = open_out(fs::path(o.out) / "config.json");
    f << config_to_json(c) << '\n';
  }
  std::printf("%-9s %3s %6s %8s %8s %10s %10s\n", "method", "k", "failed", "S_r", "top-k",
              "err_full", "res_noise");
  for (const auto& a : agg) {
    std::printf("%-9s %3d %6d %8.3f %8.3f %10.4g %10.4g\n", to_string(a.method).c_str(), a.k,
                a.failed, a.sr_rate, a.topk_rate, a.mean_err_full, a.mean_residual_noise);
  }
  return kExitOk;
}

int cmd_phase(const Overrides& o) {
  const TrialConfig c = build_config(o, true);
  ensure_dir(o.out);
  PhaseOptions po;
  int done = 0;
  po.progress = [&](int, int) {
    if (c.workers == 1 && ++done % 50 == 0) std::fprintf(stderr, "  %d cells\n", done);
  };
  const auto grids = phase_transition(c, c.phase_methods, c.phase_trials, po);
  bool timeout_dominated = false;
  for (const auto& g : grids) {
    const std::string name = to_string(g.method);
    {
      auto f = open_out(fs::path(o.out) / ("phase_" + name + ".csv"));
      write_phase_csv(f, g);
    }
    {
      auto f = open_out(fs::path(o.out) / ("contours_" + name + ".json"));
      f << contours_json(g) << '\n';
    }
    const double tf = timeout_fraction(g);
    std::printf("%s: timeout fraction %.3f\n", name.c_str(), tf);
    if (tf > 0.5) timeout_dominated = true;
  }
  for (std::size_t i = 1; i < grids.size(); ++i) {
    for (double level : po.levels) {
      std::printf("%s vs %s at %.2f: dominates on %.3f of columns\n",
                  to_string(grids[i].method).c_str(), to_string(grids[0].method).c_str(), level,
                  contour_dominance(grids[i], grids[0], level));
    }
  }
  return timeout_dominated ? kExitTimeout : kExitOk;
}

int cmd_folding(const Overrides& o, double sigma, int trials) {
  const int N = o.N.value_or(100);
  const int m = o.m.value_or(40);
  const double ratio = noise_folding_check(N, m, sigma, trials, o.seed.value_or(20260101));
  std::printf("var(A n) / sigma^2 = %.6f   N/m = %.6f\n", ratio,
              static_cast<double>(N) / static_cast<double>(m));
  return kExitOk;
}

int cmd_certify(const Overrides& o, const std::string& enc_path, int K, int k) {
  Encoder a = [&] {
    if (!enc_path.empty()) return load_encoder(enc_path);
    const int N = o.N.value_or(20);
    const int m = o.m.value_or(10);
    const auto kind = encoder_kind_from_string(o.ensemble.value_or("gaussian"));
    const std::uint64_t seed = o.seed.value_or(1);
    return kind == EncoderKind::SubsampledCosine ? subsampled_cosine_encoder(m, N, seed)
                                                 : gaussian_encoder(m, N, seed);
  }();
  const MatrixCertificate c = certify(a, K, k);
  const nlohmann::json j = {{"m", a.rows()},
                            {"N", a.cols()},
                            {"kind", to_string(a.kind())},
                            {"rip", {{"order", c.order},
                                     {"delta", c.rip_delta},
                                     {"violated", c.rip_violated},
                                     {"method", to_string(c.rip_method)}}},
                            {"nsp", {{"order", c.nsp_order},
                                     {"gamma", c.nsp_gamma},
                                     {"method", to_string(c.nsp_method)}}},
                            {"beta", {{"lower", c.beta_lower}, {"method", to_string(c.beta_method)}}}};
  std::cout << j.dump(2) << '\n';
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Sparse decoding under noise folding"};
  app.require_subcommand(1);
  Overrides o;
  app.add_option("--config", o.config, "JSON or TOML config file")->check(CLI::ExistingFile);
  app.add_option("--N", o.N, "Signal length");
  app.add_option("--m", o.m, "Measurements");
  app.add_option("--r", o.r, "Relevant-entry threshold");
  app.add_option("--eta", o.eta, "Noise level");
  app.add_option("--k", o.k, "Sparsity levels")->delimiter(',');
  app.add_option("--methods", o.methods, "Decoders")->delimiter(',');
  app.add_option("--seed", o.seed, "Base seed");
  app.add_option("--trials", o.trials, "Trials per cell");
  app.add_option("--timeout-s", o.timeout_s, "Per-cell time budget for phase grids");
  app.add_option("--workers", o.workers, "Worker threads");
  app.add_option("--ensemble", o.ensemble, "gaussian or subsampled_cosine");
  app.add_option("--out", o.out, "Output directory");

  auto* trial = app.add_subcommand("trial", "Run one trial index for every k; rows to stdout");
  int trial_index = 0;
  trial->add_option("--index", trial_index, "Trial index");
  auto* battery = app.add_subcommand("battery", "Monte-Carlo battery; writes rows/timings/aggregate");
  auto* phase = app.add_subcommand("phase", "Phase-transition grids");
  auto* folding = app.add_subcommand("folding", "Empirical noise-folding variance ratio");
  double sigma = 1.0;
  int fold_trials = 250;
  folding->add_option("--sigma", sigma, "Signal-noise standard deviation");
  folding->add_option("--fold-trials", fold_trials, "Independent encoders");
  auto* cert = app.add_subcommand("certify", "RIP / NSP / beta certificate of an encoder");
  std::string enc_path;
  int cert_K = 2;
  int cert_k = 1;
  cert->add_option("--encoder", enc_path, ".enc file (else generated from --N --m --seed)");
  cert->add_option("--K", cert_K, "RIP order");
  cert->add_option("--nsp-k", cert_k, "NSP order");
  for (auto* sub : {trial, battery, phase, folding, cert}) sub->fallthrough();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitConfig;
  }

  try {
    if (*trial) return cmd_trial(o, trial_index);
    if (*battery) return cmd_battery(o);
    if (*phase) return cmd_phase(o);
    if (*folding) return cmd_folding(o, sigma, fold_trials);
    if (*cert) return cmd_certify(o, enc_path, cert_K, cert_k);
  } catch (const ConfigError& e) {
    std::fprintf(stderr, "config error: %s\n", e.what());
    return kExitConfig;
  } catch (const BudgetError& e) {
    std::fprintf(stderr, "budget exceeded: %s\n", e.what());
    return kExitTimeout;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kExitError;
  }
  return kExitOk;
}
