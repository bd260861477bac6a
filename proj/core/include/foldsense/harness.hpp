#pragma once

#include "foldsense/decode_result.hpp"
#include "foldsense/encoders.hpp"
#include "foldsense/iht.hpp"
#include "foldsense/l1.hpp"
#include "foldsense/signals.hpp"
#include "foldsense/slp.hpp"

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace foldsense {

enum class Method { L1Eq, L1Ineq, IrwL1, SlpCold, L1Slp, L1Iht };

std::string to_string(Method m);
Method method_from_string(std::string_view name);
const std::vector<Method>& all_methods();

struct TrialConfig {
  int N = 100;
  int m = 40;
  std::vector<int> k_list{1, 2, 3, 4, 5, 6, 7};
  double r = 0.8;
  double eta = 0.75;
  double p = 2.0;
  EncoderKind ensemble = EncoderKind::Gaussian;
  int trials_per_cell = 30;
  std::vector<Method> methods{Method::L1Eq, Method::IrwL1, Method::L1Slp, Method::L1Iht};
  std::uint64_t seed_base = 20260101;
  int workers = 1;
  double timeout_s = 60.0;  // per phase-grid cell

  double amp_lo_offset = kDefaultAmpLoOffset;
  double amp_hi_factor = kDefaultAmpHiFactor;

  ConvexSolveOptions l1;
  // l1_ineq: delta = ineq_delta if set, else fraction * delta_param(eta / sqrt(m), m)
  std::optional<double> ineq_delta;
  double ineq_delta_fraction = 1.0;
  // irw_l1: same rule; fraction 0 means the equality-constrained variant
  double irw_a = kIrwDefaultA;
  int irw_iters = kIrwDefaultIters;
  std::optional<double> irw_delta;
  double irw_delta_fraction = 0.0;
  // SLP potential threshold and blend width, relative to r
  SPParams slp;
  double slp_r_ratio = 0.5;
  double slp_eps_ratio = 0.375;
  // l1 + IHT
  PipelineOptions iht;
  double iht_delta_2k = 0.0;
  std::optional<double> iht_beta;

  // phase grids
  int phase_N = 40;
  int phase_trials = 10;
  std::vector<Method> phase_methods{Method::L1Eq, Method::L1Iht};
};

/// Throws ConfigError when the configuration is inconsistent.
void validate(const TrialConfig& cfg);

/// Reads a JSON or TOML file (by content) into a config on top of defaults.
TrialConfig load_config(const std::string& path);
TrialConfig config_from_text(const std::string& text, TrialConfig base = {});
/// Canonical JSON dump of every field.
std::string config_to_json(const TrialConfig& cfg);

/// Seed of one (m, k, trial) cell.
std::uint64_t child_seed(std::uint64_t seed_base, int m, int k, int trial);

double ineq_delta_for(const TrialConfig& cfg, int m);
double irw_delta_for(const TrialConfig& cfg, int m);
SPParams slp_params_for(const TrialConfig& cfg);

struct TrialRow {
  Method method = Method::L1Eq;
  int m = 0;
  int k = 0;
  int trial = 0;
  std::uint64_t seed = 0;
  bool failed = false;
  bool timeout = false;
  std::string error;
  SupportMetrics metrics;
  int iterations = 0;
  double residual = 0.0;
  double objective = 0.0;
  bool converged = false;
  double wall_time_ms = 0.0;
};

/// Runs every configured method on the instance of cell (m, k, trial).
std::vector<TrialRow> run_trial(const TrialConfig& cfg, int k, int trial);
std::vector<TrialRow> run_trial(const TrialConfig& cfg, int m, int k, int trial,
                                const std::vector<Method>& methods);

/// The instance behind a cell.
struct TrialInstance {
  Encoder encoder;
  NoisySignal signal;
  Eigen::VectorXd y;
};
TrialInstance make_instance(const TrialConfig& cfg, int N, int m, int k, int trial);

/// All (k, trial) cells of the battery, in deterministic order.
std::vector<TrialRow> run_battery(const TrialConfig& cfg);

struct AggregateRow {
  Method method = Method::L1Eq;
  int k = 0;
  int count = 0;   // successful rows
  int failed = 0;
  double mean_err_full = 0.0;
  double mean_residual_noise = 0.0;
  double mean_wall_ms = 0.0;
  double mean_separation_gap = 0.0;
  double topk_rate = 0.0;
  double sr_rate = 0.0;
  double mean_err_restricted_truth = 0.0;
  double mean_err_restricted_decoded = 0.0;
};

/// Per (method, k) means over non-failed rows, ordered by method then k.
std::vector<AggregateRow> aggregate(const std::vector<TrialRow>& rows);

/// run_battery followed by aggregate.
std::vector<AggregateRow> massive_stats(const TrialConfig& cfg,
                                        std::vector<TrialRow>* rows_out = nullptr);

// CSV I/O. rows.csv carries everything except wall time, which goes to
// timings.csv so that rows.csv is reproducible byte for byte.
void write_rows_csv(std::ostream& out, const std::vector<TrialRow>& rows);
void write_timings_csv(std::ostream& out, const std::vector<TrialRow>& rows);
void write_aggregate_csv(std::ostream& out, const std::vector<AggregateRow>& agg);
std::vector<TrialRow> read_rows_csv(std::istream& in);
/// Fills wall_time_ms from timings.csv, matching on (method, m, k, trial).
void merge_timings_csv(std::istream& in, std::vector<TrialRow>& rows);

struct ContourPoint {
  int m = 0;
  double k = 0.0;  // interpolated crossing height; 0 when the first cell is below level
};

struct PhaseGrid {
  int N = 0;
  int trials = 0;
  Method method = Method::L1Eq;
  /// success(m, k) for 1 <= k <= m <= N; NaN where k > m. Index 0 unused.
  Eigen::MatrixXd success;
  Eigen::MatrixXi timeouts;
  std::map<double, std::vector<ContourPoint>> contours;  // level -> polyline over m

  double rate(int m, int k) const { return success(m, k); }
};

struct PhaseOptions {
  std::vector<double> levels{0.5, 0.9};
  std::function<void(int m, int k)> progress;  // optional
};

/// Success (S_r exact) rates over the admissible (m, k) grid. All methods see
/// the same instances. Uses cfg.phase_N, cfg.phase_trials, cfg.timeout_s.
std::vector<PhaseGrid> phase_transition(const TrialConfig& cfg, const std::vector<Method>& methods,
                                        int trials, const PhaseOptions& opts = {});

/// Column-wise crossing of `level` along k.
std::vector<ContourPoint> extract_contour(const PhaseGrid& grid, double level);

/// Fraction of columns m where contour(a) >= contour(b) at `level`.
double contour_dominance(const PhaseGrid& a, const PhaseGrid& b, double level);

/// Fraction of timed-out trials over the whole grid.
double timeout_fraction(const PhaseGrid& g);

void write_phase_csv(std::ostream& out, const PhaseGrid& g);
std::string contours_json(const PhaseGrid& g);

/// Pooled sample variance of the entries of A n over fresh Gaussian A and
/// n ~ N(0, sigma_n^2 I), divided by sigma_n^2.
double noise_folding_check(int N, int m, double sigma_n, int trials, std::uint64_t seed);

/// Runs fn(i) for i in [0, n) on `workers` threads; fn must write only to slot i.
void parallel_for(int n, int workers, const std::function<void(int)>& fn);

}  // namespace foldsense
