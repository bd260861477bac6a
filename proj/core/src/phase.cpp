#include "foldsense/errors.hpp"
#include "foldsense/harness.hpp"
#include "format.hpp"

#include <json.hpp>

#include <chrono>
#include <cmath>
#include <limits>
#include <ostream>

namespace foldsense {

namespace {

struct CellResult {
  std::vector<int> successes;
  std::vector<int> timeouts;
};

}  // namespace

std::vector<PhaseGrid> phase_transition(const TrialConfig& cfg, const std::vector<Method>& methods,
                                        int trials, const PhaseOptions& opts) {
  if (methods.empty()) throw ConfigError("phase_transition: no methods");
  if (trials < 1) throw ConfigError("phase_transition: trials must be >= 1");
  TrialConfig pc = cfg;
  pc.N = cfg.phase_N;
  pc.trials_per_cell = trials;
  const int N = pc.N;
  if (N < 2) throw ConfigError("phase_transition: N must be >= 2");
  if (!(pc.eta < pc.r)) throw ConfigError("phase_transition: need eta < r");

  std::vector<std::pair<int, int>> cells;
  for (int m = 1; m <= N; ++m) {
    for (int k = 1; k <= m; ++k) cells.emplace_back(m, k);
  }
  const std::size_t nm = methods.size();
  std::vector<CellResult> out(cells.size());
  parallel_for(static_cast<int>(cells.size()), cfg.workers, [&](int i) {
    const auto [m, k] = cells[static_cast<std::size_t>(i)];
    CellResult& cr = out[static_cast<std::size_t>(i)];
    cr.successes.assign(nm, 0);
    cr.timeouts.assign(nm, 0);
    const auto start = std::chrono::steady_clock::now();
    for (int t = 0; t < trials; ++t) {
      const double elapsed =
          std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
      if (elapsed > cfg.timeout_s) {
        for (auto& c : cr.timeouts) c += trials - t;
        break;
      }
      const auto rows = run_trial(pc, m, k, t, methods);
      for (std::size_t j = 0; j < nm; ++j) {
        if (!rows[j].failed && rows[j].metrics.exact_by_r) ++cr.successes[j];
      }
    }
    if (opts.progress) opts.progress(m, k);
  });

  std::vector<PhaseGrid> grids;
  for (std::size_t j = 0; j < nm; ++j) {
    PhaseGrid g;
    g.N = N;
    g.trials = trials;
    g.method = methods[j];
    g.success = Eigen::MatrixXd::Constant(N + 1, N + 1, std::numeric_limits<double>::quiet_NaN());
    g.timeouts = Eigen::MatrixXi::Zero(N + 1, N + 1);
    for (std::size_t i = 0; i < cells.size(); ++i) {
      const auto [m, k] = cells[i];
      g.success(m, k) = static_cast<double>(out[i].successes[j]) / trials;
      g.timeouts(m, k) = out[i].timeouts[j];
    }
    for (double level : opts.levels) g.contours[level] = extract_contour(g, level);
    grids.push_back(std::move(g));
  }
  return grids;
}

std::vector<ContourPoint> extract_contour(const PhaseGrid& g, double level) {
  std::vector<ContourPoint> pts;
  for (int m = 1; m <= g.N; ++m) {
    const int top = m;
    double height = top;
    for (int k = 1; k <= top; ++k) {
      const double s = g.success(m, k);
      if (s >= level) continue;
      if (k == 1) {
        height = 0.0;
      } else {
        const double prev = g.success(m, k - 1);
        height = (k - 1) + (prev - level) / (prev - s);
      }
      break;
    }
    pts.push_back({m, height});
  }
  return pts;
}

double contour_dominance(const PhaseGrid& a, const PhaseGrid& b, double level) {
  if (a.N != b.N) throw DimensionError("contour_dominance: grids differ in N");
  const auto ca = extract_contour(a, level);
  const auto cb = extract_contour(b, level);
  if (ca.empty()) return 0.0;
  int wins = 0;
  for (std::size_t i = 0; i < ca.size(); ++i) {
    if (ca[i].k >= cb[i].k - 1e-12) ++wins;
  }
  return static_cast<double>(wins) / static_cast<double>(ca.size());
}

double timeout_fraction(const PhaseGrid& g) {
  long long total = 0;
  long long timed = 0;
  for (int m = 1; m <= g.N; ++m) {
    for (int k = 1; k <= m; ++k) {
      total += g.trials;
      timed += g.timeouts(m, k);
    }
  }
  return total == 0 ? 0.0 : static_cast<double>(timed) / static_cast<double>(total);
}

void write_phase_csv(std::ostream& out, const PhaseGrid& g) {
  out << "m,k,rate,timeouts\n";
  for (int m = 1; m <= g.N; ++m) {
    for (int k = 1; k <= m; ++k) {
      out << m << ',' << k << ',' << detail::fmt_g(g.success(m, k)) << ',' << g.timeouts(m, k)
          << '\n';
    }
  }
}

std::string contours_json(const PhaseGrid& g) {
  nlohmann::json levels = nlohmann::json::object();
  for (const auto& [level, pts] : g.contours) {
    nlohmann::json line = nlohmann::json::array();
    for (const auto& p : pts) line.push_back({p.m, p.k});
    levels[detail::fmt_g(level, 6)] = line;
  }
  nlohmann::json j = {{"method", to_string(g.method)},
                      {"N", g.N},
                      {"trials", g.trials},
                      {"timeout_fraction", timeout_fraction(g)},
                      {"levels", levels}};
  return j.dump(2);
}

}  // namespace foldsense
