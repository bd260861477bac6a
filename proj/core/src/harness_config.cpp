#include "foldsense/errors.hpp"
#include "foldsense/harness.hpp"

#include <json.hpp>

#include <algorithm>
#include <fstream>
#include <sstream>

namespace foldsense {

using nlohmann::json;

void validate(const TrialConfig& c) {
  auto bad = [](const std::string& what) { throw ConfigError("config: " + what); };
  if (c.N < 2) bad("N must be >= 2");
  if (c.m < 1 || c.m > c.N) bad("m must lie in [1, N]");
  if (c.k_list.empty()) bad("k_list must be nonempty");
  for (int k : c.k_list) {
    if (k < 1 || k >= c.m) bad("every k must satisfy 1 <= k < m");
  }
  if (!(c.r > 0.0)) bad("r must be > 0");
  if (!(c.eta >= 0.0) || !(c.eta < c.r)) bad("need 0 <= eta < r");
  if (!(c.p >= 1.0 && c.p <= 2.0)) bad("p must lie in [1, 2]");
  if (c.ensemble == EncoderKind::Explicit) bad("ensemble must be gaussian or subsampled_cosine");
  if (c.trials_per_cell < 1) bad("trials must be >= 1");
  if (c.methods.empty()) bad("methods must be nonempty");
  if (c.workers < 1) bad("workers must be >= 1");
  if (!(c.timeout_s > 0.0)) bad("timeout_s must be > 0");
  if (!(c.amp_lo_offset > 0.0)) bad("amp_lo_offset must be > 0");
  if (!(c.amp_hi_factor > 0.0)) bad("amp_hi_factor must be > 0");
  if (!(c.ineq_delta_fraction >= 0.0) || !(c.irw_delta_fraction >= 0.0)) {
    bad("delta fractions must be >= 0");
  }
  if (c.irw_iters < 1) bad("irw iters must be >= 1");
  if (!(c.slp_r_ratio > 0.0) || !(c.slp_eps_ratio > 0.0) || !(c.slp_eps_ratio < c.slp_r_ratio)) {
    bad("slp needs 0 < eps_ratio < r_ratio");
  }
  if (!(c.iht_delta_2k >= 0.0 && c.iht_delta_2k < 1.0)) bad("iht delta_2k must lie in [0, 1)");
  if (c.phase_N < 2) bad("phase N must be >= 2");
  if (c.phase_trials < 1) bad("phase trials must be >= 1");
  if (c.phase_methods.empty()) bad("phase methods must be nonempty");
}

namespace {

// Minimal TOML: [section] headers and `key = value` lines whose values are
// JSON literals (numbers, "strings", true/false, one-line arrays).
json parse_toml(const std::string& text) {
  json root = json::object();
  json* cur = &root;
  std::istringstream in(text);
  std::string line;
  int lineno = 0;
  auto trim = [](std::string s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) return std::string();
    const auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
  };
  while (std::getline(in, line)) {
    ++lineno;
    bool quoted = false;
    for (std::size_t i = 0; i < line.size(); ++i) {
      if (line[i] == '"') quoted = !quoted;
      if (line[i] == '#' && !quoted) {
        line.resize(i);
        break;
      }
    }
    line = trim(line);
    if (line.empty()) continue;
    const std::string where = "config line " + std::to_string(lineno) + ": ";
    if (line.front() == '[') {
      if (line.back() != ']') throw ConfigError(where + "unterminated section header");
      const std::string name = trim(line.substr(1, line.size() - 2));
      if (name.empty()) throw ConfigError(where + "empty section name");
      if (root.contains(name)) throw ConfigError(where + "duplicate section '" + name + "'");
      root[name] = json::object();
      cur = &root[name];
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string::npos) throw ConfigError(where + "expected key = value");
    const std::string key = trim(line.substr(0, eq));
    const std::string val = trim(line.substr(eq + 1));
    if (key.empty()) throw ConfigError(where + "empty key");
    if (cur->contains(key)) throw ConfigError(where + "duplicate key '" + key + "'");
    try {
      (*cur)[key] = json::parse(val);
    } catch (const json::exception&) {
      throw ConfigError(where + "cannot parse value of '" + key + "'");
    }
  }
  return root;
}

class Reader {
 public:
  Reader(const json& obj, std::string scope) : obj_(obj), scope_(std::move(scope)) {
    if (!obj_.is_object()) throw ConfigError("config: " + scope_ + " must be a table");
    for (const auto& [key, _] : obj_.items()) pending_.push_back(key);
  }

  template <class T>
  void get(const char* key, T& out) {
    if (!take(key)) return;
    try {
      out = obj_.at(key).get<T>();
    } catch (const json::exception&) {
      throw ConfigError("config: bad type for " + name(key));
    }
  }

  template <class T>
  void get(const char* key, std::optional<T>& out) {
    if (!take(key)) return;
    if (obj_.at(key).is_null()) {
      out.reset();
      return;
    }
    T v{};
    try {
      v = obj_.at(key).get<T>();
    } catch (const json::exception&) {
      throw ConfigError("config: bad type for " + name(key));
    }
    out = v;
  }

  void methods(const char* key, std::vector<Method>& out) {
    std::vector<std::string> names;
    if (!take(key)) return;
    try {
      names = obj_.at(key).get<std::vector<std::string>>();
    } catch (const json::exception&) {
      throw ConfigError("config: " + name(key) + " must be a list of method names");
    }
    out.clear();
    for (const auto& n : names) out.push_back(method_from_string(n));
  }

  bool has_table(const char* key) const { return obj_.contains(key); }

  Reader table(const char* key) {
    take(key);
    return Reader(obj_.at(key), scope_.empty() ? key : scope_ + "." + key);
  }

  void finish() const {
    if (!pending_.empty()) throw ConfigError("config: unknown key " + name(pending_.front().c_str()));
  }

 private:
  bool take(const char* key) {
    const auto it = std::find(pending_.begin(), pending_.end(), key);
    if (it == pending_.end()) return false;
    pending_.erase(it);
    return true;
  }
  std::string name(const char* key) const { return scope_.empty() ? key : scope_ + "." + key; }

  const json& obj_;
  std::string scope_;
  std::vector<std::string> pending_;
};

void apply_json(const json& j, TrialConfig& c) {
  Reader top(j, "");
  top.get("N", c.N);
  top.get("m", c.m);
  top.get("k_list", c.k_list);
  top.get("r", c.r);
  top.get("eta", c.eta);
  top.get("p", c.p);
  std::string ensemble;
  top.get("ensemble", ensemble);
  if (!ensemble.empty()) {
    try {
      c.ensemble = encoder_kind_from_string(ensemble);
    } catch (const Error& e) {
      throw ConfigError(std::string("config: ") + e.what());
    }
  }
  top.get("trials", c.trials_per_cell);
  top.methods("methods", c.methods);
  top.get("seed", c.seed_base);
  top.get("workers", c.workers);
  top.get("timeout_s", c.timeout_s);
  top.get("amp_lo_offset", c.amp_lo_offset);
  top.get("amp_hi_factor", c.amp_hi_factor);

  if (top.has_table("l1")) {
    Reader t = top.table("l1");
    t.get("max_outer", c.l1.max_outer);
    t.get("max_inner", c.l1.max_inner);
    t.get("primal_tol", c.l1.primal_tol);
    t.get("dual_tol", c.l1.dual_tol);
    t.get("penalty", c.l1.penalty);
    t.get("polish_every", c.l1.polish_every);
    t.finish();
  }
  if (top.has_table("l1_ineq")) {
    Reader t = top.table("l1_ineq");
    t.get("delta", c.ineq_delta);
    t.get("delta_fraction", c.ineq_delta_fraction);
    t.finish();
  }
  if (top.has_table("irw")) {
    Reader t = top.table("irw");
    t.get("a", c.irw_a);
    t.get("iters", c.irw_iters);
    t.get("delta", c.irw_delta);
    t.get("delta_fraction", c.irw_delta_fraction);
    t.finish();
  }
  if (top.has_table("slp")) {
    Reader t = top.table("slp");
    t.get("r_ratio", c.slp_r_ratio);
    t.get("eps_ratio", c.slp_eps_ratio);
    t.get("lambda", c.slp.lambda);
    t.get("omega", c.slp.omega);
    t.get("alpha", c.slp.alpha);
    t.get("tol_outer", c.slp.tol_outer);
    t.get("tol_inner", c.slp.tol_inner);
    t.get("mu", c.slp.mu);
    t.get("max_outer", c.slp.max_outer);
    t.get("max_bregman", c.slp.max_bregman);
    t.get("max_inner", c.slp.max_inner);
    t.finish();
  }
  if (top.has_table("iht")) {
    Reader t = top.table("iht");
    t.get("max_iters", c.iht.iht.max_iters);
    t.get("fp_tol", c.iht.iht.fp_tol);
    t.get("tau", c.iht.tau_override);
    t.get("fallback_sqrt_tau_ratio", c.iht.fallback_sqrt_tau_ratio);
    t.get("beta_samples", c.iht.beta_samples);
    t.get("beta_descent_steps", c.iht.beta_descent_steps);
    t.get("beta_seed", c.iht.beta_seed);
    t.get("qcqp_gap_tol", c.iht.qcqp_gap_tol);
    t.get("delta_2k", c.iht_delta_2k);
    t.get("beta", c.iht_beta);
    t.finish();
  }
  if (top.has_table("phase")) {
    Reader t = top.table("phase");
    t.get("N", c.phase_N);
    t.get("trials", c.phase_trials);
    t.methods("methods", c.phase_methods);
    t.finish();
  }
  top.finish();
}

json methods_json(const std::vector<Method>& ms) {
  json a = json::array();
  for (Method m : ms) a.push_back(to_string(m));
  return a;
}

template <class T>
json opt_json(const std::optional<T>& v) {
  return v ? json(*v) : json(nullptr);
}

}  // namespace

TrialConfig config_from_text(const std::string& text, TrialConfig base) {
  const auto first = text.find_first_not_of(" \t\r\n");
  json j;
  if (first != std::string::npos && text[first] == '{') {
    try {
      j = json::parse(text);
    } catch (const json::exception& e) {
      throw ConfigError(std::string("config: invalid JSON: ") + e.what());
    }
  } else {
    j = parse_toml(text);
  }
  apply_json(j, base);
  validate(base);
  return base;
}

TrialConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("config: cannot open " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return config_from_text(ss.str());
}

std::string config_to_json(const TrialConfig& c) {
  json j = {
      {"N", c.N},
      {"m", c.m},
      {"k_list", c.k_list},
      {"r", c.r},
      {"eta", c.eta},
      {"p", c.p},
      {"ensemble", to_string(c.ensemble)},
      {"trials", c.trials_per_cell},
      {"methods", methods_json(c.methods)},
      {"seed", c.seed_base},
      {"workers", c.workers},
      {"timeout_s", c.timeout_s},
      {"amp_lo_offset", c.amp_lo_offset},
      {"amp_hi_factor", c.amp_hi_factor},
      {"l1",
       {{"max_outer", c.l1.max_outer},
        {"max_inner", c.l1.max_inner},
        {"primal_tol", c.l1.primal_tol},
        {"dual_tol", c.l1.dual_tol},
        {"penalty", c.l1.penalty},
        {"polish_every", c.l1.polish_every}}},
      {"l1_ineq", {{"delta", opt_json(c.ineq_delta)}, {"delta_fraction", c.ineq_delta_fraction}}},
      {"irw",
       {{"a", c.irw_a},
        {"iters", c.irw_iters},
        {"delta", opt_json(c.irw_delta)},
        {"delta_fraction", c.irw_delta_fraction}}},
      {"slp",
       {{"r_ratio", c.slp_r_ratio},
        {"eps_ratio", c.slp_eps_ratio},
        {"lambda", c.slp.lambda},
        {"omega", c.slp.omega},
        {"alpha", c.slp.alpha},
        {"tol_outer", c.slp.tol_outer},
        {"tol_inner", c.slp.tol_inner},
        {"mu", c.slp.mu},
        {"max_outer", c.slp.max_outer},
        {"max_bregman", c.slp.max_bregman},
        {"max_inner", c.slp.max_inner}}},
      {"iht",
       {{"max_iters", c.iht.iht.max_iters},
        {"fp_tol", c.iht.iht.fp_tol},
        {"tau", opt_json(c.iht.tau_override)},
        {"fallback_sqrt_tau_ratio", c.iht.fallback_sqrt_tau_ratio},
        {"beta_samples", c.iht.beta_samples},
        {"beta_descent_steps", c.iht.beta_descent_steps},
        {"beta_seed", c.iht.beta_seed},
        {"qcqp_gap_tol", c.iht.qcqp_gap_tol},
        {"delta_2k", c.iht_delta_2k},
        {"beta", opt_json(c.iht_beta)}}},
      {"phase",
       {{"N", c.phase_N}, {"trials", c.phase_trials}, {"methods", methods_json(c.phase_methods)}}},
  };
  return j.dump(2);
}

}  // namespace foldsense
