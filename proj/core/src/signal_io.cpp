#include "foldsense/errors.hpp"
#include "foldsense/signals.hpp"

#include "format.hpp"

#include <json.hpp>

namespace foldsense {

using nlohmann::json;

std::string signal_to_json(const NoisySignal& s) {
  json j;
  j["x"] = std::vector<double>(s.x.data(), s.x.data() + s.x.size());
  j["params"] = {{"eta", s.params.eta}, {"k", s.params.k}, {"r", s.params.r}, {"p", s.params.p}};
  j["support"] = s.relevant_support;
  j["noise_norm"] = s.noise_norm;
  return j.dump();
}

NoisySignal signal_from_json(const std::string& text) {
  try {
    const json j = json::parse(text);
    NoisySignal s;
    const auto xs = j.at("x").get<std::vector<double>>();
    s.x = Eigen::Map<const Eigen::VectorXd>(xs.data(), static_cast<Eigen::Index>(xs.size()));
    const json& p = j.at("params");
    s.params.eta = p.at("eta").get<double>();
    s.params.k = p.at("k").get<int>();
    s.params.r = p.at("r").get<double>();
    s.params.p = p.at("p").get<double>();
    s.relevant_support = j.at("support").get<std::vector<int>>();
    s.noise_norm = j.value("noise_norm", 0.0);
    return s;
  } catch (const json::exception& e) {
    throw ConfigError(std::string("signal_from_json: ") + e.what());
  }
}

const std::string& metrics_csv_header() {
  static const std::string header =
      "symdiff_count,exact_by_r,exact_by_topk,separation_gap,err_full,"
      "err_restricted_truth,err_restricted_decoded,residual_noise";
  return header;
}

std::string metrics_csv_fields(const SupportMetrics& m) {
  using detail::fmt_g;
  return std::to_string(m.symdiff_count) + ',' + (m.exact_by_r ? "1" : "0") + ',' +
         (m.exact_by_topk ? "1" : "0") + ',' + fmt_g(m.separation_gap) + ',' +
         fmt_g(m.err_full) + ',' + fmt_g(m.err_restricted_truth) + ',' +
         fmt_g(m.err_restricted_decoded) + ',' + fmt_g(m.residual_noise);
}

}  // namespace foldsense
