#include "foldsense/decode_result.hpp"

#include "format.hpp"

#include <json.hpp>

namespace foldsense {

std::string decode_result_to_json(const DecodeResult& r, bool include_history) {
  nlohmann::json j = {
      {"method", r.method_tag},
      {"xstar", std::vector<double>(r.xstar.data(), r.xstar.data() + r.xstar.size())},
      {"iterations", r.iterations},
      {"residual", r.residual},
      {"objective", r.objective},
      {"wall_time_ms", r.wall_time_ms},
      {"converged", r.converged},
  };
  if (include_history) j["history"] = r.history;
  return j.dump();
}

const std::string& decode_result_csv_header() {
  static const std::string header = "method,iterations,residual,objective,converged";
  return header;
}

std::string decode_result_csv_fields(const DecodeResult& r) {
  return r.method_tag + ',' + std::to_string(r.iterations) + ',' + detail::fmt_g(r.residual) +
         ',' + detail::fmt_g(r.objective) + ',' + (r.converged ? "1" : "0");
}

}  // namespace foldsense
