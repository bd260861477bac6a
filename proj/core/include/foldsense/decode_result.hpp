#pragma once

#include <Eigen/Dense>

#include <chrono>
#include <string>
#include <vector>

namespace foldsense {

/// Output of every decoder in the library.
struct DecodeResult {
  Eigen::VectorXd xstar;
  int iterations = 0;
  double residual = 0.0;  // ||A x* - y||_2 in the caller's scaling
  double objective = 0.0;
  double wall_time_ms = 0.0;
  bool converged = false;
  std::string method_tag;
  std::vector<double> history;  // per-iteration residual trace
};

std::string decode_result_to_json(const DecodeResult& r, bool include_history = false);

/// Fixed CSV header shared by all decoders (no xstar, no history).
const std::string& decode_result_csv_header();
std::string decode_result_csv_fields(const DecodeResult& r);

class Stopwatch {
 public:
  Stopwatch() : start_(std::chrono::steady_clock::now()) {}
  double elapsed_ms() const {
    return std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start_)
        .count();
  }

 private:
  std::chrono::steady_clock::time_point start_;
};

}  // namespace foldsense
