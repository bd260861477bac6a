#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <iosfwd>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace foldsense {

enum class EncoderKind { Gaussian, SubsampledCosine, Explicit };

std::string to_string(EncoderKind kind);
EncoderKind encoder_kind_from_string(std::string_view name);

/// Immutable m x N measurement matrix plus where it came from.
/// Copies share the lazily computed operator norm.
class Encoder {
 public:
  explicit Encoder(Eigen::MatrixXd entries, EncoderKind kind = EncoderKind::Explicit,
                   std::uint64_t seed = 0, double col_scale = 1.0,
                   std::vector<int> row_indices = {});

  int rows() const noexcept { return static_cast<int>(entries_.rows()); }
  int cols() const noexcept { return static_cast<int>(entries_.cols()); }
  const Eigen::MatrixXd& matrix() const noexcept { return entries_; }
  EncoderKind kind() const noexcept { return kind_; }
  std::uint64_t seed() const noexcept { return seed_; }
  double col_scale() const noexcept { return col_scale_; }
  /// Selected cosine rows (SubsampledCosine only).
  const std::vector<int>& row_indices() const noexcept { return row_indices_; }

  std::optional<double> cached_op_norm() const;

  /// c * A as an Explicit encoder with its own norm cache.
  Encoder scaled(double c) const;

 private:
  friend double operator_norm(const Encoder& a);
  struct NormCache;

  Eigen::MatrixXd entries_;
  EncoderKind kind_;
  std::uint64_t seed_;
  double col_scale_;
  std::vector<int> row_indices_;
  std::shared_ptr<NormCache> norm_;
};

/// Entries i.i.d. N(0, 1/m).
Encoder gaussian_encoder(int m, int N, std::uint64_t seed);

/// m distinct rows of the orthonormal N-point DCT-II, scaled by sqrt(N/m).
Encoder subsampled_cosine_encoder(int m, int N, std::uint64_t seed);

/// Orthonormal DCT-II matrix, row k = frequency k.
Eigen::MatrixXd cosine_transform(int N);

/// Largest singular value by power iteration on A'A; cached on the encoder.
double operator_norm(const Encoder& a);

/// C(n, k), saturating at UINT64_MAX.
std::uint64_t binomial(int n, int k) noexcept;

inline constexpr std::uint64_t kDefaultEnumerationBudget = 1'000'000;

/// max over K-column supports T of max(sigma_max(A_T) - 1, 1 - sigma_min(A_T)).
/// A value >= 1 means no delta in [0,1) satisfies the inequality.
double rip_constant(const Encoder& a, int K,
                    std::uint64_t budget = kDefaultEnumerationBudget);

/// Smallest gamma with ||z_L||_1 <= gamma ||z_Lc||_1 for all z in ker A, |L| <= k.
/// Exact: one LP per support and sign pattern. +inf if some kernel vector
/// lives entirely on k indices; 0 for a trivial kernel.
double nsp_constant(const Encoder& a, int k,
                    std::uint64_t budget = kDefaultEnumerationBudget);

/// Search estimate of beta(A) = min_{|z|=1} max_i |A_i' z| (an upper bound on
/// the true value). Running minimum over `samples` random starts, each refined
/// by `descent_steps` LP majorization steps.
double beta_lower_bound(const Encoder& a, int samples, int descent_steps,
                        std::uint64_t seed = 0x5eedULL);

enum class CertMethod { Exact, Sampled };

std::string to_string(CertMethod method);

struct MatrixCertificate {
  int order = 0;                       // K for the RIP constant
  double rip_delta = 0.0;              // singular-value deviation
  bool rip_violated = false;           // rip_delta >= 1
  CertMethod rip_method = CertMethod::Exact;
  int nsp_order = 0;
  double nsp_gamma = 0.0;
  CertMethod nsp_method = CertMethod::Exact;
  double beta_lower = 0.0;
  CertMethod beta_method = CertMethod::Sampled;
};

struct CertifyOptions {
  int beta_samples = 8;
  int beta_descent_steps = 20;
  std::uint64_t budget = kDefaultEnumerationBudget;
  std::uint64_t seed = 0x5eedULL;
};

/// Exact RIP of order K, exact NSP of order k, sampled beta.
MatrixCertificate certify(const Encoder& a, int K, int k, const CertifyOptions& opts = {});

/// Kernel basis (N x (N - rank)) from a full SVD.
Eigen::MatrixXd kernel_basis(const Eigen::MatrixXd& a, double rel_tol = 1e-10);

// .enc files: one JSON header line, then (Explicit only) m*N little-endian
// doubles in row-major order. Other kinds are regenerated from their seed.
void write_encoder(std::ostream& out, const Encoder& a);
Encoder read_encoder(std::istream& in);
void save_encoder(const std::string& path, const Encoder& a);
Encoder load_encoder(const std::string& path);

}  // namespace foldsense
