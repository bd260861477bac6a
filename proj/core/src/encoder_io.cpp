#include "foldsense/encoders.hpp"
#include "foldsense/errors.hpp"

#include <json.hpp>

#include <bit>
#include <cstring>
#include <fstream>
#include <istream>
#include <ostream>

namespace foldsense {
namespace {

using nlohmann::json;

std::uint64_t to_little(std::uint64_t v) {
  if constexpr (std::endian::native == std::endian::little) {
    return v;
  } else {
    std::uint64_t r = 0;
    for (int i = 0; i < 8; ++i) r |= ((v >> (8 * i)) & 0xffU) << (8 * (7 - i));
    return r;
  }
}

}  // namespace

void write_encoder(std::ostream& out, const Encoder& a) {
  const bool payload = a.kind() == EncoderKind::Explicit;
  json header = {
      {"format", "foldsense-enc"},
      {"version", 1},
      {"kind", to_string(a.kind())},
      {"m", a.rows()},
      {"N", a.cols()},
      {"seed", a.seed()},
      {"col_scale", a.col_scale()},
      {"payload", payload ? "f64le-rowmajor" : "none"},
  };
  out << header.dump() << '\n';
  if (payload) {
    const Eigen::MatrixXd& mat = a.matrix();
    for (int i = 0; i < a.rows(); ++i) {
      for (int j = 0; j < a.cols(); ++j) {
        const std::uint64_t bits = to_little(std::bit_cast<std::uint64_t>(mat(i, j)));
        char buf[8];
        std::memcpy(buf, &bits, 8);
        out.write(buf, 8);
      }
    }
  }
  if (!out) throw Error("write_encoder: stream write failed");
}

Encoder read_encoder(std::istream& in) {
  std::string line;
  if (!std::getline(in, line)) throw ConfigError("read_encoder: missing header line");
  json header;
  try {
    header = json::parse(line);
  } catch (const json::exception& e) {
    throw ConfigError(std::string("read_encoder: bad header: ") + e.what());
  }
  if (header.value("format", "") != "foldsense-enc") {
    throw ConfigError("read_encoder: not a foldsense .enc stream");
  }
  const EncoderKind kind = encoder_kind_from_string(header.at("kind").get<std::string>());
  const int m = header.at("m").get<int>();
  const int N = header.at("N").get<int>();
  const auto seed = header.at("seed").get<std::uint64_t>();
  const double col_scale = header.at("col_scale").get<double>();

  switch (kind) {
    case EncoderKind::Gaussian: return gaussian_encoder(m, N, seed);
    case EncoderKind::SubsampledCosine: return subsampled_cosine_encoder(m, N, seed);
    case EncoderKind::Explicit: break;
  }
  if (m < 1 || N < 1) throw DimensionError("read_encoder: bad dimensions");
  Eigen::MatrixXd mat(m, N);
  for (int i = 0; i < m; ++i) {
    for (int j = 0; j < N; ++j) {
      char buf[8];
      if (!in.read(buf, 8)) throw ConfigError("read_encoder: truncated payload");
      std::uint64_t bits = 0;
      std::memcpy(&bits, buf, 8);
      mat(i, j) = std::bit_cast<double>(to_little(bits));
    }
  }
  return Encoder(std::move(mat), EncoderKind::Explicit, seed, col_scale);
}

void save_encoder(const std::string& path, const Encoder& a) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("save_encoder: cannot open " + path);
  write_encoder(out, a);
}

Encoder load_encoder(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("load_encoder: cannot open " + path);
  return read_encoder(in);
}

}  // namespace foldsense
