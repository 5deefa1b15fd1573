#include "nldof/signal.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "nldof/errors.hpp"

namespace nldof {

namespace {

int gray_to_binary(int g) {
  int k = g;
  for (int shift = g >> 1; shift != 0; shift >>= 1) k ^= shift;
  return k;
}

int binary_to_gray(int k) { return k ^ (k >> 1); }

double level_value(int k, int levels, double d) { return (k - 0.5 * (levels - 1)) * d; }

int nearest_level(double v, int levels, double d) {
  const double x = v / d + 0.5 * (levels - 1);
  const double k = std::ceil(x - 0.5);
  return static_cast<int>(std::clamp(k, 0.0, static_cast<double>(levels - 1)));
}

bool in_training_window(int col, int m, int q) { return col >= m * q && col < m * (q + 1); }

void check_layout_dims(int m, int q, int t) {
  if (m < 1 || q < 1 || t < 1) throw InvalidInput("transmit block: m, Q and T must be >= 1");
  if (m * (q + 1) > t) throw InvalidInput("transmit block: need M(Q+1) <= T");
}

}  // namespace

void QamScheme::validate() const {
  if (bits_per_dim < 2 || bits_per_dim % 2 != 0 || bits_per_dim > 30) {
    throw InvalidInput("QAM: bits_per_dim must be an even count in [2, 30]");
  }
  if (!(d_min_x > 0.0) || !std::isfinite(d_min_x)) throw InvalidInput("QAM: d_min_x must be positive");
  if (!(delta > 0.0 && delta < 0.5)) throw InvalidInput("QAM: delta must lie in (0, 1/2)");
  if (!(sigma0 > 0.0) || !std::isfinite(sigma0)) throw InvalidInput("QAM: sigma0 must be positive");
}

double asymptotic_dmin(double snr, double sigma0, double delta) {
  if (!(snr > 0.0) || !(sigma0 > 0.0)) throw InvalidInput("asymptotic_dmin: snr and sigma0 must be positive");
  return 1.0 / (sigma0 * std::pow(snr, 0.5 - delta));
}

double codewords_per_dim(double d_min_x) {
  const double per_axis = 2.0 / d_min_x;
  return per_axis * per_axis;
}

ComplexVector encode_qam(std::span<const std::uint8_t> bits, const QamScheme& scheme, Index n_dims) {
  scheme.validate();
  const int half = scheme.bits_per_dim / 2;
  if (n_dims < 0 || bits.size() != static_cast<std::size_t>(n_dims) * scheme.bits_per_dim) {
    throw InvalidInput("encode_qam: expected " + std::to_string(n_dims * scheme.bits_per_dim) + " bits, got " +
                       std::to_string(bits.size()));
  }
  const int levels = scheme.levels_per_axis();
  ComplexVector out(n_dims);
  std::size_t pos = 0;
  auto read_axis = [&] {
    int g = 0;
    for (int i = 0; i < half; ++i) {
      const std::uint8_t b = bits[pos++];
      if (b > 1) throw InvalidInput("encode_qam: bits must be 0 or 1");
      g = (g << 1) | b;
    }
    return level_value(gray_to_binary(g), levels, scheme.d_min_x);
  };
  for (Index i = 0; i < n_dims; ++i) {
    const double re = read_axis();
    const double im = read_axis();
    out(i) = Complex(re, im);
  }
  return out;
}

std::vector<std::pair<int, int>> nearest_levels(const ComplexVector& coords, const QamScheme& scheme) {
  scheme.validate();
  if (!coords.allFinite()) throw InvalidInput("decode_qam: coordinates must be finite");
  const int levels = scheme.levels_per_axis();
  std::vector<std::pair<int, int>> out;
  out.reserve(coords.size());
  for (Index i = 0; i < coords.size(); ++i) {
    out.emplace_back(nearest_level(coords(i).real(), levels, scheme.d_min_x),
                     nearest_level(coords(i).imag(), levels, scheme.d_min_x));
  }
  return out;
}

BitString decode_qam(const ComplexVector& coords, const QamScheme& scheme) {
  const int half = scheme.bits_per_dim / 2;
  BitString bits;
  bits.reserve(static_cast<std::size_t>(coords.size()) * scheme.bits_per_dim);
  auto write_axis = [&](int k) {
    const int g = binary_to_gray(k);
    for (int i = half - 1; i >= 0; --i) bits.push_back(static_cast<std::uint8_t>((g >> i) & 1));
  };
  for (const auto& [re, im] : nearest_levels(coords, scheme)) {
    write_axis(re);
    write_axis(im);
  }
  return bits;
}

double mean_symbol_power(const ComplexMatrix& x) {
  if (x.cols() == 0) return 0.0;
  return x.squaredNorm() / static_cast<double>(x.cols());
}

ComplexMatrix layout_core(const ComplexVector& coords, int m, int q, int t) {
  check_layout_dims(m, q, t);
  if (coords.size() != coordinate_count(m, t)) {
    throw InvalidInput("transmit block: expected " + std::to_string(coordinate_count(m, t)) + " coordinates, got " +
                       std::to_string(coords.size()));
  }
  ComplexMatrix core = ComplexMatrix::Zero(m, t);
  Index k = 0;
  for (int row = 0; row < m; ++row) {
    for (int col = 0; col < t; ++col) {
      if (in_training_window(col, m, q)) {
        core(row, col) = (col - m * q == row) ? Complex(1.0, 0.0) : Complex(0.0, 0.0);
      } else {
        core(row, col) = coords(k++);
      }
    }
  }
  return core;
}

TransmitBlock build_transmit_block(const MessageCoordinates& coords, const ChannelDims& dims, int m) {
  dims.validate();
  if (m > dims.n_t) throw InvalidInput("transmit block: M exceeds n_t");
  if (coords.m != m) throw InvalidInput("transmit block: coordinates were laid out for a different M");
  require_finite(coords.coords, "transmit block coordinates");
  ComplexMatrix x = ComplexMatrix::Zero(dims.n_t, dims.t);
  x.topRows(m) = layout_core(coords.coords, m, dims.q, dims.t);
  const double scale = 1.0 / std::sqrt(mean_symbol_power(x));
  return TransmitBlock(std::move(x), m, dims.q, scale);
}

MessageCoordinates extract_coordinates(const ComplexMatrix& x_tilde, int q) {
  const int m = static_cast<int>(x_tilde.rows());
  const int t = static_cast<int>(x_tilde.cols());
  check_layout_dims(m, q, t);
  const ComplexMatrix window = x_tilde.middleCols(static_cast<Index>(m) * q, m);
  const double deviation = (window - ComplexMatrix::Identity(m, m)).cwiseAbs().maxCoeff();
  if (!(deviation <= 1e-9)) {
    throw LayoutError("training window deviates from I_M by " + std::to_string(deviation));
  }
  MessageCoordinates out{m, ComplexVector(coordinate_count(m, t))};
  Index k = 0;
  for (int row = 0; row < m; ++row) {
    for (int col = 0; col < t; ++col) {
      if (!in_training_window(col, m, q)) out.coords(k++) = x_tilde(row, col);
    }
  }
  return out;
}

MessageCoordinates extract_coordinates(const TransmitBlock& block) {
  return extract_coordinates(ComplexMatrix(block.x_tilde()), block.q());
}

}  // namespace nldof
