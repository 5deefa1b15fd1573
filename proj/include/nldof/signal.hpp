#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "nldof/channel.hpp"
#include "nldof/numerics.hpp"

namespace nldof {

using BitString = std::vector<std::uint8_t>;

/// Free entries of the M-row information core, in the fixed layout order:
/// row by row, columns ascending, skipping the training window.
struct MessageCoordinates {
  int m = 1;
  ComplexVector coords;
};

/// Number of free coordinates M (T - M).
inline Index coordinate_count(int m, int t) { return static_cast<Index>(m) * (t - m); }

/// Square QAM applied independently to every complex coordinate.
///
/// Each real axis carries 2^(bits_per_dim / 2) levels spaced d_min_x apart and
/// centred at the origin; with d_min_x = 2 / levels the grid tiles the unit
/// box [-1, 1]^2 exactly. Levels are Gray coded, the first half of each
/// symbol's bits selecting the real level and the second half the imaginary one.
struct QamScheme {
  int bits_per_dim = 2;
  double d_min_x = 1.0;
  double delta = 0.1;
  double sigma0 = 1.0;

  int levels_per_axis() const { return 1 << (bits_per_dim / 2); }
  void validate() const;
};

/// d_min_x = 1 / (sigma0 * snr^(1/2 - delta)) for a linear snr.
double asymptotic_dmin(double snr, double sigma0, double delta);

/// (2 / d_min_x)^2: codewords per complex dimension that fit the unit box.
double codewords_per_dim(double d_min_x);

ComplexVector encode_qam(std::span<const std::uint8_t> bits, const QamScheme& scheme, Index n_dims);

/// Nearest grid point per axis (ties toward the smaller level index, clamped to the grid).
BitString decode_qam(const ComplexVector& coords, const QamScheme& scheme);

/// Grid level indices of the nearest point, one (real, imag) pair per coordinate.
std::vector<std::pair<int, int>> nearest_levels(const ComplexVector& coords, const QamScheme& scheme);

/// Transmit block X (n_t x T) holding the canonical core X~ in rows 0..M-1.
///
/// The training window X~[:, MQ .. M(Q+1)-1] is exactly I_M and rows M..n_t-1
/// are zero. The radiated signal is power_scale() * x(), scaled so the mean
/// per-symbol-vector power over the block is 1; the decoder only sees the row
/// span, so the scale never needs to be known at the receiver.
class TransmitBlock {
 public:
  const ComplexMatrix& x() const { return x_; }
  auto x_tilde() const { return x_.topRows(m_); }
  int m() const { return m_; }
  int q() const { return q_; }
  double power_scale() const { return power_scale_; }

  ComplexMatrix transmitted() const { return power_scale_ * x_; }

 private:
  friend TransmitBlock build_transmit_block(const MessageCoordinates&, const ChannelDims&, int);
  TransmitBlock(ComplexMatrix x, int m, int q, double scale)
      : x_(std::move(x)), m_(m), q_(q), power_scale_(scale) {}

  ComplexMatrix x_;
  int m_;
  int q_;
  double power_scale_;
};

/// Mean over columns of ||x(t)||^2.
double mean_symbol_power(const ComplexMatrix& x);

TransmitBlock build_transmit_block(const MessageCoordinates& coords, const ChannelDims& dims, int m);

/// Inverse layout of build_transmit_block. Throws LayoutError if the training
/// window deviates from I_M by more than 1e-9.
MessageCoordinates extract_coordinates(const TransmitBlock& block);

/// Same, for a bare M x T core with correlation rank q.
MessageCoordinates extract_coordinates(const ComplexMatrix& x_tilde, int q);

/// Writes the coordinates and the training identity into an M x T core (no power scaling).
ComplexMatrix layout_core(const ComplexVector& coords, int m, int q, int t);

}  // namespace nldof
