#pragma once

#include <cmath>
#include <filesystem>
#include <string>

#include "nldof/numerics.hpp"

namespace nldof {

/// Antenna counts, block length T and correlation rank Q.
struct ChannelDims {
  int n_t = 1;
  int n_r = 1;
  int t = 2;
  int q = 1;

  /// Throws InvalidInput unless every count is >= 1 and Q < T.
  void validate() const;

  bool operator==(const ChannelDims&) const = default;
};

/// Q x T matrix A with K_H = A^H A, validated to have rank Q.
class CorrelationBasis {
 public:
  const ComplexMatrix& a() const { return a_; }
  int q() const { return static_cast<int>(a_.rows()); }
  int t() const { return static_cast<int>(a_.cols()); }

  /// K_H = A^H A (T x T).
  ComplexMatrix covariance() const { return a_.adjoint() * a_; }

 private:
  friend CorrelationBasis validate_correlation_basis(const ComplexMatrix& a, const ChannelDims& dims);
  explicit CorrelationBasis(ComplexMatrix a) : a_(std::move(a)) {}

  ComplexMatrix a_;
};

/// Checks shape Q x T against dims and rank(A) = Q.
/// Throws InvalidInput on shape mismatch, DegenerateBasis on rank deficiency.
CorrelationBasis validate_correlation_basis(const ComplexMatrix& a, const ChannelDims& dims);

/// First Q rows of the T-point DFT matrix, scaled by 1/sqrt(Q) so K_H has unit diagonal.
ComplexMatrix fourier_rows(int q, int t);
CorrelationBasis fourier_basis(const ChannelDims& dims);

/// Reads {"q": int, "t": int, "entries": [[re, im], ...]} with entries in row-major order.
/// Throws InvalidInput if the file is missing, malformed, or the entry count is not q * t.
ComplexMatrix read_basis_file(const std::filesystem::path& path);
void write_basis_file(const std::filesystem::path& path, const ComplexMatrix& a);

/// Latent Gaussians s and fading trajectories h for every antenna pair.
///
/// Pair (m, n) occupies row m * n_r + n of both matrices, so h = s * A row by row.
class FadingState {
 public:
  FadingState(ComplexMatrix s, ComplexMatrix h, int n_t, int n_r);

  int n_t() const { return n_t_; }
  int n_r() const { return n_r_; }
  Index q() const { return s_.cols(); }
  Index t() const { return h_.cols(); }

  const ComplexMatrix& s() const { return s_; }
  const ComplexMatrix& h() const { return h_; }

  Complex s(int m, int n, int q) const { return s_(pair_row(m, n), q); }
  Complex h(int m, int n, int t) const { return h_(pair_row(m, n), t); }

  /// n_r x n_t matrix H(t) with H(t)[n, m] = h_{m,n}(t).
  ComplexMatrix h_at(int t) const;

 private:
  Index pair_row(int m, int n) const { return static_cast<Index>(m) * n_r_ + n; }

  ComplexMatrix s_;
  ComplexMatrix h_;
  int n_t_;
  int n_r_;
};

/// Draws s ~ CN(0, 1) i.i.d. and forms h_{m,n}(t) = sum_q A[q, t] s_{m,n}[q].
FadingState sample_fading(const CorrelationBasis& basis, int n_t, int n_r, Rng& rng);

/// Noiseless Y (n_r x T): column t is H(t) x(t). `x` is the transmitted n_t x T signal.
ComplexMatrix apply_channel(const ComplexMatrix& x, const FadingState& fading);

struct NoisyBlock {
  ComplexMatrix y_noisy;
  double snr = 0.0;
};

/// y + w with w i.i.d. CN(0, 1/snr). Throws InvalidInput if snr <= 0.
NoisyBlock add_awgn(const ComplexMatrix& y, double snr, Rng& rng);

inline double db_to_linear(double db) { return std::pow(10.0, db / 10.0); }

}  // namespace nldof
