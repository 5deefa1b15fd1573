#pragma once

#include <cmath>

#include "nldof/channel.hpp"
#include "nldof/numerics.hpp"
#include "nldof/signal.hpp"

namespace nldof::testing {

inline ChannelDims make_dims(int n_t, int n_r, int q, int t) { return ChannelDims{n_t, n_r, t, q}; }

inline ComplexVector box_coords(Rng& rng, Index n) {
  ComplexVector c(n);
  for (Index i = 0; i < n; ++i) c(i) = Complex(2.0 * rng.uniform() - 1.0, 2.0 * rng.uniform() - 1.0);
  return c;
}

inline TransmitBlock random_block(Rng& rng, const ChannelDims& dims, int m) {
  return build_transmit_block(MessageCoordinates{m, box_coords(rng, coordinate_count(m, dims.t))}, dims, m);
}

/// Fourier rows with column `dup_into` overwritten by column `dup_from` (0-based).
inline ComplexMatrix fourier_with_duplicate(int q, int t, int dup_from, int dup_into) {
  ComplexMatrix a = fourier_rows(q, t);
  a.col(dup_into) = a.col(dup_from);
  return a;
}

inline double rel_frobenius(const ComplexMatrix& estimate, const ComplexMatrix& truth) {
  return (estimate - truth).norm() / truth.norm();
}

}  // namespace nldof::testing
