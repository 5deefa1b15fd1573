#pragma once

#include <string>

#include "nldof/channel.hpp"
#include "nldof/mapping.hpp"
#include "nldof/numerics.hpp"
#include "nldof/signal.hpp"

namespace nldof {

enum class RecoveryStatus { ok, subspace_failure, rref_failure, j_singular, a1_degenerate };

const char* to_string(RecoveryStatus status);

struct SubspaceEstimate {
  Subspace subspace;
  /// Discarded over total squared singular-value energy.
  double residual = 0.0;
  /// sigma_L / sigma_1 of the received block; near zero means the block is rank deficient.
  double gap_ratio = 0.0;
};

/// Span of the top target_dim right singular vectors of y_noisy (best rank-L row space).
/// Throws InvalidInput when n_r < target_dim or target_dim exceeds T.
SubspaceEstimate estimate_signal_subspace(const NoisyBlock& y, int target_dim);

struct RecoveryReport {
  RecoveryStatus status = RecoveryStatus::ok;
  /// Recovered M x T core with the training window set to I_M (empty on failure).
  ComplexMatrix x_tilde_hat;
  MessageCoordinates coords_hat;
  double subspace_residual = 0.0;
  /// rref_fit_residual of the recovered core against the estimated canonical subspace.
  double nonlinear_residual = 0.0;
  double det_j_abs = 0.0;
  double det_j_ratio = 0.0;
  std::string detail;

  bool ok() const { return status == RecoveryStatus::ok; }
};

/// Runs subspace estimation, canonicalization, the nonlinear phase and the linear
/// phase in order. Numerical failures come back as a status with NaN in the fields
/// that were never reached; violated recovery conditions (MQ > n_r or M(Q+1) > T)
/// throw InvalidInput before any computation.
RecoveryReport decode_block(const NoisyBlock& y, const CorrelationBasis& basis, int m);

}  // namespace nldof
