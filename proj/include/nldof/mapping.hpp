#pragma once

#include "nldof/channel.hpp"
#include "nldof/numerics.hpp"
#include "nldof/signal.hpp"

namespace nldof {

/// R = [A diag(x_1); ...; A diag(x_M)], an MQ x T matrix whose rows span F_A(X).
struct FaBasis {
  ComplexMatrix r;
  int m = 0;
  int q = 0;
};

struct FaSubspace {
  FaBasis basis;
  Subspace span;
};

/// Stacks A diag(x_m) for every row x_m of the M x T core.
FaBasis stack_fa_rows(const CorrelationBasis& basis, const ComplexMatrix& x_tilde);

/// R and its row span. Throws DegenerateMapping if rank(R) < MQ, InvalidInput if MQ > T.
FaSubspace fa_subspace(const CorrelationBasis& basis, const ComplexMatrix& x_tilde);
FaSubspace fa_subspace(const CorrelationBasis& basis, const TransmitBlock& x);

/// |det J| <= kSingularJTol * prod(row norms of J) counts as singular.
inline constexpr double kSingularJTol = 1e-12;

/// |A^1(t)| <= kA1Tol * max_t |A^1(t)| is treated as a zero of the first row of A.
inline constexpr double kA1Tol = 1e-12;

struct JMatrix {
  ComplexMatrix j;
  Complex det_j;
  /// |det J| / prod of row norms (Hadamard ratio, in [0, 1]).
  double det_ratio = 0.0;

  bool singular() const { return !(det_ratio > kSingularJTol); }
};

/// Block row k (k = 0..M-1) is A[:, 0:MQ] diag(B[:, MQ + k]).
JMatrix build_j(const CorrelationBasis& basis, const SubspaceRREF& b, int m);

/// First MQ columns of the core (M x MQ): row m solves J x_m^T = e_m (x) A[:, MQ + m],
/// i.e. the transpose of J^{-1} blockdiag(A[:, MQ], ..., A[:, MQ + M - 1]).
/// Throws NonlinearPhaseFailure when J is singular under kSingularJTol.
ComplexMatrix nonlinear_phase(const JMatrix& j, const CorrelationBasis& basis, int m);

/// x(t) for a data column t (0-based, M(Q+1) <= t < T) from the first row of A:
/// x_m(t) = A^1[0:MQ] diag(B[:, t]) x_m[0:MQ]^T / A^1(t).
/// Throws DivisionDegeneracy when A^1(t) vanishes under kA1Tol.
ComplexVector linear_phase(const CorrelationBasis& basis, const SubspaceRREF& b, const ComplexMatrix& x_first,
                           int t);

/// Recomputes the linear phase from every row q of A with |A^q(t)| above tolerance and
/// returns the largest disagreement with the first-row estimate.
double linear_phase_consistency(const CorrelationBasis& basis, const SubspaceRREF& b, const ComplexMatrix& x_first,
                                int t);

/// ||R(x) - R(x)[:, 0:MQ] B||_F / ||R(x)||_F: how well a core explains a canonical subspace.
double rref_fit_residual(const CorrelationBasis& basis, const ComplexMatrix& x_tilde, const SubspaceRREF& b);

}  // namespace nldof
