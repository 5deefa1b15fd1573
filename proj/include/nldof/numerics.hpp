#pragma once

#include <complex>
#include <cstdint>
#include <random>

#include <Eigen/Dense>

namespace nldof {

using Complex = std::complex<double>;
using ComplexMatrix = Eigen::MatrixXcd;
using ComplexVector = Eigen::VectorXcd;
using Index = Eigen::Index;

/// Relative singular-value threshold used for every rank decision.
inline constexpr double kDefaultRankTol = 1e-9;

/// Largest condition number accepted when inverting the leading block of a basis.
inline constexpr double kConditionCap = 1e12;

/// Throws InvalidInput naming `what` if any entry is NaN or infinite.
void require_finite(const ComplexMatrix& m, const char* what);

/// Singular values in decreasing order.
Eigen::VectorXd singular_values(const ComplexMatrix& m);

/// Number of singular values above rel_tol * sigma_max; zero for the zero matrix.
Index rank_with_tol(const ComplexMatrix& m, double rel_tol = kDefaultRankTol);

/// sigma_max / sigma_min of a square matrix; +inf when singular.
double condition_number(const ComplexMatrix& m);

/// Row space of a full-row-rank L x T matrix.
class Subspace {
 public:
  explicit Subspace(ComplexMatrix basis, double rel_tol = kDefaultRankTol);

  Index ambient_dim() const { return basis_.cols(); }
  Index dim() const { return basis_.rows(); }
  const ComplexMatrix& basis() const { return basis_; }

  /// T x L matrix with orthonormal columns spanning the conjugated rows.
  ComplexMatrix orthonormal_columns() const;

 private:
  ComplexMatrix basis_;
};

/// Canonical L x T representative of a subspace whose first L columns are I_L.
class SubspaceRREF {
 public:
  Index ambient_dim() const { return b_.cols(); }
  Index dim() const { return b_.rows(); }
  const ComplexMatrix& b() const { return b_; }

  /// Condition number of the leading block that was inverted.
  double leading_condition() const { return leading_condition_; }

  Subspace as_subspace() const { return Subspace(b_); }

 private:
  friend SubspaceRREF canonical_rref(const Subspace& s, double condition_cap);
  SubspaceRREF(ComplexMatrix b, double cond) : b_(std::move(b)), leading_condition_(cond) {}

  ComplexMatrix b_;
  double leading_condition_;
};

/// Solves C_R * B = R with C_R the leading L x L block; B's identity block is written literally.
/// Throws CanonicalizationFailure when cond(C_R) exceeds condition_cap.
SubspaceRREF canonical_rref(const Subspace& s, double condition_cap = kConditionCap);

/// Largest principal angle (radians) between two subspaces of the same ambient space.
/// Computed from sines so that tiny angles keep full relative accuracy.
double max_principal_angle(const Subspace& a, const Subspace& b);

/// max over rows of ||row - proj_S(row)|| / ||row||; rows of norm zero contribute zero.
double projection_residual(const ComplexMatrix& rows, const Subspace& s);

/// Seeded stream of uniforms and complex Gaussians.
///
/// Uniforms come from std::mt19937_64 (fully specified by the standard, so the
/// sequence is platform independent) using the top 53 bits of each draw.
/// Complex Gaussians use the Box-Muller construction z = sqrt(-ln u1) exp(2 pi i u2),
/// which gives unit variance with real and imaginary parts each of variance 1/2.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : seed_(seed), engine_(seed) {}

  std::uint64_t seed() const { return seed_; }

  /// Uniform on [0, 1).
  double uniform();
  Complex complex_gaussian();
  std::uint64_t next_u64() { return engine_(); }

 private:
  std::uint64_t seed_;
  std::mt19937_64 engine_;
};

/// splitmix64 finalizer applied to base + golden-ratio * (index + 1); the
/// per-task seed rule used wherever work is split across trials or threads.
std::uint64_t derive_seed(std::uint64_t base, std::uint64_t index);

/// rows x cols i.i.d. CN(0, 1), filled in row-major order.
ComplexMatrix sample_complex_gaussian(Rng& rng, Index rows, Index cols);

}  // namespace nldof
