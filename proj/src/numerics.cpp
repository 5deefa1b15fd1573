#include "nldof/numerics.hpp"

#include <cmath>
#include <limits>
#include <numbers>
#include <string>

#include "nldof/errors.hpp"

namespace nldof {

namespace {

ComplexMatrix thin_q(const ComplexMatrix& columns) {
  Eigen::HouseholderQR<ComplexMatrix> qr(columns);
  return qr.householderQ() * ComplexMatrix::Identity(columns.rows(), columns.cols());
}

}  // namespace

void require_finite(const ComplexMatrix& m, const char* what) {
  if (!m.allFinite()) {
    throw InvalidInput(std::string(what) + ": matrix has non-finite entries");
  }
}

Eigen::VectorXd singular_values(const ComplexMatrix& m) {
  if (m.size() == 0) return Eigen::VectorXd();
  Eigen::JacobiSVD<ComplexMatrix> svd(m);
  return svd.singularValues();
}

Index rank_with_tol(const ComplexMatrix& m, double rel_tol) {
  if (!(rel_tol >= 0.0 && rel_tol < 1.0)) {
    throw InvalidInput("rank_with_tol: rel_tol must lie in [0, 1)");
  }
  require_finite(m, "rank_with_tol");
  const Eigen::VectorXd sv = singular_values(m);
  if (sv.size() == 0 || sv(0) == 0.0) return 0;
  const double threshold = rel_tol * sv(0);
  Index rank = 0;
  for (Index i = 0; i < sv.size(); ++i) {
    if (sv(i) > threshold) ++rank;
  }
  return rank;
}

double condition_number(const ComplexMatrix& m) {
  if (m.rows() != m.cols() || m.size() == 0) {
    throw InvalidInput("condition_number: matrix must be square and non-empty");
  }
  const Eigen::VectorXd sv = singular_values(m);
  const double smallest = sv(sv.size() - 1);
  if (smallest == 0.0) return std::numeric_limits<double>::infinity();
  return sv(0) / smallest;
}

Subspace::Subspace(ComplexMatrix basis, double rel_tol) : basis_(std::move(basis)) {
  require_finite(basis_, "Subspace");
  if (basis_.rows() < 1 || basis_.rows() > basis_.cols()) {
    throw InvalidInput("Subspace: need 1 <= dim <= ambient dimension");
  }
  if (rank_with_tol(basis_, rel_tol) != basis_.rows()) {
    throw InvalidInput("Subspace: basis rows are not linearly independent");
  }
}

ComplexMatrix Subspace::orthonormal_columns() const { return thin_q(basis_.transpose()); }

SubspaceRREF canonical_rref(const Subspace& s, double condition_cap) {
  const Index l = s.dim();
  const ComplexMatrix leading = s.basis().leftCols(l);
  const double cond = condition_number(leading);
  if (!(cond <= condition_cap)) {
    throw CanonicalizationFailure("canonical_rref: leading block is singular or ill-conditioned (cond = " +
                                      std::to_string(cond) + ")",
                                  cond);
  }
  ComplexMatrix b = leading.partialPivLu().solve(s.basis());
  b.leftCols(l).setIdentity();
  return SubspaceRREF(std::move(b), cond);
}

double max_principal_angle(const Subspace& a, const Subspace& b) {
  if (a.ambient_dim() != b.ambient_dim() || a.dim() != b.dim()) {
    throw InvalidInput("max_principal_angle: subspaces must share ambient space and dimension");
  }
  const ComplexMatrix qa = a.orthonormal_columns();
  const ComplexMatrix qb = b.orthonormal_columns();
  const ComplexMatrix outside = qb - qa * (qa.adjoint() * qb);
  const double sine = singular_values(outside)(0);
  return std::asin(std::min(1.0, sine));
}

double projection_residual(const ComplexMatrix& rows, const Subspace& s) {
  if (rows.cols() != s.ambient_dim()) {
    throw InvalidInput("projection_residual: ambient dimension mismatch");
  }
  const ComplexMatrix q = s.orthonormal_columns();
  double worst = 0.0;
  for (Index i = 0; i < rows.rows(); ++i) {
    const ComplexVector v = rows.row(i).transpose();
    const double norm = v.norm();
    if (norm == 0.0) continue;
    const ComplexVector res = v - q * (q.adjoint() * v);
    worst = std::max(worst, res.norm() / norm);
  }
  return worst;
}

double Rng::uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

Complex Rng::complex_gaussian() {
  const double u1 = uniform();
  const double u2 = uniform();
  const double radius = std::sqrt(-std::log1p(-u1));
  const double phase = 2.0 * std::numbers::pi * u2;
  return {radius * std::cos(phase), radius * std::sin(phase)};
}

std::uint64_t derive_seed(std::uint64_t base, std::uint64_t index) {
  std::uint64_t z = base + (index + 1) * 0x9E3779B97F4A7C15ULL;
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

ComplexMatrix sample_complex_gaussian(Rng& rng, Index rows, Index cols) {
  if (rows < 1 || cols < 1) {
    throw InvalidInput("sample_complex_gaussian: rows and cols must be >= 1");
  }
  ComplexMatrix out(rows, cols);
  for (Index r = 0; r < rows; ++r) {
    for (Index c = 0; c < cols; ++c) out(r, c) = rng.complex_gaussian();
  }
  return out;
}

}  // namespace nldof
