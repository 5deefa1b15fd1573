#include "nldof/mapping.hpp"

#include <cmath>
#include <string>

#include "nldof/errors.hpp"

namespace nldof {

namespace {

void check_rref_dims(const CorrelationBasis& basis, const SubspaceRREF& b, int m) {
  const int q = basis.q();
  if (m < 1) throw InvalidInput("M must be >= 1");
  if (b.dim() != static_cast<Index>(m) * q || b.ambient_dim() != basis.t()) {
    throw InvalidInput("canonical subspace must be MQ x T");
  }
  if (m * (q + 1) > basis.t()) throw InvalidInput("need M(Q+1) <= T");
}

}  // namespace

FaBasis stack_fa_rows(const CorrelationBasis& basis, const ComplexMatrix& x_tilde) {
  if (x_tilde.cols() != basis.t()) throw InvalidInput("fa_subspace: core and A disagree on T");
  const int m = static_cast<int>(x_tilde.rows());
  const int q = basis.q();
  ComplexMatrix r(static_cast<Index>(m) * q, basis.t());
  for (int row = 0; row < m; ++row) {
    r.middleRows(static_cast<Index>(row) * q, q) =
        (basis.a().array().rowwise() * x_tilde.row(row).array()).matrix();
  }
  return FaBasis{std::move(r), m, q};
}

FaSubspace fa_subspace(const CorrelationBasis& basis, const ComplexMatrix& x_tilde) {
  require_finite(x_tilde, "fa_subspace");
  const Index mq = x_tilde.rows() * basis.q();
  if (x_tilde.rows() < 1 || mq > basis.t()) throw InvalidInput("fa_subspace: need 1 <= MQ <= T");
  FaBasis fa = stack_fa_rows(basis, x_tilde);
  const Index rank = rank_with_tol(fa.r);
  if (rank != mq) {
    throw DegenerateMapping("fa_subspace: rank(R) = " + std::to_string(rank) + " < MQ = " + std::to_string(mq));
  }
  Subspace span(fa.r);
  return FaSubspace{std::move(fa), std::move(span)};
}

FaSubspace fa_subspace(const CorrelationBasis& basis, const TransmitBlock& x) {
  return fa_subspace(basis, ComplexMatrix(x.x_tilde()));
}

JMatrix build_j(const CorrelationBasis& basis, const SubspaceRREF& b, int m) {
  check_rref_dims(basis, b, m);
  const int q = basis.q();
  const Index mq = static_cast<Index>(m) * q;
  const auto a_lead = basis.a().leftCols(mq);
  ComplexMatrix j(mq, mq);
  for (int k = 0; k < m; ++k) {
    j.middleRows(static_cast<Index>(k) * q, q) =
        (a_lead.array().rowwise() * b.b().col(mq + k).transpose().array()).matrix();
  }
  const Complex det = j.partialPivLu().determinant();
  double row_norms = 1.0;
  for (Index i = 0; i < mq; ++i) row_norms *= j.row(i).norm();
  const double ratio = row_norms > 0.0 ? std::abs(det) / row_norms : 0.0;
  return JMatrix{std::move(j), det, std::isfinite(ratio) ? ratio : 0.0};
}

ComplexMatrix nonlinear_phase(const JMatrix& j, const CorrelationBasis& basis, int m) {
  const int q = basis.q();
  const Index mq = static_cast<Index>(m) * q;
  if (j.j.rows() != mq || j.j.cols() != mq) throw InvalidInput("nonlinear_phase: J must be MQ x MQ");
  if (j.singular()) {
    throw NonlinearPhaseFailure("nonlinear_phase: J is singular (|det J| = " + std::to_string(std::abs(j.det_j)) +
                                    ", Hadamard ratio " + std::to_string(j.det_ratio) + ")",
                                std::abs(j.det_j));
  }
  const auto lu = j.j.partialPivLu();
  ComplexMatrix x_first(m, mq);
  for (int row = 0; row < m; ++row) {
    ComplexVector rhs = ComplexVector::Zero(mq);
    rhs.segment(static_cast<Index>(row) * q, q) = basis.a().col(mq + row);
    x_first.row(row) = lu.solve(rhs).transpose();
  }
  return x_first;
}

namespace {

ComplexVector linear_phase_from_row(const CorrelationBasis& basis, const SubspaceRREF& b,
                                    const ComplexMatrix& x_first, int t, Index qrow) {
  const Index mq = b.dim();
  const Eigen::RowVectorXcd weights =
      basis.a().row(qrow).head(mq).cwiseProduct(b.b().col(t).transpose());
  return x_first * weights.transpose() / basis.a()(qrow, t);
}

bool a_entry_vanishes(const CorrelationBasis& basis, Index qrow, int t) {
  const double scale = basis.a().row(qrow).cwiseAbs().maxCoeff();
  return !(std::abs(basis.a()(qrow, t)) > kA1Tol * scale);
}

void check_linear_phase_args(const CorrelationBasis& basis, const SubspaceRREF& b, const ComplexMatrix& x_first,
                             int t) {
  const int m = static_cast<int>(x_first.rows());
  check_rref_dims(basis, b, m);
  if (x_first.cols() != b.dim()) throw InvalidInput("linear_phase: x_first must be M x MQ");
  if (t < m * (basis.q() + 1) || t >= basis.t()) {
    throw InvalidInput("linear_phase: t must be a data column after the training window");
  }
}

}  // namespace

ComplexVector linear_phase(const CorrelationBasis& basis, const SubspaceRREF& b, const ComplexMatrix& x_first,
                           int t) {
  check_linear_phase_args(basis, b, x_first, t);
  if (a_entry_vanishes(basis, 0, t)) {
    throw DivisionDegeneracy("linear_phase: first row of A vanishes at column " + std::to_string(t));
  }
  return linear_phase_from_row(basis, b, x_first, t, 0);
}

double linear_phase_consistency(const CorrelationBasis& basis, const SubspaceRREF& b, const ComplexMatrix& x_first,
                                int t) {
  const ComplexVector reference = linear_phase(basis, b, x_first, t);
  double worst = 0.0;
  for (Index qrow = 1; qrow < basis.q(); ++qrow) {
    if (a_entry_vanishes(basis, qrow, t)) continue;
    const ComplexVector other = linear_phase_from_row(basis, b, x_first, t, qrow);
    worst = std::max(worst, (other - reference).cwiseAbs().maxCoeff());
  }
  return worst;
}

double rref_fit_residual(const CorrelationBasis& basis, const ComplexMatrix& x_tilde, const SubspaceRREF& b) {
  const FaBasis fa = stack_fa_rows(basis, x_tilde);
  if (fa.r.rows() != b.dim()) throw InvalidInput("rref_fit_residual: dimension mismatch");
  const double norm = fa.r.norm();
  if (norm == 0.0) return 0.0;
  return (fa.r - fa.r.leftCols(b.dim()) * b.b()).norm() / norm;
}

}  // namespace nldof
