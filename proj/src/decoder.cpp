#include "nldof/decoder.hpp"

#include <limits>
#include <optional>
#include <string>

#include "nldof/errors.hpp"

namespace nldof {

const char* to_string(RecoveryStatus status) {
  switch (status) {
    case RecoveryStatus::ok:
      return "ok";
    case RecoveryStatus::subspace_failure:
      return "subspace_failure";
    case RecoveryStatus::rref_failure:
      return "rref_failure";
    case RecoveryStatus::j_singular:
      return "j_singular";
    case RecoveryStatus::a1_degenerate:
      return "a1_degenerate";
  }
  return "unknown";
}

SubspaceEstimate estimate_signal_subspace(const NoisyBlock& y, int target_dim) {
  const ComplexMatrix& data = y.y_noisy;
  require_finite(data, "estimate_signal_subspace");
  if (target_dim < 1 || target_dim > data.cols()) {
    throw InvalidInput("estimate_signal_subspace: target dimension must lie in [1, T]");
  }
  if (data.rows() < target_dim) {
    throw InvalidInput("estimate_signal_subspace: n_r = " + std::to_string(data.rows()) +
                       " is smaller than the target dimension " + std::to_string(target_dim));
  }
  Eigen::JacobiSVD<ComplexMatrix> svd(data, Eigen::ComputeThinV);
  const Eigen::VectorXd& sv = svd.singularValues();
  const double total = sv.squaredNorm();
  const double kept = sv.head(target_dim).squaredNorm();
  const double residual = total > 0.0 ? (total - kept) / total : 0.0;
  const double gap = sv(0) > 0.0 ? sv(target_dim - 1) / sv(0) : 0.0;
  // Rows of Y are combinations of the conjugated right singular vectors.
  ComplexMatrix basis = svd.matrixV().leftCols(target_dim).adjoint();
  return SubspaceEstimate{Subspace(std::move(basis), 0.0), std::max(residual, 0.0), gap};
}

RecoveryReport decode_block(const NoisyBlock& y, const CorrelationBasis& basis, int m) {
  const int q = basis.q();
  const int t = basis.t();
  if (m < 1) throw InvalidInput("decode_block: M must be >= 1");
  if (y.y_noisy.cols() != t) throw InvalidInput("decode_block: received block and A disagree on T");
  if (m * q > y.y_noisy.rows()) {
    throw InvalidInput("decode_block: recovery condition MQ <= n_r violated (MQ = " + std::to_string(m * q) +
                       ", n_r = " + std::to_string(y.y_noisy.rows()) + ")");
  }
  if (m * (q + 1) > t) throw InvalidInput("decode_block: recovery condition M(Q+1) <= T violated");

  constexpr double nan = std::numeric_limits<double>::quiet_NaN();
  RecoveryReport report;
  report.coords_hat.m = m;
  report.nonlinear_residual = nan;
  report.det_j_abs = nan;
  report.det_j_ratio = nan;
  auto fail = [&](RecoveryStatus status, std::string detail) {
    report.status = status;
    report.detail = std::move(detail);
    report.x_tilde_hat.resize(0, 0);
    report.coords_hat.coords.resize(0);
    return report;
  };

  const int mq = m * q;
  const SubspaceEstimate estimate = estimate_signal_subspace(y, mq);
  report.subspace_residual = estimate.residual;
  if (!(estimate.gap_ratio > kDefaultRankTol)) {
    return fail(RecoveryStatus::subspace_failure,
                "received block has rank below MQ (gap ratio " + std::to_string(estimate.gap_ratio) + ")");
  }

  std::optional<SubspaceRREF> b;
  try {
    b = canonical_rref(estimate.subspace);
  } catch (const CanonicalizationFailure& ex) {
    return fail(RecoveryStatus::rref_failure, ex.what());
  }

  const JMatrix j = build_j(basis, *b, m);
  report.det_j_abs = std::abs(j.det_j);
  report.det_j_ratio = j.det_ratio;
  ComplexMatrix x_first;
  try {
    x_first = nonlinear_phase(j, basis, m);
  } catch (const NonlinearPhaseFailure& ex) {
    return fail(RecoveryStatus::j_singular, ex.what());
  }

  ComplexMatrix core = ComplexMatrix::Zero(m, t);
  core.leftCols(mq) = x_first;
  core.middleCols(mq, m).setIdentity();
  try {
    for (int col = m * (q + 1); col < t; ++col) core.col(col) = linear_phase(basis, *b, x_first, col);
  } catch (const DivisionDegeneracy& ex) {
    return fail(RecoveryStatus::a1_degenerate, ex.what());
  }
  if (!core.allFinite()) return fail(RecoveryStatus::j_singular, "recovered block has non-finite entries");

  report.nonlinear_residual = rref_fit_residual(basis, core, *b);
  report.coords_hat = extract_coordinates(core, q);
  report.x_tilde_hat = std::move(core);
  return report;
}

}  // namespace nldof
