#include "nldof/conditions.hpp"

#include <algorithm>
#include <limits>
#include <numeric>
#include <string>

#include "nldof/errors.hpp"

namespace nldof {

namespace {

// C(n, k) in floating point; exact for every count below the enumeration cap.
double binomial(int n, int k) {
  if (k < 0 || k > n) return 0.0;
  k = std::min(k, n - k);
  double out = 1.0;
  for (int i = 1; i <= k; ++i) out = out * (n - k + i) / i;
  return out;
}

// Advances `idx` to the next k-combination of {0..n-1} in lexicographic order.
bool next_combination(std::vector<int>& idx, int n) {
  const int k = static_cast<int>(idx.size());
  int i = k - 1;
  while (i >= 0 && idx[i] == n - k + i) --i;
  if (i < 0) return false;
  ++idx[i];
  for (int j = i + 1; j < k; ++j) idx[j] = idx[j - 1] + 1;
  return true;
}

}  // namespace

GenericityResult check_genericity(const CorrelationBasis& basis, int m, double rel_tol) {
  const int q = basis.q();
  if (m < 1) throw InvalidInput("check_genericity: M must be >= 1");
  const int n = m * (q + 1);
  if (n > basis.t()) throw InvalidInput("check_genericity: need M(Q+1) <= T");
  const double count = binomial(n, q);
  if (count > kMaxGenericitySubsets) {
    throw LimitError("check_genericity: C(" + std::to_string(n) + ", " + std::to_string(q) + ") subsets exceed the " +
                     "enumeration limit of 1e6");
  }

  GenericityResult result;
  result.evaluated = true;
  result.pass = true;
  result.worst_ratio = std::numeric_limits<double>::infinity();
  std::vector<int> idx(q);
  std::iota(idx.begin(), idx.end(), 0);
  ComplexMatrix sub(q, q);
  do {
    for (int k = 0; k < q; ++k) sub.col(k) = basis.a().col(idx[k]);
    const Eigen::VectorXd sv = singular_values(sub);
    const double smallest = sv(q - 1);
    const double ratio = sv(0) > 0.0 ? smallest / sv(0) : 0.0;
    ++result.subsets_checked;
    if (!(ratio > rel_tol)) result.pass = false;
    if (ratio < result.worst_ratio) {
      result.worst_ratio = ratio;
      result.worst_min_sv = smallest;
      result.worst_subset.assign(idx.begin(), idx.end());
    }
  } while (next_combination(idx, n));
  for (int& c : result.worst_subset) ++c;
  return result;
}

ConditionsReport check_recovery_conditions(const ChannelDims& dims, int m, const CorrelationBasis& basis) {
  dims.validate();
  if (basis.q() != dims.q || basis.t() != dims.t) {
    throw InvalidInput("check_recovery_conditions: A is " + std::to_string(basis.q()) + "x" +
                       std::to_string(basis.t()) + " but dims give Q = " + std::to_string(dims.q) +
                       ", T = " + std::to_string(dims.t));
  }
  if (m < 1) throw InvalidInput("check_recovery_conditions: M must be >= 1");
  ConditionsReport report;
  report.m_le_nt = m <= dims.n_t;
  report.mq_le_nr = m * dims.q <= dims.n_r;
  report.mq1_le_t = m * (dims.q + 1) <= dims.t;
  if (report.mq1_le_t) report.genericity = check_genericity(basis, m);
  report.all_pass = report.m_le_nt && report.mq_le_nr && report.mq1_le_t && report.genericity.pass;
  return report;
}

int compute_mstar(const ChannelDims& dims) {
  dims.validate();
  if (dims.n_r < dims.q) {
    throw RegimeError("n_r < Q: the nonlinear MIMO scheme does not apply; use compute_dof for the SIMO formula");
  }
  return std::min({dims.n_t, dims.n_r / dims.q, dims.t / (dims.q + 1)});
}

const char* to_string(DofRegime regime) {
  return regime == DofRegime::mimo_nonlinear ? "mimo_nonlinear" : "simo_small_nr";
}

DofResult compute_dof(const ChannelDims& dims) {
  dims.validate();
  const double t = dims.t;
  DofResult out;
  if (dims.n_r >= dims.q) {
    const int m = compute_mstar(dims);
    out.regime = DofRegime::mimo_nonlinear;
    out.m_star = m;
    out.dof_per_symbol = m * (1.0 - m / t);
    out.dof_per_block = static_cast<double>(m) * (dims.t - m);
  } else {
    out.regime = DofRegime::simo_small_nr;
    out.m_star = 1;
    out.dof_per_symbol = std::min(1.0 - 1.0 / t, dims.n_r * (1.0 - dims.q / t));
    out.dof_per_block = out.dof_per_symbol * t;
  }
  return out;
}

}  // namespace nldof
