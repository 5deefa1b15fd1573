#pragma once

#include <vector>

#include "nldof/channel.hpp"

namespace nldof {

/// Largest number of Q-column subsets check_genericity will enumerate.
inline constexpr double kMaxGenericitySubsets = 1e6;

struct GenericityResult {
  bool evaluated = false;
  bool pass = false;
  /// Columns (1-based) of the worst-conditioned Q-subset of A[:, 1..M(Q+1)].
  std::vector<int> worst_subset;
  double worst_min_sv = 0.0;
  /// sigma_min / sigma_max of that subset.
  double worst_ratio = 0.0;
  long long subsets_checked = 0;
};

/// Sufficient condition for det J != 0 almost surely: every Q columns among the
/// first M(Q+1) columns of A are linearly independent. A failure does not prove
/// the scheme cannot recover the block.
/// Throws InvalidInput if M(Q+1) > T and LimitError beyond kMaxGenericitySubsets subsets.
GenericityResult check_genericity(const CorrelationBasis& basis, int m, double rel_tol = kDefaultRankTol);

struct ConditionsReport {
  bool m_le_nt = false;
  bool mq_le_nr = false;
  bool mq1_le_t = false;
  GenericityResult genericity;
  bool all_pass = false;
};

/// Evaluates M <= n_t, MQ <= n_r, M(Q+1) <= T and genericity, each independently.
/// Genericity is only evaluated when M(Q+1) <= T; otherwise it is reported as failing.
ConditionsReport check_recovery_conditions(const ChannelDims& dims, int m, const CorrelationBasis& basis);

/// M* = min(n_t, floor(n_r / Q), floor(T / (Q + 1))). Throws RegimeError when n_r < Q.
int compute_mstar(const ChannelDims& dims);

enum class DofRegime { mimo_nonlinear, simo_small_nr };

const char* to_string(DofRegime regime);

struct DofResult {
  DofRegime regime = DofRegime::mimo_nonlinear;
  /// Effective transmit antennas (1 in the small-n_r regime).
  int m_star = 0;
  double dof_per_symbol = 0.0;
  double dof_per_block = 0.0;
};

/// M*(1 - M*/T) per symbol when n_r >= Q; min(1 - 1/T, n_r (1 - Q/T)) otherwise.
/// The small-n_r value is a formula only: no encoder or decoder here achieves it.
DofResult compute_dof(const ChannelDims& dims);

}  // namespace nldof
