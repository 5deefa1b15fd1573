#include <doctest.h>

#include <bit>
#include <cmath>

#include "nldof/conditions.hpp"
#include "nldof/errors.hpp"
#include "nldof/mapping.hpp"
#include "test_support.hpp"

using namespace nldof;
using nldof::testing::make_dims;

namespace {

// Brute force over bitmasks: the smallest sigma_min / sigma_max among Q-column subsets.
double worst_subset_ratio(const ComplexMatrix& a, int n_cols, int q) {
  double worst = 1.0;
  for (unsigned mask = 0; mask < (1u << n_cols); ++mask) {
    if (std::popcount(mask) != q) continue;
    ComplexMatrix sub(a.rows(), q);
    int k = 0;
    for (int c = 0; c < n_cols; ++c) {
      if (mask & (1u << c)) sub.col(k++) = a.col(c);
    }
    const Eigen::VectorXd sv = singular_values(sub);
    worst = std::min(worst, sv(q - 1) / sv(0));
  }
  return worst;
}

}  // namespace

TEST_CASE("M* examples") {
  CHECK(compute_mstar(make_dims(2, 4, 2, 8)) == 2);
  CHECK(compute_mstar(make_dims(4, 4, 1, 8)) == 4);
  CHECK(compute_mstar(make_dims(3, 7, 3, 100)) == 2);
  CHECK(compute_mstar(make_dims(8, 8, 1, 6)) == 3);
  CHECK_THROWS_AS(compute_mstar(make_dims(2, 1, 2, 8)), RegimeError);
}

TEST_CASE("DOF examples") {
  const DofResult a = compute_dof(make_dims(2, 4, 2, 8));
  CHECK(a.regime == DofRegime::mimo_nonlinear);
  CHECK(a.m_star == 2);
  CHECK(a.dof_per_symbol == 1.5);
  CHECK(a.dof_per_block == 12.0);
  CHECK(compute_dof(make_dims(4, 4, 1, 8)).dof_per_symbol == 2.0);
  CHECK(std::abs(compute_dof(make_dims(3, 7, 3, 100)).dof_per_symbol - 1.96) < 1e-12);

  const DofResult simo = compute_dof(make_dims(2, 1, 2, 8));
  CHECK(simo.regime == DofRegime::simo_small_nr);
  CHECK(simo.m_star == 1);
  CHECK(simo.dof_per_symbol == 0.75);
  CHECK(simo.dof_per_block == 6.0);
  // Second branch of the min: n_r (1 - Q/T) < 1 - 1/T.
  CHECK(compute_dof(make_dims(1, 1, 2, 4)).dof_per_symbol == 0.5);
  CHECK(std::string(to_string(DofRegime::simo_small_nr)) == "simo_small_nr");
  CHECK_THROWS_AS(compute_dof(make_dims(2, 4, 8, 8)), InvalidInput);
}

TEST_CASE("DOF per block counts the transmitted coordinates") {
  for (int nt = 1; nt <= 5; ++nt) {
    for (int nr = 1; nr <= 8; ++nr) {
      for (int q = 1; q <= 3; ++q) {
        for (int t = q + 1; t <= 14; ++t) {
          const auto dims = make_dims(nt, nr, q, t);
          if (nr < q) continue;
          const DofResult d = compute_dof(dims);
          if (d.m_star < 1) continue;
          CHECK(d.dof_per_block == static_cast<double>(coordinate_count(d.m_star, t)));
          CHECK(std::abs(d.dof_per_symbol * t - d.dof_per_block) < 1e-12);
        }
      }
    }
  }
}

TEST_CASE("DOF is non-decreasing in n_r") {
  for (int q = 1; q <= 3; ++q) {
    double prev = 0.0;
    for (int nr = 1; nr <= 12; ++nr) {
      const double d = compute_dof(make_dims(4, nr, q, 16)).dof_per_symbol;
      CHECK(d >= prev - 1e-15);
      prev = d;
    }
  }
}

TEST_CASE("recovery conditions for (2,4,2,8)") {
  const auto dims = make_dims(2, 4, 2, 8);
  const CorrelationBasis basis = fourier_basis(dims);
  const ConditionsReport ok = check_recovery_conditions(dims, 2, basis);
  CHECK(ok.m_le_nt);
  CHECK(ok.mq_le_nr);
  CHECK(ok.mq1_le_t);
  CHECK(ok.genericity.evaluated);
  CHECK(ok.genericity.pass);
  CHECK(ok.all_pass);

  const ConditionsReport bad = check_recovery_conditions(dims, 3, basis);
  CHECK_FALSE(bad.m_le_nt);
  CHECK_FALSE(bad.mq_le_nr);
  CHECK_FALSE(bad.mq1_le_t);
  CHECK_FALSE(bad.genericity.evaluated);
  CHECK_FALSE(bad.all_pass);
}

TEST_CASE("Fourier rows are generic") {
  const auto dims = make_dims(2, 4, 2, 8);
  const GenericityResult g = check_genericity(fourier_basis(dims), 2);
  CHECK(g.pass);
  CHECK(g.subsets_checked == 15);  // C(6, 2)
  CHECK(std::abs(g.worst_ratio - worst_subset_ratio(fourier_rows(2, 8), 6, 2)) < 1e-12);
}

TEST_CASE("duplicated column fails genericity at that pair") {
  const auto dims = make_dims(2, 4, 2, 8);
  const CorrelationBasis basis = validate_correlation_basis(nldof::testing::fourier_with_duplicate(2, 8, 0, 1), dims);
  const GenericityResult g = check_genericity(basis, 2);
  CHECK_FALSE(g.pass);
  CHECK(g.worst_subset == std::vector<int>{1, 2});
  CHECK(g.worst_ratio < 1e-12);
  CHECK_FALSE(check_recovery_conditions(dims, 2, basis).all_pass);
}

TEST_CASE("genericity matches brute force on random bases") {
  Rng rng(21);
  for (int trial = 0; trial < 20; ++trial) {
    const int q = 1 + trial % 3;
    const int m = 1 + trial % 2;
    const int t = m * (q + 1) + 2;
    const auto dims = make_dims(m, m * q, q, t);
    const ComplexMatrix a = sample_complex_gaussian(rng, q, t);
    const GenericityResult g = check_genericity(validate_correlation_basis(a, dims), m);
    CHECK(std::abs(g.worst_ratio - worst_subset_ratio(a, m * (q + 1), q)) < 1e-12);
    CHECK(g.pass);
  }
}

TEST_CASE("Q = 1 genericity is nonzero entries of A") {
  const auto dims = make_dims(2, 2, 1, 6);
  ComplexMatrix a = ComplexMatrix::Ones(1, 6);
  CHECK(check_genericity(validate_correlation_basis(a, dims), 2).pass);
  a(0, 2) = 0.0;
  const GenericityResult g = check_genericity(validate_correlation_basis(a, dims), 2);
  CHECK_FALSE(g.pass);
  CHECK(g.worst_subset == std::vector<int>{3});
  a(0, 2) = 1.0;
  a(0, 5) = 0.0;  // outside the first M(Q+1) = 4 columns
  CHECK(check_genericity(validate_correlation_basis(a, dims), 2).pass);
}

TEST_CASE("genericity enumeration is capped") {
  const auto dims = make_dims(3, 30, 10, 40);
  CHECK_THROWS_AS(check_genericity(fourier_basis(dims), 3), LimitError);
  CHECK_THROWS_AS(check_genericity(fourier_basis(make_dims(2, 4, 2, 5)), 2), InvalidInput);
}

TEST_CASE("generic A keeps det J away from zero on sampled blocks") {
  Rng rng(22);
  const auto dims = make_dims(2, 4, 2, 8);
  const CorrelationBasis basis = validate_correlation_basis(sample_complex_gaussian(rng, 2, 8), dims);
  REQUIRE(check_genericity(basis, 2).pass);
  double worst = 1.0;
  for (int trial = 0; trial < 500; ++trial) {
    const TransmitBlock block = nldof::testing::random_block(rng, dims, 2);
    worst = std::min(worst, build_j(basis, canonical_rref(fa_subspace(basis, block).span), 2).det_ratio);
  }
  CHECK(worst > kSingularJTol);
}
