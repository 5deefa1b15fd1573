#pragma once

#include <stdexcept>
#include <string>

namespace nldof {

// Bad shapes, non-finite entries, out-of-range parameters, violated preconditions.
class InvalidInput : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// Correlation basis A does not have full row rank Q.
class DegenerateBasis : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Leading L x L block of a subspace basis is singular or too ill-conditioned to invert.
class CanonicalizationFailure : public std::runtime_error {
 public:
  CanonicalizationFailure(const std::string& what, double condition)
      : std::runtime_error(what), condition_(condition) {}
  double condition() const noexcept { return condition_; }

 private:
  double condition_;
};

// The stacked basis R of F_A(X) lost rank (non-generic transmit block).
class DegenerateMapping : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// J is numerically singular; carries |det J| for diagnostics.
class NonlinearPhaseFailure : public std::runtime_error {
 public:
  NonlinearPhaseFailure(const std::string& what, double det_abs)
      : std::runtime_error(what), det_abs_(det_abs) {}
  double det_abs() const noexcept { return det_abs_; }

 private:
  double det_abs_;
};

// First row of A vanishes at a data column, so the linear phase cannot divide by it.
class DivisionDegeneracy : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Training block of a transmit block is not the identity.
class LayoutError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// n_r < Q: the nonlinear MIMO scheme does not apply.
class RegimeError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

// Refused because an enumeration would exceed its configured size cap.
class LimitError : public std::length_error {
 public:
  using std::length_error::length_error;
};

}  // namespace nldof
