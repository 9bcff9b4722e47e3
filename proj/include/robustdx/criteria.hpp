#ifndef ROBUSTDX_CRITERIA_HPP
#define ROBUSTDX_CRITERIA_HPP

#include <optional>
#include <string>

#include "robustdx/design.hpp"

namespace robustdx {

/// Loewner-monotone functional of an estimator covariance.
///
/// A: trace. D: determinant. E: largest eigenvalue. L: tr(W S) for a PSD
/// weight W. I: L with W = sum over the design space of f f^T, the integrated
/// prediction variance.
class Criterion {
 public:
  enum class Kind { A, D, E, L, I };

  static Criterion A() { return Criterion(Kind::A, std::nullopt); }
  static Criterion D() { return Criterion(Kind::D, std::nullopt); }
  static Criterion E() { return Criterion(Kind::E, std::nullopt); }
  static Criterion L(const SymMatrix& weight);
  static Criterion I(const DesignSpace& space);

  [[nodiscard]] Kind kind() const noexcept { return kind_; }
  /// Weight matrix for L and I, empty otherwise.
  [[nodiscard]] const std::optional<SymMatrix>& weight() const noexcept { return weight_; }
  [[nodiscard]] std::string name() const;

 private:
  Criterion(Kind kind, std::optional<SymMatrix> weight) : kind_(kind), weight_(std::move(weight)) {}

  Kind kind_;
  std::optional<SymMatrix> weight_;
};

/// Phi(S); S must be PSD.
[[nodiscard]] double phi(const Criterion& c, const SymMatrix& s);

/// Phi(S) without the PSD precondition check. For hot loops over inputs that
/// are PSD by construction.
[[nodiscard]] double phi_unchecked(const Criterion& c, const SymMatrix& s);

/// Determinant as a product of eigenvalues accumulated in log space; 0 when
/// any eigenvalue is <= 0.
[[nodiscard]] double log_space_det(const SymMatrix& s);

/// Phi{cov(theta_ols | C)}.
[[nodiscard]] double design_loss(const Criterion& c, const Matrix& x, const SymMatrix& cov);

[[nodiscard]] bool monotone_pair_check(const Criterion& c, const SymMatrix& s1, const SymMatrix& s2);

}  // namespace robustdx

#endif  // ROBUSTDX_CRITERIA_HPP
