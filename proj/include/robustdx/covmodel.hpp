#ifndef ROBUSTDX_COVMODEL_HPP
#define ROBUSTDX_COVMODEL_HPP

#include <cstdint>
#include <variant>
#include <vector>

#include "robustdx/matlin.hpp"

namespace robustdx {

/// { C >= 0 : ||C||_kind <= eta2 }.
struct NormBall {
  NormKind kind = NormKind::Spectral;
  double eta2 = 1.0;
};

/// Tridiagonal members with constant diagonal s > 0, |c_{i,i+1}| <= s * rho_max
/// and ||C||_inf <= sigma2 * (1 + 2 rho_max). Variance inflation up to that
/// bound is admitted, which puts the bound times I in the class.
struct MA1 {
  double sigma2 = 1.0;
  double rho_max = 0.0;
};

/// { s * P(rho) : |rho| <= rho_bound, s * lambda(rho) <= sigma2 * lambda* },
/// P(rho) the AR(1) autocorrelation matrix and lambda(rho) its top eigenvalue.
struct AR1 {
  double sigma2 = 1.0;
  double rho_bound = 0.99;
  int grid_points = 2001;
};

/// Diagonal members with entries in (0, var_max].
struct HeteroDiag {
  double var_max = 1.0;
};

/// An explicit list of matrices, claimed to lie in a norm ball of radius eta2.
/// Need not contain eta2 * I; when it does not, L(eta2 * I) is only an upper
/// bound for the class maximum.
struct FiniteSet {
  std::vector<SymMatrix> members;
  double eta2 = 1.0;
};

using CovVariant = std::variant<NormBall, MA1, AR1, HeteroDiag, FiniteSet>;

/// A covariance uncertainty class of a fixed dimension. Construction validates
/// the parameters; effective_eta2 is cached (for AR1 it needs lambda*).
class CovClass {
 public:
  CovClass(CovVariant variant, Index dim);

  [[nodiscard]] const CovVariant& variant() const noexcept { return variant_; }
  [[nodiscard]] Index dim() const noexcept { return dim_; }
  [[nodiscard]] double effective_eta2() const noexcept { return eta2_; }
  [[nodiscard]] std::string_view name() const;

  /// Same family, parameters rescaled so that effective_eta2() == target.
  [[nodiscard]] CovClass rescaled_to(double target_eta2) const;

 private:
  CovVariant variant_;
  Index dim_;
  double eta2_;
};

struct ClassExtreme {
  SymMatrix matrix;
  double eta2;
};

enum class SampleStrategy { Interior, Boundary };

[[nodiscard]] bool contains(const CovClass& cls, const SymMatrix& c, double tol = 1e-9);
[[nodiscard]] double effective_eta2(const CovClass& cls);
[[nodiscard]] ClassExtreme extreme_identity(const CovClass& cls);
/// Whether eta2 * I is itself a member, so that the analytic maximum is attained.
[[nodiscard]] bool identity_is_member(const CovClass& cls);

[[nodiscard]] double ma1_rho_limit(Index n);
[[nodiscard]] SymMatrix ma1_matrix(double sigma2, double rho, Index n);
[[nodiscard]] SymMatrix ar1_matrix(double sigma2, double rho, Index n);
/// max over rho in [-rho_bound, rho_bound] of the top eigenvalue of P(rho).
[[nodiscard]] double ar1_lambda_star(Index n, double rho_bound, int grid_points = 2001);
/// Top eigenvalue of the unit-variance AR(1) matrix.
[[nodiscard]] double ar1_lambda(Index n, double rho);
/// ||P(rho)||_inf for the unit-variance MA(1) matrix.
[[nodiscard]] double ma1_row_sum(Index n, double rho);

[[nodiscard]] SymMatrix sample_member(const CovClass& cls, std::uint64_t seed,
                                      SampleStrategy strategy = SampleStrategy::Boundary);

}  // namespace robustdx

#endif  // ROBUSTDX_COVMODEL_HPP
