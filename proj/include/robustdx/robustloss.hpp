#ifndef ROBUSTDX_ROBUSTLOSS_HPP
#define ROBUSTDX_ROBUSTLOSS_HPP

#include "robustdx/covmodel.hpp"
#include "robustdx/design.hpp"

namespace robustdx {

/// Departure psi(x) of the mean response from the fitted linear model.
/// Orthogonal to the regressors over the whole design space, with
/// sum psi^2 <= tau2.
class Contaminant {
 public:
  Contaminant(Vector values, double tau2, const DesignSpace& space);

  static Contaminant zero(const DesignSpace& space, double tau2 = 0.0);

  [[nodiscard]] const Vector& values() const noexcept { return values_; }
  [[nodiscard]] double tau2() const noexcept { return tau2_; }

 private:
  Vector values_;
  double tau2_;
};

struct BiasVector {
  Vector d;  ///< E(theta_hat) - theta
};

struct Projection {
  Contaminant psi;
  bool zero_projection;
};

enum class RobustLoss { I, D };

/// Integrated prediction MSE, split into the C-dependent variance sum and
/// the psi-dependent bias sum. `direct_total` is the same quantity computed
/// from the prediction-error second moment, without the split.
struct ILossTerms {
  double variance_term;
  double bias_term;
  double total;
  double direct_total;
};

struct WorstPsi {
  Contaminant psi;
  double value;         ///< loss at (psi*, C)
  double psi_part;      ///< value minus its psi-free part
  double top_eigenvalue;
};

struct ExtendedMinimax {
  double cov_part;
  double psi_part;
  double total;
  Contaminant worst_psi;
};

/// Null-space projection of `raw` onto {psi : F^T psi = 0}, rescaled to
/// squared norm tau2. A vanishing projection is returned as zero and flagged.
[[nodiscard]] Projection project_orthogonal(const Vector& raw, const DesignSpace& space, double tau2);

[[nodiscard]] BiasVector bias_vector(const Contaminant& psi, const DesignSpace& space, const ExactDesign& d);

/// Throws Inconsistent if the split and direct computations disagree by more
/// than 1e-8 relative.
[[nodiscard]] ILossTerms i_loss(const Contaminant& psi, const DesignSpace& space, const ExactDesign& d,
                                const SymMatrix& c);

/// [det{cov(theta_hat | C) + d d^T}]^{1/p} by the matrix determinant lemma;
/// when cov is singular the determinant of the sum is taken directly.
[[nodiscard]] double d_loss(const Contaminant& psi, const DesignSpace& space, const ExactDesign& d,
                            const SymMatrix& c);

/// The same value as d_loss, always through the determinant of the sum.
[[nodiscard]] double d_loss_direct(const Contaminant& psi, const DesignSpace& space, const ExactDesign& d,
                                   const SymMatrix& c);

/// Maximizer of the psi-dependent part of the loss over the orthogonal
/// Euclidean ball of radius sqrt(tau2).
[[nodiscard]] WorstPsi worst_psi(const DesignSpace& space, const ExactDesign& d, RobustLoss which,
                                 const SymMatrix& c, double tau2);

/// max over (psi, C) of the loss, computed by maximizing over C at eta2 * I
/// and over psi separately.
[[nodiscard]] ExtendedMinimax extended_minimax_value(const DesignSpace& space, const ExactDesign& d,
                                                     const CovClass& cls, RobustLoss which, double tau2);

/// Orthonormal basis (q x (q-p)) of the null space of F^T.
[[nodiscard]] Matrix orthogonal_complement(const DesignSpace& space);

}  // namespace robustdx

#endif  // ROBUSTDX_ROBUSTLOSS_HPP
