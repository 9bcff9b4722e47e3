#ifndef ROBUSTDX_DESIGN_HPP
#define ROBUSTDX_DESIGN_HPP

#include <functional>
#include <vector>

#include "robustdx/matlin.hpp"

namespace robustdx {

/// Finite candidate set: q points (one row of `points` each) with regressor
/// rows f(x_i)^T stacked into the q x p matrix `regressors`.
class DesignSpace {
 public:
  DesignSpace(Matrix points, Matrix regressors);

  /// f(x) = (1, x, ..., x^degree) on the given grid.
  static DesignSpace polynomial(const std::vector<double>& grid, int degree);

  [[nodiscard]] Index size() const noexcept { return regressors_.rows(); }
  [[nodiscard]] Index params() const noexcept { return regressors_.cols(); }
  [[nodiscard]] const Matrix& points() const noexcept { return points_; }
  [[nodiscard]] const Matrix& regressors() const noexcept { return regressors_; }
  [[nodiscard]] Vector regressor(Index i) const { return regressors_.row(i).transpose(); }
  /// sum over the space of f(x) f(x)^T.
  [[nodiscard]] SymMatrix regressor_gram() const;

 private:
  Matrix points_;
  Matrix regressors_;
};

/// Probability weights over the points of a design space.
class DesignMeasure {
 public:
  explicit DesignMeasure(Vector weights);

  static DesignMeasure uniform(Index q);

  [[nodiscard]] const Vector& weights() const noexcept { return weights_; }
  [[nodiscard]] Index size() const noexcept { return weights_.size(); }
  [[nodiscard]] Index support_size(double threshold = 0.0) const;

 private:
  Vector weights_;
};

/// Integer run allocation over the points of a design space.
class ExactDesign {
 public:
  explicit ExactDesign(std::vector<int> counts);

  [[nodiscard]] const std::vector<int>& counts() const noexcept { return counts_; }
  [[nodiscard]] Index size() const noexcept { return static_cast<Index>(counts_.size()); }
  [[nodiscard]] int total() const noexcept { return total_; }

  friend bool operator==(const ExactDesign& a, const ExactDesign& b) { return a.counts_ == b.counts_; }

 private:
  std::vector<int> counts_;
  int total_ = 0;
};

/// Nonlinear mean f(x; theta), represented by its q x p Jacobian over the
/// design space as a function of theta.
struct NonlinearModel {
  std::function<Matrix(const Vector& theta)> jacobian;
  Vector theta0;
};

/// Rows f(x_i)^T repeated n_i times in point order; replicated runs are
/// adjacent, which fixes the serial order the error covariance refers to.
[[nodiscard]] Matrix model_matrix(const DesignSpace& space, const ExactDesign& d);

/// N x q indicator matrix mapping point values to run values.
[[nodiscard]] Matrix replication_map(const ExactDesign& d);

/// (X^T X)^{-1} X^T C X (X^T X)^{-1} with C checked for PSD.
[[nodiscard]] SymMatrix ols_cov(const Matrix& x, const SymMatrix& c);

/// Precomputed pieces of the OLS sandwich for one model matrix; repeated
/// evaluation over many C costs two small products each.
class OlsSandwich {
 public:
  explicit OlsSandwich(const Matrix& x);

  [[nodiscard]] Index runs() const noexcept { return hat_.rows(); }
  [[nodiscard]] Index params() const noexcept { return hat_.cols(); }
  /// X (X^T X)^{-1}.
  [[nodiscard]] const Matrix& hat() const noexcept { return hat_; }
  [[nodiscard]] const SymMatrix& moment_inverse() const noexcept { return moment_inverse_; }
  /// cov(theta_hat | C); C is not checked for PSD.
  [[nodiscard]] SymMatrix cov(const SymMatrix& c) const;

 private:
  Matrix hat_;
  SymMatrix moment_inverse_;
};

/// (X^T X)^{-1}, refusing condition numbers above 1e12.
[[nodiscard]] SymMatrix moment_inverse(const Matrix& x);

/// The design space whose regressor rows are the model gradient at theta0.
[[nodiscard]] DesignSpace linearized_space(const NonlinearModel& model, const DesignSpace& space);

[[nodiscard]] Matrix linearized_model_matrix(const NonlinearModel& model, const DesignSpace& space,
                                             const ExactDesign& d);

/// Largest-remainder rounding of N * xi, ties to the lowest index.
[[nodiscard]] ExactDesign measure_to_exact(const DesignMeasure& xi, int n);

}  // namespace robustdx

#endif  // ROBUSTDX_DESIGN_HPP
