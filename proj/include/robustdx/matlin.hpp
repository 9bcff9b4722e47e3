#ifndef ROBUSTDX_MATLIN_HPP
#define ROBUSTDX_MATLIN_HPP

#include <Eigen/Dense>

#include "robustdx/error.hpp"

namespace robustdx {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;
using Index = Eigen::Index;

/// Dense symmetric matrix.
///
/// Input is symmetrized as (S + S^T)/2 on construction, so entry (i,j) and
/// (j,i) are bitwise equal afterwards. Inputs whose asymmetry exceeds 1e-8
/// relative to the largest entry are rejected with NotSymmetric. Non-finite
/// entries are carried through; the numerical kernels report them.
class SymMatrix {
 public:
  explicit SymMatrix(const Matrix& m);

  static SymMatrix identity(Index n, double scale = 1.0);
  static SymMatrix diagonal(const Vector& d);
  static SymMatrix zero(Index n);

  [[nodiscard]] Index dim() const noexcept { return m_.rows(); }
  [[nodiscard]] double operator()(Index i, Index j) const { return m_(i, j); }
  [[nodiscard]] const Matrix& matrix() const noexcept { return m_; }
  [[nodiscard]] bool all_finite() const { return m_.allFinite(); }
  [[nodiscard]] double frobenius() const { return m_.norm(); }

  [[nodiscard]] SymMatrix scaled(double t) const;

  friend SymMatrix operator+(const SymMatrix& a, const SymMatrix& b);
  friend SymMatrix operator-(const SymMatrix& a, const SymMatrix& b);
  friend bool operator==(const SymMatrix& a, const SymMatrix& b) { return a.m_ == b.m_; }

 private:
  struct Trusted {};
  SymMatrix(Matrix m, Trusted) : m_(std::move(m)) {}

  Matrix m_;
};

/// Eigenvalues sorted descending; column k of `vectors` belongs to values(k).
struct EigenDecomposition {
  Vector values;
  Matrix vectors;
};

enum class NormKind { Spectral, RowSumInf, ColSumOne };

[[nodiscard]] std::string_view to_string(NormKind kind);

/// Cyclic Jacobi eigensolver. Stops once the off-diagonal Frobenius mass is
/// below 1e-14 * ||S||_F; throws NoConvergence after 100 sweeps.
[[nodiscard]] EigenDecomposition sym_eigen(const SymMatrix& s);

[[nodiscard]] double matrix_norm(const SymMatrix& c, NormKind kind);

[[nodiscard]] double min_eigenvalue(const SymMatrix& s);
[[nodiscard]] double max_eigenvalue(const SymMatrix& s);

inline constexpr double kDefaultPsdTol = 1e-10;

/// min eigenvalue >= -tol * max(1, spectral radius).
[[nodiscard]] bool is_psd(const SymMatrix& s, double tol = kDefaultPsdTol);

/// A <= B in the Loewner order, i.e. B - A is PSD at tolerance `tol`.
[[nodiscard]] bool loewner_leq(const SymMatrix& a, const SymMatrix& b, double tol = kDefaultPsdTol);

/// Symmetric square root; negative eigenvalues are clamped to zero.
[[nodiscard]] SymMatrix psd_sqrt(const SymMatrix& s);

/// Inverse of a positive definite matrix through its eigendecomposition.
/// Raises `failure` when the matrix is not positive or its condition number
/// exceeds `max_condition`.
[[nodiscard]] SymMatrix spd_inverse(const SymMatrix& s, ErrorCode failure, double max_condition = 1e12);

/// Symmetric part of an arbitrary square matrix, without the asymmetry check.
[[nodiscard]] SymMatrix symmetrize(const Matrix& m);

void require_finite(const SymMatrix& s, const char* what);
void require_same_dim(Index a, Index b, const char* what);

}  // namespace robustdx

#endif  // ROBUSTDX_MATLIN_HPP
