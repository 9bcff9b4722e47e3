#include "robustdx/matlin.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>
#include <vector>

namespace robustdx {

namespace {

constexpr int kMaxSweeps = 100;
constexpr double kOffDiagonalTol = 1e-14;
constexpr double kAsymmetryTol = 1e-8;

double off_diagonal_norm(const Matrix& a) {
  double sum = 0.0;
  const Index n = a.rows();
  for (Index j = 0; j < n; ++j) {
    for (Index i = 0; i < n; ++i) {
      if (i != j) sum += a(i, j) * a(i, j);
    }
  }
  return std::sqrt(sum);
}

// One Jacobi rotation annihilating a(p,q), accumulated into v.
void rotate(Matrix& a, Matrix& v, Index p, Index q) {
  const double apq = a(p, q);
  if (apq == 0.0) return;
  const double tau = (a(q, q) - a(p, p)) / (2.0 * apq);
  const double t = (tau >= 0.0 ? 1.0 : -1.0) / (std::abs(tau) + std::hypot(1.0, tau));
  const double c = 1.0 / std::hypot(1.0, t);
  const double s = t * c;
  const Index n = a.rows();
  for (Index k = 0; k < n; ++k) {
    const double akp = a(k, p);
    const double akq = a(k, q);
    a(k, p) = c * akp - s * akq;
    a(k, q) = s * akp + c * akq;
  }
  for (Index k = 0; k < n; ++k) {
    const double apk = a(p, k);
    const double aqk = a(q, k);
    a(p, k) = c * apk - s * aqk;
    a(q, k) = s * apk + c * aqk;
  }
  a(p, q) = 0.0;
  a(q, p) = 0.0;
  for (Index k = 0; k < n; ++k) {
    const double vkp = v(k, p);
    const double vkq = v(k, q);
    v(k, p) = c * vkp - s * vkq;
    v(k, q) = s * vkp + c * vkq;
  }
}

}  // namespace

SymMatrix::SymMatrix(const Matrix& m) {
  if (m.rows() != m.cols()) {
    throw Error(ErrorCode::DimMismatch, "symmetric matrix must be square, got " + std::to_string(m.rows()) +
                                            "x" + std::to_string(m.cols()));
  }
  if (m.rows() < 1) throw Error(ErrorCode::DimMismatch, "symmetric matrix must have dim >= 1");
  const double scale = m.cwiseAbs().maxCoeff();
  const double asym = (m - m.transpose()).cwiseAbs().maxCoeff();
  if (asym > kAsymmetryTol * scale) {
    throw Error(ErrorCode::NotSymmetric,
                "matrix asymmetry " + std::to_string(asym) + " exceeds tolerance relative to " + std::to_string(scale));
  }
  m_ = 0.5 * (m + m.transpose());
}

SymMatrix SymMatrix::identity(Index n, double scale) {
  if (n < 1) throw Error(ErrorCode::DimMismatch, "identity dim must be >= 1");
  return SymMatrix(Matrix::Identity(n, n) * scale, Trusted{});
}

SymMatrix SymMatrix::diagonal(const Vector& d) {
  if (d.size() < 1) throw Error(ErrorCode::DimMismatch, "diagonal dim must be >= 1");
  return SymMatrix(Matrix(d.asDiagonal()), Trusted{});
}

SymMatrix SymMatrix::zero(Index n) {
  if (n < 1) throw Error(ErrorCode::DimMismatch, "zero matrix dim must be >= 1");
  return SymMatrix(Matrix::Zero(n, n), Trusted{});
}

SymMatrix SymMatrix::scaled(double t) const { return SymMatrix(m_ * t, Trusted{}); }

SymMatrix operator+(const SymMatrix& a, const SymMatrix& b) {
  require_same_dim(a.dim(), b.dim(), "matrix sum");
  return SymMatrix(a.m_ + b.m_, SymMatrix::Trusted{});
}

SymMatrix operator-(const SymMatrix& a, const SymMatrix& b) {
  require_same_dim(a.dim(), b.dim(), "matrix difference");
  return SymMatrix(a.m_ - b.m_, SymMatrix::Trusted{});
}

SymMatrix symmetrize(const Matrix& m) {
  if (m.rows() != m.cols() || m.rows() < 1) {
    throw Error(ErrorCode::DimMismatch, "symmetrize needs a non-empty square matrix");
  }
  // Routed through the checked constructor with an exactly symmetric input.
  Matrix s = 0.5 * (m + m.transpose());
  return SymMatrix(s);
}

std::string_view to_string(NormKind kind) {
  switch (kind) {
    case NormKind::Spectral: return "spectral";
    case NormKind::RowSumInf: return "row_sum_inf";
    case NormKind::ColSumOne: return "col_sum_one";
  }
  return "unknown";
}

void require_finite(const SymMatrix& s, const char* what) {
  if (!s.all_finite()) throw Error(ErrorCode::NonFinite, std::string(what) + ": matrix has NaN/Inf entries");
}

void require_same_dim(Index a, Index b, const char* what) {
  if (a != b) {
    throw Error(ErrorCode::DimMismatch,
                std::string(what) + ": dimension " + std::to_string(a) + " vs " + std::to_string(b));
  }
}

EigenDecomposition sym_eigen(const SymMatrix& s) {
  require_finite(s, "sym_eigen");
  const Index n = s.dim();
  Matrix a = s.matrix();
  Matrix v = Matrix::Identity(n, n);
  const double threshold = kOffDiagonalTol * a.norm();

  int sweep = 0;
  while (off_diagonal_norm(a) > threshold) {
    if (sweep++ >= kMaxSweeps) {
      throw Error(ErrorCode::NoConvergence, "Jacobi sweeps exhausted for dim " + std::to_string(n));
    }
    for (Index p = 0; p + 1 < n; ++p) {
      for (Index q = p + 1; q < n; ++q) rotate(a, v, p, q);
    }
  }

  std::vector<Index> order(static_cast<std::size_t>(n));
  std::iota(order.begin(), order.end(), Index{0});
  std::stable_sort(order.begin(), order.end(), [&a](Index i, Index j) { return a(i, i) > a(j, j); });

  EigenDecomposition out{Vector(n), Matrix(n, n)};
  for (Index k = 0; k < n; ++k) {
    out.values(k) = a(order[static_cast<std::size_t>(k)], order[static_cast<std::size_t>(k)]);
    out.vectors.col(k) = v.col(order[static_cast<std::size_t>(k)]);
  }
  return out;
}

double matrix_norm(const SymMatrix& c, NormKind kind) {
  require_finite(c, "matrix_norm");
  switch (kind) {
    case NormKind::Spectral: {
      const Vector ev = sym_eigen(c).values;
      return std::max(std::abs(ev(0)), std::abs(ev(ev.size() - 1)));
    }
    case NormKind::RowSumInf:
      return c.matrix().cwiseAbs().rowwise().sum().maxCoeff();
    case NormKind::ColSumOne:
      return c.matrix().cwiseAbs().colwise().sum().maxCoeff();
  }
  return 0.0;
}

double min_eigenvalue(const SymMatrix& s) {
  const Vector ev = sym_eigen(s).values;
  return ev(ev.size() - 1);
}

double max_eigenvalue(const SymMatrix& s) { return sym_eigen(s).values(0); }

bool is_psd(const SymMatrix& s, double tol) {
  if (tol < 0.0) throw Error(ErrorCode::InvalidArgument, "PSD tolerance must be >= 0");
  const Vector ev = sym_eigen(s).values;
  const double lo = ev(ev.size() - 1);
  const double radius = std::max(std::abs(ev(0)), std::abs(lo));
  return lo >= -tol * std::max(1.0, radius);
}

bool loewner_leq(const SymMatrix& a, const SymMatrix& b, double tol) {
  require_same_dim(a.dim(), b.dim(), "loewner_leq");
  return is_psd(b - a, tol);
}

SymMatrix psd_sqrt(const SymMatrix& s) {
  const EigenDecomposition ed = sym_eigen(s);
  const Index n = s.dim();
  const double lo = ed.values(n - 1);
  const double radius = std::max(std::abs(ed.values(0)), std::abs(lo));
  if (lo < -1e-8 * radius) {
    throw Error(ErrorCode::NotPSD, "psd_sqrt: min eigenvalue " + std::to_string(lo));
  }
  const Vector root = ed.values.cwiseMax(0.0).cwiseSqrt();
  return symmetrize(ed.vectors * root.asDiagonal() * ed.vectors.transpose());
}

SymMatrix spd_inverse(const SymMatrix& s, ErrorCode failure, double max_condition) {
  const EigenDecomposition ed = sym_eigen(s);
  const Index n = s.dim();
  const double hi = ed.values(0);
  const double lo = ed.values(n - 1);
  if (!(hi > 0.0) || !(lo > 0.0) || hi > max_condition * lo) {
    throw Error(failure, "matrix is singular or ill-conditioned (eigenvalues in [" + std::to_string(lo) + ", " +
                             std::to_string(hi) + "])");
  }
  const Vector inv = ed.values.cwiseInverse();
  return symmetrize(ed.vectors * inv.asDiagonal() * ed.vectors.transpose());
}

}  // namespace robustdx
