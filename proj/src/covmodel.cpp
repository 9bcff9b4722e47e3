#include "robustdx/covmodel.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

#include "golden.hpp"
#include "robustdx/rng.hpp"

namespace robustdx {

namespace {

template <class... Ts>
struct Overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
Overloaded(Ts...) -> Overloaded<Ts...>;

void require_positive(double v, const char* name) {
  if (!(v > 0.0) || !std::isfinite(v)) {
    throw Error(ErrorCode::InvalidArgument, std::string(name) + " must be positive");
  }
}

double compute_eta2(const CovVariant& v, Index n) {
  return std::visit(Overloaded{
                        [](const NormBall& b) { return b.eta2; },
                        [](const MA1& m) { return m.sigma2 * (1.0 + 2.0 * m.rho_max); },
                        [n](const AR1& a) { return a.sigma2 * ar1_lambda_star(n, a.rho_bound, a.grid_points); },
                        [](const HeteroDiag& h) { return h.var_max; },
                        [](const FiniteSet& f) { return f.eta2; },
                    },
                    v);
}

void validate(const CovVariant& v, Index n) {
  if (n < 1) throw Error(ErrorCode::InvalidArgument, "class dimension must be >= 1");
  std::visit(Overloaded{
                 [](const NormBall& b) { require_positive(b.eta2, "eta2"); },
                 [n](const MA1& m) {
                   require_positive(m.sigma2, "sigma2");
                   if (!(m.rho_max >= 0.0)) throw Error(ErrorCode::InvalidArgument, "rho_max must be >= 0");
                   if (m.rho_max > ma1_rho_limit(n)) {
                     throw Error(ErrorCode::InvalidArgument,
                                 "rho_max " + std::to_string(m.rho_max) + " exceeds the PSD limit " +
                                     std::to_string(ma1_rho_limit(n)) + " for N=" + std::to_string(n));
                   }
                 },
                 [](const AR1& a) {
                   require_positive(a.sigma2, "sigma2");
                   if (!(a.rho_bound >= 0.0 && a.rho_bound < 1.0)) {
                     throw Error(ErrorCode::InvalidArgument, "rho_bound must lie in [0, 1)");
                   }
                   if (a.grid_points < 3) throw Error(ErrorCode::InvalidArgument, "grid_points must be >= 3");
                 },
                 [](const HeteroDiag& h) { require_positive(h.var_max, "var_max"); },
                 [n](const FiniteSet& f) {
                   require_positive(f.eta2, "eta2");
                   if (f.members.empty()) throw Error(ErrorCode::InvalidArgument, "finite set needs members");
                   for (const auto& m : f.members) {
                     require_same_dim(m.dim(), n, "finite set member");
                     require_finite(m, "finite set member");
                   }
                 },
             },
             v);
}

bool ma1_contains(const MA1& m, double eta2, const SymMatrix& c, double tol) {
  const Index n = c.dim();
  const double s = c(0, 0);
  if (!(s > 0.0)) return false;
  for (Index i = 0; i < n; ++i) {
    if (std::abs(c(i, i) - s) > tol * s) return false;
    for (Index j = i + 2; j < n; ++j) {
      if (std::abs(c(i, j)) > tol * s) return false;
    }
    if (i + 1 < n && std::abs(c(i, i + 1)) > s * m.rho_max * (1.0 + tol) + tol * s) return false;
  }
  if (matrix_norm(c, NormKind::RowSumInf) > eta2 * (1.0 + tol)) return false;
  return is_psd(c, tol);
}

bool ar1_contains(const AR1& a, double eta2, const SymMatrix& c, double tol) {
  const Index n = c.dim();
  const double s = c(0, 0);
  if (!(s > 0.0)) return false;
  if (n == 1) return s <= eta2 * (1.0 + tol);
  const double rho = c(0, 1) / s;
  if (std::abs(rho) > a.rho_bound * (1.0 + tol) + tol) return false;
  for (Index i = 0; i < n; ++i) {
    for (Index j = i; j < n; ++j) {
      const double expected = s * std::pow(rho, static_cast<double>(j - i));
      if (std::abs(c(i, j) - expected) > tol * s) return false;
    }
  }
  return matrix_norm(c, NormKind::Spectral) <= eta2 * (1.0 + tol);
}

bool hetero_contains(const HeteroDiag& h, const SymMatrix& c, double tol) {
  const Index n = c.dim();
  for (Index i = 0; i < n; ++i) {
    if (!(c(i, i) > 0.0) || c(i, i) > h.var_max * (1.0 + tol)) return false;
    for (Index j = i + 1; j < n; ++j) {
      if (std::abs(c(i, j)) > tol * h.var_max) return false;
    }
  }
  return true;
}

bool finite_contains(const FiniteSet& f, const SymMatrix& c, double tol) {
  return std::any_of(f.members.begin(), f.members.end(), [&](const SymMatrix& m) {
    const double scale = std::max(1.0, m.matrix().cwiseAbs().maxCoeff());
    return (m.matrix() - c.matrix()).cwiseAbs().maxCoeff() <= tol * scale;
  });
}

}  // namespace

CovClass::CovClass(CovVariant variant, Index dim) : variant_(std::move(variant)), dim_(dim) {
  validate(variant_, dim_);
  eta2_ = compute_eta2(variant_, dim_);
}

std::string_view CovClass::name() const {
  return std::visit(Overloaded{
                        [](const NormBall&) { return std::string_view("norm_ball"); },
                        [](const MA1&) { return std::string_view("ma1"); },
                        [](const AR1&) { return std::string_view("ar1"); },
                        [](const HeteroDiag&) { return std::string_view("hetero_diag"); },
                        [](const FiniteSet&) { return std::string_view("finite_set"); },
                    },
                    variant_);
}

CovClass CovClass::rescaled_to(double target_eta2) const {
  require_positive(target_eta2, "eta2");
  const double factor = target_eta2 / eta2_;
  CovVariant v = std::visit(Overloaded{
                                [&](NormBall b) -> CovVariant {
                                  b.eta2 = target_eta2;
                                  return b;
                                },
                                [&](MA1 m) -> CovVariant {
                                  m.sigma2 *= factor;
                                  return m;
                                },
                                [&](AR1 a) -> CovVariant {
                                  a.sigma2 *= factor;
                                  return a;
                                },
                                [&](HeteroDiag h) -> CovVariant {
                                  h.var_max = target_eta2;
                                  return h;
                                },
                                [&](FiniteSet f) -> CovVariant {
                                  for (auto& m : f.members) m = m.scaled(factor);
                                  f.eta2 = target_eta2;
                                  return f;
                                },
                            },
                            variant_);
  return CovClass(std::move(v), dim_);
}

bool contains(const CovClass& cls, const SymMatrix& c, double tol) {
  require_same_dim(c.dim(), cls.dim(), "contains");
  if (!c.all_finite()) return false;
  const double eta2 = cls.effective_eta2();
  return std::visit(Overloaded{
                        [&](const NormBall& b) {
                          return matrix_norm(c, b.kind) <= eta2 * (1.0 + tol) && is_psd(c, tol);
                        },
                        [&](const MA1& m) { return ma1_contains(m, eta2, c, tol); },
                        [&](const AR1& a) { return ar1_contains(a, eta2, c, tol); },
                        [&](const HeteroDiag& h) { return hetero_contains(h, c, tol); },
                        [&](const FiniteSet& f) { return finite_contains(f, c, tol); },
                    },
                    cls.variant());
}

double effective_eta2(const CovClass& cls) { return cls.effective_eta2(); }

ClassExtreme extreme_identity(const CovClass& cls) {
  const double eta2 = cls.effective_eta2();
  return {SymMatrix::identity(cls.dim(), eta2), eta2};
}

bool identity_is_member(const CovClass& cls) {
  if (std::holds_alternative<FiniteSet>(cls.variant())) {
    return contains(cls, extreme_identity(cls).matrix, 1e-9);
  }
  return true;
}

double ma1_rho_limit(Index n) {
  return 1.0 / (2.0 * std::cos(std::numbers::pi / static_cast<double>(n + 1)));
}

double ma1_row_sum(Index n, double rho) {
  if (n == 1) return 1.0;
  if (n == 2) return 1.0 + std::abs(rho);
  return 1.0 + 2.0 * std::abs(rho);
}

SymMatrix ma1_matrix(double sigma2, double rho, Index n) {
  if (n < 1) throw Error(ErrorCode::DimMismatch, "ma1_matrix: N must be >= 1");
  require_positive(sigma2, "sigma2");
  // Smallest eigenvalue of the tridiagonal Toeplitz matrix is
  // sigma2 * (1 - 2|rho| cos(pi/(N+1))).
  if (n > 1 && std::abs(rho) > ma1_rho_limit(n) * (1.0 + 1e-12)) {
    throw Error(ErrorCode::NotPSD, "ma1_matrix: |rho| = " + std::to_string(std::abs(rho)) +
                                       " is too large for N=" + std::to_string(n));
  }
  Matrix m = Matrix::Zero(n, n);
  for (Index i = 0; i < n; ++i) {
    m(i, i) = sigma2;
    if (i + 1 < n) {
      m(i, i + 1) = sigma2 * rho;
      m(i + 1, i) = sigma2 * rho;
    }
  }
  return SymMatrix(m);
}

SymMatrix ar1_matrix(double sigma2, double rho, Index n) {
  if (n < 1) throw Error(ErrorCode::DimMismatch, "ar1_matrix: N must be >= 1");
  if (!(std::abs(rho) < 1.0)) throw Error(ErrorCode::InvalidRho, "ar1_matrix: |rho| must be < 1");
  require_positive(sigma2, "sigma2");
  Matrix m(n, n);
  for (Index i = 0; i < n; ++i) {
    double power = 1.0;
    for (Index j = i; j < n; ++j) {
      m(i, j) = sigma2 * power;
      m(j, i) = m(i, j);
      power *= rho;
    }
  }
  return SymMatrix(m);
}

double ar1_lambda(Index n, double rho) { return max_eigenvalue(ar1_matrix(1.0, rho, n)); }

double ar1_lambda_star(Index n, double rho_bound, int grid_points) {
  if (!(rho_bound >= 0.0 && rho_bound < 1.0)) {
    throw Error(ErrorCode::InvalidArgument, "rho_bound must lie in [0, 1)");
  }
  if (grid_points < 3) throw Error(ErrorCode::InvalidArgument, "grid_points must be >= 3");
  if (n == 1 || rho_bound == 0.0) return 1.0;

  const double step = 2.0 * rho_bound / static_cast<double>(grid_points - 1);
  double best = 1.0;  // rho = 0
  int best_k = -1;
  for (int k = 0; k < grid_points; ++k) {
    const double rho = k + 1 == grid_points ? rho_bound : -rho_bound + step * k;
    const double value = ar1_lambda(n, rho);
    if (value > best) {
      best = value;
      best_k = k;
    }
  }
  if (best_k >= 0) {
    const double center = -rho_bound + step * best_k;
    const double lo = std::max(-rho_bound, center - step);
    const double hi = std::min(rho_bound, center + step);
    const auto refined = detail::golden_max([n](double r) { return ar1_lambda(n, r); }, lo, hi, 1e-10, 200);
    best = std::max(best, refined.second);
  }
  return best;
}

SymMatrix sample_member(const CovClass& cls, std::uint64_t seed, SampleStrategy strategy) {
  Rng rng(seed);
  const Index n = cls.dim();
  const double eta2 = cls.effective_eta2();
  const bool boundary = strategy == SampleStrategy::Boundary;
  const auto level = [&]() { return boundary ? 1.0 : rng.uniform_open_closed(); };

  return std::visit(
      Overloaded{
          [&](const NormBall& b) {
            Matrix g(n, n);
            for (Index j = 0; j < n; ++j) {
              for (Index i = 0; i < n; ++i) g(i, j) = rng.normal();
            }
            const SymMatrix c0 = symmetrize(g.transpose() * g);
            const double u = level();
            return c0.scaled(u * b.eta2 / matrix_norm(c0, b.kind));
          },
          [&](const MA1& m) {
            const double rho = rng.uniform(-m.rho_max, m.rho_max);
            const double s = level() * eta2 / ma1_row_sum(n, rho);
            return ma1_matrix(s, rho, n);
          },
          [&](const AR1& a) {
            const double rho = rng.uniform(-a.rho_bound, a.rho_bound);
            const double s = level() * eta2 / ar1_lambda(n, rho);
            return ar1_matrix(s, rho, n);
          },
          [&](const HeteroDiag& h) {
            Vector d(n);
            for (Index i = 0; i < n; ++i) d(i) = h.var_max * rng.uniform_open_closed();
            if (boundary) d(static_cast<Index>(rng.index(static_cast<std::size_t>(n)))) = h.var_max;
            return SymMatrix::diagonal(d);
          },
          [&](const FiniteSet& f) { return f.members[rng.index(f.members.size())]; },
      },
      cls.variant());
}

}  // namespace robustdx
