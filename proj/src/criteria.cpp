#include "robustdx/criteria.hpp"

#include <algorithm>
#include <cmath>

namespace robustdx {

Criterion Criterion::L(const SymMatrix& weight) {
  require_finite(weight, "L-criterion weight");
  if (!is_psd(weight)) throw Error(ErrorCode::NotPSD, "L-criterion weight must be PSD");
  return Criterion(Kind::L, weight);
}

Criterion Criterion::I(const DesignSpace& space) { return Criterion(Kind::I, space.regressor_gram()); }

std::string Criterion::name() const {
  switch (kind_) {
    case Kind::A: return "A";
    case Kind::D: return "D";
    case Kind::E: return "E";
    case Kind::L: return "L";
    case Kind::I: return "I";
  }
  return "?";
}

double log_space_det(const SymMatrix& s) {
  const Vector ev = sym_eigen(s).values;
  if (!(ev(ev.size() - 1) > 0.0)) return 0.0;
  double log_sum = 0.0;
  for (Index i = 0; i < ev.size(); ++i) log_sum += std::log(ev(i));
  return std::exp(log_sum);
}

double phi_unchecked(const Criterion& c, const SymMatrix& s) {
  switch (c.kind()) {
    case Criterion::Kind::A:
      return s.matrix().trace();
    case Criterion::Kind::D:
      return log_space_det(s);
    case Criterion::Kind::E:
      return max_eigenvalue(s);
    case Criterion::Kind::L:
    case Criterion::Kind::I: {
      const Matrix& w = c.weight()->matrix();
      require_same_dim(w.rows(), s.dim(), "criterion weight vs covariance");
      return w.cwiseProduct(s.matrix()).sum();
    }
  }
  return 0.0;
}

double phi(const Criterion& c, const SymMatrix& s) {
  require_finite(s, "phi");
  if (c.weight()) require_same_dim(c.weight()->dim(), s.dim(), "criterion weight vs covariance");
  if (!is_psd(s)) throw Error(ErrorCode::NotPSD, "criterion input is not PSD");
  return phi_unchecked(c, s);
}

double design_loss(const Criterion& c, const Matrix& x, const SymMatrix& cov) {
  return phi(c, ols_cov(x, cov));
}

bool monotone_pair_check(const Criterion& c, const SymMatrix& s1, const SymMatrix& s2) {
  const double lo = phi(c, s1);
  const double hi = phi(c, s2);
  return lo <= hi + 1e-10 * std::max(1.0, std::abs(hi));
}

}  // namespace robustdx
