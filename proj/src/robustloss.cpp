#include "robustdx/robustloss.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "robustdx/criteria.hpp"

namespace robustdx {

namespace {

/// Orthonormal basis of the column span of F.
Matrix column_basis(const DesignSpace& space) {
  const Eigen::HouseholderQR<Matrix> qr(space.regressors());
  return qr.householderQ() * Matrix::Identity(space.size(), space.params());
}

Vector remove_span(const Matrix& basis, const Vector& v) {
  Vector out = v - basis * (basis.transpose() * v);
  // A second pass restores orthogonality lost to cancellation.
  out -= basis * (basis.transpose() * out);
  return out;
}

void require_psd_cov(const SymMatrix& c, Index runs) {
  require_same_dim(c.dim(), runs, "error covariance vs runs");
  require_finite(c, "error covariance");
  if (!is_psd(c)) throw Error(ErrorCode::NotPSD, "error covariance is not PSD");
}

double root_det(const SymMatrix& s) {
  return std::pow(log_space_det(s), 1.0 / static_cast<double>(s.dim()));
}

double d_loss_from(const SymMatrix& cov, const Vector& bias) {
  const double p = static_cast<double>(cov.dim());
  try {
    const SymMatrix inv = spd_inverse(cov, ErrorCode::SingularCov);
    const double quad = bias.dot(inv.matrix() * bias);
    return std::pow(log_space_det(cov) * (1.0 + quad), 1.0 / p);
  } catch (const Error& e) {
    if (e.code() != ErrorCode::SingularCov) throw;
  }
  return root_det(symmetrize(cov.matrix() + bias * bias.transpose()));
}

struct Pieces {
  Matrix x;
  OlsSandwich sandwich;
  Matrix replicate;  // N x q
  Matrix bias_map;   // p x q, psi -> d_psi

  Pieces(const DesignSpace& space, const ExactDesign& d)
      : x(model_matrix(space, d)), sandwich(x), replicate(replication_map(d)),
        bias_map(sandwich.hat().transpose() * replicate) {}
};

/// Projected ascent of det(cov + tau2 * B v v^T B^T) over unit v; used when
/// cov is singular and the determinant lemma is unavailable.
Vector ascend_singular_direction(const SymMatrix& cov, const Matrix& b, double tau2) {
  const Index m = b.cols();
  const auto objective = [&](const Vector& v) {
    const Vector bias = std::sqrt(tau2) * (b * v);
    return log_space_det(symmetrize(cov.matrix() + bias * bias.transpose()));
  };
  Vector best = Vector::Zero(m);
  double best_value = -1.0;
  for (Index start = 0; start < m; ++start) {
    Vector v = Vector::Unit(m, start);
    double value = objective(v);
    double step = 0.5;
    for (int iter = 0; iter < 200 && step > 1e-12; ++iter) {
      Vector grad(m);
      const double h = 1e-6;
      for (Index k = 0; k < m; ++k) {
        Vector probe = v;
        probe(k) += h;
        grad(k) = (objective(probe.normalized()) - value) / h;
      }
      grad -= v * v.dot(grad);
      if (!(grad.norm() > 0.0)) break;
      const Vector trial = (v + step * grad.normalized()).normalized();
      const double tv = objective(trial);
      if (tv > value) {
        v = trial;
        value = tv;
        step = std::min(1.0, step * 1.5);
      } else {
        step *= 0.5;
      }
    }
    if (value > best_value) {
      best_value = value;
      best = v;
    }
  }
  return best;
}

}  // namespace

Contaminant::Contaminant(Vector values, double tau2, const DesignSpace& space)
    : values_(std::move(values)), tau2_(tau2) {
  require_same_dim(values_.size(), space.size(), "contaminant vs design space");
  if (!values_.allFinite()) throw Error(ErrorCode::NonFinite, "contaminant values");
  if (!(tau2_ >= 0.0) || !std::isfinite(tau2_)) throw Error(ErrorCode::InvalidArgument, "tau2 must be >= 0");
  const double norm = values_.norm();
  const double residual = (space.regressors().transpose() * values_).norm();
  if (residual > 1e-10 * space.regressors().norm() * norm) {
    throw Error(ErrorCode::InvalidArgument,
                "contaminant is not orthogonal to the regressors (residual " + std::to_string(residual) + ")");
  }
  if (values_.squaredNorm() > tau2_ * (1.0 + 1e-12)) {
    throw Error(ErrorCode::InvalidArgument, "contaminant exceeds its norm budget");
  }
}

Contaminant Contaminant::zero(const DesignSpace& space, double tau2) {
  return Contaminant(Vector::Zero(space.size()), tau2, space);
}

Matrix orthogonal_complement(const DesignSpace& space) {
  const Eigen::HouseholderQR<Matrix> qr(space.regressors());
  const Matrix full = qr.householderQ();
  return full.rightCols(space.size() - space.params());
}

Projection project_orthogonal(const Vector& raw, const DesignSpace& space, double tau2) {
  require_same_dim(raw.size(), space.size(), "raw contaminant vs design space");
  if (!raw.allFinite()) throw Error(ErrorCode::NonFinite, "raw contaminant");
  if (!(tau2 >= 0.0)) throw Error(ErrorCode::InvalidArgument, "tau2 must be >= 0");
  const Vector projected = remove_span(column_basis(space), raw);
  const double norm = projected.norm();
  if (!(norm > 1e-12 * std::max(raw.norm(), 1e-300))) {
    return {Contaminant::zero(space, tau2), true};
  }
  return {Contaminant(projected * (std::sqrt(tau2) / norm), tau2, space), false};
}

BiasVector bias_vector(const Contaminant& psi, const DesignSpace& space, const ExactDesign& d) {
  const Pieces pieces(space, d);
  return {pieces.bias_map * psi.values()};
}

ILossTerms i_loss(const Contaminant& psi, const DesignSpace& space, const ExactDesign& d, const SymMatrix& c) {
  const Pieces pieces(space, d);
  require_psd_cov(c, pieces.x.rows());
  const Matrix& f = space.regressors();
  const SymMatrix cov = pieces.sandwich.cov(c);
  const Vector bias = pieces.bias_map * psi.values();

  ILossTerms out{};
  for (Index i = 0; i < f.rows(); ++i) {
    const Vector fx = f.row(i).transpose();
    out.variance_term += fx.dot(cov.matrix() * fx);
  }
  out.bias_term = (f * bias).squaredNorm() + psi.values().squaredNorm();
  out.total = out.variance_term + out.bias_term;

  // Prediction error over the space: A (psi_runs + eps) - psi, A = F (X^T X)^{-1} X^T.
  const Matrix a = f * pieces.sandwich.hat().transpose();
  const Vector mean_error = a * (pieces.replicate * psi.values()) - psi.values();
  out.direct_total = (a * c.matrix() * a.transpose()).trace() + mean_error.squaredNorm();

  const double scale = std::max(std::abs(out.total), 1e-300);
  if (std::abs(out.total - out.direct_total) > 1e-8 * scale) {
    throw Error(ErrorCode::Inconsistent, "I-loss decomposition disagrees with direct evaluation: " +
                                             std::to_string(out.total) + " vs " + std::to_string(out.direct_total));
  }
  return out;
}

double d_loss(const Contaminant& psi, const DesignSpace& space, const ExactDesign& d, const SymMatrix& c) {
  const Pieces pieces(space, d);
  require_psd_cov(c, pieces.x.rows());
  return d_loss_from(pieces.sandwich.cov(c), pieces.bias_map * psi.values());
}

double d_loss_direct(const Contaminant& psi, const DesignSpace& space, const ExactDesign& d, const SymMatrix& c) {
  const Pieces pieces(space, d);
  require_psd_cov(c, pieces.x.rows());
  const Vector bias = pieces.bias_map * psi.values();
  return root_det(symmetrize(pieces.sandwich.cov(c).matrix() + bias * bias.transpose()));
}

WorstPsi worst_psi(const DesignSpace& space, const ExactDesign& d, RobustLoss which, const SymMatrix& c,
                   double tau2) {
  if (!(tau2 >= 0.0) || !std::isfinite(tau2)) throw Error(ErrorCode::InvalidArgument, "tau2 must be >= 0");
  const Pieces pieces(space, d);
  require_psd_cov(c, pieces.x.rows());
  const SymMatrix cov = pieces.sandwich.cov(c);
  const Matrix basis = orthogonal_complement(space);
  const Matrix b = pieces.bias_map * basis;  // p x (q-p)

  Vector direction = Vector::Zero(space.size());
  double top = 0.0;
  if (basis.cols() > 0 && tau2 > 0.0) {
    std::optional<SymMatrix> inner;
    if (which == RobustLoss::I) {
      const SymMatrix l = space.regressor_gram();
      inner = symmetrize(b.transpose() * l.matrix() * b + Matrix::Identity(basis.cols(), basis.cols()));
    } else {
      try {
        const SymMatrix inv = spd_inverse(cov, ErrorCode::SingularCov);
        inner = symmetrize(b.transpose() * inv.matrix() * b);
      } catch (const Error& e) {
        if (e.code() != ErrorCode::SingularCov) throw;
      }
    }
    if (inner) {
      const EigenDecomposition ed = sym_eigen(*inner);
      top = ed.values(0);
      direction = basis * ed.vectors.col(0);
    } else {
      direction = basis * ascend_singular_direction(cov, b, tau2);
    }
  }
  const double norm = direction.norm();
  const Vector values = norm > 0.0 ? Vector(direction * (std::sqrt(tau2) / norm)) : Vector::Zero(space.size());
  Contaminant psi(values, tau2, space);

  if (which == RobustLoss::I) {
    const ILossTerms terms = i_loss(psi, space, d, c);
    return {std::move(psi), terms.total, terms.bias_term, top};
  }
  const double value = d_loss_from(cov, pieces.bias_map * psi.values());
  const double psi_free = root_det(cov);
  return {std::move(psi), value, value - psi_free, top};
}

ExtendedMinimax extended_minimax_value(const DesignSpace& space, const ExactDesign& d, const CovClass& cls,
                                       RobustLoss which, double tau2) {
  if (!identity_is_member(cls)) {
    throw Error(ErrorCode::InvalidArgument, "extended minimax needs eta2 * I in the covariance class");
  }
  const SymMatrix extreme = extreme_identity(cls).matrix;
  WorstPsi worst = worst_psi(space, d, which, extreme, tau2);
  if (which == RobustLoss::I) {
    const double cov_part = worst.value - worst.psi_part;
    return {cov_part, worst.psi_part, cov_part + worst.psi_part, std::move(worst.psi)};
  }
  const double cov_part = worst.value - worst.psi_part;
  return {cov_part, worst.psi_part, worst.value, std::move(worst.psi)};
}

}  // namespace robustdx
