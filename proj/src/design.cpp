#include "robustdx/design.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

namespace robustdx {

namespace {

Matrix stack_rows(const Matrix& f, const ExactDesign& d) {
  require_same_dim(d.size(), f.rows(), "design vs design space");
  Matrix x(d.total(), f.cols());
  Index row = 0;
  for (Index i = 0; i < d.size(); ++i) {
    for (int k = 0; k < d.counts()[static_cast<std::size_t>(i)]; ++k) x.row(row++) = f.row(i);
  }
  return x;
}

}  // namespace

DesignSpace::DesignSpace(Matrix points, Matrix regressors)
    : points_(std::move(points)), regressors_(std::move(regressors)) {
  const Index q = regressors_.rows();
  const Index p = regressors_.cols();
  if (p < 1 || q < p) {
    throw Error(ErrorCode::InvalidArgument, "design space needs q >= p >= 1, got q=" + std::to_string(q) +
                                                " p=" + std::to_string(p));
  }
  if (points_.rows() != q) {
    throw Error(ErrorCode::DimMismatch, "design space has " + std::to_string(points_.rows()) + " points but " +
                                            std::to_string(q) + " regressor rows");
  }
  if (!regressors_.allFinite()) throw Error(ErrorCode::NonFinite, "design space regressors");
  const Eigen::JacobiSVD<Matrix> svd(regressors_);
  const Vector& sv = svd.singularValues();
  if (!(sv(p - 1) > 1e-10 * sv(0))) {
    throw Error(ErrorCode::SingularMoment, "design space regressors are not of full column rank");
  }
}

DesignSpace DesignSpace::polynomial(const std::vector<double>& grid, int degree) {
  if (degree < 0) throw Error(ErrorCode::InvalidArgument, "polynomial degree must be >= 0");
  const auto q = static_cast<Index>(grid.size());
  Matrix points(q, 1);
  Matrix f(q, degree + 1);
  for (Index i = 0; i < q; ++i) {
    const double x = grid[static_cast<std::size_t>(i)];
    points(i, 0) = x;
    double power = 1.0;
    for (int j = 0; j <= degree; ++j) {
      f(i, j) = power;
      power *= x;
    }
  }
  return DesignSpace(std::move(points), std::move(f));
}

SymMatrix DesignSpace::regressor_gram() const { return symmetrize(regressors_.transpose() * regressors_); }

DesignMeasure::DesignMeasure(Vector weights) : weights_(std::move(weights)) {
  if (weights_.size() < 1) throw Error(ErrorCode::InvalidArgument, "design measure is empty");
  if (!weights_.allFinite() || weights_.minCoeff() < 0.0) {
    throw Error(ErrorCode::InvalidArgument, "design weights must be finite and nonnegative");
  }
  if (std::abs(weights_.sum() - 1.0) > 1e-12) {
    throw Error(ErrorCode::InvalidArgument, "design weights must sum to one (sum = " +
                                                std::to_string(weights_.sum()) + ")");
  }
}

DesignMeasure DesignMeasure::uniform(Index q) {
  return DesignMeasure(Vector::Constant(q, 1.0 / static_cast<double>(q)));
}

Index DesignMeasure::support_size(double threshold) const { return (weights_.array() > threshold).count(); }

ExactDesign::ExactDesign(std::vector<int> counts) : counts_(std::move(counts)) {
  if (counts_.empty()) throw Error(ErrorCode::InvalidArgument, "exact design is empty");
  for (int c : counts_) {
    if (c < 0) throw Error(ErrorCode::InvalidArgument, "run counts must be nonnegative");
    total_ += c;
  }
}

Matrix model_matrix(const DesignSpace& space, const ExactDesign& d) {
  Matrix x = stack_rows(space.regressors(), d);
  if (x.rows() < space.params()) {
    throw Error(ErrorCode::SingularMoment, "design has N=" + std::to_string(x.rows()) + " runs for p=" +
                                               std::to_string(space.params()) + " parameters");
  }
  (void)moment_inverse(x);
  return x;
}

Matrix replication_map(const ExactDesign& d) {
  Matrix r = Matrix::Zero(d.total(), d.size());
  Index row = 0;
  for (Index i = 0; i < d.size(); ++i) {
    for (int k = 0; k < d.counts()[static_cast<std::size_t>(i)]; ++k) r(row++, i) = 1.0;
  }
  return r;
}

SymMatrix moment_inverse(const Matrix& x) {
  if (x.rows() < x.cols()) throw Error(ErrorCode::SingularMoment, "fewer runs than parameters");
  return spd_inverse(symmetrize(x.transpose() * x), ErrorCode::SingularMoment);
}

OlsSandwich::OlsSandwich(const Matrix& x) : hat_(x.rows(), x.cols()), moment_inverse_(robustdx::moment_inverse(x)) {
  hat_ = x * moment_inverse_.matrix();
}

SymMatrix OlsSandwich::cov(const SymMatrix& c) const {
  require_same_dim(c.dim(), hat_.rows(), "ols_cov: C vs runs");
  return symmetrize(hat_.transpose() * c.matrix() * hat_);
}

SymMatrix ols_cov(const Matrix& x, const SymMatrix& c) {
  require_same_dim(c.dim(), x.rows(), "ols_cov: C vs runs");
  require_finite(c, "ols_cov");
  if (!is_psd(c)) throw Error(ErrorCode::NotPSD, "ols_cov: error covariance is not PSD");
  return OlsSandwich(x).cov(c);
}

DesignSpace linearized_space(const NonlinearModel& model, const DesignSpace& space) {
  if (!model.jacobian) throw Error(ErrorCode::InvalidArgument, "nonlinear model has no jacobian");
  Matrix jac = model.jacobian(model.theta0);
  if (jac.rows() != space.size() || jac.cols() != model.theta0.size()) {
    throw Error(ErrorCode::DimMismatch, "jacobian must be q x p");
  }
  if (!jac.allFinite()) throw Error(ErrorCode::NonFinite, "jacobian at theta0");
  return DesignSpace(space.points(), std::move(jac));
}

Matrix linearized_model_matrix(const NonlinearModel& model, const DesignSpace& space, const ExactDesign& d) {
  return model_matrix(linearized_space(model, space), d);
}

ExactDesign measure_to_exact(const DesignMeasure& xi, int n) {
  const Index q = xi.size();
  if (n < xi.support_size()) {
    throw Error(ErrorCode::InfeasibleN, "N=" + std::to_string(n) + " is below the support size " +
                                            std::to_string(xi.support_size()));
  }
  std::vector<int> counts(static_cast<std::size_t>(q));
  std::vector<double> remainder(static_cast<std::size_t>(q));
  int assigned = 0;
  for (Index i = 0; i < q; ++i) {
    const double target = static_cast<double>(n) * xi.weights()(i);
    const double whole = std::floor(target);
    counts[static_cast<std::size_t>(i)] = static_cast<int>(whole);
    remainder[static_cast<std::size_t>(i)] = target - whole;
    assigned += static_cast<int>(whole);
  }
  std::vector<std::size_t> order(static_cast<std::size_t>(q));
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return remainder[a] > remainder[b]; });
  // The remainders sum to n - assigned < q, so one pass suffices.
  for (std::size_t k = 0; assigned < n; k = (k + 1) % order.size()) {
    ++counts[order[k]];
    ++assigned;
  }
  return ExactDesign(std::move(counts));
}

}  // namespace robustdx
