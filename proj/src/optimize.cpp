#include "robustdx/optimize.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "golden.hpp"
#include "robustdx/rng.hpp"

namespace robustdx {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kPruneBelow = 1e-8;
constexpr int kMaxRestarts = 3;

Matrix weighted_gram(const Matrix& f, const Vector& w) { return f.transpose() * w.asDiagonal() * f; }

std::optional<SymMatrix> try_inverse(const Matrix& m) {
  try {
    return spd_inverse(symmetrize(m), ErrorCode::SingularMoment);
  } catch (const Error& e) {
    if (e.code() != ErrorCode::SingularMoment) throw;
    return std::nullopt;
  }
}

Vector jittered_uniform(Index q, int attempt) {
  Rng rng(split_seed(0x5eed, static_cast<std::uint64_t>(attempt)));
  Vector w(q);
  for (Index i = 0; i < q; ++i) w(i) = 1.0 + 0.1 * rng.uniform();
  return w / w.sum();
}

Vector pruned(const Vector& w) {
  Vector out = (w.array() < kPruneBelow).select(0.0, w);
  return out / out.sum();
}

struct Progress {
  Vector weights;
  double value;
  int iterations;
  bool converged;
};

Progress multiplicative_d(const DesignSpace& space, Vector w, const OptimizeOptions& options) {
  const Matrix& f = space.regressors();
  const double p = static_cast<double>(space.params());
  for (int iter = 0; iter < options.max_iter; ++iter) {
    const auto inv = try_inverse(weighted_gram(f, w));
    if (!inv) throw Error(ErrorCode::SingularMoment, "moment matrix became singular");
    const Vector d = (f * inv->matrix()).cwiseProduct(f).rowwise().sum();
    if (d.maxCoeff() <= p * (1.0 + options.tol)) {
      return {w, log_space_det(*inv), iter, true};
    }
    w = w.cwiseProduct(d) / p;
    w /= w.sum();
    if (options.observer) options.observer(iter + 1, w, measure_loss(space, Criterion::D(), w));
  }
  return {w, measure_loss(space, Criterion::D(), w), options.max_iter, false};
}

/// Directional sensitivities f^T M^{-1} W M^{-1} f of Phi(M^{-1}) at each point.
Vector sensitivities(const DesignSpace& space, const Criterion& c, const SymMatrix& inv) {
  const Matrix& f = space.regressors();
  const Index p = space.params();
  Matrix weight;
  switch (c.kind()) {
    case Criterion::Kind::A: weight = Matrix::Identity(p, p); break;
    case Criterion::Kind::E: {
      const EigenDecomposition ed = sym_eigen(inv);
      weight = ed.vectors.col(0) * ed.vectors.col(0).transpose();
      break;
    }
    case Criterion::Kind::L:
    case Criterion::Kind::I: weight = c.weight()->matrix(); break;
    case Criterion::Kind::D: weight = inv.matrix(); break;
  }
  const Matrix g = f * inv.matrix();
  return (g * weight).cwiseProduct(g).rowwise().sum();
}

Progress vertex_exchange(const DesignSpace& space, const Criterion& c, Vector w, const OptimizeOptions& options) {
  double value = measure_loss(space, c, w);
  if (!std::isfinite(value)) throw Error(ErrorCode::SingularMoment, "starting design is singular");
  const Index q = space.size();
  for (int iter = 0; iter < options.max_iter; ++iter) {
    const auto inv = try_inverse(weighted_gram(space.regressors(), w));
    if (!inv) throw Error(ErrorCode::SingularMoment, "moment matrix became singular");
    const Vector s = sensitivities(space, c, *inv);
    Index best = 0;
    s.maxCoeff(&best);
    Index worst = -1;
    for (Index i = 0; i < q; ++i) {
      if (w(i) > 0.0 && (worst < 0 || s(i) < s(worst))) worst = i;
    }

    Vector candidate = w;
    double candidate_value = value;
    const auto consider = [&](const Vector& trial) {
      const double v = measure_loss(space, c, trial);
      if (v < candidate_value) {
        candidate_value = v;
        candidate = trial;
      }
    };
    if (worst != best) {
      const double mass = w(worst);
      const auto shifted = [&](double delta) {
        Vector t = w;
        t(worst) -= delta;
        t(best) += delta;
        t(worst) = std::max(t(worst), 0.0);
        return t;
      };
      const auto [delta, neg] = detail::golden_max(
          [&](double dl) { return -measure_loss(space, c, shifted(dl)); }, 0.0, mass, 1e-15, 200);
      (void)neg;
      consider(shifted(delta));
      consider(shifted(mass));
    }
    const auto toward = [&](double alpha) {
      Vector t = (1.0 - alpha) * w;
      t(best) += alpha;
      return t;
    };
    const auto [alpha, neg] = detail::golden_max(
        [&](double a) { return -measure_loss(space, c, toward(a)); }, 0.0, 1.0, 1e-15, 200);
    (void)neg;
    consider(toward(alpha));

    // The worst-to-best move can stall where the criterion is not smooth
    // (E with nearly tied eigenvalues); try every other exchange first.
    if (value - candidate_value < options.tol * std::abs(value)) {
      for (Index from = 0; from < q; ++from) {
        if (w(from) <= 0.0) continue;
        for (Index to = 0; to < q; ++to) {
          if (to == from) continue;
          const auto moved = [&](double delta) {
            Vector t = w;
            t(from) = std::max(t(from) - delta, 0.0);
            t(to) += delta;
            return t;
          };
          const auto [delta, neg] = detail::golden_max(
              [&](double dl) { return -measure_loss(space, c, moved(dl)); }, 0.0, w(from), 1e-15, 200);
          (void)neg;
          consider(moved(delta));
          consider(moved(w(from)));
        }
      }
    }

    const double improvement = value - candidate_value;
    if (improvement <= 0.0 || improvement < options.tol * std::abs(value)) {
      if (improvement > 0.0) {
        w = candidate / candidate.sum();
        value = measure_loss(space, c, w);
      }
      return {w, value, iter, true};
    }
    w = candidate / candidate.sum();
    value = measure_loss(space, c, w);
    if (options.observer) options.observer(iter + 1, w, value);
  }
  return {w, value, options.max_iter, false};
}

}  // namespace

SymMatrix moment_matrix(const DesignSpace& space, const DesignMeasure& xi) {
  require_same_dim(xi.size(), space.size(), "design measure vs design space");
  return symmetrize(weighted_gram(space.regressors(), xi.weights()));
}

double measure_loss(const DesignSpace& space, const Criterion& c, const Vector& weights) {
  const auto inv = try_inverse(weighted_gram(space.regressors(), weights));
  return inv ? phi_unchecked(c, *inv) : kInf;
}

OptimizationResult optimize_measure(const DesignSpace& space, const Criterion& c, const OptimizeOptions& options) {
  if (options.max_iter < 1) throw Error(ErrorCode::InvalidArgument, "max_iter must be >= 1");
  if (!(options.tol > 0.0)) throw Error(ErrorCode::InvalidArgument, "tol must be positive");
  const Index q = space.size();
  Vector start = Vector::Constant(q, 1.0 / static_cast<double>(q));

  for (int attempt = 0;; ++attempt) {
    try {
      Progress run = c.kind() == Criterion::Kind::D ? multiplicative_d(space, start, options)
                                                    : vertex_exchange(space, c, start, options);
      if (!run.converged) {
        throw Error(ErrorCode::NoConvergence,
                    "design optimization did not converge in " + std::to_string(options.max_iter) + " iterations");
      }
      Vector w = run.weights;
      double value = run.value;
      const Vector trimmed = pruned(w);
      const double trimmed_value = measure_loss(space, c, trimmed);
      const bool keeps_certificate =
          c.kind() != Criterion::Kind::D ||
          equivalence_gap(space, DesignMeasure(trimmed)) <= static_cast<double>(space.params()) * options.tol;
      if (keeps_certificate && trimmed_value <= value + 1e-9 * std::max(1.0, std::abs(value))) {
        w = trimmed;
        value = std::min(value, trimmed_value);
      }
      return {DesignMeasure(w), std::nullopt, value, run.iterations, true};
    } catch (const Error& e) {
      if (e.code() != ErrorCode::SingularMoment || attempt >= kMaxRestarts) throw;
      start = jittered_uniform(q, attempt);
    }
  }
}

double equivalence_gap(const DesignSpace& space, const DesignMeasure& xi) {
  const SymMatrix inv = spd_inverse(moment_matrix(space, xi), ErrorCode::SingularMoment);
  const Matrix& f = space.regressors();
  const Vector d = (f * inv.matrix()).cwiseProduct(f).rowwise().sum();
  return std::max(0.0, d.maxCoeff() - static_cast<double>(space.params()));
}

std::vector<ExactDesign> single_swap_competitors(const DesignSpace& space, const ExactDesign& d) {
  std::vector<ExactDesign> out;
  const auto admit = [&](const ExactDesign& e) {
    if (e == d || std::find(out.begin(), out.end(), e) != out.end()) return;
    try {
      (void)model_matrix(space, e);
    } catch (const Error& err) {
      if (err.code() != ErrorCode::SingularMoment) throw;
      return;
    }
    out.push_back(e);
  };
  const std::size_t q = d.counts().size();
  for (std::size_t from = 0; from < q; ++from) {
    if (d.counts()[from] == 0) continue;
    for (std::size_t to = 0; to < q; ++to) {
      if (to == from) continue;
      std::vector<int> counts = d.counts();
      --counts[from];
      ++counts[to];
      admit(ExactDesign(std::move(counts)));
    }
  }
  if (d.total() >= static_cast<int>(q)) admit(measure_to_exact(DesignMeasure::uniform(space.size()), d.total()));
  return out;
}

PipelineResult pipeline_minimax(const DesignSpace& space, const Criterion& c, const ClassBuilder& class_builder,
                                int n, const SearchOptions& search, const OptimizeOptions& optimize,
                                std::optional<double> tol_certify) {
  OptimizationResult xi0 = optimize_measure(space, c, optimize);
  ExactDesign exact = measure_to_exact(xi0.xi, n);
  xi0.exact = exact;
  const Matrix x = model_matrix(space, exact);
  const CovClass cls = class_builder(x.rows());
  WorstCaseReport lemma = verify_lemma(cls, c, x, search, tol_certify);

  std::vector<ExactDesign> candidates{exact};
  for (auto& e : single_swap_competitors(space, exact)) candidates.push_back(std::move(e));
  MinimaxReport minimax = minimax_check(candidates, space, class_builder, c);
  const auto& worst = minimax.worst_case_values;
  const double lo = *std::min_element(worst.begin(), worst.end());
  const bool is_minimax = worst.front() <= lo + 1e-9 * std::max(1.0, std::abs(lo));
  return {std::move(xi0), std::move(exact), std::move(lemma), std::move(candidates), std::move(minimax), is_minimax};
}

}  // namespace robustdx
