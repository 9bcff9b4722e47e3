#include "robustdx/worstcase.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <limits>
#include <string>
#include <thread>

#include "golden.hpp"
#include "robustdx/rng.hpp"

namespace robustdx {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();
constexpr double kFdStep = 1e-5;
constexpr int kMaxHalvings = 30;
constexpr double kStallTol = 1e-10;
constexpr int kStallIters = 3;

/// Counted loss evaluations with a hard cap.
class LossOracle {
 public:
  LossOracle(const Criterion& c, const OlsSandwich& sandwich, long budget)
      : c_(c), sandwich_(sandwich), budget_(budget) {}

  [[nodiscard]] bool exhausted() const { return used_ >= budget_; }
  [[nodiscard]] long used() const { return used_; }

  /// Returns -inf once the budget is spent.
  double operator()(const SymMatrix& cov) {
    if (exhausted()) return kNegInf;
    ++used_;
    const double v = phi_unchecked(c_, sandwich_.cov(cov));
    if (std::isfinite(v) && v > best_value_) {
      best_value_ = v;
      best_ = cov;
    }
    return std::isfinite(v) ? v : kNegInf;
  }

  [[nodiscard]] double best_value() const { return best_value_; }
  [[nodiscard]] const std::optional<SymMatrix>& best() const { return best_; }

 private:
  const Criterion& c_;
  const OlsSandwich& sandwich_;
  long budget_;
  long used_ = 0;
  double best_value_ = kNegInf;
  std::optional<SymMatrix> best_;
};

struct Candidate {
  std::optional<SymMatrix> matrix;
  double value = kNegInf;
  long evaluations = 0;
};

void merge_into(Candidate& acc, const Candidate& other) {
  acc.evaluations += other.evaluations;
  if (other.matrix && other.value > acc.value) {
    acc.value = other.value;
    acc.matrix = other.matrix;
  }
}

Candidate from_oracle(const LossOracle& oracle) { return {oracle.best(), oracle.best_value(), oracle.used()}; }

// Boundary samples drawn from stream `stream_base + k` of the seed.
void sample_phase(const CovClass& cls, LossOracle& oracle, long count, std::uint64_t seed) {
  for (long k = 0; k < count && !oracle.exhausted(); ++k) {
    oracle(sample_member(cls, split_seed(seed, static_cast<std::uint64_t>(k)), SampleStrategy::Boundary));
  }
}

// --- norm balls -------------------------------------------------------------

/// C = R^T R rescaled so that ||C||_kind == eta2.
std::optional<SymMatrix> boundary_point(const Matrix& r, const NormBall& ball) {
  const SymMatrix c0 = symmetrize(r.transpose() * r);
  const double nrm = matrix_norm(c0, ball.kind);
  if (!(nrm > 0.0) || !std::isfinite(nrm)) return std::nullopt;
  return c0.scaled(ball.eta2 / nrm);
}

Matrix perturbed_identity(Index n, std::uint64_t seed) {
  Rng rng(seed);
  Matrix r = Matrix::Identity(n, n);
  for (Index j = 0; j < n; ++j) {
    for (Index i = 0; i < n; ++i) r(i, j) += 0.3 * rng.normal();
  }
  return r;
}

/// One ascent from `r` until it stalls or the oracle runs dry.
void ascend(const NormBall& ball, LossOracle& oracle, Matrix r) {
  const auto value_at = [&](const Matrix& m) {
    const auto point = boundary_point(m, ball);
    return point ? oracle(*point) : kNegInf;
  };

  double current = value_at(r);
  double step = 0.1;
  int stalls = 0;
  const Index n = r.rows();
  Matrix grad(n, n);
  while (!oracle.exhausted() && std::isfinite(current)) {
    const double h = kFdStep * std::max(r.cwiseAbs().maxCoeff(), 1e-300);
    for (Index j = 0; j < n && !oracle.exhausted(); ++j) {
      for (Index i = 0; i < n && !oracle.exhausted(); ++i) {
        const double saved = r(i, j);
        r(i, j) = saved + h;
        const double f = value_at(r);
        r(i, j) = saved;
        grad(i, j) = std::isfinite(f) ? (f - current) / h : 0.0;
      }
    }
    if (oracle.exhausted()) break;
    const double gnorm = grad.norm();
    if (!(gnorm > 0.0)) break;
    const Matrix direction = grad * (r.norm() / gnorm);

    bool improved = false;
    double t = step;
    for (int halving = 0; halving <= kMaxHalvings && !oracle.exhausted(); ++halving, t *= 0.5) {
      const Matrix trial = r + t * direction;
      const double f = value_at(trial);
      if (f > current) {
        const double gain = (f - current) / std::max(std::abs(current), 1e-300);
        stalls = gain < kStallTol ? stalls + 1 : 0;
        r = trial;
        current = f;
        step = std::min(2.0 * t, 1.0);
        improved = true;
        break;
      }
    }
    if (!improved || stalls >= kStallIters) break;
  }
}

/// Ascent from `start`; budget left after a stall goes to fresh perturbed
/// starts drawn from `seed`.
Candidate projected_ascent(const NormBall& ball, const Criterion& c, const OlsSandwich& sandwich, Matrix start,
                           long budget, std::uint64_t seed) {
  LossOracle oracle(c, sandwich, budget);
  const Index n = start.rows();
  ascend(ball, oracle, std::move(start));
  for (std::uint64_t k = 0; !oracle.exhausted(); ++k) {
    const long before = oracle.used();
    ascend(ball, oracle, perturbed_identity(n, split_seed(seed, k)));
    if (oracle.used() == before) break;
  }
  return from_oracle(oracle);
}

Candidate search_norm_ball(const CovClass& cls, const NormBall& ball, const Criterion& c,
                           const OlsSandwich& sandwich, const SearchOptions& options) {
  const Index n = cls.dim();
  const int restarts = std::max(options.restarts, 0);
  const long sample_budget = restarts == 0 ? options.budget : std::max(1L, options.budget / 2);
  LossOracle sampler(c, sandwich, sample_budget);
  sample_phase(cls, sampler, sample_budget, split_seed(options.seed, 1));
  Candidate result = from_oracle(sampler);
  if (restarts == 0) return result;

  const long remaining = options.budget - sampler.used();
  std::vector<long> budgets(static_cast<std::size_t>(restarts), remaining / restarts);
  for (long k = 0; k < remaining % restarts; ++k) ++budgets[static_cast<std::size_t>(k)];

  std::vector<Matrix> starts;
  starts.reserve(static_cast<std::size_t>(restarts));
  for (int k = 0; k < restarts; ++k) {
    if (k == 0 && result.matrix) {
      starts.push_back(psd_sqrt(*result.matrix).matrix());
      continue;
    }
    starts.push_back(perturbed_identity(n, split_seed(options.seed, 1000 + static_cast<std::uint64_t>(k))));
  }

  std::vector<Candidate> outcomes(static_cast<std::size_t>(restarts));
  const auto run = [&](std::size_t k) {
    outcomes[k] = projected_ascent(ball, c, sandwich, starts[k], budgets[k],
                                   split_seed(options.seed, 2000 + static_cast<std::uint64_t>(k)));
  };
  const unsigned workers = std::min<unsigned>(worker_threads(options.threads), static_cast<unsigned>(restarts));
  if (workers <= 1) {
    for (std::size_t k = 0; k < outcomes.size(); ++k) run(k);
  } else {
    std::vector<std::thread> pool;
    for (unsigned w = 0; w < workers; ++w) {
      pool.emplace_back([&, w] {
        for (std::size_t k = w; k < outcomes.size(); k += workers) run(k);
      });
    }
    for (auto& t : pool) t.join();
  }
  // Merged in restart order, so the outcome does not depend on scheduling.
  for (const auto& o : outcomes) merge_into(result, o);
  return result;
}

// --- structured classes ---------------------------------------------------

/// Member on the class boundary along the rho path.
SymMatrix path_member(const CovClass& cls, double rho) {
  const Index n = cls.dim();
  const double eta2 = cls.effective_eta2();
  if (std::holds_alternative<MA1>(cls.variant())) return ma1_matrix(eta2 / ma1_row_sum(n, rho), rho, n);
  return ar1_matrix(eta2 / ar1_lambda(n, rho), rho, n);
}

Candidate search_rho_path(const CovClass& cls, double rho_range, const Criterion& c, const OlsSandwich& sandwich,
                          const SearchOptions& options) {
  LossOracle oracle(c, sandwich, options.budget);
  const long samples = options.budget / 2;
  sample_phase(cls, oracle, samples, split_seed(options.seed, 1));

  const long rest = options.budget - oracle.used();
  const long grid = std::max(1L, std::min(rest * 3 / 4, 4001L));
  const auto along = [&](double rho) { return oracle(path_member(cls, rho)); };
  double best_rho = 0.0;
  double best = kNegInf;
  for (long k = 0; k < grid && !oracle.exhausted(); ++k) {
    const double rho = grid == 1 ? 0.0 : -rho_range + 2.0 * rho_range * static_cast<double>(k) / (grid - 1);
    const double v = along(rho);
    if (v > best) {
      best = v;
      best_rho = rho;
    }
  }
  if (!oracle.exhausted() && grid > 1) {
    const double width = 2.0 * rho_range / static_cast<double>(grid - 1);
    const double lo = std::max(-rho_range, best_rho - width);
    const double hi = std::min(rho_range, best_rho + width);
    (void)detail::golden_max(along, lo, hi, 1e-10, options.budget - oracle.used());
  }
  sample_phase(cls, oracle, options.budget - oracle.used(), split_seed(options.seed, 2));
  return from_oracle(oracle);
}

Candidate search_hetero(const CovClass& cls, const HeteroDiag& h, const Criterion& c, const OlsSandwich& sandwich,
                        const SearchOptions& options) {
  LossOracle oracle(c, sandwich, options.budget);
  sample_phase(cls, oracle, std::max(1L, options.budget / 2), split_seed(options.seed, 1));
  if (!oracle.best()) return from_oracle(oracle);

  Vector d = oracle.best()->matrix().diagonal();
  const Index n = cls.dim();
  const double floor = h.var_max * 1e-12;
  for (int sweep = 0; sweep < 8 && !oracle.exhausted(); ++sweep) {
    for (Index i = 0; i < n && !oracle.exhausted(); ++i) {
      const auto along = [&](double v) {
        Vector trial = d;
        trial(i) = v;
        return oracle(SymMatrix::diagonal(trial));
      };
      const double at_top = along(h.var_max);
      const auto [arg, value] = detail::golden_max(along, floor, h.var_max, 1e-9 * h.var_max, 60);
      d(i) = at_top >= value ? h.var_max : arg;
    }
  }
  sample_phase(cls, oracle, options.budget - oracle.used(), split_seed(options.seed, 2));
  return from_oracle(oracle);
}

Candidate search_finite(const FiniteSet& f, const Criterion& c, const OlsSandwich& sandwich, long budget) {
  LossOracle oracle(c, sandwich, budget);
  for (const auto& m : f.members) oracle(m);
  return from_oracle(oracle);
}

}  // namespace

unsigned worker_threads(unsigned requested) {
  if (requested > 0) return requested;
  if (const char* env = std::getenv("ROBUSTDX_THREADS")) {
    const long v = std::strtol(env, nullptr, 10);
    if (v > 0) return static_cast<unsigned>(v);
  }
  return std::max(1U, std::thread::hardware_concurrency());
}

double analytic_max(const CovClass& cls, const Criterion& c, const Matrix& x) {
  require_same_dim(cls.dim(), x.rows(), "analytic_max: class vs runs");
  return design_loss(c, x, extreme_identity(cls).matrix);
}

SearchResult search_max(const CovClass& cls, const Criterion& c, const Matrix& x, const SearchOptions& options) {
  if (options.budget < 1) throw Error(ErrorCode::InvalidArgument, "search budget must be >= 1");
  require_same_dim(cls.dim(), x.rows(), "search_max: class vs runs");
  const OlsSandwich sandwich(x);

  Candidate best;
  if (const auto* ball = std::get_if<NormBall>(&cls.variant())) {
    best = search_norm_ball(cls, *ball, c, sandwich, options);
  } else if (const auto* ma = std::get_if<MA1>(&cls.variant())) {
    best = search_rho_path(cls, ma->rho_max, c, sandwich, options);
  } else if (const auto* ar = std::get_if<AR1>(&cls.variant())) {
    best = search_rho_path(cls, ar->rho_bound, c, sandwich, options);
  } else if (const auto* h = std::get_if<HeteroDiag>(&cls.variant())) {
    best = search_hetero(cls, *h, c, sandwich, options);
  } else {
    best = search_finite(std::get<FiniteSet>(cls.variant()), c, sandwich, options.budget);
  }
  if (!best.matrix) throw Error(ErrorCode::NoConvergence, "search produced no feasible candidate");
  return {*best.matrix, best.value, best.evaluations};
}

WorstCaseReport verify_lemma(const CovClass& cls, const Criterion& c, const Matrix& x, const SearchOptions& options,
                             std::optional<double> tol_certify) {
  WorstCaseReport report;
  report.analytic_value = analytic_max(cls, c, x);
  report.analytic_attained = identity_is_member(cls);
  report.tol_certify = tol_certify.value_or(1e-7 * std::max(1.0, std::abs(report.analytic_value)));

  Candidate best;
  if (report.analytic_attained) {
    const ClassExtreme extreme = extreme_identity(cls);
    best = {extreme.matrix, report.analytic_value, 1};
  }
  const long budget = (!report.analytic_attained && options.budget < 1) ? 1 : options.budget;
  if (budget >= 1) {
    SearchOptions opts = options;
    opts.budget = budget;
    const SearchResult found = search_max(cls, c, x, opts);
    merge_into(best, Candidate{found.argmax, found.value, found.evaluations});
  }
  report.searched_value = best.value;
  report.searched_argmax = *best.matrix;
  report.evaluations = best.evaluations;
  report.gap = report.analytic_value - report.searched_value;
  report.pass = report.gap >= -report.tol_certify;
  return report;
}

std::size_t tolerant_argmin(const std::vector<double>& values) {
  if (values.empty()) throw Error(ErrorCode::InvalidArgument, "argmin of an empty list");
  const double lo = *std::min_element(values.begin(), values.end());
  const double slack = 1e-12 * std::max(std::abs(lo), 1e-300);
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (values[i] <= lo + slack) return i;
  }
  return 0;
}

MinimaxReport minimax_check(const std::vector<ExactDesign>& designs, const DesignSpace& space,
                            const ClassBuilder& class_builder, const Criterion& c) {
  if (designs.empty()) throw Error(ErrorCode::InvalidArgument, "minimax_check needs at least one design");
  MinimaxReport report;
  for (const auto& d : designs) {
    const Matrix x = model_matrix(space, d);
    const CovClass cls = class_builder(x.rows());
    report.worst_case_values.push_back(analytic_max(cls, c, x));
    report.iid_values.push_back(design_loss(c, x, SymMatrix::identity(x.rows())));
  }
  report.argmin = tolerant_argmin(report.worst_case_values);
  report.iid_argmin = tolerant_argmin(report.iid_values);
  report.agrees_with_iid_optimum = report.argmin == report.iid_argmin;
  return report;
}

}  // namespace robustdx
