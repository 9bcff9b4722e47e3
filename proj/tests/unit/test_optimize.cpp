#include <cmath>

#include <doctest.h>

#include "robustdx/optimize.hpp"
#include "support/expect.hpp"
#include "support/generators.hpp"

using namespace robustdx;

namespace {

std::vector<double> grid21() {
  std::vector<double> g;
  for (int i = 0; i <= 20; ++i) g.push_back(-1.0 + i / 10.0);
  return g;
}

// Brute force over all two-point supports and a 1e-4 weight grid.
double brute_force_line(const std::vector<double>& grid, std::size_t& lo, std::size_t& hi, double& w_lo) {
  double best = -1.0;
  for (std::size_t i = 0; i < grid.size(); ++i) {
    for (std::size_t j = i + 1; j < grid.size(); ++j) {
      for (int k = 1; k < 10000; ++k) {
        const double w = k / 10000.0;
        const double m01 = w * grid[i] + (1 - w) * grid[j];
        const double m11 = w * grid[i] * grid[i] + (1 - w) * grid[j] * grid[j];
        const double det = m11 - m01 * m01;
        if (det > best) {
          best = det;
          lo = i;
          hi = j;
          w_lo = w;
        }
      }
    }
  }
  return best;
}

}  // namespace

TEST_CASE("D-optimal straight line on 21 points") {
  const std::vector<double> grid = grid21();
  std::size_t lo = 0, hi = 0;
  double w_lo = 0.0;
  const double best_det = brute_force_line(grid, lo, hi, w_lo);
  CHECK(lo == 0);
  CHECK(hi == 20);

  const DesignSpace space = DesignSpace::polynomial(grid, 1);
  const OptimizationResult r = optimize_measure(space, Criterion::D());
  CHECK(r.converged);
  CHECK(r.xi.weights()(0) == doctest::Approx(w_lo).epsilon(1e-4));
  CHECK(r.xi.weights()(20) == doctest::Approx(1.0 - w_lo).epsilon(1e-4));
  CHECK(r.xi.weights().segment(1, 19).sum() <= 1e-4);
  CHECK(r.criterion_value == doctest::Approx(1.0 / best_det).epsilon(1e-6));
}

TEST_CASE("D-optimal quadratic puts a third at -1, 0, 1") {
  const DesignSpace space = DesignSpace::polynomial(grid21(), 2);
  const OptimizationResult r = optimize_measure(space, Criterion::D());
  for (Index i : {0, 10, 20}) CHECK(r.xi.weights()(i) == doctest::Approx(1.0 / 3.0).epsilon(1e-4));
  CHECK(1.0 - r.xi.weights()(0) - r.xi.weights()(10) - r.xi.weights()(20) <= 1e-4);
}

TEST_CASE("intercept-only model returns the uniform design") {
  const DesignSpace space = DesignSpace::polynomial({0.0, 0.3, 0.7, 1.0}, 0);
  for (const Criterion& c : {Criterion::D(), Criterion::A(), Criterion::E(), Criterion::I(space)}) {
    const OptimizationResult r = optimize_measure(space, c);
    for (Index i = 0; i < 4; ++i) CHECK(r.xi.weights()(i) == doctest::Approx(0.25));
    CHECK(r.criterion_value == doctest::Approx(1.0 * (c.kind() == Criterion::Kind::I ? 4.0 : 1.0)));
  }
}

TEST_CASE("known optima for other criteria") {
  // A-optimal line on {-1, 0, 1}: half at each end, value 1 + 1 = 2.
  const DesignSpace line = DesignSpace::polynomial({-1, 0, 1}, 1);
  const OptimizationResult a = optimize_measure(line, Criterion::A());
  CHECK(a.xi.weights()(0) == doctest::Approx(0.5).epsilon(1e-4));
  CHECK(a.xi.weights()(2) == doctest::Approx(0.5).epsilon(1e-4));
  CHECK(a.criterion_value == doctest::Approx(2.0).epsilon(1e-6));

  // A-optimal quadratic on {-1, 0, 1}: weights (1/4, 1/2, 1/4).
  const DesignSpace quad = DesignSpace::polynomial({-1, 0, 1}, 2);
  const OptimizationResult q = optimize_measure(quad, Criterion::A());
  CHECK(q.xi.weights()(0) == doctest::Approx(0.25).epsilon(1e-3));
  CHECK(q.xi.weights()(1) == doctest::Approx(0.5).epsilon(1e-3));

  // E-optimal line on [-1, 1]: ends again.
  const OptimizationResult e = optimize_measure(DesignSpace::polynomial(grid21(), 1), Criterion::E());
  CHECK(e.criterion_value == doctest::Approx(1.0).epsilon(1e-6));
}

TEST_CASE("equivalence_gap") {
  const DesignSpace line = DesignSpace::polynomial(grid21(), 1);
  Vector w = Vector::Zero(21);
  w(0) = w(20) = 0.5;
  CHECK(equivalence_gap(line, DesignMeasure(w)) <= 1e-8);
  CHECK(equivalence_gap(line, DesignMeasure::uniform(21)) > 0.5);

  const DesignSpace single = DesignSpace::polynomial({2.0}, 0);
  CHECK(equivalence_gap(single, DesignMeasure::uniform(1)) == 0.0);

  Vector one = Vector::Zero(21);
  one(3) = 1.0;
  CHECK_ERROR_CODE(equivalence_gap(line, DesignMeasure(one)), ErrorCode::SingularMoment);
}

TEST_CASE("property: multiplicative updates never decrease log det M") {
  Rng rng(60);
  for (int trial = 0; trial < 20; ++trial) {
    const Index p = testgen::uniform_int(rng, 1, 4);
    const DesignSpace space = testgen::random_space(rng, p, p + testgen::uniform_int(rng, 0, 12));
    double last = -std::numeric_limits<double>::infinity();
    bool monotone = true;
    double lowest_seen = std::numeric_limits<double>::infinity();
    OptimizeOptions opts;
    opts.observer = [&](int, const Vector& w, double value) {
      const double logdet = std::log(log_space_det(moment_matrix(space, DesignMeasure(w / w.sum()))));
      if (logdet < last - 1e-12 * std::max(1.0, std::abs(last))) monotone = false;
      last = logdet;
      lowest_seen = std::min(lowest_seen, value);
    };
    const OptimizationResult r = optimize_measure(space, Criterion::D(), opts);
    CHECK(monotone);
    CHECK(r.criterion_value <= lowest_seen + 1e-9);
    CHECK(equivalence_gap(space, r.xi) <= space.params() * 1e-7 + 1e-12);
  }
}

TEST_CASE("property: exchange never ends above a visited candidate") {
  Rng rng(61);
  for (int trial = 0; trial < 20; ++trial) {
    const Index p = testgen::uniform_int(rng, 1, 3);
    const DesignSpace space = testgen::random_space(rng, p, p + testgen::uniform_int(rng, 1, 8));
    for (const Criterion& c : {Criterion::A(), Criterion::E(), Criterion::I(space)}) {
      double lowest_seen = measure_loss(space, c, DesignMeasure::uniform(space.size()).weights());
      OptimizeOptions opts;
      opts.observer = [&](int, const Vector&, double value) { lowest_seen = std::min(lowest_seen, value); };
      const OptimizationResult r = optimize_measure(space, c, opts);
      CHECK(r.criterion_value <= lowest_seen + 1e-9);
    }
  }
}

TEST_CASE("rounding keeps the iid criterion within 5 percent for N >= 4p") {
  for (int degree : {1, 2, 3}) {
    const DesignSpace space = DesignSpace::polynomial(grid21(), degree);
    for (const Criterion& c : {Criterion::D(), Criterion::A(), Criterion::I(space)}) {
      const OptimizationResult r = optimize_measure(space, c);
      const int p = degree + 1;
      for (int n = 4 * p; n <= 4 * p + 5; ++n) {
        const ExactDesign e = measure_to_exact(r.xi, n);
        Vector w(space.size());
        for (Index i = 0; i < space.size(); ++i) w(i) = e.counts()[static_cast<std::size_t>(i)] / double(n);
        CHECK_MESSAGE(measure_loss(space, c, w) <= 1.05 * r.criterion_value, c.name() << " degree " << degree << " N=" << n);
      }
    }
  }
}

TEST_CASE("optimizer input checks") {
  const DesignSpace line = DesignSpace::polynomial({-1, 1}, 1);
  OptimizeOptions bad;
  bad.max_iter = 0;
  CHECK_ERROR_CODE(optimize_measure(line, Criterion::D(), bad), ErrorCode::InvalidArgument);
  OptimizeOptions short_run;
  short_run.max_iter = 1;
  short_run.tol = 1e-15;
  CHECK_ERROR_CODE(optimize_measure(DesignSpace::polynomial(grid21(), 2), Criterion::D(), short_run),
                   ErrorCode::NoConvergence);
}

TEST_CASE("single_swap_competitors") {
  const DesignSpace line = DesignSpace::polynomial({-1, 1}, 1);
  const std::vector<ExactDesign> comp = single_swap_competitors(line, ExactDesign({2, 2}));
  REQUIRE(comp.size() == 2);
  CHECK(comp[0] == ExactDesign({1, 3}));
  CHECK(comp[1] == ExactDesign({3, 1}));
  // (1, 1) -> (0, 2) and (2, 0) are singular; uniform equals the design itself.
  CHECK(single_swap_competitors(line, ExactDesign({1, 1})).empty());
}

TEST_CASE("pipeline: straight line, D, spectral ball, N = 4") {
  const DesignSpace line = DesignSpace::polynomial({-1, 1}, 1);
  const ClassBuilder builder = [](Index n) { return CovClass(NormBall{NormKind::Spectral, 2.0}, n); };
  SearchOptions search;
  search.budget = 3000;
  const PipelineResult r = pipeline_minimax(line, Criterion::D(), builder, 4, search);
  CHECK(r.exact == ExactDesign({2, 2}));
  CHECK(r.lemma.pass);
  CHECK(r.xi0_is_minimax);
  CHECK(r.minimax.argmin == 0);

  // Exhaustive enumeration of the nonsingular allocations of 4 runs.
  double best = std::numeric_limits<double>::infinity();
  std::vector<int> arg;
  for (int k = 1; k <= 3; ++k) {
    const Matrix x = model_matrix(line, ExactDesign({k, 4 - k}));
    const double v = analytic_max(builder(4), Criterion::D(), x);
    if (v < best) {
      best = v;
      arg = {k, 4 - k};
    }
  }
  CHECK(arg == std::vector<int>{2, 2});
  CHECK(r.minimax.worst_case_values[0] == doctest::Approx(best));
}

TEST_CASE("pipeline: A-criterion with eta2 = 1 reduces to the iid loss and the argmin is scale-free") {
  const DesignSpace quad = DesignSpace::polynomial({-1, -0.5, 0, 0.5, 1}, 2);
  SearchOptions search;
  search.budget = 2000;
  std::optional<ExactDesign> first;
  for (double eta2 : {1.0, 4.0}) {
    const ClassBuilder builder = [eta2](Index n) { return CovClass(NormBall{NormKind::RowSumInf, eta2}, n); };
    const PipelineResult r = pipeline_minimax(quad, Criterion::A(), builder, 8, search);
    CHECK(r.xi0_is_minimax);
    if (eta2 == 1.0) {
      for (std::size_t i = 0; i < r.minimax.worst_case_values.size(); ++i) {
        CHECK(r.minimax.worst_case_values[i] == doctest::Approx(r.minimax.iid_values[i]).epsilon(1e-14));
      }
    }
    const ExactDesign chosen = r.candidates[r.minimax.argmin];
    if (first) CHECK(chosen == *first);
    first = chosen;
  }
}
