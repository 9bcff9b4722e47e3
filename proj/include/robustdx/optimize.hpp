#ifndef ROBUSTDX_OPTIMIZE_HPP
#define ROBUSTDX_OPTIMIZE_HPP

#include <functional>
#include <optional>
#include <vector>

#include "robustdx/criteria.hpp"
#include "robustdx/design.hpp"
#include "robustdx/worstcase.hpp"

namespace robustdx {

struct OptimizeOptions {
  int max_iter = 100000;
  double tol = 1e-7;
  /// Called after every iteration with the current weights and criterion value.
  std::function<void(int iteration, const Vector& weights, double value)> observer;
};

struct OptimizationResult {
  DesignMeasure xi;
  std::optional<ExactDesign> exact;
  double criterion_value;  ///< Phi(M(xi)^{-1}), i.e. unit-variance iid errors
  int iterations;
  bool converged;
};

/// M(xi) = sum_i xi_i f(x_i) f(x_i)^T.
[[nodiscard]] SymMatrix moment_matrix(const DesignSpace& space, const DesignMeasure& xi);

/// Phi(M(xi)^{-1}); +inf when M(xi) is singular.
[[nodiscard]] double measure_loss(const DesignSpace& space, const Criterion& c, const Vector& weights);

/// The design minimizing Phi under iid unit-variance errors. D-criterion:
/// multiplicative updates xi_i <- xi_i d(x_i, xi) / p until max d <= p(1+tol).
/// Other criteria: vertex exchange with exact line search, stopping once the
/// relative improvement of a step falls below tol.
[[nodiscard]] OptimizationResult optimize_measure(const DesignSpace& space, const Criterion& c,
                                                  const OptimizeOptions& options = {});

/// max_x f^T M(xi)^{-1} f - p, clamped at zero; zero certifies D-optimality.
[[nodiscard]] double equivalence_gap(const DesignSpace& space, const DesignMeasure& xi);

/// Every design reachable from `d` by moving one run to another point, then
/// the rounded uniform design when N >= q. Duplicates and designs with a
/// singular moment matrix are dropped.
[[nodiscard]] std::vector<ExactDesign> single_swap_competitors(const DesignSpace& space, const ExactDesign& d);

struct PipelineResult {
  OptimizationResult xi0;
  ExactDesign exact;
  WorstCaseReport lemma;
  std::vector<ExactDesign> candidates;  ///< candidates[0] is the rounded xi0
  MinimaxReport minimax;
  bool xi0_is_minimax;
};

/// Optimize xi0, round it to N runs, certify the worst case for its model
/// matrix and rank it against its single-swap competitors by worst-case loss.
[[nodiscard]] PipelineResult pipeline_minimax(const DesignSpace& space, const Criterion& c,
                                              const ClassBuilder& class_builder, int n,
                                              const SearchOptions& search, const OptimizeOptions& optimize = {},
                                              std::optional<double> tol_certify = std::nullopt);

}  // namespace robustdx

#endif  // ROBUSTDX_OPTIMIZE_HPP
