#ifndef ROBUSTDX_WORSTCASE_HPP
#define ROBUSTDX_WORSTCASE_HPP

#include <cstdint>
#include <functional>
#include <optional>
#include <vector>

#include "robustdx/covmodel.hpp"
#include "robustdx/criteria.hpp"
#include "robustdx/design.hpp"

namespace robustdx {

struct SearchOptions {
  long budget = 10000;  ///< loss evaluations
  int restarts = 4;     ///< independent ascent runs (norm balls only)
  std::uint64_t seed = 0;
  unsigned threads = 0;  ///< 0: ROBUSTDX_THREADS or hardware concurrency
};

struct SearchResult {
  SymMatrix argmax;
  double value;
  long evaluations;
};

struct WorstCaseReport {
  double analytic_value = 0.0;
  double searched_value = 0.0;
  SymMatrix searched_argmax = SymMatrix::identity(1);
  double gap = 0.0;  ///< analytic - searched
  long evaluations = 0;
  bool pass = false;
  /// False when eta2 * I is not a member, so the analytic value is an upper
  /// bound only.
  bool analytic_attained = true;
  double tol_certify = 0.0;
};

struct MinimaxReport {
  std::vector<double> worst_case_values;
  std::vector<double> iid_values;  ///< loss at C = I
  std::size_t argmin = 0;
  std::size_t iid_argmin = 0;
  bool agrees_with_iid_optimum = false;
};

/// Builds the covariance class for a design with the given number of runs.
using ClassBuilder = std::function<CovClass(Index runs)>;

/// L(eta2 * I) with eta2 the class's effective radius.
[[nodiscard]] double analytic_max(const CovClass& cls, const Criterion& c, const Matrix& x);

/// Numerical maximization of L over the class within `budget` evaluations.
///
/// Norm balls: boundary samples, then projected ascent on C = R^T R rescaled
/// onto the norm boundary after every step, started from the best sample and
/// from perturbations of eta2 * I. MA(1) and AR(1): sampled, gridded and
/// golden-refined over rho with the variance on the class boundary.
/// Heteroscedastic diagonal: samples plus coordinate ascent. Finite sets:
/// enumeration.
[[nodiscard]] SearchResult search_max(const CovClass& cls, const Criterion& c, const Matrix& x,
                                      const SearchOptions& options);

/// Compares search_max (seeded with eta2 * I when it is a member) to
/// analytic_max. Default tolerance is 1e-7 * max(1, analytic).
[[nodiscard]] WorstCaseReport verify_lemma(const CovClass& cls, const Criterion& c, const Matrix& x,
                                           const SearchOptions& options,
                                           std::optional<double> tol_certify = std::nullopt);

/// Worst case of each design via analytic_max; argmin compared against the
/// design that is best under C = I. Ties resolve to the lowest index.
[[nodiscard]] MinimaxReport minimax_check(const std::vector<ExactDesign>& designs, const DesignSpace& space,
                                          const ClassBuilder& class_builder, const Criterion& c);

/// Index of the smallest value; values within 1e-12 relative of the minimum
/// count as ties.
[[nodiscard]] std::size_t tolerant_argmin(const std::vector<double>& values);

/// Worker count for parallel restarts: `requested` if nonzero, else the
/// ROBUSTDX_THREADS environment variable, else hardware concurrency.
[[nodiscard]] unsigned worker_threads(unsigned requested);

}  // namespace robustdx

#endif  // ROBUSTDX_WORSTCASE_HPP
