#ifndef ROBUSTDX_SCENARIO_HPP
#define ROBUSTDX_SCENARIO_HPP

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "robustdx/covmodel.hpp"
#include "robustdx/criteria.hpp"
#include "robustdx/design.hpp"
#include "robustdx/robustloss.hpp"
#include "robustdx/worstcase.hpp"

namespace robustdx {

/// Covariance class parameters without the dimension, which is only known
/// once the design (and with it N) is fixed.
struct ClassSpec {
  CovVariant variant;

  [[nodiscard]] CovClass build(Index runs) const { return CovClass(variant, runs); }
};

struct RobustSpec {
  double tau2 = 0.0;
  RobustLoss loss = RobustLoss::I;
  std::vector<double> eta2_grid;  ///< empty: the class's own eta2
  std::vector<double> tau2_grid;  ///< empty: {tau2}
};

struct Tolerances {
  std::optional<double> certify;
  double optimize = 1e-7;
  int max_iter = 100000;
};

/// Parsed and validated scenario file.
struct Scenario {
  nlohmann::json source;
  std::string name;
  std::string family;
  /// For nonlinear models this is the linearized space: regressor rows are the
  /// gradient at theta0.
  DesignSpace space;
  std::optional<Vector> theta0;
  std::optional<ExactDesign> counts;  ///< explicit design, or empty for "optimize"
  int runs = 0;
  Criterion criterion;
  ClassSpec cov_class;
  std::optional<RobustSpec> robust;
  SearchOptions search;
  Tolerances tolerances;
};

/// Throws Error(InvalidArgument) naming the offending field, e.g.
/// "cov_class.eta2: eta2 must be positive" or "unknown key 'foo' in search".
[[nodiscard]] Scenario parse_scenario(const nlohmann::json& j);
[[nodiscard]] Scenario load_scenario(const std::filesystem::path& path);

/// Jacobian over `grid` of a named one-dimensional nonlinear mean function:
/// "exp_decay" exp(-t x); "exp_two" a exp(-b x); "michaelis_menten" a x / (b + x).
[[nodiscard]] NonlinearModel named_nonlinear_model(const std::string& function, const std::vector<double>& grid,
                                                   const Vector& theta0);

/// Mean function values for the same named models.
[[nodiscard]] Vector named_nonlinear_mean(const std::string& function, const std::vector<double>& grid,
                                         const Vector& theta);

}  // namespace robustdx

#endif  // ROBUSTDX_SCENARIO_HPP
