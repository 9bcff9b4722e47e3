#include "robustdx/scenario.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <set>

namespace robustdx {

namespace {

using nlohmann::json;

[[noreturn]] void fail(const std::string& path, const std::string& message) {
  throw Error(ErrorCode::InvalidArgument, path + ": " + message);
}

void check_keys(const json& j, const std::string& path, std::initializer_list<const char*> allowed) {
  if (!j.is_object()) fail(path, "expected an object");
  const std::set<std::string> keys(allowed.begin(), allowed.end());
  for (const auto& [key, value] : j.items()) {
    (void)value;
    if (!keys.count(key)) fail(path, "unknown key '" + key + "'");
  }
}

const json& require(const json& j, const std::string& path, const char* key) {
  if (!j.contains(key)) fail(path, std::string("missing required key '") + key + "'");
  return j.at(key);
}

double number(const json& j, const std::string& path) {
  if (!j.is_number()) fail(path, "expected a number");
  const double v = j.get<double>();
  if (!std::isfinite(v)) fail(path, "expected a finite number");
  return v;
}

int integer(const json& j, const std::string& path) {
  if (!j.is_number_integer()) fail(path, "expected an integer");
  return j.get<int>();
}

double positive(const json& j, const std::string& path, const char* name) {
  const double v = number(j, path);
  if (!(v > 0.0)) fail(path, std::string(name) + " must be positive");
  return v;
}

std::vector<double> number_list(const json& j, const std::string& path) {
  if (!j.is_array()) fail(path, "expected an array of numbers");
  std::vector<double> out;
  for (std::size_t i = 0; i < j.size(); ++i) out.push_back(number(j[i], path + "[" + std::to_string(i) + "]"));
  return out;
}

Matrix number_matrix(const json& j, const std::string& path) {
  if (!j.is_array() || j.empty()) fail(path, "expected a non-empty array of rows");
  const std::size_t rows = j.size();
  std::size_t cols = 0;
  Matrix m;
  for (std::size_t i = 0; i < rows; ++i) {
    const auto row = number_list(j[i], path + "[" + std::to_string(i) + "]");
    if (i == 0) {
      cols = row.size();
      if (cols == 0) fail(path, "rows must be non-empty");
      m.resize(static_cast<Index>(rows), static_cast<Index>(cols));
    }
    if (row.size() != cols) fail(path, "rows have unequal lengths");
    for (std::size_t k = 0; k < cols; ++k) m(static_cast<Index>(i), static_cast<Index>(k)) = row[k];
  }
  return m;
}

std::vector<double> parse_grid(const json& j, const std::string& path) {
  if (j.is_array()) return number_list(j, path);
  check_keys(j, path, {"lo", "hi", "points"});
  const double lo = number(require(j, path, "lo"), path + ".lo");
  const double hi = number(require(j, path, "hi"), path + ".hi");
  const int points = integer(require(j, path, "points"), path + ".points");
  if (points < 1) fail(path + ".points", "must be >= 1");
  if (!(hi >= lo)) fail(path, "hi must be >= lo");
  std::vector<double> grid(static_cast<std::size_t>(points));
  for (int k = 0; k < points; ++k) {
    grid[static_cast<std::size_t>(k)] = points == 1 ? lo : lo + (hi - lo) * k / (points - 1);
  }
  return grid;
}

template <class F>
auto with_path(const std::string& path, F&& f) {
  try {
    return f();
  } catch (const Error& e) {
    if (e.detail().rfind(path, 0) == 0) throw;
    fail(path, e.detail());
  }
}

struct ModelParse {
  std::string family;
  DesignSpace space;
  std::optional<Vector> theta0;
};

ModelParse parse_model(const json& j) {
  const std::string path = "model";
  if (!j.is_object()) fail(path, "expected an object");
  const json& family_j = require(j, path, "family");
  if (!family_j.is_string()) fail(path + ".family", "expected a string");
  const std::string family = family_j.get<std::string>();

  if (family == "polynomial") {
    check_keys(j, path, {"family", "degree", "grid"});
    const int degree = integer(require(j, path, "degree"), path + ".degree");
    const auto grid = parse_grid(require(j, path, "grid"), path + ".grid");
    return with_path(path, [&] { return ModelParse{family, DesignSpace::polynomial(grid, degree), std::nullopt}; });
  }
  if (family == "custom") {
    check_keys(j, path, {"family", "regressors", "points"});
    Matrix f = number_matrix(require(j, path, "regressors"), path + ".regressors");
    Matrix points(f.rows(), 1);
    if (j.contains("points")) {
      const json& pj = j.at("points");
      if (pj.is_array() && !pj.empty() && pj[0].is_array()) {
        points = number_matrix(pj, path + ".points");
      } else {
        const auto list = number_list(pj, path + ".points");
        points.resize(static_cast<Index>(list.size()), 1);
        for (std::size_t i = 0; i < list.size(); ++i) points(static_cast<Index>(i), 0) = list[i];
      }
    } else {
      for (Index i = 0; i < f.rows(); ++i) points(i, 0) = static_cast<double>(i);
    }
    return with_path(path, [&] { return ModelParse{family, DesignSpace(points, f), std::nullopt}; });
  }
  if (family == "nonlinear") {
    check_keys(j, path, {"family", "function", "theta0", "grid"});
    const json& fn = require(j, path, "function");
    if (!fn.is_string()) fail(path + ".function", "expected a string");
    const auto theta = number_list(require(j, path, "theta0"), path + ".theta0");
    const auto grid = parse_grid(require(j, path, "grid"), path + ".grid");
    const Vector theta0 = Eigen::Map<const Vector>(theta.data(), static_cast<Index>(theta.size()));
    return with_path(path, [&] {
      const NonlinearModel model = named_nonlinear_model(fn.get<std::string>(), grid, theta0);
      Matrix points(static_cast<Index>(grid.size()), 1);
      for (std::size_t i = 0; i < grid.size(); ++i) points(static_cast<Index>(i), 0) = grid[i];
      const DesignSpace base(points, Matrix::Identity(static_cast<Index>(grid.size()), 1));
      return ModelParse{family, linearized_space(model, base), theta0};
    });
  }
  fail(path + ".family", "unknown family '" + family + "' (expected polynomial, custom or nonlinear)");
}

Criterion parse_criterion(const json& j, const DesignSpace& space) {
  const std::string path = "criterion";
  if (j.is_string()) {
    const std::string s = j.get<std::string>();
    if (s == "A") return Criterion::A();
    if (s == "D") return Criterion::D();
    if (s == "E") return Criterion::E();
    if (s == "I") return Criterion::I(space);
    fail(path, "unknown criterion '" + s + "' (expected A, D, E, I or {\"L\": weight})");
  }
  check_keys(j, path, {"L"});
  const Matrix w = number_matrix(require(j, path, "L"), path + ".L");
  return with_path(path + ".L", [&] {
    const SymMatrix weight(w);
    require_same_dim(weight.dim(), space.params(), "L weight vs parameters");
    return Criterion::L(weight);
  });
}

NormKind parse_norm(const json& j, const std::string& path) {
  if (!j.is_string()) fail(path, "expected a string");
  const std::string s = j.get<std::string>();
  if (s == "spectral") return NormKind::Spectral;
  if (s == "row_sum_inf") return NormKind::RowSumInf;
  if (s == "col_sum_one") return NormKind::ColSumOne;
  fail(path, "unknown norm '" + s + "' (expected spectral, row_sum_inf or col_sum_one)");
}

ClassSpec parse_class(const json& j) {
  const std::string path = "cov_class";
  if (!j.is_object()) fail(path, "expected an object");
  const json& variant_j = require(j, path, "variant");
  if (!variant_j.is_string()) fail(path + ".variant", "expected a string");
  const std::string variant = variant_j.get<std::string>();
  if (variant == "norm_ball") {
    check_keys(j, path, {"variant", "norm", "eta2"});
    return {NormBall{parse_norm(require(j, path, "norm"), path + ".norm"),
                     positive(require(j, path, "eta2"), path + ".eta2", "eta2")}};
  }
  if (variant == "ma1") {
    check_keys(j, path, {"variant", "sigma2", "rho_max"});
    return {MA1{positive(require(j, path, "sigma2"), path + ".sigma2", "sigma2"),
                number(require(j, path, "rho_max"), path + ".rho_max")}};
  }
  if (variant == "ar1") {
    check_keys(j, path, {"variant", "sigma2", "rho_bound", "grid_points"});
    AR1 a{positive(require(j, path, "sigma2"), path + ".sigma2", "sigma2"), 0.99, 2001};
    if (j.contains("rho_bound")) a.rho_bound = number(j.at("rho_bound"), path + ".rho_bound");
    if (j.contains("grid_points")) a.grid_points = integer(j.at("grid_points"), path + ".grid_points");
    return {a};
  }
  if (variant == "hetero_diag") {
    check_keys(j, path, {"variant", "var_max"});
    return {HeteroDiag{positive(require(j, path, "var_max"), path + ".var_max", "var_max")}};
  }
  if (variant == "finite_set") {
    check_keys(j, path, {"variant", "eta2", "members"});
    FiniteSet f;
    f.eta2 = positive(require(j, path, "eta2"), path + ".eta2", "eta2");
    const json& members = require(j, path, "members");
    if (!members.is_array() || members.empty()) fail(path + ".members", "expected a non-empty array of matrices");
    for (std::size_t k = 0; k < members.size(); ++k) {
      const std::string mp = path + ".members[" + std::to_string(k) + "]";
      const Matrix m = number_matrix(members[k], mp);
      f.members.push_back(with_path(mp, [&] { return SymMatrix(m); }));
    }
    return {f};
  }
  fail(path + ".variant", "unknown variant '" + variant + "'");
}

RobustSpec parse_robust(const json& j) {
  const std::string path = "robust";
  check_keys(j, path, {"tau2", "loss", "eta2_grid", "tau2_grid"});
  RobustSpec r;
  r.tau2 = number(require(j, path, "tau2"), path + ".tau2");
  if (r.tau2 < 0.0) fail(path + ".tau2", "tau2 must be >= 0");
  const json& loss = require(j, path, "loss");
  if (!loss.is_string()) fail(path + ".loss", "expected a string");
  if (loss == "I-robust") {
    r.loss = RobustLoss::I;
  } else if (loss == "D-robust") {
    r.loss = RobustLoss::D;
  } else {
    fail(path + ".loss", "unknown loss (expected I-robust or D-robust)");
  }
  if (j.contains("eta2_grid")) r.eta2_grid = number_list(j.at("eta2_grid"), path + ".eta2_grid");
  if (j.contains("tau2_grid")) r.tau2_grid = number_list(j.at("tau2_grid"), path + ".tau2_grid");
  for (double v : r.eta2_grid) {
    if (!(v > 0.0)) fail(path + ".eta2_grid", "eta2 must be positive");
  }
  for (double v : r.tau2_grid) {
    if (v < 0.0) fail(path + ".tau2_grid", "tau2 must be >= 0");
  }
  return r;
}

SearchOptions parse_search(const json& j) {
  const std::string path = "search";
  check_keys(j, path, {"budget", "restarts", "seed"});
  SearchOptions s;
  if (j.contains("budget")) {
    if (!j.at("budget").is_number_integer() || j.at("budget").get<long>() < 0) fail(path + ".budget", "expected an integer >= 0");
    s.budget = j.at("budget").get<long>();
  }
  if (j.contains("restarts")) {
    s.restarts = integer(j.at("restarts"), path + ".restarts");
    if (s.restarts < 0) fail(path + ".restarts", "must be >= 0");
  }
  if (j.contains("seed")) {
    if (!j.at("seed").is_number_unsigned()) fail(path + ".seed", "expected a non-negative integer");
    s.seed = j.at("seed").get<std::uint64_t>();
  }
  return s;
}

Tolerances parse_tolerances(const json& j) {
  const std::string path = "tolerances";
  check_keys(j, path, {"certify", "optimize", "max_iter"});
  Tolerances t;
  if (j.contains("certify")) {
    t.certify = number(j.at("certify"), path + ".certify");
    if (*t.certify < 0.0) fail(path + ".certify", "must be >= 0");
  }
  if (j.contains("optimize")) {
    t.optimize = number(j.at("optimize"), path + ".optimize");
    if (!(t.optimize > 0.0)) fail(path + ".optimize", "must be positive");
  }
  if (j.contains("max_iter")) {
    t.max_iter = integer(j.at("max_iter"), path + ".max_iter");
    if (t.max_iter < 1) fail(path + ".max_iter", "must be >= 1");
  }
  return t;
}

}  // namespace

NonlinearModel named_nonlinear_model(const std::string& function, const std::vector<double>& grid,
                                     const Vector& theta0) {
  const auto q = static_cast<Index>(grid.size());
  std::function<Matrix(const Vector&)> jac;
  Index p = 0;
  if (function == "exp_decay") {
    p = 1;
    jac = [grid, q](const Vector& t) {
      Matrix m(q, 1);
      for (Index i = 0; i < q; ++i) {
        const double x = grid[static_cast<std::size_t>(i)];
        m(i, 0) = -x * std::exp(-t(0) * x);
      }
      return m;
    };
  } else if (function == "exp_two") {
    p = 2;
    jac = [grid, q](const Vector& t) {
      Matrix m(q, 2);
      for (Index i = 0; i < q; ++i) {
        const double x = grid[static_cast<std::size_t>(i)];
        const double e = std::exp(-t(1) * x);
        m(i, 0) = e;
        m(i, 1) = -t(0) * x * e;
      }
      return m;
    };
  } else if (function == "michaelis_menten") {
    p = 2;
    jac = [grid, q](const Vector& t) {
      Matrix m(q, 2);
      for (Index i = 0; i < q; ++i) {
        const double x = grid[static_cast<std::size_t>(i)];
        const double denom = t(1) + x;
        m(i, 0) = x / denom;
        m(i, 1) = -t(0) * x / (denom * denom);
      }
      return m;
    };
  } else {
    throw Error(ErrorCode::InvalidArgument,
                "unknown nonlinear function '" + function + "' (expected exp_decay, exp_two or michaelis_menten)");
  }
  if (theta0.size() != p) {
    throw Error(ErrorCode::InvalidArgument, "theta0 must have " + std::to_string(p) + " entries for " + function);
  }
  return {std::move(jac), theta0};
}

Vector named_nonlinear_mean(const std::string& function, const std::vector<double>& grid, const Vector& theta) {
  Vector out(static_cast<Index>(grid.size()));
  for (std::size_t i = 0; i < grid.size(); ++i) {
    const double x = grid[i];
    double v = 0.0;
    if (function == "exp_decay") {
      v = std::exp(-theta(0) * x);
    } else if (function == "exp_two") {
      v = theta(0) * std::exp(-theta(1) * x);
    } else if (function == "michaelis_menten") {
      v = theta(0) * x / (theta(1) + x);
    } else {
      throw Error(ErrorCode::InvalidArgument, "unknown nonlinear function '" + function + "'");
    }
    out(static_cast<Index>(i)) = v;
  }
  return out;
}

Scenario parse_scenario(const json& j) {
  check_keys(j, "scenario",
             {"name", "description", "model", "design", "criterion", "cov_class", "robust", "search", "tolerances"});
  std::string name = "scenario";
  if (j.contains("name")) {
    if (!j.at("name").is_string()) fail("name", "expected a string");
    name = j.at("name").get<std::string>();
  }
  if (j.contains("description") && !j.at("description").is_string()) fail("description", "expected a string");

  ModelParse model = parse_model(require(j, "scenario", "model"));

  const json& dj = require(j, "scenario", "design");
  std::optional<ExactDesign> counts;
  int runs = 0;
  if (dj.is_object() && dj.contains("counts")) {
    check_keys(dj, "design", {"counts"});
    const json& cj = dj.at("counts");
    if (!cj.is_array()) fail("design.counts", "expected an array of integers");
    std::vector<int> c;
    for (std::size_t i = 0; i < cj.size(); ++i) c.push_back(integer(cj[i], "design.counts[" + std::to_string(i) + "]"));
    if (static_cast<Index>(c.size()) != model.space.size()) {
      fail("design.counts", "expected " + std::to_string(model.space.size()) + " counts, one per design point");
    }
    counts = with_path("design.counts", [&] { return ExactDesign(c); });
    runs = counts->total();
    with_path("design.counts", [&] { return model_matrix(model.space, *counts); });
  } else {
    check_keys(dj, "design", {"method", "N"});
    const json& method = require(dj, "design", "method");
    if (method != "optimize") fail("design.method", "expected \"optimize\" (or give \"counts\")");
    runs = integer(require(dj, "design", "N"), "design.N");
    if (runs < model.space.params()) fail("design.N", "N must be at least the number of parameters");
  }

  Criterion criterion = parse_criterion(require(j, "scenario", "criterion"), model.space);
  ClassSpec cls = parse_class(require(j, "scenario", "cov_class"));
  with_path("cov_class", [&] { return cls.build(runs); });

  std::optional<RobustSpec> robust;
  if (j.contains("robust")) robust = parse_robust(j.at("robust"));
  const SearchOptions search = j.contains("search") ? parse_search(j.at("search")) : SearchOptions{};
  const Tolerances tol = j.contains("tolerances") ? parse_tolerances(j.at("tolerances")) : Tolerances{};

  return Scenario{j,      std::move(name), std::move(model.family), std::move(model.space), std::move(model.theta0),
                  counts, runs,            std::move(criterion),    std::move(cls),         std::move(robust),
                  search, tol};
}

Scenario load_scenario(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::InvalidArgument, "cannot open scenario file '" + path.string() + "'");
  json j;
  try {
    in >> j;
  } catch (const json::parse_error& e) {
    throw Error(ErrorCode::InvalidArgument, "scenario file '" + path.string() + "' is not valid JSON: " + e.what());
  }
  return parse_scenario(j);
}

}  // namespace robustdx
