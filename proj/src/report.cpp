#include "robustdx/report.hpp"

namespace robustdx {

using nlohmann::json;

json to_json(const ReportRecord& r) {
  return json{{"artifact", r.artifact}, {"version", r.version},   {"command", r.command},
              {"scenario", r.scenario}, {"results", r.results}, {"wall_time_s", r.wall_time_s}};
}

ReportRecord report_from_json(const json& j) {
  ReportRecord r;
  r.artifact = j.at("artifact").get<std::string>();
  r.version = j.at("version").get<std::string>();
  r.command = j.at("command").get<std::string>();
  r.scenario = j.at("scenario");
  r.results = j.at("results");
  r.wall_time_s = j.at("wall_time_s").get<double>();
  return r;
}

json to_json(const Matrix& m) {
  json rows = json::array();
  for (Index i = 0; i < m.rows(); ++i) {
    json row = json::array();
    for (Index k = 0; k < m.cols(); ++k) row.push_back(m(i, k));
    rows.push_back(std::move(row));
  }
  return rows;
}

json to_json(const Vector& v) {
  json out = json::array();
  for (Index i = 0; i < v.size(); ++i) out.push_back(v(i));
  return out;
}

Matrix matrix_from_json(const json& j) {
  const auto rows = static_cast<Index>(j.size());
  const auto cols = rows > 0 ? static_cast<Index>(j[0].size()) : 0;
  Matrix m(rows, cols);
  for (Index i = 0; i < rows; ++i) {
    for (Index k = 0; k < cols; ++k) m(i, k) = j[static_cast<std::size_t>(i)][static_cast<std::size_t>(k)].get<double>();
  }
  return m;
}

json to_json(const WorstCaseReport& r) {
  json j{{"analytic_value", r.analytic_value},
         {"searched_value", r.searched_value},
         {"searched_argmax", to_json(r.searched_argmax.matrix())},
         {"gap", r.gap},
         {"evaluations", r.evaluations},
         {"pass", r.pass},
         {"analytic_attained", r.analytic_attained},
         {"tol_certify", r.tol_certify}};
  if (!r.analytic_attained) j["note"] = "analytic value is an upper bound only";
  return j;
}

WorstCaseReport worst_case_from_json(const json& j) {
  WorstCaseReport r;
  r.analytic_value = j.at("analytic_value").get<double>();
  r.searched_value = j.at("searched_value").get<double>();
  r.searched_argmax = SymMatrix(matrix_from_json(j.at("searched_argmax")));
  r.gap = j.at("gap").get<double>();
  r.evaluations = j.at("evaluations").get<long>();
  r.pass = j.at("pass").get<bool>();
  r.analytic_attained = j.at("analytic_attained").get<bool>();
  r.tol_certify = j.at("tol_certify").get<double>();
  return r;
}

json to_json(const MinimaxReport& r, const std::vector<ExactDesign>& designs) {
  json ds = json::array();
  for (const auto& d : designs) ds.push_back(d.counts());
  return json{{"designs", ds},
              {"worst_case_values", r.worst_case_values},
              {"iid_values", r.iid_values},
              {"argmin", r.argmin},
              {"iid_argmin", r.iid_argmin},
              {"agrees_with_iid_optimum", r.agrees_with_iid_optimum}};
}

json to_json(const OptimizationResult& r, const DesignSpace& space) {
  json support = json::array();
  const Vector& w = r.xi.weights();
  for (Index i = 0; i < w.size(); ++i) {
    if (w(i) > 0.0) {
      support.push_back(json{{"index", i}, {"point", to_json(Vector(space.points().row(i).transpose()))},
                             {"weight", w(i)}});
    }
  }
  json j{{"weights", to_json(w)},
         {"support", support},
         {"criterion_value", r.criterion_value},
         {"iterations", r.iterations},
         {"converged", r.converged}};
  if (r.exact) j["exact"] = r.exact->counts();
  return j;
}

}  // namespace robustdx
