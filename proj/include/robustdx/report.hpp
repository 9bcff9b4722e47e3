#ifndef ROBUSTDX_REPORT_HPP
#define ROBUSTDX_REPORT_HPP

#include <string>

#include <json.hpp>

#include "robustdx/optimize.hpp"
#include "robustdx/robustloss.hpp"
#include "robustdx/worstcase.hpp"

namespace robustdx {

inline constexpr const char* kVersion = "0.1.0";

/// One CLI invocation's output. Everything except wall_time_s is a pure
/// function of the scenario and seed.
struct ReportRecord {
  std::string artifact = "robustdx";
  std::string version = kVersion;
  std::string command;
  nlohmann::json scenario;
  nlohmann::json results;
  double wall_time_s = 0.0;

  friend bool operator==(const ReportRecord&, const ReportRecord&) = default;
};

[[nodiscard]] nlohmann::json to_json(const ReportRecord& r);
[[nodiscard]] ReportRecord report_from_json(const nlohmann::json& j);

[[nodiscard]] nlohmann::json to_json(const Matrix& m);
[[nodiscard]] nlohmann::json to_json(const Vector& v);
[[nodiscard]] Matrix matrix_from_json(const nlohmann::json& j);

[[nodiscard]] nlohmann::json to_json(const WorstCaseReport& r);
[[nodiscard]] WorstCaseReport worst_case_from_json(const nlohmann::json& j);
[[nodiscard]] nlohmann::json to_json(const MinimaxReport& r, const std::vector<ExactDesign>& designs);
[[nodiscard]] nlohmann::json to_json(const OptimizationResult& r, const DesignSpace& space);

}  // namespace robustdx

#endif  // ROBUSTDX_REPORT_HPP
