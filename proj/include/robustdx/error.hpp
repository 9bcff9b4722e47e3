#ifndef ROBUSTDX_ERROR_HPP
#define ROBUSTDX_ERROR_HPP

#include <stdexcept>
#include <string>
#include <string_view>

namespace robustdx {

enum class ErrorCode {
  NonFinite,
  NoConvergence,
  DimMismatch,
  NotSymmetric,
  NotPSD,
  SingularMoment,
  SingularCov,
  InvalidRho,
  InfeasibleN,
  InvalidArgument,
  Inconsistent,
};

[[nodiscard]] std::string_view to_string(ErrorCode code);

/// Every failure raised by the library carries one of the codes above.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message);

  [[nodiscard]] ErrorCode code() const noexcept { return code_; }
  /// The message without the code prefix.
  [[nodiscard]] const std::string& detail() const noexcept { return detail_; }

 private:
  ErrorCode code_;
  std::string detail_;
};

}  // namespace robustdx

#endif  // ROBUSTDX_ERROR_HPP
