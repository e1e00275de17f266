#pragma once

#include <stdexcept>
#include <string>

namespace g2lab {

enum class ErrorCode {
  contract_violation,
  not_g2_form,
  degenerate_plane,
  collapsed_orbit,
  outside_regular_regime,
  near_collapse,
  inconsistent_connection,
  singular_matrix,
  too_few_samples,
};

inline const char* to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::contract_violation: return "contract_violation";
    case ErrorCode::not_g2_form: return "not_g2_form";
    case ErrorCode::degenerate_plane: return "degenerate_plane";
    case ErrorCode::collapsed_orbit: return "collapsed_orbit";
    case ErrorCode::outside_regular_regime: return "outside_regular_regime";
    case ErrorCode::near_collapse: return "near_collapse";
    case ErrorCode::inconsistent_connection: return "inconsistent_connection";
    case ErrorCode::singular_matrix: return "singular_matrix";
    case ErrorCode::too_few_samples: return "too_few_samples";
  }
  return "unknown";
}

/// Every failure raised by the library carries a machine-readable code.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(what), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

inline void require(bool condition, const char* what) {
  if (!condition) throw Error(ErrorCode::contract_violation, what);
}

}  // namespace g2lab
