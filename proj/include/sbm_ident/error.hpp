#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace sbm_ident {

/// Machine-readable failure categories. The CLI maps these onto exit codes
/// and writes `to_string(code)` into its JSON reports.
enum class ErrorCode {
  InvalidParams,
  SizeGuard,
  MissingMoment,
  DegenerateAlphaBeta,
  InconsistentMoments,
  SingleGroup,
  AssumptionViolated,
  Unidentifiable,
  DomainError,
  Io,
};

constexpr std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::InvalidParams: return "INVALID_PARAMS";
    case ErrorCode::SizeGuard: return "SIZE_GUARD";
    case ErrorCode::MissingMoment: return "MISSING_MOMENT";
    case ErrorCode::DegenerateAlphaBeta: return "DEGENERATE_ALPHA_BETA";
    case ErrorCode::InconsistentMoments: return "INCONSISTENT_MOMENTS";
    case ErrorCode::SingleGroup: return "SINGLE_GROUP";
    case ErrorCode::AssumptionViolated: return "ASSUMPTION_VIOLATED";
    case ErrorCode::Unidentifiable: return "UNIDENTIFIABLE";
    case ErrorCode::DomainError: return "DOMAIN_ERROR";
    case ErrorCode::Io: return "IO_ERROR";
  }
  return "UNKNOWN";
}

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what) : std::runtime_error(what), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace sbm_ident
