#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace cpforge {

enum class ErrorCode {
  WrongDimensions,
  UnknownSymbol,
  InvalidArgument,
  KTooLarge,
  SingleCluster,
  SingleClass,
  ParseError,
  MissingField,
  BudgetTooSmall,
  BudgetExhausted,
  PoolEmpty,
  UnknownId,
  AlreadyLabeled,
  YieldTooLow,
  InsufficientCPs,
  AssemblyFailed,
  BinEmpty,
  TraceTooShort,
  UnknownConfigKey,
  IoError,
};

std::string_view error_name(ErrorCode code);

// Every domain failure in the library is reported as an Error carrying a
// stable code; the CLI prints error_name(code) and the server maps codes to
// HTTP statuses.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message);

  ErrorCode code() const noexcept { return code_; }
  std::string_view name() const noexcept { return error_name(code_); }

 private:
  ErrorCode code_;
};

}  // namespace cpforge
