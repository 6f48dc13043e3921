#include "cpforge/error.hpp"

namespace cpforge {

std::string_view error_name(ErrorCode code) {
  switch (code) {
    case ErrorCode::WrongDimensions: return "WrongDimensions";
    case ErrorCode::UnknownSymbol: return "UnknownSymbol";
    case ErrorCode::InvalidArgument: return "InvalidArgument";
    case ErrorCode::KTooLarge: return "KTooLarge";
    case ErrorCode::SingleCluster: return "SingleCluster";
    case ErrorCode::SingleClass: return "SingleClass";
    case ErrorCode::ParseError: return "ParseError";
    case ErrorCode::MissingField: return "MissingField";
    case ErrorCode::BudgetTooSmall: return "BudgetTooSmall";
    case ErrorCode::BudgetExhausted: return "BudgetExhausted";
    case ErrorCode::PoolEmpty: return "PoolEmpty";
    case ErrorCode::UnknownId: return "UnknownId";
    case ErrorCode::AlreadyLabeled: return "AlreadyLabeled";
    case ErrorCode::YieldTooLow: return "YieldTooLow";
    case ErrorCode::InsufficientCPs: return "InsufficientCPs";
    case ErrorCode::AssemblyFailed: return "AssemblyFailed";
    case ErrorCode::BinEmpty: return "BinEmpty";
    case ErrorCode::TraceTooShort: return "TraceTooShort";
    case ErrorCode::UnknownConfigKey: return "UnknownConfigKey";
    case ErrorCode::IoError: return "IoError";
  }
  return "Unknown";
}

Error::Error(ErrorCode code, const std::string& message)
    : std::runtime_error(std::string(error_name(code)) + ": " + message), code_(code) {}

}  // namespace cpforge
