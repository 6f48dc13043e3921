#pragma once

#include <iosfwd>

namespace cpforge {

// Exit codes: 0 success, 1 domain error ("error: <ErrorName>: ..." on err),
// 2 usage error.
inline constexpr int kExitOk = 0;
inline constexpr int kExitDomain = 1;
inline constexpr int kExitUsage = 2;

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace cpforge
