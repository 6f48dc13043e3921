#pragma once

#include <string>

namespace cpforge {

// Throws Error{IoError} naming the path on failure.
std::string read_file(const std::string& path);
void write_file(const std::string& path, const std::string& contents);

// printf("%.17g"): shortest form that always round-trips a double.
std::string format_double(double v);

// 64-bit FNV-1a, rendered as 16 lowercase hex digits.
std::string fnv1a_hex(const std::string& data);

}  // namespace cpforge
