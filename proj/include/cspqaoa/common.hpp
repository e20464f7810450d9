#pragma once

#include <cstdarg>
#include <cstdio>
#include <stdexcept>
#include <string>

namespace cspqaoa {

inline constexpr const char* kVersion = "0.1.0";
inline constexpr const char* kToolName = "cspqaoa";

/// Error for invalid inputs and violated contracts (CLI maps these to exit code 1).
struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Error for detected loss of numeric accuracy that the precision fallback
/// could not repair.
struct NumericError : Error {
    using Error::Error;
};

[[gnu::format(printf, 1, 2)]] inline std::string strf(const char* fmt, ...) {
    va_list args;
    va_start(args, fmt);
    va_list args2;
    va_copy(args2, args);
    int len = std::vsnprintf(nullptr, 0, fmt, args);
    va_end(args);
    std::string out(len > 0 ? static_cast<size_t>(len) : 0, '\0');
    if (len > 0) std::vsnprintf(out.data(), out.size() + 1, fmt, args2);
    va_end(args2);
    return out;
}

}  // namespace cspqaoa
