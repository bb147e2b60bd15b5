#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace fracslice {

enum class ErrorCode {
    EmptyOrSingleton,
    OutOfRange,
    LetterOutOfRange,
    InvalidArgument,
    ConditionBPrimeFails,
    NotSeparated,
    AspectUnreachable,
    Parse,
};

inline const char* to_string(ErrorCode code)
{
    switch (code) {
    case ErrorCode::EmptyOrSingleton: return "EmptyOrSingleton";
    case ErrorCode::OutOfRange: return "OutOfRange";
    case ErrorCode::LetterOutOfRange: return "LetterOutOfRange";
    case ErrorCode::InvalidArgument: return "InvalidArgument";
    case ErrorCode::ConditionBPrimeFails: return "ConditionBPrimeFails";
    case ErrorCode::NotSeparated: return "NotSeparated";
    case ErrorCode::AspectUnreachable: return "AspectUnreachable";
    case ErrorCode::Parse: return "Parse";
    }
    return "Unknown";
}

// Bad input: maps to CLI exit code 1.
class ValidationError : public std::invalid_argument {
public:
    ValidationError(ErrorCode code, const std::string& what)
        : std::invalid_argument(std::string(to_string(code)) + ": " + what), code_(code)
    {
    }

    ErrorCode code() const noexcept { return code_; }

private:
    ErrorCode code_;
};

// A cylinder enumeration would exceed its cap: maps to CLI exit code 2.
class BudgetExceeded : public std::runtime_error {
public:
    BudgetExceeded(std::size_t cap, const std::string& where)
        : std::runtime_error("BudgetExceeded: more than " + std::to_string(cap) + " cylinders in " + where),
          cap_(cap)
    {
    }

    std::size_t cap() const noexcept { return cap_; }

private:
    std::size_t cap_;
};

inline constexpr std::size_t kDefaultCylinderCap = 10'000'000;

} // namespace fracslice
