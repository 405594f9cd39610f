#pragma once

#include <cmath>
#include <cstdio>
#include <stdexcept>
#include <string>

namespace sga
{

inline constexpr const char* kVersion = "0.1.0";

/// Bad input data or configuration (CLI exit code 1).
class ValidationError : public std::runtime_error
{
public:
    using std::runtime_error::runtime_error;
};

/// Malformed input file (CLI exit code 1).
class ParseError : public ValidationError
{
public:
    using ValidationError::ValidationError;
};

/// Numeric failure: non-finite values, non-convergence, broken
/// matrix contracts (CLI exit code 2).
class NumericError : public std::runtime_error
{
public:
    using std::runtime_error::runtime_error;
};

/// Format a double with 12 significant digits for tabular output.
/// NaN prints as "NA".
inline std::string format_value(double v)
{
    if (std::isnan(v))
    {
        return "NA";
    }
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.12g", v);
    return buf;
}

}  // namespace sga
