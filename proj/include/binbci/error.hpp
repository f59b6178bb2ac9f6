#pragma once

#include <stdexcept>
#include <string>

namespace binbci {

/// Base class of every error raised by the library.
class Error : public std::runtime_error
{
public:
    using std::runtime_error::runtime_error;
};

/// Invalid argument, violated invariant or inconsistent configuration.
class ValidationError : public Error
{
public:
    using Error::Error;
};

/// File could not be opened, read or written, or its content is malformed.
class IoError : public Error
{
public:
    using Error::Error;
};

/// Numerical routine failed to converge.
class ConvergenceError : public Error
{
public:
    using Error::Error;
};

namespace detail {

inline void require(bool condition, const std::string& message)
{
    if (!condition) {
        throw ValidationError(message);
    }
}

} // namespace detail
} // namespace binbci
