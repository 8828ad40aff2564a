#pragma once

#include <stdexcept>
#include <string>

namespace stirlab
{
    /// Base error for every failure raised by the library. The message is the
    /// short diagnostic string callers match against ("degenerate normal",
    /// "local time exhausted", ...).
    class Error : public std::runtime_error
    {
    public:
        explicit Error(const std::string &what) : std::runtime_error(what) {}
    };

    /// Raised when an estimator does not have enough data to report anything.
    class Underpowered : public Error
    {
    public:
        explicit Underpowered(const std::string &what) : Error(what) {}
    };
} // namespace stirlab
