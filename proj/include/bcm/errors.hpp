#pragma once

#include <stdexcept>
#include <string>

namespace bcm {

/// Base of every error raised by the library.
class Error : public std::runtime_error
{
public:
    Error(std::string code, const std::string& what)
        : std::runtime_error(what), code_(std::move(code))
    {
    }

    /// Short machine-readable identifier ("dimension", "parameter", ...).
    const std::string& code() const noexcept { return code_; }

private:
    std::string code_;
};

/// Array lengths or time steps of two operands disagree.
struct DimensionError : Error
{
    explicit DimensionError(const std::string& what) : Error("dimension", what) {}
};

/// A parameter is outside its admissible range.
struct ParameterError : Error
{
    explicit ParameterError(const std::string& what) : Error("parameter", what) {}
};

/// The explicit scheme would be unstable (CFL).
struct StabilityError : Error
{
    explicit StabilityError(const std::string& what) : Error("stability", what) {}
};

/// Malformed input file; carries the offending line when known.
struct ParseError : Error
{
    ParseError(const std::string& what, long line = -1)
        : Error("parse", line >= 0 ? what + " (line " + std::to_string(line) + ")" : what),
          line_(line)
    {
    }
    long line() const noexcept { return line_; }

private:
    long line_;
};

/// A measurement was requested for a control the data source does not hold.
struct MissingControlError : Error
{
    explicit MissingControlError(const std::string& what) : Error("missing-control", what) {}
};

struct IoError : Error
{
    explicit IoError(const std::string& what) : Error("io", what) {}
};

/// Broken internal invariant (e.g. singular assembly).
struct InternalError : Error
{
    explicit InternalError(const std::string& what) : Error("internal", what) {}
};

} // namespace bcm
