#pragma once

#include <stdexcept>
#include <string>

namespace qrect {

class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class DimensionMismatch : public Error {
public:
    using Error::Error;
};

class InvalidParameter : public Error {
public:
    InvalidParameter(std::string field, const std::string& what)
        : Error("invalid parameter '" + field + "': " + what), field_(std::move(field)) {}
    const std::string& field() const noexcept { return field_; }

private:
    std::string field_;
};

class ScaleBelowResolution : public Error {
public:
    explicit ScaleBelowResolution(const std::string& what, int level = -1)
        : Error(what), level_(level) {}
    // Offending tree level, or -1 when not tied to a level.
    int level() const noexcept { return level_; }

private:
    int level_;
};

class DegenerateDiameter : public Error {
public:
    using Error::Error;
};

class ParseError : public Error {
public:
    ParseError(std::size_t line, const std::string& what)
        : Error("line " + std::to_string(line) + ": " + what), line_(line) {}
    std::size_t line() const noexcept { return line_; }

private:
    std::size_t line_;
};

class SchemaError : public Error {
public:
    using Error::Error;
};

class UnknownCube : public Error {
public:
    using Error::Error;
};

class DepthExceeded : public Error {
public:
    using Error::Error;
};

class TooFewPoints : public Error {
public:
    using Error::Error;
};

class DegenerateCube : public Error {
public:
    using Error::Error;
};

class DegenerateSimplex : public Error {
public:
    using Error::Error;
};

class NonIsotropicPlane : public Error {
public:
    using Error::Error;
};

class PointsNotIndependent : public Error {
public:
    using Error::Error;
};

class MetricUnsupported : public Error {
public:
    using Error::Error;
};

class IsometryViolation : public Error {
public:
    using Error::Error;
};

}  // namespace qrect
