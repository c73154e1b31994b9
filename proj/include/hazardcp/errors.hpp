#pragma once

#include <stdexcept>
#include <string>

namespace hazardcp {

// Invalid argument value; message names the offending field.
class DomainError : public std::invalid_argument {
public:
    explicit DomainError(const std::string& field, const std::string& detail = "")
        : std::invalid_argument(detail.empty() ? "domain error: " + field
                                               : "domain error: " + field + " (" + detail + ")"),
          field_(field) {}
    const std::string& field() const noexcept { return field_; }

private:
    std::string field_;
};

// A required grid node (e.g. the default time) is missing from a path grid.
class GridError : public std::invalid_argument {
public:
    explicit GridError(const std::string& what) : std::invalid_argument(what) {}
};

// Adaptive quadrature failed to reach the requested tolerance.
class QuadratureError : public std::runtime_error {
public:
    explicit QuadratureError(const std::string& what) : std::runtime_error(what) {}
};

// Bad run configuration; message carries the field path.
class ConfigError : public std::runtime_error {
public:
    explicit ConfigError(const std::string& what) : std::runtime_error(what) {}
};

class IoError : public std::runtime_error {
public:
    explicit IoError(const std::string& what) : std::runtime_error(what) {}
};

// Bad calibration input (empty series, NaN entries, ...).
class DataError : public std::runtime_error {
public:
    explicit DataError(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace hazardcp
