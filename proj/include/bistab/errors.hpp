#pragma once

#include <stdexcept>
#include <string>

namespace bistab {

/// Invalid configuration or parameter set. CLI exit code 2.
class ConfigError : public std::runtime_error {
public:
    explicit ConfigError(const std::string& what) : std::runtime_error(what) {}
};

/// Numerical failure (solver breakdown, step-size underflow). CLI exit code 3.
class NumericalError : public std::runtime_error {
public:
    explicit NumericalError(const std::string& what) : std::runtime_error(what) {}
};

/// I/O failure, always carries the offending path. CLI exit code 2.
class FileError : public std::runtime_error {
public:
    explicit FileError(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace bistab
