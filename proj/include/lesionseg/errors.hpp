#pragma once

#include <stdexcept>
#include <string>

namespace lesionseg {

// Error taxonomy mirrors the CLI exit-code contract:
//   ConfigError -> 1 (usage / configuration)
//   DataError   -> 2 (files, formats, dimensions)
//   NumericError-> 3 (NaN, divergence, failed verification)

class ConfigError : public std::runtime_error {
public:
  explicit ConfigError(const std::string& msg) : std::runtime_error(msg) {}
};

class DataError : public std::runtime_error {
public:
  explicit DataError(const std::string& msg) : std::runtime_error(msg) {}
};

class NumericError : public std::runtime_error {
public:
  explicit NumericError(const std::string& msg) : std::runtime_error(msg) {}
};

} // namespace lesionseg
