#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace bidd {

/// Invalid argument to an operation (negative variance, k >= n, ...).
class ParameterError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Argument outside the mathematical domain of a function.
class DomainError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

/// Invalid model or experiment configuration.
class ConfigError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Non-finite values reached a numeric routine.
class NumericError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Training diverged. Carries the epoch and learning rate at which it happened.
class TrainingError : public std::runtime_error {
 public:
  TrainingError(const std::string& what, std::size_t epoch, double lr)
      : std::runtime_error(what), epoch_(epoch), lr_(lr) {}
  std::size_t epoch() const noexcept { return epoch_; }
  double lr() const noexcept { return lr_; }

 private:
  std::size_t epoch_;
  double lr_;
};

/// A data file could not be read. line() is 1-based, 0 when not line-specific.
class IngestionError : public std::runtime_error {
 public:
  IngestionError(const std::string& what, std::size_t line = 0)
      : std::runtime_error(line == 0 ? what : what + " (line " + std::to_string(line) + ")"),
        line_(line) {}
  std::size_t line() const noexcept { return line_; }

 private:
  std::size_t line_;
};

/// Malformed binary or structured file (bad magic, checksum, schema).
class FormatError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace bidd
