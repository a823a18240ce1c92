#pragma once

#include <stdexcept>
#include <string>

namespace phi {

/// Failure categories, mapped one-to-one onto CLI exit codes.
enum class ErrorKind {
  kConfig = 2,
  kIngest = 3,
  kNumerical = 4,
};

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, std::string stage, const std::string& what)
      : std::runtime_error(what), kind_(kind), stage_(std::move(stage)) {}

  ErrorKind kind() const noexcept { return kind_; }
  const std::string& stage() const noexcept { return stage_; }
  int exit_code() const noexcept { return static_cast<int>(kind_); }

 private:
  ErrorKind kind_;
  std::string stage_;
};

class ConfigError : public Error {
 public:
  ConfigError(std::string stage, const std::string& what)
      : Error(ErrorKind::kConfig, std::move(stage), what) {}
};

class IngestError : public Error {
 public:
  IngestError(std::string stage, const std::string& what)
      : Error(ErrorKind::kIngest, std::move(stage), what) {}
};

class NumericalError : public Error {
 public:
  NumericalError(std::string stage, const std::string& what)
      : Error(ErrorKind::kNumerical, std::move(stage), what) {}
};

}  // namespace phi
