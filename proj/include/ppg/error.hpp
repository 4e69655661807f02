#pragma once

#include <stdexcept>
#include <string>

namespace ppg {

// Numeric values are part of the C API (see ppg.h) and must stay stable.
enum class ErrorCode : int {
  kInput = 1,
  kDegenerateWeights = 2,
  kUnsupportedModel = 3,
  kDomain = 4,
  kModelContract = 5,
  kNumerical = 6,
  kIo = 7,
  kInternal = 99,
};

const char* error_code_name(ErrorCode code) noexcept;

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(what), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

class InputError : public Error {
 public:
  explicit InputError(const std::string& what) : Error(ErrorCode::kInput, what) {}
};

// Every importance weight in a cloud or backward kernel is zero.
class DegenerateWeightsError : public Error {
 public:
  explicit DegenerateWeightsError(const std::string& what)
      : Error(ErrorCode::kDegenerateWeights, what) {}
};

class UnsupportedModelError : public Error {
 public:
  explicit UnsupportedModelError(const std::string& what)
      : Error(ErrorCode::kUnsupportedModel, what) {}
};

class DomainError : public Error {
 public:
  explicit DomainError(const std::string& what) : Error(ErrorCode::kDomain, what) {}
};

// A model callback broke its declared contract, e.g. a transition density
// exceeding the advertised upper bound.
class ModelContractError : public Error {
 public:
  explicit ModelContractError(const std::string& what)
      : Error(ErrorCode::kModelContract, what) {}
};

class NumericalError : public Error {
 public:
  explicit NumericalError(const std::string& what) : Error(ErrorCode::kNumerical, what) {}
};

class IoError : public Error {
 public:
  explicit IoError(const std::string& what) : Error(ErrorCode::kIo, what) {}
};

}  // namespace ppg
