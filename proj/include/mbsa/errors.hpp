#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace mbsa {

/// Base class of every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Invalid solver, scenario or model configuration.
class ConfigError : public Error {
 public:
  using Error::Error;
};

/// A model was evaluated outside the domain where it is defined.
/// `index()` names the offending measurement or sample when one is known.
class ModelDomainError : public Error {
 public:
  static constexpr std::size_t npos = static_cast<std::size_t>(-1);

  explicit ModelDomainError(const std::string& what, std::size_t index = npos)
      : Error(what), index_(index) {}

  std::size_t index() const noexcept { return index_; }

 private:
  std::size_t index_;
};

/// A source came closer to the beam than the configured gap floor.
class SingularityError : public ModelDomainError {
 public:
  using ModelDomainError::ModelDomainError;
};

/// Contour cannot be partitioned in the requested orientation.
class PartitionError : public Error {
 public:
  using Error::Error;
};

/// Sections handed to `assemble` overlap or leave a gap.
class AssemblyError : public Error {
 public:
  using Error::Error;
};

/// Nonlinear least squares did not produce a usable fit.
class CalibrationError : public Error {
 public:
  using Error::Error;
};

/// Malformed input file (CSV/JSON).
class ParseError : public Error {
 public:
  using Error::Error;
};

}  // namespace mbsa
