#pragma once

#include <stdexcept>
#include <string>

namespace lbr {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class InvalidArgument : public Error {
 public:
  using Error::Error;
};

// levy
class NonIntegrableJumps : public Error {
 public:
  using Error::Error;
};
class DegenerateModel : public Error {
 public:
  using Error::Error;
};

// clock
class HorizonExceeded : public Error {
 public:
  using Error::Error;
};

// ppp
class BudgetExceeded : public Error {
 public:
  using Error::Error;
};

// maxid
class VanishingInfimumProb : public Error {
 public:
  using Error::Error;
};
class EmptySystem : public Error {
 public:
  using Error::Error;
};
class TruncationBias : public Error {
 public:
  using Error::Error;
};

// mda
class GridMismatch : public Error {
 public:
  using Error::Error;
};

// stats
class NonMonotoneCdf : public Error {
 public:
  using Error::Error;
};
class DimensionMismatch : public Error {
 public:
  using Error::Error;
};
class AllZero : public Error {
 public:
  using Error::Error;
};

/// Raised while loading or validating an experiment config. `where` is a
/// JSON pointer to the offending field, or "line L, column C" for syntax
/// errors.
class ConfigError : public Error {
 public:
  ConfigError(std::string where, const std::string& what)
      : Error(where + ": " + what), where_(std::move(where)) {}
  const std::string& where() const noexcept { return where_; }

 private:
  std::string where_;
};

}  // namespace lbr
