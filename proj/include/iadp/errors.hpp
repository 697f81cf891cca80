#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>

namespace iadp {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A path contains a symbol outside the alphabet or is too long.
class InvalidPathError : public Error {
 public:
  using Error::Error;
};

/// A precondition of an operation was violated by the caller.
class ContractError : public Error {
 public:
  using Error::Error;
};

/// Bad configuration values (ranges, grid parameters, instance fields).
class ConfigError : public Error {
 public:
  using Error::Error;
};

/// Rejection sampling ran out of attempts before collecting enough
/// feasible solutions.
class SamplingError : public Error {
 public:
  SamplingError(std::uint64_t attempts, std::uint64_t collected)
      : Error("sampling failure: collected " + std::to_string(collected) +
              " feasible solutions in " + std::to_string(attempts) + " attempts"),
        attempts_(attempts),
        collected_(collected) {}

  std::uint64_t attempts() const noexcept { return attempts_; }
  std::uint64_t collected() const noexcept { return collected_; }

 private:
  std::uint64_t attempts_;
  std::uint64_t collected_;
};

/// Every terminal node of the trellis was pruned.
class NoFeasiblePathError : public Error {
 public:
  using Error::Error;
};

/// Exhaustive search refused because M^N exceeds the configured cap.
class SearchSpaceTooLargeError : public Error {
 public:
  explicit SearchSpaceTooLargeError(double size)
      : Error("search space of " + std::to_string(size) + " paths exceeds the cap"),
        size_(size) {}

  double size() const noexcept { return size_; }

 private:
  double size_;
};

class IoError : public Error {
 public:
  using Error::Error;
};

}  // namespace iadp
