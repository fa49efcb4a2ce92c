#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace eigenflow {

// Base for all library errors. `kind()` is a stable machine-readable tag
// used by the CLI when emitting structured error JSON.
class Error : public std::runtime_error {
 public:
  Error(std::string kind, const std::string& what)
      : std::runtime_error(what), kind_(std::move(kind)) {}
  const std::string& kind() const noexcept { return kind_; }

 private:
  std::string kind_;
};

struct SyntaxError : Error {
  std::size_t offset;
  SyntaxError(const std::string& msg, std::size_t byte_offset)
      : Error("SyntaxError", msg + " (at byte " + std::to_string(byte_offset) + ")"),
        offset(byte_offset) {}
};

struct UnknownIdentifier : Error {
  explicit UnknownIdentifier(const std::string& msg) : Error("UnknownIdentifier", msg) {}
};

struct DegenerateDiffusion : Error {
  explicit DegenerateDiffusion(const std::string& msg) : Error("DegenerateDiffusion", msg) {}
};

struct UnboundedBelowPotential : Error {
  explicit UnboundedBelowPotential(const std::string& msg)
      : Error("UnboundedBelowPotential", msg) {}
};

struct TooCoarse : Error {
  explicit TooCoarse(const std::string& msg) : Error("TooCoarse", msg) {}
};

struct NonMonotoneStencil : Error {
  explicit NonMonotoneStencil(const std::string& msg) : Error("NonMonotoneStencil", msg) {}
};

struct NonPositiveTestVector : Error {
  explicit NonPositiveTestVector(const std::string& msg)
      : Error("NonPositiveTestVector", msg) {}
};

struct NonPositiveTestFunction : Error {
  explicit NonPositiveTestFunction(const std::string& msg)
      : Error("NonPositiveTestFunction", msg) {}
};

struct NoConvergence : Error {
  explicit NoConvergence(const std::string& msg) : Error("NoConvergence", msg) {}
};

struct SingularShift : Error {
  explicit SingularShift(const std::string& msg) : Error("SingularShift", msg) {}
};

struct NotSupercritical : Error {
  explicit NotSupercritical(const std::string& msg) : Error("NotSupercritical", msg) {}
};

struct LinearSolveFailure : Error {
  explicit LinearSolveFailure(const std::string& msg) : Error("LinearSolveFailure", msg) {}
};

struct ExcessTruncation : Error {
  explicit ExcessTruncation(const std::string& msg) : Error("ExcessTruncation", msg) {}
};

struct InvalidArgument : Error {
  explicit InvalidArgument(const std::string& msg) : Error("InvalidArgument", msg) {}
};

}  // namespace eigenflow
