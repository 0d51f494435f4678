#pragma once

#include <stdexcept>
#include <string>

namespace fermisig {

struct InvariantViolation : std::runtime_error {
  explicit InvariantViolation(const std::string& what) : std::runtime_error("invariant violation: " + what) {}
};

struct SyntaxError : std::runtime_error {
  std::size_t position;
  SyntaxError(std::size_t pos, const std::string& what)
      : std::runtime_error("syntax error at position " + std::to_string(pos) + ": " + what), position(pos) {}
};

struct UnknownFunction : std::runtime_error {
  explicit UnknownFunction(const std::string& name) : std::runtime_error("unknown function: " + name) {}
};

struct EvaluationError : std::runtime_error {
  explicit EvaluationError(const std::string& what) : std::runtime_error("evaluation error: " + what) {}
};

struct SchemaError : std::runtime_error {
  explicit SchemaError(const std::string& field) : std::runtime_error("schema error: " + field) {}
};

struct IndexOutOfRange : std::out_of_range {
  explicit IndexOutOfRange(const std::string& what) : std::out_of_range(what) {}
};

struct UnsupportedExact : std::runtime_error {
  explicit UnsupportedExact(const std::string& what) : std::runtime_error("no closed form: " + what) {}
};

struct MixedCausalType : std::runtime_error {
  explicit MixedCausalType(const std::string& what) : std::runtime_error(what) {}
};

struct BoundaryTooClose : std::runtime_error {
  explicit BoundaryTooClose(const std::string& what) : std::runtime_error(what) {}
};

struct CornerOutsideDomain : std::runtime_error {
  explicit CornerOutsideDomain(const std::string& what) : std::runtime_error(what) {}
};

struct QuadratureTooCoarse : std::runtime_error {
  explicit QuadratureTooCoarse(const std::string& what) : std::runtime_error(what) {}
};

struct EigensolverFailure : std::runtime_error {
  explicit EigensolverFailure(const std::string& what) : std::runtime_error(what) {}
};

struct OddUnpairedEigenvalue : std::runtime_error {
  explicit OddUnpairedEigenvalue(const std::string& what) : std::runtime_error(what) {}
};

struct NotChiral : std::runtime_error {
  explicit NotChiral(const std::string& what) : std::runtime_error(what) {}
};

struct ZeroAcceptance : std::runtime_error {
  explicit ZeroAcceptance(const std::string& what) : std::runtime_error(what) {}
};

struct RootNotFound : std::runtime_error {
  explicit RootNotFound(const std::string& what) : std::runtime_error(what) {}
};

struct CurveLeavesDomain : std::runtime_error {
  explicit CurveLeavesDomain(const std::string& what) : std::runtime_error(what) {}
};

struct EmptyInterval : std::runtime_error {
  explicit EmptyInterval(const std::string& what) : std::runtime_error(what) {}
};

struct WindowTooSmall : std::runtime_error {
  explicit WindowTooSmall(const std::string& what) : std::runtime_error(what) {}
};

struct IoError : std::runtime_error {
  explicit IoError(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace fermisig
