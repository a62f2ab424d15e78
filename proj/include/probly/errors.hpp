#ifndef PROBLY_ERRORS_HPP
#define PROBLY_ERRORS_HPP

#include <stdexcept>
#include <string>

namespace probly {

struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// User-facing input problems.
struct ParseError : Error {
  ParseError(const std::string& msg, int line, int col)
      : Error("parse error at " + std::to_string(line) + ":" + std::to_string(col) + ": " + msg),
        line(line), col(col) {}
  int line, col;
};

// Evaluation of an expression failed (division by zero, type mismatch, ...).
struct EvalError : Error { using Error::Error; };
struct UndefinedSymbol : EvalError { using EvalError::EvalError; };
struct UnknownVariable : EvalError { using EvalError::EvalError; };

// Semantics-level failures.
struct ContinuousDistributionPresent : Error { using Error::Error; };
struct SizeLimitExceeded : Error { using Error::Error; };
struct ImproperDistribution : Error { using Error::Error; };
struct IndependenceViolation : Error { using Error::Error; };
struct InvalidVariance : Error { using Error::Error; };
struct BadGrid : Error { using Error::Error; };

// Rule engine failures.
struct RuleError : Error { using Error::Error; };
struct PreconditionFailed : RuleError { using RuleError::RuleError; };
struct EventShapeMismatch : RuleError { using RuleError::RuleError; };
struct EnvelopeNotCertified : RuleError { using RuleError::RuleError; };
struct ObligationFalse : RuleError { using RuleError::RuleError; };
struct UnknownRule : RuleError { using RuleError::RuleError; };
struct BadPath : RuleError { using RuleError::RuleError; };

}  // namespace probly

#endif
