#pragma once

#include <stdexcept>
#include <string>

namespace mediatrix {

enum class ErrorCode {
  SpecError,            // bad model spec, bad world spec, bad query inputs
  ParseError,           // malformed JSON / CSV / textual world spec
  SchemaError,          // well-formed JSON that violates the model schema
  UsageError,           // bad CLI invocation
  PositivityViolation,  // empty stratum / condition with zero mass
  SupportTooLarge,      // enumeration or joint support exceeds the cell cap
  EmptyCell,            // estimator needs a cell with no observations
  SingularDesign,       // regression design matrix not invertible
  RefusedNotIdentified, // estimator refused without --force
  UnresolvedDraw,       // draw directive evaluated without a resolver
  EstimationError,      // other estimation-stage failures
  Internal,             // invariant broken inside the library
};

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, std::string message)
      : std::runtime_error(std::move(message)), code_(code) {}

  ErrorCode code() const { return code_; }

  // Process exit code for the CLI. 0 success, 2 spec/usage, 3 positivity,
  // 4 size cap, 5 estimation failures.
  int exit_code() const {
    switch (code_) {
      case ErrorCode::SpecError:
      case ErrorCode::ParseError:
      case ErrorCode::SchemaError:
      case ErrorCode::UsageError:
      case ErrorCode::UnresolvedDraw:
        return 2;
      case ErrorCode::PositivityViolation:
        return 3;
      case ErrorCode::SupportTooLarge:
        return 4;
      case ErrorCode::EmptyCell:
      case ErrorCode::SingularDesign:
      case ErrorCode::RefusedNotIdentified:
      case ErrorCode::EstimationError:
        return 5;
      case ErrorCode::Internal:
        return 1;
    }
    return 1;
  }

  static const char* code_name(ErrorCode code) {
    switch (code) {
      case ErrorCode::SpecError: return "SpecError";
      case ErrorCode::ParseError: return "ParseError";
      case ErrorCode::SchemaError: return "SchemaError";
      case ErrorCode::UsageError: return "UsageError";
      case ErrorCode::PositivityViolation: return "PositivityViolation";
      case ErrorCode::SupportTooLarge: return "SupportTooLarge";
      case ErrorCode::EmptyCell: return "EmptyCell";
      case ErrorCode::SingularDesign: return "SingularDesign";
      case ErrorCode::RefusedNotIdentified: return "RefusedNotIdentified";
      case ErrorCode::UnresolvedDraw: return "UnresolvedDraw";
      case ErrorCode::EstimationError: return "EstimationError";
      case ErrorCode::Internal: return "Internal";
    }
    return "Internal";
  }

 private:
  ErrorCode code_;
};

[[noreturn]] inline void fail(ErrorCode code, const std::string& message) {
  throw Error(code, std::string(Error::code_name(code)) + ": " + message);
}

}  // namespace mediatrix
