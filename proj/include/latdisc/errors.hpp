#pragma once

#include <stdexcept>
#include <string>

namespace latdisc {

enum class ErrorKind {
  NotAUnit,
  SingularGram,
  InsufficientPrecision,
  InsufficientLevel,
  WrongPrime,
  WrongKind,
  Degenerate,
  NotIsotropic,
  NoSolution,
  TooLarge,
  BudgetExceeded,
  PreconditionViolation,
  InternalError,
  Usage,
};

inline const char* kind_name(ErrorKind k) {
  switch (k) {
    case ErrorKind::NotAUnit: return "NotAUnit";
    case ErrorKind::SingularGram: return "SingularGram";
    case ErrorKind::InsufficientPrecision: return "InsufficientPrecision";
    case ErrorKind::InsufficientLevel: return "InsufficientLevel";
    case ErrorKind::WrongPrime: return "WrongPrime";
    case ErrorKind::WrongKind: return "WrongKind";
    case ErrorKind::Degenerate: return "Degenerate";
    case ErrorKind::NotIsotropic: return "NotIsotropic";
    case ErrorKind::NoSolution: return "NoSolution";
    case ErrorKind::TooLarge: return "TooLarge";
    case ErrorKind::BudgetExceeded: return "BudgetExceeded";
    case ErrorKind::PreconditionViolation: return "PreconditionViolation";
    case ErrorKind::InternalError: return "InternalError";
    case ErrorKind::Usage: return "Usage";
  }
  return "Unknown";
}

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& detail)
      : std::runtime_error(std::string(kind_name(kind)) + ": " + detail), kind_(kind), detail_(detail) {}

  ErrorKind kind() const { return kind_; }
  const std::string& detail() const { return detail_; }

 private:
  ErrorKind kind_;
  std::string detail_;
};

[[noreturn]] inline void fail(ErrorKind kind, const std::string& detail) { throw Error(kind, detail); }

inline void require(bool cond, ErrorKind kind, const std::string& detail) {
  if (!cond) fail(kind, detail);
}

}  // namespace latdisc
