#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>

namespace mlindex {

enum class Errc {
  NonPrime,
  Reducible,
  DivisionByZero,
  DimMismatch,
  KindMismatch,
  ArityMismatch,
  DependentBasis,
  SmallCharacteristic,
  NotHomogeneous,
  CharDividesOrder,
  EmptyEdgeSet,
  BudgetExceeded,
  InfeasibleRange,
  ExponentOverflow,
  ParseError,
  MixedDegrees,
  AllZero,
  Unsupported,
  BadInput,
};

inline const char* errc_name(Errc c) {
  switch (c) {
    case Errc::NonPrime: return "NonPrime";
    case Errc::Reducible: return "Reducible";
    case Errc::DivisionByZero: return "DivisionByZero";
    case Errc::DimMismatch: return "DimMismatch";
    case Errc::KindMismatch: return "KindMismatch";
    case Errc::ArityMismatch: return "ArityMismatch";
    case Errc::DependentBasis: return "DependentBasis";
    case Errc::SmallCharacteristic: return "SmallCharacteristic";
    case Errc::NotHomogeneous: return "NotHomogeneous";
    case Errc::CharDividesOrder: return "CharDividesOrder";
    case Errc::EmptyEdgeSet: return "EmptyEdgeSet";
    case Errc::BudgetExceeded: return "BudgetExceeded";
    case Errc::InfeasibleRange: return "InfeasibleRange";
    case Errc::ExponentOverflow: return "ExponentOverflow";
    case Errc::ParseError: return "ParseError";
    case Errc::MixedDegrees: return "MixedDegrees";
    case Errc::AllZero: return "AllZero";
    case Errc::Unsupported: return "Unsupported";
    case Errc::BadInput: return "BadInput";
  }
  return "Unknown";
}

class Error : public std::runtime_error {
 public:
  Error(Errc code, std::string msg)
      : std::runtime_error(std::string(errc_name(code)) + ": " + msg), code_(code) {}

  Errc code() const { return code_; }

 private:
  Errc code_;
};

// BudgetExceeded carries the level (dimension s) whose enumeration overflowed.
class BudgetError : public Error {
 public:
  BudgetError(std::string msg, int64_t level)
      : Error(Errc::BudgetExceeded, std::move(msg)), level_(level) {}

  int64_t level() const { return level_; }

 private:
  int64_t level_;
};

[[noreturn]] inline void fail(Errc code, const std::string& msg) { throw Error(code, msg); }

}  // namespace mlindex
