#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace tgpm {

enum class ErrorKind {
  NotPositiveDefinite,
  InsufficientData,
  DimensionMismatch,
  NonFiniteDensity,
  DegenerateDenominator,
  DegenerateVariance,
  KindMismatch,
  InvalidArgument,
  ParseError,
  NonPositivePrice,
  UnsortedDates,
  UnrecognizedLayout,
  Bankruptcy,
  Io,
};

std::string_view to_string(ErrorKind kind) noexcept;

/// Every failure raised by the library carries a machine-readable kind so
/// callers (the backtest fallback policy, the CLI exit-code mapping) can
/// branch without string matching.
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what);

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

[[noreturn]] void raise(ErrorKind kind, const std::string& what);

}  // namespace tgpm
