#include "tgpm/errors.hpp"

namespace tgpm {

std::string_view to_string(ErrorKind kind) noexcept {
  switch (kind) {
    case ErrorKind::NotPositiveDefinite: return "NotPositiveDefinite";
    case ErrorKind::InsufficientData: return "InsufficientData";
    case ErrorKind::DimensionMismatch: return "DimensionMismatch";
    case ErrorKind::NonFiniteDensity: return "NonFiniteDensity";
    case ErrorKind::DegenerateDenominator: return "DegenerateDenominator";
    case ErrorKind::DegenerateVariance: return "DegenerateVariance";
    case ErrorKind::KindMismatch: return "KindMismatch";
    case ErrorKind::InvalidArgument: return "InvalidArgument";
    case ErrorKind::ParseError: return "ParseError";
    case ErrorKind::NonPositivePrice: return "NonPositivePrice";
    case ErrorKind::UnsortedDates: return "UnsortedDates";
    case ErrorKind::UnrecognizedLayout: return "UnrecognizedLayout";
    case ErrorKind::Bankruptcy: return "Bankruptcy";
    case ErrorKind::Io: return "Io";
  }
  return "Unknown";
}

Error::Error(ErrorKind kind, const std::string& what)
    : std::runtime_error(std::string(to_string(kind)) + ": " + what), kind_(kind) {}

void raise(ErrorKind kind, const std::string& what) { throw Error(kind, what); }

}  // namespace tgpm
