#include "trunk/errors.h"

namespace trunk {
namespace {

std::string Compose(ErrorCategory category, const std::string& message,
                    const std::string& location) {
  std::string out(CategoryName(category));
  out += " error";
  if (!location.empty()) {
    out += " at ";
    out += location;
  }
  out += ": ";
  out += message;
  return out;
}

}  // namespace

std::string_view CategoryName(ErrorCategory category) {
  switch (category) {
    case ErrorCategory::kDomain: return "domain";
    case ErrorCategory::kUnderdetermined: return "underdetermined";
    case ErrorCategory::kDegenerate: return "degenerate-input";
    case ErrorCategory::kParse: return "parse";
    case ErrorCategory::kValidation: return "validation";
    case ErrorCategory::kIo: return "io";
    case ErrorCategory::kRejected: return "measurement-rejected";
    case ErrorCategory::kOptimization: return "optimization-failure";
    case ErrorCategory::kUndefinedMetric: return "undefined-metric";
  }
  return "unknown";
}

Error::Error(ErrorCategory category, std::string message, std::string location)
    : std::runtime_error(Compose(category, message, location)),
      category_(category),
      location_(std::move(location)),
      detail_(std::move(message)) {}

void ThrowDomain(std::string message, std::string location) {
  throw Error(ErrorCategory::kDomain, std::move(message), std::move(location));
}

}  // namespace trunk
