#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace trunk {

enum class ErrorCategory {
  kDomain,
  kUnderdetermined,
  kDegenerate,
  kParse,
  kValidation,
  kIo,
  kRejected,
  kOptimization,
  kUndefinedMetric,
};

std::string_view CategoryName(ErrorCategory category);

// Every error raised by the library carries a category and, where one exists,
// a location ("line 3", "byte 20", a file path, or an argument name).
class Error : public std::runtime_error {
 public:
  Error(ErrorCategory category, std::string message, std::string location = {});

  ErrorCategory category() const { return category_; }
  const std::string& location() const { return location_; }
  const std::string& detail() const { return detail_; }

 private:
  ErrorCategory category_;
  std::string location_;
  std::string detail_;
};

[[noreturn]] void ThrowDomain(std::string message, std::string location = {});

}  // namespace trunk
