#pragma once

#include <stdexcept>
#include <string>

namespace crackpath {

enum class ErrorCategory {
  invalid_argument,
  io,
  parse,
  geometry,
  estimation,
  simulation,
  internal,
};

class Error : public std::runtime_error {
public:
  Error(ErrorCategory category, const std::string& what)
      : std::runtime_error(what), category_(category) {}

  ErrorCategory category() const noexcept { return category_; }

private:
  ErrorCategory category_;
};

}  // namespace crackpath
