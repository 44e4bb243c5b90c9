#pragma once

#include <functional>
#include <stdexcept>
#include <string>
#include <string_view>

namespace polarity {

// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// An error annotated with the pipeline stage that raised it.
class StageError : public Error {
 public:
  StageError(std::string stage, const std::string& message)
      : Error("[" + stage + "] " + message), stage_(std::move(stage)) {}

  const std::string& stage() const { return stage_; }

 private:
  std::string stage_;
};

using WarningHandler = std::function<void(std::string_view)>;

// Non-fatal diagnostics go through a process-wide handler (stderr by default).
void set_warning_handler(WarningHandler handler);
void warn(std::string_view message);

}  // namespace polarity
