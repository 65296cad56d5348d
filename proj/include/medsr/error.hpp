#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace medsr {

/// Failure categories. The CLI maps these onto its exit-code contract.
enum class ErrorKind {
  usage,
  format,
  io,
  shape,
  precondition,
  config,
  degradation,
  model,
};

std::string_view to_string(ErrorKind kind) noexcept;

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what) : std::runtime_error(what), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

  /// Same category, message prefixed with `context: `.
  Error with_context(std::string_view context) const {
    return Error(kind_, std::string(context) + ": " + what());
  }

 private:
  ErrorKind kind_;
};

[[noreturn]] inline void fail(ErrorKind kind, const std::string& what) { throw Error(kind, what); }

}  // namespace medsr
