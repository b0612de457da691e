#pragma once

#include <stdexcept>
#include <string>

namespace mnrv {

enum class ErrorKind {
  invalid_argument,
  identification,
  constraint,
  numerical,
  io,
  convergence,
};

const char* to_string(ErrorKind k);

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what) : std::runtime_error(what), kind_(kind) {}
  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

[[noreturn]] void fail(ErrorKind kind, const std::string& what);

// Non-fatal diagnostics. The default handler writes to stderr; tools may redirect it.
using WarningHandler = void (*)(const std::string&);
void set_warning_handler(WarningHandler h);
void warn(const std::string& what);

inline void require(bool ok, const std::string& what) {
  if (!ok) fail(ErrorKind::invalid_argument, what);
}

}  // namespace mnrv
