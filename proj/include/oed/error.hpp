#pragma once

#include <stdexcept>
#include <string>

namespace oed {

enum class ErrorKind {
  Structural,   // dimension or layout mismatch
  NotFound,     // unknown problem id / variant name
  Unsupported,  // operation not defined for this model kind
  Singular,     // information matrix cannot be inverted
  Config,       // invalid engine / plan configuration
  Io,           // file could not be read or written
  Parse         // malformed input document
};

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(what), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

[[noreturn]] inline void fail(ErrorKind kind, const std::string& what) {
  throw Error(kind, what);
}

}  // namespace oed
