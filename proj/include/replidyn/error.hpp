#pragma once

#include <stdexcept>
#include <string>

namespace replidyn {

enum class ErrorKind {
  dimension,      // mismatched vector lengths / wrong m
  parameter,      // invalid parameter value
  domain,         // input outside the documented domain
  numeric,        // non-finite intermediate or similar numeric failure
  invariant,      // dynamics invariant violated (negative component, drift)
  precondition,   // operation precondition not met
  unsupported,    // operation not defined for this dynamics kind
  insufficient,   // not enough data to complete an analysis
  config,         // malformed experiment configuration
  io,             // file read/write failure
};

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what) : std::runtime_error(what), kind_(kind) {}
  ErrorKind kind() const { return kind_; }

 private:
  ErrorKind kind_;
};

[[noreturn]] inline void fail(ErrorKind kind, const std::string& what) { throw Error(kind, what); }

}  // namespace replidyn
