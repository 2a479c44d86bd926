#pragma once

#include <cstddef>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

namespace condiv {

// Every contract violation in the library surfaces as one of these, with a
// category that the CLI maps onto exit codes (usage -> 1, anything else -> 2).
enum class ErrorKind {
  Shape,     // incompatible tensor shapes
  Domain,    // value outside a function's domain (e.g. log of nonpositive)
  Value,     // non-finite result, invalid argument
  Io,        // file format / filesystem problems
  Usage,     // bad CLI/config input
  State,     // missing gradients, inconsistent model state
};

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, std::string message)
      : std::runtime_error(std::move(message)), kind_(kind) {}

  ErrorKind kind() const { return kind_; }

 private:
  ErrorKind kind_;
};

inline std::string shape_to_string(const std::vector<std::size_t>& shape) {
  std::ostringstream os;
  os << "(";
  for (std::size_t i = 0; i < shape.size(); ++i) {
    if (i) os << ",";
    os << shape[i];
  }
  os << ")";
  return os.str();
}

[[noreturn]] inline void throw_shape_error(const char* op,
                                           const std::vector<std::size_t>& a,
                                           const std::vector<std::size_t>& b) {
  throw Error(ErrorKind::Shape, std::string(op) + ": incompatible shapes " +
                                    shape_to_string(a) + " and " +
                                    shape_to_string(b));
}

[[noreturn]] inline void throw_shape_error(const char* op, std::string detail) {
  throw Error(ErrorKind::Shape, std::string(op) + ": " + std::move(detail));
}

}  // namespace condiv
