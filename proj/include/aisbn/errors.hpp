#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace aisbn {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Malformed or inconsistent network / evidence input.
class ModelError : public Error {
 public:
  using Error::Error;
};

class ParseError : public ModelError {
 public:
  ParseError(std::size_t line, const std::string& what)
      : ModelError("line " + std::to_string(line) + ": " + what), line_(line) {}

  std::size_t line() const noexcept { return line_; }

 private:
  std::size_t line_;
};

// The computation is well posed but cannot be carried out: state-space cap
// exceeded, zero-probability evidence, no effective samples.
class InfeasibleError : public Error {
 public:
  using Error::Error;
};

}  // namespace aisbn
