#ifndef CARNOT_ERRORS_HPP
#define CARNOT_ERRORS_HPP

#include <stdexcept>
#include <string>

namespace carnot {

/* Base class for everything this library throws on purpose. */
class Error : public std::runtime_error {
public:
  explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

/* Malformed source text (expressions, bracket words, files, CLI values). */
class InputError : public Error {
public:
  explicit InputError(const std::string& msg) : Error(msg) {}
};

/* Expression text that does not match the grammar. Carries the byte offset. */
class ParseError : public InputError {
public:
  ParseError(const std::string& msg, std::size_t position)
      : InputError(msg + " at position " + std::to_string(position)),
        position_(position) {}
  std::size_t position() const { return position_; }

private:
  std::size_t position_;
};

/* Evaluation outside a function's domain (log of a nonpositive value, ...). */
class DomainError : public Error {
public:
  explicit DomainError(const std::string& msg) : Error(msg) {}
};

/* Numerical procedure failed: trajectory left the box, iteration diverged. */
class NumericError : public Error {
public:
  explicit NumericError(const std::string& msg) : Error(msg) {}
};

class IntegrationError : public NumericError {
public:
  explicit IntegrationError(const std::string& msg) : NumericError(msg) {}
};

class SteerError : public NumericError {
public:
  explicit SteerError(const std::string& msg) : NumericError(msg) {}
};

}  // namespace carnot

#endif
