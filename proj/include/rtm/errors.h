#ifndef RTM_ERRORS_H_
#define RTM_ERRORS_H_

#include <stdexcept>
#include <string>

namespace rtm {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Bad parameters, malformed instances, violated preconditions.
class InvalidArgument : public Error {
 public:
  using Error::Error;
};

// Malformed or truncated input documents.
class ParseError : public Error {
 public:
  using Error::Error;
};

class IoError : public Error {
 public:
  using Error::Error;
};

// An exhaustive method was asked to enumerate more candidates than allowed.
class BudgetExceeded : public Error {
 public:
  using Error::Error;
};

}  // namespace rtm

#endif  // RTM_ERRORS_H_
