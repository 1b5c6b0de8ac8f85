#pragma once

#include <stdexcept>
#include <string>

namespace arnold {

// Base for all errors thrown by the library.
class Error : public std::runtime_error {
  public:
    explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

// Malformed inputs: bad topology specs, illegal state transitions,
// divisibility violations in job specs, broken placements.
class ValidationError : public Error {
  public:
    using Error::Error;
};

// The cluster cannot host the request (capacity or constraints).
class InfeasibleError : public Error {
  public:
    using Error::Error;
};

// File / parse problems; carries the offending path or line.
class IoError : public Error {
  public:
    using Error::Error;
};

// Enumeration refused because the search space exceeds its configured cap.
class SearchCapError : public Error {
  public:
    using Error::Error;
};

// Allocation state changed between solving and node assignment.
class StaleStateError : public Error {
  public:
    using Error::Error;
};

}  // namespace arnold
