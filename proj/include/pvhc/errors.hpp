#pragma once

#include <stdexcept>
#include <string>

namespace pvhc {

class Error : public std::runtime_error {
  public:
    explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

// Malformed or inconsistent input files (feeder JSON, tariff JSON, profile CSV).
class ParseError : public Error {
  public:
    using Error::Error;
};

// Structurally valid input that violates a model invariant (cycles, dangling
// references, unreachable bands).
class ValidationError : public Error {
  public:
    using Error::Error;
};

// Load allocation could not satisfy the nodal peak band.
class AllocationError : public Error {
  public:
    using Error::Error;
};

// Power flow failed to converge inside a time-series run.
class ConvergenceError : public Error {
  public:
    using Error::Error;
};

}  // namespace pvhc
